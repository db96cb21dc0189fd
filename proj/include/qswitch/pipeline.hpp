#pragma once

#include <optional>

#include "qswitch/abstraction.hpp"
#include "qswitch/config.hpp"
#include "qswitch/lattice.hpp"
#include "qswitch/synthesis.hpp"
#include "qswitch/system_model.hpp"

namespace qswitch {

/* Everything derived from a config before synthesis. The working box of the
 * abstraction is the safe box, so the model domain equals spec_cells. */
struct Problem {
  ProblemConfig config;
  SwitchedSystem system;
  SamplingParams params;
  Lattice lattice;

  Box safe;
  std::optional<Box> target;
  CellRange spec_cells;    // Q(Y_S)
  CellRange safe_cells;    // lattice points of Cont_eps(Y_S)
  CellRange target_cells;  // lattice points of Cont_eps(Y_T), reach only
  CellRange target_inner;  // cells wholly inside Y_T, reach only

  int threads() const { return config.threads; }
};

/* Throws an empty-spec error if a contraction is empty and a precision error
 * if the precision condition fails. */
Problem prepare_problem(const ProblemConfig& cfg);

SymbolicModel build_problem_abstraction(const Problem& pb);

struct SynthesisOutput {
  RefinedController controller;
  std::size_t abstract_domain = 0;  // cells with nonempty K_eps (or finite J)
};

SynthesisOutput synthesize_problem(const Problem& pb, const SymbolicModel& model,
                                   const RefineOptions& opts);

}  // namespace qswitch
