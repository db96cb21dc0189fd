#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qswitch/abstraction.hpp"
#include "qswitch/box.hpp"
#include "qswitch/lattice.hpp"
#include "qswitch/mode_set.hpp"
#include "qswitch/system_model.hpp"

namespace qswitch {

inline constexpr std::uint32_t kInfTime = 0xFFFFFFFFu;

/* Inward offset of every face by epsilon. Throws an empty-spec error when an
 * axis collapses. */
Box contract_box(const Box& box, double epsilon);

/* Abstract safety controller over the model's domain. */
struct SafetyResult {
  CellRange domain;
  std::size_t mode_count = 0;
  std::vector<std::uint8_t> k_eps;  // ModeSet bits per domain cell
  std::size_t dom_size = 0;

  ModeSet at(std::size_t cell) const { return ModeSet(k_eps[cell]); }
  bool in_dom(std::size_t cell) const { return k_eps[cell] != 0; }
};

/* Maximal fixed point: the most permissive controller that keeps the
 * abstraction inside safe_cells forever. */
SafetyResult synthesize_safety(const SymbolicModel& model,
                               const CellRange& safe_cells);

/* Time-optimal abstract reachability controller with entry times J.
 * Target cells get every mode, unreachable cells get none. */
struct ReachResult {
  CellRange domain;
  std::size_t mode_count = 0;
  std::vector<std::uint8_t> k_eps;
  std::vector<std::uint32_t> J;  // kInfTime when the target is unreachable

  ModeSet at(std::size_t cell) const { return ModeSet(k_eps[cell]); }
};

ReachResult synthesize_reach(const SymbolicModel& model,
                             const CellRange& safe_cells,
                             const CellRange& target_cells);

enum class SpecKind { Safety, Reach };

/* Quantized controller map over the spec cells; J_tilde is filled for reach
 * controllers only. */
struct RefinedController {
  SpecKind kind = SpecKind::Safety;
  CellRange cells;
  std::size_t mode_count = 0;
  std::vector<std::uint8_t> K;
  std::vector<std::uint32_t> J_tilde;

  ModeSet at(std::size_t cell) const { return ModeSet(K[cell]); }
  std::size_t dom_size() const;
};

enum class DilationEngine {
  Auto,               // distance transform when M = I, else ball scan
  BallScan,
  DistanceTransform,  // requires M = I
};

enum class ReachRefinement {
  Fast,       // modes of the lexicographically first minimizer
  FullUnion,  // union over every minimizer
};

struct RefineOptions {
  DilationEngine engine = DilationEngine::Auto;
  ReachRefinement reach = ReachRefinement::FullUnion;
  int threads = 0;
};

RefinedController refine_safety(const SafetyResult& sres, const Lattice& lat,
                                const LyapunovCertificate& cert,
                                const SamplingParams& params,
                                const CellRange& spec_cells,
                                const RefineOptions& opts = {});

RefinedController refine_reach(const ReachResult& rres, const Lattice& lat,
                               const LyapunovCertificate& cert,
                               const SamplingParams& params,
                               const CellRange& spec_cells,
                               const RefineOptions& opts = {});

}  // namespace qswitch
