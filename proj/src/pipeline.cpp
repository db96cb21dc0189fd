#include "qswitch/pipeline.hpp"

#include <algorithm>

#include "qswitch/error.hpp"

namespace qswitch {

Problem prepare_problem(const ProblemConfig& cfg) {
  SwitchedSystem sys = cfg.build_system();
  const SamplingParams params = cfg.params();
  const Lattice lat(sys.dim(), params.eta);

  const Box cont_safe = contract_box(cfg.safe, cfg.epsilon);
  std::optional<Box> cont_target;
  if (cfg.kind == SpecKind::Reach) cont_target = contract_box(*cfg.target, cfg.epsilon);
  if (!check_precision(cfg.cert, params)) {
    throw Error(ErrorKind::PrecisionViolated,
                "precision condition fails: need epsilon >= " +
                    format_number(precision_bound(cfg.cert, params)));
  }

  Problem pb{cfg,
             std::move(sys),
             params,
             lat,
             cfg.safe,
             cfg.target,
             lat.cell_range(cfg.safe),
             lat.points_in(cont_safe),
             CellRange(),
             CellRange()};
  if (pb.safe_cells.empty()) {
    throw Error(ErrorKind::EmptySpec, "contracted safe set contains no lattice point");
  }
  if (cont_target) {
    pb.target_cells = lat.points_in(*cont_target);
    pb.target_inner = lat.cells_within(*cfg.target);
    if (pb.target_cells.empty()) {
      throw Error(ErrorKind::EmptySpec, "contracted target set contains no lattice point");
    }
  }
  return pb;
}

SymbolicModel build_problem_abstraction(const Problem& pb) {
  AbstractionOptions opts;
  opts.flow.substeps = pb.config.substeps;
  opts.threads = pb.threads();
  return build_abstraction(pb.system, pb.lattice, pb.spec_cells, pb.params.tau, opts);
}

SynthesisOutput synthesize_problem(const Problem& pb, const SymbolicModel& model,
                                   const RefineOptions& opts) {
  SynthesisOutput out;
  if (pb.config.kind == SpecKind::Safety) {
    const SafetyResult s = synthesize_safety(model, pb.safe_cells);
    out.abstract_domain = s.dom_size;
    out.controller =
        refine_safety(s, pb.lattice, pb.config.cert, pb.params, pb.spec_cells, opts);
  } else {
    const ReachResult r = synthesize_reach(model, pb.safe_cells, pb.target_cells);
    out.abstract_domain = static_cast<std::size_t>(
        std::count_if(r.J.begin(), r.J.end(), [](std::uint32_t j) { return j != kInfTime; }));
    out.controller =
        refine_reach(r, pb.lattice, pb.config.cert, pb.params, pb.spec_cells, opts);
  }
  return out;
}

}  // namespace qswitch
