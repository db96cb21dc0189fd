#include "qswitch/runtime.hpp"

#include <algorithm>
#include <utility>

#include "qswitch/error.hpp"

namespace qswitch {

Specification Specification::safety(Box safe) {
  Specification s;
  s.kind = SpecKind::Safety;
  s.safe = std::move(safe);
  return s;
}

Specification Specification::reach(Box safe, Box target) {
  if (safe.dim() != target.dim()) {
    throw Error(ErrorKind::InvalidArgument, "safe and target boxes differ in dimension");
  }
  Specification s;
  s.kind = SpecKind::Reach;
  s.safe = std::move(safe);
  s.target = std::move(target);
  return s;
}

Controller::Controller(Variant v, Lattice lat, Specification spec, std::size_t modes)
    : variant_(v), lat_(std::move(lat)), spec_(std::move(spec)), modes_(modes) {
  if (spec_.kind == SpecKind::Reach && !spec_.target) {
    throw Error(ErrorKind::InvalidArgument, "reach controller without a target box");
  }
  if (spec_.safe.dim() != lat_.dim()) {
    throw Error(ErrorKind::InvalidArgument, "specification dimension mismatch");
  }
}

Controller Controller::from_array(RefinedController K, Lattice lat, Specification spec) {
  if (K.kind != spec.kind) throw Error(ErrorKind::InvalidArgument, "controller and spec kinds differ");
  Controller c(Variant::Array, std::move(lat), std::move(spec), K.mode_count);
  c.array_ = std::move(K);
  return c;
}

Controller Controller::from_tree(DecisionTree tree, Lattice lat, Specification spec) {
  Controller c(Variant::Tree, std::move(lat), std::move(spec), tree.mode_count());
  c.tree_ = std::move(tree);
  return c;
}

ModeSet Controller::enabled(const Vec& x) const {
  const ModeSet none;
  const ModeSet all = ModeSet::all(modes_);
  const bool reach = spec_.kind == SpecKind::Reach;
  if (!spec_.in_safe(x)) return reach ? all : none;
  if (reach && spec_.in_target(x)) return all;

  const Cell q = lat_.quantize(x);
  const CellRange& cells = array_ ? array_->cells : tree_->cells();
  if (!cells.contains(q)) return reach ? all : none;
  if (tree_) return ModeSet::single(static_cast<std::size_t>(tree_->lookup(q.k.data())));
  const ModeSet k = array_->at(cells.index(q));
  return (reach && k.empty()) ? all : k;
}

int step(const Controller& ctrl, const Vec& x) {
  const ModeSet m = ctrl.enabled(x);
  return m.empty() ? kBlocked : m.lowest();
}

int step(const Controller& ctrl, const Vec& x, std::mt19937_64& rng) {
  const ModeSet m = ctrl.enabled(x);
  if (m.empty()) return kBlocked;
  auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(m.size()));
  for (std::size_t p = 0; p < kMaxModes; ++p) {
    if (!m.contains(p)) continue;
    if (pick == 0) return static_cast<int>(p);
    --pick;
  }
  return m.lowest();
}

SampledPlant::SampledPlant(const SwitchedSystem& sys, double tau, FlowOptions opts)
    : sys_(&sys), tau_(tau), opts_(opts), affine_(sys.mode_count()) {
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
  for (std::size_t p = 0; p < sys.mode_count(); ++p) {
    if (sys.mode(p).is_affine()) affine_[p] = affine_flow(sys.mode(p), tau);
  }
}

Vec SampledPlant::next(const Vec& x, std::size_t mode) const {
  if (mode >= affine_.size()) throw Error(ErrorKind::Domain, "mode out of range");
  if (affine_[mode]) {
    Vec y = affine_[mode]->apply(x);
    if (!all_finite(y)) throw Error(ErrorKind::IntegrationOverflow, "non-finite closed-loop state");
    return y;
  }
  return flow_rk4(sys_->mode(mode), x, tau_, opts_.substeps);
}

Trajectory run_closed_loop(const SampledPlant& plant, const Controller& ctrl, const Vec& x0,
                           std::size_t steps, const RunOptions& opts) {
  Trajectory traj;
  traj.states.reserve(steps + 1);
  traj.modes.reserve(steps);
  std::mt19937_64 rng(opts.seed);
  Vec x = x0;
  traj.states.push_back(x);
  for (std::size_t i = 0; i < steps; ++i) {
    const int p = opts.random_selection ? step(ctrl, x, rng) : step(ctrl, x);
    if (p == kBlocked) {
      traj.blocked = true;
      break;
    }
    traj.modes.push_back(p);
    x = plant.next(x, static_cast<std::size_t>(p));
    traj.states.push_back(x);
  }
  return traj;
}

std::size_t entry_time(const Trajectory& traj, const Box& safe, const Box& target) {
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    if (!safe.contains(traj.states[k])) return kNeverEntered;
    if (target.contains(traj.states[k])) return k;
  }
  return kNeverEntered;
}

MonteCarloReport monte_carlo_validate(const SampledPlant& plant, const Controller& ctrl,
                                      const RefinedController& K,
                                      const MonteCarloOptions& opts) {
  const Specification& spec = ctrl.spec();
  const Lattice& lat = ctrl.lattice();
  const bool reach = spec.kind == SpecKind::Reach;
  if (K.kind != spec.kind) throw Error(ErrorKind::InvalidArgument, "controller and spec kinds differ");

  auto cell_of = [&](const Vec& x) -> std::optional<std::size_t> {
    const Cell q = lat.quantize(x);
    if (!K.cells.contains(q)) return std::nullopt;
    return K.cells.index(q);
  };

  MonteCarloReport report;
  std::mt19937_64 rng(opts.seed);
  const int n = spec.safe.dim();
  for (std::size_t run = 0; run < opts.runs; ++run) {
    std::optional<Vec> start;
    std::size_t cell = 0;
    for (std::size_t draw = 0; draw < opts.max_draws && !start; ++draw) {
      Vec x(n);
      for (int i = 0; i < n; ++i) {
        x[i] = spec.safe.lo[i] + uniform01(rng) * spec.safe.width(i);
      }
      const auto c = cell_of(x);
      if (!c) continue;
      const bool ok = reach ? K.J_tilde[*c] != kInfTime : K.K[*c] != 0;
      if (ok) {
        start = x;
        cell = *c;
      }
    }
    if (!start) {
      ++report.starts_not_found;
      continue;
    }
    ++report.runs;

    std::size_t steps = opts.steps;
    std::uint32_t bound = 0;
    if (reach) {
      bound = K.J_tilde[cell];
      steps = std::max<std::size_t>(steps, bound);
    }
    RunOptions ro;
    ro.random_selection = opts.random_selection;
    ro.seed = rng();
    const Trajectory traj = run_closed_loop(plant, ctrl, *start, steps, ro);

    for (std::size_t i = 0; i < traj.modes.size(); ++i) {
      const Vec& x = traj.states[i];
      if (!spec.in_safe(x) || spec.in_target(x)) continue;
      const auto c = cell_of(x);
      if (!c || K.K[*c] == 0) continue;
      if (reach && K.J_tilde[*c] == kInfTime) continue;
      if (!ModeSet(K.K[*c]).contains(static_cast<std::size_t>(traj.modes[i]))) {
        ++report.membership_violations;
      }
    }

    if (!reach) {
      if (traj.blocked) ++report.blocked_runs;
      const bool left = std::any_of(traj.states.begin(), traj.states.end(),
                                    [&](const Vec& x) { return !spec.in_safe(x); });
      if (traj.blocked || left) ++report.safety_violations;
    } else {
      const std::size_t e = entry_time(traj, spec.safe, *spec.target);
      const std::int64_t excess =
          e == kNeverEntered ? static_cast<std::int64_t>(steps) + 1 - bound
                             : static_cast<std::int64_t>(e) - bound;
      report.max_excess = std::max(report.max_excess, excess);
      if (excess > 0) ++report.reach_violations;
    }
  }
  return report;
}

}  // namespace qswitch
