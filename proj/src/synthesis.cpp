#include "qswitch/synthesis.hpp"

#include <algorithm>
#include <deque>

#include "qswitch/ball_filter.hpp"
#include "qswitch/error.hpp"
#include "qswitch/simd/kernels.hpp"

namespace qswitch {

namespace {

/* Reverse edges (source cell, mode) grouped by successor, restricted to
 * sources and successors inside `alive`. Entries are c * modes + p. */
struct Predecessors {
  std::vector<std::size_t> start;
  std::vector<std::uint64_t> edges;
};

Predecessors reverse_edges(const SymbolicModel& model,
                           const std::vector<std::uint8_t>& alive) {
  const std::size_t cells = model.cell_count();
  const std::size_t modes = model.mode_count();
  Predecessors pred;
  pred.start.assign(cells + 1, 0);
  for (std::size_t p = 0; p < modes; ++p) {
    const auto succ = model.successors(p);
    for (std::size_t c = 0; c < cells; ++c) {
      const std::int32_t s = succ[c];
      if (alive[c] && s != SymbolicModel::kOut && alive[s]) ++pred.start[s + 1];
    }
  }
  for (std::size_t c = 0; c < cells; ++c) pred.start[c + 1] += pred.start[c];
  pred.edges.resize(pred.start[cells]);
  std::vector<std::size_t> fill(pred.start.begin(), pred.start.end() - 1);
  for (std::size_t p = 0; p < modes; ++p) {
    const auto succ = model.successors(p);
    for (std::size_t c = 0; c < cells; ++c) {
      const std::int32_t s = succ[c];
      if (alive[c] && s != SymbolicModel::kOut && alive[s]) {
        pred.edges[fill[s]++] = c * modes + p;
      }
    }
  }
  return pred;
}

void require_precision(const LyapunovCertificate& cert, const SamplingParams& params) {
  if (!check_precision(cert, params)) {
    throw Error(ErrorKind::PrecisionViolated,
                "precision condition fails for the given tau, eta, epsilon");
  }
}

void require_lattice(const Lattice& lat, const SamplingParams& params,
                     const CellRange& spec_cells) {
  if (lat.eta() != params.eta) {
    throw Error(ErrorKind::InvalidArgument, "lattice eta differs from sampling eta");
  }
  if (spec_cells.dim() != lat.dim()) {
    throw Error(ErrorKind::InvalidArgument, "spec cell range dimension mismatch");
  }
}

}  // namespace

Box contract_box(const Box& box, double epsilon) {
  if (!(epsilon >= 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be nonnegative");
  Vec lo = box.lo.array() + epsilon;
  Vec hi = box.hi.array() - epsilon;
  for (int i = 0; i < box.dim(); ++i) {
    if (lo[i] > hi[i]) {
      throw Error(ErrorKind::EmptySpec,
                  "epsilon-contraction of the box is empty on axis " + std::to_string(i));
    }
  }
  return Box(lo, hi);
}

SafetyResult synthesize_safety(const SymbolicModel& model, const CellRange& safe_cells) {
  const std::size_t cells = model.cell_count();
  const std::size_t modes = model.mode_count();
  std::vector<std::uint8_t> alive = membership_mask(model.domain(), safe_cells);

  SafetyResult res;
  res.domain = model.domain();
  res.mode_count = modes;
  res.k_eps.assign(cells, 0);
  for (std::size_t p = 0; p < modes; ++p) {
    const auto succ = model.successors(p);
    const auto bit = static_cast<std::uint8_t>(1u << p);
    for (std::size_t c = 0; c < cells; ++c) {
      const std::int32_t s = succ[c];
      if (alive[c] && s != SymbolicModel::kOut && alive[s]) res.k_eps[c] |= bit;
    }
  }

  const Predecessors pred = reverse_edges(model, alive);
  std::deque<std::size_t> dead;
  for (std::size_t c = 0; c < cells; ++c) {
    if (alive[c] && res.k_eps[c] == 0) {
      alive[c] = 0;
      dead.push_back(c);
    }
  }
  while (!dead.empty()) {
    const std::size_t d = dead.front();
    dead.pop_front();
    for (std::size_t e = pred.start[d]; e < pred.start[d + 1]; ++e) {
      const std::size_t c = pred.edges[e] / modes;
      const std::size_t p = pred.edges[e] % modes;
      if (!alive[c]) continue;
      res.k_eps[c] &= static_cast<std::uint8_t>(~(1u << p));
      if (res.k_eps[c] == 0) {
        alive[c] = 0;
        dead.push_back(c);
      }
    }
  }
  res.dom_size = static_cast<std::size_t>(
      std::count_if(res.k_eps.begin(), res.k_eps.end(), [](std::uint8_t m) { return m != 0; }));
  return res;
}

ReachResult synthesize_reach(const SymbolicModel& model, const CellRange& safe_cells,
                             const CellRange& target_cells) {
  const std::size_t cells = model.cell_count();
  const std::size_t modes = model.mode_count();
  const std::vector<std::uint8_t> safe = membership_mask(model.domain(), safe_cells);
  const std::vector<std::uint8_t> target = membership_mask(model.domain(), target_cells);

  ReachResult res;
  res.domain = model.domain();
  res.mode_count = modes;
  res.k_eps.assign(cells, 0);
  res.J.assign(cells, kInfTime);

  const Predecessors pred = reverse_edges(model, safe);
  const auto all = ModeSet::all(modes).bits();
  std::deque<std::size_t> frontier;
  for (std::size_t c = 0; c < cells; ++c) {
    if (safe[c] && target[c]) {
      res.J[c] = 0;
      res.k_eps[c] = all;
      frontier.push_back(c);
    }
  }
  while (!frontier.empty()) {
    const std::size_t d = frontier.front();
    frontier.pop_front();
    for (std::size_t e = pred.start[d]; e < pred.start[d + 1]; ++e) {
      const std::size_t c = pred.edges[e] / modes;
      if (res.J[c] == kInfTime) {
        res.J[c] = res.J[d] + 1;
        frontier.push_back(c);
      }
    }
  }
  for (std::size_t p = 0; p < modes; ++p) {
    const auto succ = model.successors(p);
    const auto bit = static_cast<std::uint8_t>(1u << p);
    for (std::size_t c = 0; c < cells; ++c) {
      const std::uint32_t j = res.J[c];
      if (j == 0 || j == kInfTime) continue;
      const std::int32_t s = succ[c];
      if (s != SymbolicModel::kOut && safe[s] && res.J[s] == j - 1) res.k_eps[c] |= bit;
    }
  }
  return res;
}

std::size_t RefinedController::dom_size() const {
  return static_cast<std::size_t>(
      std::count_if(K.begin(), K.end(), [](std::uint8_t m) { return m != 0; }));
}

RefinedController refine_safety(const SafetyResult& sres, const Lattice& lat,
                                const LyapunovCertificate& cert,
                                const SamplingParams& params,
                                const CellRange& spec_cells, const RefineOptions& opts) {
  require_precision(cert, params);
  require_lattice(lat, params, spec_cells);
  const RelationBall ball = RelationBall::build(lat, cert, params);

  RefinedController out;
  out.kind = SpecKind::Safety;
  out.cells = spec_cells;
  out.mode_count = sres.mode_count;
  out.K.assign(spec_cells.count(), 0);

  if (opts.engine == DilationEngine::DistanceTransform && !ball.euclidean()) {
    throw Error(ErrorKind::InvalidArgument, "distance-transform engine needs M = identity");
  }
  const bool use_edt = ball.euclidean() && opts.engine != DilationEngine::BallScan;
  if (use_edt) {
    dilate_distance_transform(sres.domain, sres.k_eps, spec_cells, out.K,
                              ball.max_square_index(), sres.mode_count, opts.threads);
  } else {
    dilate_ball_scan(sres.domain, sres.k_eps, spec_cells, out.K, ball, opts.threads);
  }
  return out;
}

RefinedController refine_reach(const ReachResult& rres, const Lattice& lat,
                               const LyapunovCertificate& cert,
                               const SamplingParams& params,
                               const CellRange& spec_cells, const RefineOptions& opts) {
  require_precision(cert, params);
  require_lattice(lat, params, spec_cells);
  const RelationBall ball = RelationBall::build(lat, cert, params);

  std::vector<std::uint32_t> packed(rres.J.size());
  for (std::size_t c = 0; c < packed.size(); ++c) {
    const std::uint32_t j = rres.J[c];
    if (j == kInfTime) {
      packed[c] = simd::kPackedIdentity;
    } else {
      if (j >= simd::kPackedInfTime) {
        throw Error(ErrorKind::InvalidArgument, "entry time exceeds packed range");
      }
      packed[c] = (j << 8) | rres.k_eps[c];
    }
  }
  std::vector<std::uint32_t> filtered(spec_cells.count());
  min_filter_packed(rres.domain, packed, spec_cells, filtered, ball,
                    opts.reach == ReachRefinement::FullUnion ? TieRule::Merge
                                                             : TieRule::KeepFirst,
                    opts.threads);

  RefinedController out;
  out.kind = SpecKind::Reach;
  out.cells = spec_cells;
  out.mode_count = rres.mode_count;
  out.K.resize(filtered.size());
  out.J_tilde.resize(filtered.size());
  for (std::size_t c = 0; c < filtered.size(); ++c) {
    const std::uint32_t j = filtered[c] >> 8;
    if (j == simd::kPackedInfTime) {
      out.J_tilde[c] = kInfTime;
      out.K[c] = 0;
    } else {
      out.J_tilde[c] = j;
      out.K[c] = static_cast<std::uint8_t>(filtered[c] & 0xFFu);
    }
  }
  return out;
}

}  // namespace qswitch
