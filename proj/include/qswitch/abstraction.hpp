#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qswitch/lattice.hpp"
#include "qswitch/system_model.hpp"

namespace qswitch {

/* Quantized sampled-time abstraction restricted to a working cell range:
 * succ(q, p) = Q(flow_p(center(q), tau)), or OUT when that cell leaves the
 * range. One entry per (cell, mode), stored mode-major. */
class SymbolicModel {
 public:
  static constexpr std::int32_t kOut = -1;

  SymbolicModel(Lattice lat, CellRange domain, std::size_t modes, double tau,
                std::vector<std::int32_t> succ);

  const Lattice& lattice() const { return lat_; }
  const CellRange& domain() const { return domain_; }
  std::size_t mode_count() const { return modes_; }
  std::size_t cell_count() const { return domain_.count(); }
  double tau() const { return tau_; }

  std::int32_t successor_index(std::size_t cell, std::size_t p) const {
    return succ_[p * domain_.count() + cell];
  }
  std::span<const std::int32_t> successors(std::size_t p) const {
    return {succ_.data() + p * domain_.count(), domain_.count()};
  }
  const std::vector<std::int32_t>& table() const { return succ_; }

  /* nullopt means OUT. Throws a domain error for cells outside the range. */
  std::optional<Cell> successor(const Cell& q, std::size_t p) const;

  double out_fraction(std::size_t p) const;

 private:
  Lattice lat_;
  CellRange domain_;
  std::size_t modes_;
  double tau_;
  std::vector<std::int32_t> succ_;
};

struct AbstractionOptions {
  FlowOptions flow;  // used for generic modes only
  int threads = 0;
};

SymbolicModel build_abstraction(const SwitchedSystem& sys, const Lattice& lat,
                                const CellRange& domain, double tau,
                                const AbstractionOptions& opts = {});

SymbolicModel build_abstraction(const SwitchedSystem& sys, const Lattice& lat,
                                const Box& working_box, double tau,
                                const AbstractionOptions& opts = {});

}  // namespace qswitch
