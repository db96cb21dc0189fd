#pragma once

#include <cstddef>

#include "qswitch/linalg.hpp"

namespace qswitch {

/* Closed axis-aligned box [lo, hi] in state space. */
struct Box {
  Vec lo;
  Vec hi;

  Box() = default;
  Box(Vec lo_, Vec hi_);

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vec& x) const;
  double width(int axis) const { return hi[axis] - lo[axis]; }

  friend bool operator==(const Box& a, const Box& b) {
    return a.lo == b.lo && a.hi == b.hi;
  }
};

/* Same interval on every axis. */
Box cube(int n, double lo, double hi);

}  // namespace qswitch
