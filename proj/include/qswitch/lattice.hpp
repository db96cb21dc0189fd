#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qswitch/box.hpp"
#include "qswitch/linalg.hpp"
#include "qswitch/system_model.hpp"

namespace qswitch {

/* Integer lattice coordinates; the cell center is k * spacing. */
struct Cell {
  std::vector<std::int64_t> k;

  int dim() const { return static_cast<int>(k.size()); }
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

using Offset = std::vector<std::int64_t>;

/* Product of inclusive integer intervals [kmin_i, kmax_i]. Cells are indexed
 * row-major with the last axis fastest. An interval with kmax < kmin makes
 * the range empty. */
class CellRange {
 public:
  CellRange() = default;
  CellRange(std::vector<std::int64_t> kmin, std::vector<std::int64_t> kmax);

  int dim() const { return static_cast<int>(kmin_.size()); }
  const std::vector<std::int64_t>& kmin() const { return kmin_; }
  const std::vector<std::int64_t>& kmax() const { return kmax_; }
  std::int64_t extent(int axis) const;
  std::size_t count() const { return count_; }
  bool empty() const { return count_ == 0; }
  std::size_t stride(int axis) const { return strides_[axis]; }

  bool contains(const Cell& q) const;
  bool contains(const CellRange& other) const;
  std::size_t index(const Cell& q) const;
  Cell cell_at(std::size_t index) const;

  /* Row = all cells sharing the leading n-1 coordinates. */
  std::size_t row_length() const;
  std::size_t row_count() const;

  friend bool operator==(const CellRange& a, const CellRange& b) {
    return a.kmin_ == b.kmin_ && a.kmax_ == b.kmax_;
  }

 private:
  std::vector<std::int64_t> kmin_;
  std::vector<std::int64_t> kmax_;
  std::vector<std::size_t> strides_;
  std::size_t count_ = 0;
};

/* 1 for each cell of `domain` that also lies in `sub`, else 0. */
std::vector<std::uint8_t> membership_mask(const CellRange& domain, const CellRange& sub);

/* Uniform lattice with spacing 2 eta / sqrt(n); cell k covers the half-open
 * box [k s - s/2, k s + s/2) on each axis. */
class Lattice {
 public:
  Lattice(int n, double eta);

  int dim() const { return n_; }
  double eta() const { return eta_; }
  double spacing() const { return spacing_; }

  std::int64_t quantize_axis(double x) const;
  Cell quantize(const Vec& x) const;
  Vec center(const Cell& q) const;

  /* Image of the box under the quantizer. */
  CellRange cell_range(const Box& box) const;
  /* Lattice points (cell centers) lying in the closed box. */
  CellRange points_in(const Box& box) const;
  /* Cells whose whole half-open extent lies in the box. */
  CellRange cells_within(const Box& box) const;

  /* Largest integer m with spacing^2 * m <= threshold. */
  std::int64_t max_square_index(double threshold) const;

 private:
  int n_;
  double eta_;
  double spacing_;
};

/* All offsets d with |d * spacing| <= radius, in lexicographic order. */
std::vector<Offset> ball_offsets(const Lattice& lat, double radius);

/* Contiguous run of ball offsets along the last axis for one fixed prefix
 * of the leading n-1 coordinates. */
struct OffsetSpan {
  Offset prefix;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

/* Offsets d with V(0, d * spacing) <= alpha_lo(epsilon - eta), stored once and
 * translated to every cell. */
class RelationBall {
 public:
  static RelationBall build(const Lattice& lat, const LyapunovCertificate& cert,
                            const SamplingParams& params);

  int dim() const { return n_; }
  const std::vector<Offset>& offsets() const { return offsets_; }
  std::size_t size() const { return offsets_.size(); }
  /* Spans in lexicographic order of (prefix, lo). */
  const std::vector<OffsetSpan>& spans() const { return spans_; }

  /* M = I: the ball is exactly {d : |d|^2 <= max_square_index()}. */
  bool euclidean() const { return euclidean_; }
  std::int64_t max_square_index() const { return max_sq_; }
  std::int64_t max_abs_offset() const { return max_abs_; }

  bool contains(const Offset& d) const;
  std::vector<Cell> around(const Cell& q) const;

 private:
  int n_ = 0;
  bool euclidean_ = false;
  std::int64_t max_sq_ = 0;
  std::int64_t max_abs_ = 0;
  double spacing_sq_ = 0.0;
  double threshold_ = 0.0;
  Mat metric_;
  std::vector<Offset> offsets_;
  std::vector<OffsetSpan> spans_;
};

std::vector<Cell> rel_ball(const Lattice& lat, const LyapunovCertificate& cert,
                           const SamplingParams& params, const Cell& q);

}  // namespace qswitch
