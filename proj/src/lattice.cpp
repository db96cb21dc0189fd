#include "qswitch/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qswitch/error.hpp"

namespace qswitch {

CellRange::CellRange(std::vector<std::int64_t> kmin,
                     std::vector<std::int64_t> kmax)
    : kmin_(std::move(kmin)), kmax_(std::move(kmax)) {
  if (kmin_.size() != kmax_.size() || kmin_.empty()) {
    throw Error(ErrorKind::InvalidArgument, "cell range bounds mismatch");
  }
  const int n = dim();
  strides_.assign(n, 1);
  count_ = 1;
  for (int i = n - 1; i >= 0; --i) {
    strides_[i] = count_;
    const std::int64_t e = extent(i);
    count_ *= static_cast<std::size_t>(std::max<std::int64_t>(e, 0));
  }
}

std::int64_t CellRange::extent(int axis) const {
  return kmax_[axis] - kmin_[axis] + 1;
}

bool CellRange::contains(const Cell& q) const {
  if (q.dim() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (q.k[i] < kmin_[i] || q.k[i] > kmax_[i]) return false;
  }
  return true;
}

bool CellRange::contains(const CellRange& other) const {
  if (other.empty()) return true;
  if (other.dim() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (other.kmin_[i] < kmin_[i] || other.kmax_[i] > kmax_[i]) return false;
  }
  return true;
}

std::size_t CellRange::index(const Cell& q) const {
  if (!contains(q)) {
    throw Error(ErrorKind::Domain, "cell outside range");
  }
  std::size_t idx = 0;
  for (int i = 0; i < dim(); ++i) {
    idx += static_cast<std::size_t>(q.k[i] - kmin_[i]) * strides_[i];
  }
  return idx;
}

Cell CellRange::cell_at(std::size_t index) const {
  if (index >= count_) {
    throw Error(ErrorKind::Domain, "cell index out of range");
  }
  Cell q;
  q.k.resize(dim());
  for (int i = 0; i < dim(); ++i) {
    q.k[i] = kmin_[i] + static_cast<std::int64_t>(index / strides_[i]);
    index %= strides_[i];
  }
  return q;
}

std::size_t CellRange::row_length() const {
  return static_cast<std::size_t>(std::max<std::int64_t>(extent(dim() - 1), 0));
}

std::size_t CellRange::row_count() const {
  const std::size_t len = row_length();
  return len == 0 ? 0 : count_ / len;
}

std::vector<std::uint8_t> membership_mask(const CellRange& domain, const CellRange& sub) {
  std::vector<std::uint8_t> mask(domain.count(), 0);
  if (sub.empty() || domain.empty()) return mask;
  const int n = domain.dim();
  if (sub.dim() != n) throw Error(ErrorKind::InvalidArgument, "cell range dimension mismatch");
  std::vector<std::int64_t> lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    lo[i] = std::max(domain.kmin()[i], sub.kmin()[i]);
    hi[i] = std::min(domain.kmax()[i], sub.kmax()[i]);
    if (lo[i] > hi[i]) return mask;
  }
  const CellRange clip(lo, hi);
  const std::size_t len = clip.row_length();
  for (std::size_t r = 0; r < clip.row_count(); ++r) {
    const std::size_t first = domain.index(clip.cell_at(r * len));
    std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(first), len, std::uint8_t{1});
  }
  return mask;
}

Lattice::Lattice(int n, double eta)
    : n_(n), eta_(eta), spacing_(2.0 * eta / std::sqrt(static_cast<double>(n))) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "lattice dimension < 1");
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw Error(ErrorKind::InvalidArgument, "eta must be positive");
  }
}

std::int64_t Lattice::quantize_axis(double x) const {
  return static_cast<std::int64_t>(std::floor(x / spacing_ + 0.5));
}

Cell Lattice::quantize(const Vec& x) const {
  Cell q;
  q.k.resize(n_);
  for (int i = 0; i < n_; ++i) q.k[i] = quantize_axis(x[i]);
  return q;
}

Vec Lattice::center(const Cell& q) const {
  Vec c(n_);
  for (int i = 0; i < n_; ++i) c[i] = static_cast<double>(q.k[i]) * spacing_;
  return c;
}

CellRange Lattice::cell_range(const Box& box) const {
  std::vector<std::int64_t> lo(n_), hi(n_);
  for (int i = 0; i < n_; ++i) {
    lo[i] = quantize_axis(box.lo[i]);
    hi[i] = quantize_axis(box.hi[i]);
  }
  return CellRange(lo, hi);
}

CellRange Lattice::points_in(const Box& box) const {
  const double s = spacing_;
  std::vector<std::int64_t> lo(n_), hi(n_);
  for (int i = 0; i < n_; ++i) {
    auto k = static_cast<std::int64_t>(std::ceil(box.lo[i] / s));
    while (static_cast<double>(k) * s < box.lo[i]) ++k;
    while (static_cast<double>(k - 1) * s >= box.lo[i]) --k;
    lo[i] = k;
    k = static_cast<std::int64_t>(std::floor(box.hi[i] / s));
    while (static_cast<double>(k) * s > box.hi[i]) --k;
    while (static_cast<double>(k + 1) * s <= box.hi[i]) ++k;
    hi[i] = k;
  }
  return CellRange(lo, hi);
}

CellRange Lattice::cells_within(const Box& box) const {
  const double s = spacing_;
  std::vector<std::int64_t> lo(n_), hi(n_);
  for (int i = 0; i < n_; ++i) {
    auto k = static_cast<std::int64_t>(std::ceil(box.lo[i] / s + 0.5));
    while ((static_cast<double>(k) - 0.5) * s < box.lo[i]) ++k;
    while ((static_cast<double>(k - 1) - 0.5) * s >= box.lo[i]) --k;
    lo[i] = k;
    k = static_cast<std::int64_t>(std::floor(box.hi[i] / s - 0.5));
    while ((static_cast<double>(k) + 0.5) * s > box.hi[i]) --k;
    while ((static_cast<double>(k + 1) + 0.5) * s <= box.hi[i]) ++k;
    hi[i] = k;
  }
  return CellRange(lo, hi);
}

std::int64_t Lattice::max_square_index(double threshold) const {
  if (!(threshold >= 0.0)) return -1;
  const double s2 = spacing_ * spacing_;
  auto m = static_cast<std::int64_t>(std::floor(threshold / s2));
  while (s2 * static_cast<double>(m + 1) <= threshold) ++m;
  while (m >= 0 && s2 * static_cast<double>(m) > threshold) --m;
  return m;
}

namespace {

std::int64_t isqrt(std::int64_t v) {
  if (v <= 0) return 0;
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
  while (r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

/* Lexicographic enumeration of integer vectors with |d|^2 <= max_sq. */
void enumerate_disc(int n, std::int64_t max_sq, Offset& cur, int axis,
                    std::int64_t used, std::vector<Offset>& out) {
  if (axis == n) {
    out.push_back(cur);
    return;
  }
  const std::int64_t r = isqrt(max_sq - used);
  for (std::int64_t d = -r; d <= r; ++d) {
    cur[axis] = d;
    enumerate_disc(n, max_sq, cur, axis + 1, used + d * d, out);
  }
}

std::vector<Offset> disc_offsets(int n, std::int64_t max_sq) {
  std::vector<Offset> out;
  if (max_sq < 0) return out;
  Offset cur(n, 0);
  enumerate_disc(n, max_sq, cur, 0, 0, out);
  return out;
}

}  // namespace

std::vector<Offset> ball_offsets(const Lattice& lat, double radius) {
  if (!(radius >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "radius must be non-negative");
  }
  return disc_offsets(lat.dim(), lat.max_square_index(radius * radius));
}

RelationBall RelationBall::build(const Lattice& lat,
                                 const LyapunovCertificate& cert,
                                 const SamplingParams& params) {
  if (!(params.epsilon > params.eta)) {
    throw Error(ErrorKind::PrecisionViolated,
                "relation ball needs epsilon > eta");
  }
  const int n = lat.dim();
  RelationBall ball;
  ball.n_ = n;
  ball.metric_ = cert.M;
  ball.euclidean_ = cert.metric_is_identity();
  ball.threshold_ = cert.alpha_lo(params.epsilon - params.eta);
  ball.spacing_sq_ = lat.spacing() * lat.spacing();

  if (ball.euclidean_) {
    ball.max_sq_ = lat.max_square_index(ball.threshold_);
    ball.offsets_ = disc_offsets(n, ball.max_sq_);
  } else {
    // V(0, d s) >= lambda_min(M) |d s|^2 bounds the search box.
    const double lmin = min_eigenvalue_symmetric(cert.M);
    const double radius = std::sqrt(ball.threshold_ / lmin);
    const std::int64_t bound =
        static_cast<std::int64_t>(std::floor(radius / lat.spacing())) + 1;
    Offset d(n, -bound);
    Vec dv(n);
    for (;;) {
      for (int i = 0; i < n; ++i) dv[i] = static_cast<double>(d[i]);
      const double q = dv.dot(cert.M * dv);
      if (ball.spacing_sq_ * q <= ball.threshold_) ball.offsets_.push_back(d);
      int axis = n - 1;
      while (axis >= 0 && d[axis] == bound) {
        d[axis] = -bound;
        --axis;
      }
      if (axis < 0) break;
      ++d[axis];
    }
  }

  for (const auto& d : ball.offsets_) {
    for (auto v : d) ball.max_abs_ = std::max(ball.max_abs_, std::abs(v));
  }

  // Group consecutive offsets sharing a prefix and adjacent last coordinates.
  for (const auto& d : ball.offsets_) {
    Offset prefix(d.begin(), d.end() - 1);
    const std::int64_t last = d.back();
    if (!ball.spans_.empty() && ball.spans_.back().prefix == prefix &&
        ball.spans_.back().hi + 1 == last) {
      ball.spans_.back().hi = last;
    } else {
      ball.spans_.push_back(OffsetSpan{std::move(prefix), last, last});
    }
  }
  return ball;
}

bool RelationBall::contains(const Offset& d) const {
  if (static_cast<int>(d.size()) != n_) return false;
  if (euclidean_) {
    std::int64_t sq = 0;
    for (auto v : d) sq += v * v;
    return sq <= max_sq_;
  }
  Vec dv(n_);
  for (int i = 0; i < n_; ++i) dv[i] = static_cast<double>(d[i]);
  return spacing_sq_ * dv.dot(metric_ * dv) <= threshold_;
}

std::vector<Cell> RelationBall::around(const Cell& q) const {
  std::vector<Cell> out;
  out.reserve(offsets_.size());
  for (const auto& d : offsets_) {
    Cell c = q;
    for (int i = 0; i < n_; ++i) c.k[i] += d[i];
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Cell> rel_ball(const Lattice& lat, const LyapunovCertificate& cert,
                           const SamplingParams& params, const Cell& q) {
  return RelationBall::build(lat, cert, params).around(q);
}

}  // namespace qswitch
