#include "qswitch/ball_filter.hpp"

#include <algorithm>

#include "qswitch/error.hpp"
#include "qswitch/parallel.hpp"
#include "qswitch/simd/kernels.hpp"

namespace qswitch {

namespace {

void check_sizes(const CellRange& src_range, std::size_t src_size,
                 const CellRange& dst_range, std::size_t dst_size,
                 int ball_dim) {
  if (src_range.count() != src_size || dst_range.count() != dst_size) {
    throw Error(ErrorKind::InvalidArgument, "filter buffers do not match ranges");
  }
  if (src_range.dim() != dst_range.dim() || dst_range.dim() != ball_dim) {
    throw Error(ErrorKind::InvalidArgument, "filter dimension mismatch");
  }
}

/* Row-wise sliding-window fold of src over the ball into dst. `combine` must be
 * associative and idempotent; `accumulate(acc, a, b, n)` computes
 * acc[i] = acc[i] (+) a[i] (+) b[i] in that order. */
template <class T, class Combine, class Accumulate>
void window_filter(const CellRange& src_range, std::span<const T> src,
                   const CellRange& dst_range, std::span<T> dst,
                   const RelationBall& ball, T identity, Combine combine,
                   Accumulate accumulate, int threads) {
  check_sizes(src_range, src.size(), dst_range, dst.size(), ball.dim());
  if (dst_range.empty()) return;
  const int n = dst_range.dim();
  const int last = n - 1;
  const std::size_t len = dst_range.row_length();
  const std::size_t rows = dst_range.row_count();
  const std::int64_t dmin = dst_range.kmin()[last];
  const std::int64_t smin = src_range.kmin()[last];
  const std::int64_t smax = src_range.kmax()[last];
  const auto& spans = ball.spans();

  parallel_for(0, rows, threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<T> acc(len), pad, prefix, suffix;
    for (std::size_t r = lo; r < hi; ++r) {
      std::fill(acc.begin(), acc.end(), identity);
      const Cell head = dst_range.cell_at(r * len);
      if (!src_range.empty()) {
        for (const OffsetSpan& span : spans) {
          std::size_t base = 0;
          bool inside = true;
          for (int i = 0; i < last; ++i) {
            const std::int64_t a = head.k[i] + span.prefix[i];
            if (a < src_range.kmin()[i] || a > src_range.kmax()[i]) {
              inside = false;
              break;
            }
            base += static_cast<std::size_t>(a - src_range.kmin()[i]) *
                    src_range.stride(i);
          }
          if (!inside) continue;

          const auto width = static_cast<std::size_t>(span.hi - span.lo + 1);
          const std::size_t m = len + width - 1;
          const std::int64_t first = dmin + span.lo;
          const std::int64_t final = first + static_cast<std::int64_t>(m) - 1;
          if (first > smax || final < smin) continue;

          pad.resize(m);
          for (std::size_t t = 0; t < m; ++t) {
            const std::int64_t a = first + static_cast<std::int64_t>(t);
            pad[t] = (a >= smin && a <= smax)
                         ? src[base + static_cast<std::size_t>(a - smin)]
                         : identity;
          }
          prefix.resize(m);
          suffix.resize(m);
          for (std::size_t t = 0; t < m; ++t) {
            prefix[t] = (t % width == 0) ? pad[t] : combine(prefix[t - 1], pad[t]);
          }
          for (std::size_t t = m; t-- > 0;) {
            suffix[t] = (t % width == width - 1 || t == m - 1)
                            ? pad[t]
                            : combine(pad[t], suffix[t + 1]);
          }
          accumulate(acc.data(), suffix.data(), prefix.data() + (width - 1), len);
        }
      }
      std::copy(acc.begin(), acc.end(), dst.begin() + static_cast<std::ptrdiff_t>(r * len));
    }
  });
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

/* One-dimensional lower envelope of parabolas (Meijster et al.), exact in
 * integer arithmetic. Operates in place on a strided line. */
void distance_1d(std::int64_t* f, std::size_t len, std::size_t stride,
                 std::vector<std::int64_t>& v, std::vector<std::int64_t>& start,
                 std::vector<std::int64_t>& out) {
  v.resize(len);
  start.resize(len);
  out.resize(len);
  auto at = [&](std::int64_t q) { return f[static_cast<std::size_t>(q) * stride]; };
  auto value = [&](std::int64_t i, std::int64_t x) {
    return (x - i) * (x - i) + at(i);
  };
  const auto n = static_cast<std::int64_t>(len);
  std::int64_t k = -1;
  for (std::int64_t q = 0; q < n; ++q) {
    const std::int64_t fq = at(q);
    if (fq >= kNoFeature) continue;
    while (k >= 0 && value(v[k], start[k]) > (start[k] - q) * (start[k] - q) + fq) --k;
    if (k < 0) {
      k = 0;
      v[0] = q;
      start[0] = 0;
    } else {
      const std::int64_t i = v[k];
      const std::int64_t sep =
          floor_div(q * q - i * i + fq - at(i), 2 * (q - i));
      const std::int64_t w = 1 + sep;
      if (w < n) {
        ++k;
        v[k] = q;
        start[k] = w;
      }
    }
  }
  if (k < 0) return;
  for (std::int64_t x = n - 1; x >= 0; --x) {
    out[x] = value(v[k], x);
    if (x == start[k]) --k;
  }
  for (std::int64_t x = 0; x < n; ++x) f[static_cast<std::size_t>(x) * stride] = out[x];
}

CellRange hull(const CellRange& a, const CellRange& b) {
  std::vector<std::int64_t> lo(a.dim()), hi(a.dim());
  for (int i = 0; i < a.dim(); ++i) {
    lo[i] = std::min(a.kmin()[i], b.kmin()[i]);
    hi[i] = std::max(a.kmax()[i], b.kmax()[i]);
  }
  return CellRange(lo, hi);
}

}  // namespace

void dilate_ball_scan(const CellRange& src_range,
                      std::span<const std::uint8_t> src,
                      const CellRange& dst_range, std::span<std::uint8_t> dst,
                      const RelationBall& ball, int threads) {
  const auto& k = simd::active_kernels();
  window_filter<std::uint8_t>(
      src_range, src, dst_range, dst, ball, std::uint8_t{0},
      [](std::uint8_t a, std::uint8_t b) { return static_cast<std::uint8_t>(a | b); },
      k.accumulate_or, threads);
}

void min_filter_packed(const CellRange& src_range,
                       std::span<const std::uint32_t> src,
                       const CellRange& dst_range, std::span<std::uint32_t> dst,
                       const RelationBall& ball, TieRule ties, int threads) {
  const auto& k = simd::active_kernels();
  if (ties == TieRule::Merge) {
    window_filter<std::uint32_t>(src_range, src, dst_range, dst, ball,
                                 simd::kPackedIdentity, simd::packed_min_union,
                                 k.accumulate_min_union, threads);
  } else {
    window_filter<std::uint32_t>(src_range, src, dst_range, dst, ball,
                                 simd::kPackedIdentity, simd::packed_min_first,
                                 k.accumulate_min_first, threads);
  }
}

std::vector<std::int64_t> squared_distance_transform(
    const CellRange& range, std::span<const std::uint8_t> features, int threads) {
  if (features.size() != range.count()) {
    throw Error(ErrorKind::InvalidArgument, "feature mask does not match range");
  }
  std::vector<std::int64_t> f(range.count());
  for (std::size_t c = 0; c < f.size(); ++c) f[c] = features[c] ? 0 : kNoFeature;

  for (int axis = 0; axis < range.dim(); ++axis) {
    const auto extent = static_cast<std::size_t>(range.extent(axis));
    const std::size_t stride = range.stride(axis);
    const std::size_t lines = range.count() / extent;
    parallel_for(0, lines, threads, [&](std::size_t lo, std::size_t hi) {
      std::vector<std::int64_t> v, start, out;
      for (std::size_t l = lo; l < hi; ++l) {
        const std::size_t outer = l / stride;
        const std::size_t inner = l % stride;
        distance_1d(f.data() + outer * extent * stride + inner, extent, stride, v,
                    start, out);
      }
    });
  }
  return f;
}

void dilate_distance_transform(const CellRange& src_range,
                               std::span<const std::uint8_t> src,
                               const CellRange& dst_range,
                               std::span<std::uint8_t> dst,
                               std::int64_t max_square_index,
                               std::size_t modes, int threads) {
  check_sizes(src_range, src.size(), dst_range, dst.size(), dst_range.dim());
  std::fill(dst.begin(), dst.end(), std::uint8_t{0});
  if (src_range.empty() || dst_range.empty() || max_square_index < 0) return;

  const bool same = src_range == dst_range;
  const CellRange grid = same ? src_range : hull(src_range, dst_range);
  std::vector<std::size_t> src_to_grid, dst_to_grid;
  if (!same) {
    src_to_grid.resize(src_range.count());
    for (std::size_t c = 0; c < src_range.count(); ++c) {
      src_to_grid[c] = grid.index(src_range.cell_at(c));
    }
    dst_to_grid.resize(dst_range.count());
    for (std::size_t c = 0; c < dst_range.count(); ++c) {
      dst_to_grid[c] = grid.index(dst_range.cell_at(c));
    }
  }

  std::vector<std::uint8_t> features(grid.count());
  for (std::size_t p = 0; p < modes; ++p) {
    const auto bit = static_cast<std::uint8_t>(1u << p);
    std::fill(features.begin(), features.end(), std::uint8_t{0});
    for (std::size_t c = 0; c < src_range.count(); ++c) {
      if (src[c] & bit) features[same ? c : src_to_grid[c]] = 1;
    }
    const auto dist = squared_distance_transform(grid, features, threads);
    for (std::size_t c = 0; c < dst_range.count(); ++c) {
      if (dist[same ? c : dst_to_grid[c]] <= max_square_index) dst[c] |= bit;
    }
  }
}

}  // namespace qswitch
