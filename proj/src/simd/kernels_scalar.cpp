#include <cmath>

#include "qswitch/simd/kernels.hpp"
#include "simd/kernels_impl.hpp"

namespace qswitch::simd {

namespace {

void accumulate_or(std::uint8_t* dst, const std::uint8_t* a,
                   const std::uint8_t* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] |= a[i] | b[i];
}

void accumulate_min_union(std::uint32_t* dst, const std::uint32_t* a,
                          const std::uint32_t* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    dst[i] = packed_min_union(packed_min_union(dst[i], a[i]), b[i]);
  }
}

void accumulate_min_first(std::uint32_t* dst, const std::uint32_t* a,
                          const std::uint32_t* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    dst[i] = packed_min_first(packed_min_first(dst[i], a[i]), b[i]);
  }
}

std::uint8_t and_reduce(const std::uint8_t* src, std::size_t n,
                        std::uint8_t init) {
  std::uint8_t acc = init;
  for (std::size_t i = 0; i < n; ++i) acc &= src[i];
  return acc;
}

}  // namespace

void detail::affine_quantize_scalar(const AffineRowArgs& a, std::size_t begin,
                                    std::int32_t* out) {
  const int n = a.n;
  double lead_center[kMaxDim];
  for (int j = 0; j + 1 < n; ++j) {
    lead_center[j] = static_cast<double>(a.lead[j]) * a.spacing;
  }
  for (std::size_t e = begin; e < a.length; ++e) {
    const double last =
        static_cast<double>(a.first + static_cast<std::int64_t>(e)) * a.spacing;
    double index = 0.0;
    bool inside = true;
    bool finite = true;
    for (int i = 0; i < n; ++i) {
      const double* row = a.transition + i * n;
      double acc = 0.0;
      for (int j = 0; j + 1 < n; ++j) acc = acc + row[j] * lead_center[j];
      acc = acc + row[n - 1] * last;
      acc = acc + a.offset[i];
      if (!std::isfinite(acc)) finite = false;
      const double k = std::floor(acc / a.spacing + 0.5);
      if (!(k >= a.kmin[i] && k <= a.kmax[i])) inside = false;
      index = index + (k - a.kmin[i]) * a.stride[i];
    }
    out[e] = !finite   ? kNonFiniteIndex
             : inside ? static_cast<std::int32_t>(index)
                      : kOutIndex;
  }
}

namespace {

void affine_quantize_row(const AffineRowArgs& args, std::int32_t* out) {
  detail::affine_quantize_scalar(args, 0, out);
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{"scalar",           accumulate_or,
                         accumulate_min_union, accumulate_min_first,
                         and_reduce,         affine_quantize_row};
  return k;
}

}  // namespace qswitch::simd
