// Compiled with -mavx2 (no FMA, so products and sums round exactly as in the
// scalar reference). Nothing here may call inline functions shared with
// other translation units.

#include <immintrin.h>

#include "qswitch/simd/kernels.hpp"
#include "simd/kernels_impl.hpp"

namespace qswitch::simd {

namespace {

void accumulate_or(std::uint8_t* dst, const std::uint8_t* a,
                   const std::uint8_t* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    __m256i vd = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
    vd = _mm256_or_si256(vd, _mm256_or_si256(va, vb));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), vd);
  }
  for (; i < n; ++i) dst[i] |= a[i] | b[i];
}

inline __m256i min_union8(__m256i a, __m256i b) {
  const __m256i ta = _mm256_srli_epi32(a, 8);
  const __m256i tb = _mm256_srli_epi32(b, 8);
  const __m256i a_less = _mm256_cmpgt_epi32(tb, ta);
  const __m256i b_less = _mm256_cmpgt_epi32(ta, tb);
  const __m256i equal = _mm256_cmpeq_epi32(ta, tb);
  return _mm256_or_si256(
      _mm256_or_si256(_mm256_and_si256(a, a_less), _mm256_and_si256(b, b_less)),
      _mm256_and_si256(_mm256_or_si256(a, b), equal));
}

inline __m256i min_first8(__m256i a, __m256i b) {
  const __m256i b_less =
      _mm256_cmpgt_epi32(_mm256_srli_epi32(a, 8), _mm256_srli_epi32(b, 8));
  return _mm256_blendv_epi8(a, b, b_less);
}

std::uint32_t min_union1(std::uint32_t a, std::uint32_t b) {
  const std::uint32_t ta = a >> 8;
  const std::uint32_t tb = b >> 8;
  if (ta < tb) return a;
  if (tb < ta) return b;
  return a | b;
}

std::uint32_t min_first1(std::uint32_t a, std::uint32_t b) {
  return (b >> 8) < (a >> 8) ? b : a;
}

void accumulate_min_union(std::uint32_t* dst, const std::uint32_t* a,
                          const std::uint32_t* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    const __m256i vd = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i),
                        min_union8(min_union8(vd, va), vb));
  }
  for (; i < n; ++i) dst[i] = min_union1(min_union1(dst[i], a[i]), b[i]);
}

void accumulate_min_first(std::uint32_t* dst, const std::uint32_t* a,
                          const std::uint32_t* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    const __m256i vd = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i),
                        min_first8(min_first8(vd, va), vb));
  }
  for (; i < n; ++i) dst[i] = min_first1(min_first1(dst[i], a[i]), b[i]);
}

std::uint8_t and_reduce(const std::uint8_t* src, std::size_t n,
                        std::uint8_t init) {
  std::size_t i = 0;
  std::uint8_t acc = init;
  if (n >= 32) {
    __m256i v = _mm256_set1_epi8(static_cast<char>(init));
    for (; i + 32 <= n; i += 32) {
      v = _mm256_and_si256(
          v, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i)));
    }
    alignas(32) std::uint8_t lanes[32];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), v);
    for (std::uint8_t l : lanes) acc &= l;
  }
  for (; i < n; ++i) acc &= src[i];
  return acc;
}

void affine_quantize_row(const AffineRowArgs& a, std::int32_t* out) {
  const int n = a.n;
  double partial[kMaxDim];
  for (int i = 0; i < n; ++i) {
    const double* row = a.transition + i * n;
    double acc = 0.0;
    for (int j = 0; j + 1 < n; ++j) {
      acc = acc + row[j] * (static_cast<double>(a.lead[j]) * a.spacing);
    }
    partial[i] = acc;
  }

  const __m256d spacing = _mm256_set1_pd(a.spacing);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d lane = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);

  std::size_t e = 0;
  for (; e + 4 <= a.length; e += 4) {
    const __m256d kl = _mm256_add_pd(
        _mm256_set1_pd(static_cast<double>(a.first + static_cast<std::int64_t>(e))),
        lane);
    const __m256d last = _mm256_mul_pd(kl, spacing);
    __m256d index = zero;
    __m256d inside = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
    __m256d finite = inside;
    for (int i = 0; i < n; ++i) {
      __m256d acc = _mm256_set1_pd(partial[i]);
      acc = _mm256_add_pd(
          acc, _mm256_mul_pd(_mm256_set1_pd(a.transition[i * n + n - 1]), last));
      acc = _mm256_add_pd(acc, _mm256_set1_pd(a.offset[i]));
      finite = _mm256_and_pd(
          finite, _mm256_cmp_pd(_mm256_sub_pd(acc, acc), zero, _CMP_EQ_OQ));
      const __m256d k = _mm256_floor_pd(_mm256_add_pd(_mm256_div_pd(acc, spacing), half));
      const __m256d kmin = _mm256_set1_pd(a.kmin[i]);
      inside = _mm256_and_pd(inside, _mm256_cmp_pd(k, kmin, _CMP_GE_OQ));
      inside = _mm256_and_pd(
          inside, _mm256_cmp_pd(k, _mm256_set1_pd(a.kmax[i]), _CMP_LE_OQ));
      index = _mm256_add_pd(
          index, _mm256_mul_pd(_mm256_sub_pd(k, kmin), _mm256_set1_pd(a.stride[i])));
    }
    alignas(32) double idx[4];
    _mm256_store_pd(idx, index);
    const int in_mask = _mm256_movemask_pd(inside);
    const int fin_mask = _mm256_movemask_pd(finite);
    for (int l = 0; l < 4; ++l) {
      out[e + l] = !((fin_mask >> l) & 1)  ? kNonFiniteIndex
                   : ((in_mask >> l) & 1) ? static_cast<std::int32_t>(idx[l])
                                          : kOutIndex;
    }
  }
  if (e < a.length) detail::affine_quantize_scalar(a, e, out);
}

}  // namespace

const Kernels* avx2_kernels_impl() {
  static const Kernels k{"avx2",           accumulate_or,
                         accumulate_min_union, accumulate_min_first,
                         and_reduce,       affine_quantize_row};
  return &k;
}

}  // namespace qswitch::simd
