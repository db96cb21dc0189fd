#pragma once

#include <cstddef>
#include <cstdint>

// Row kernels for the grid-sized inner loops. Every kernel has a portable
// scalar reference; an AVX2 variant is compiled on x86-64 and selected at
// runtime when the CPU supports it. Variants produce bit-identical output.

namespace qswitch::simd {

inline constexpr int kMaxDim = 8;

// Successor index written for cells whose image leaves the domain.
inline constexpr std::int32_t kOutIndex = -1;
// Written when the image is not finite; callers turn it into an error.
inline constexpr std::int32_t kNonFiniteIndex = -2;

/* One row of cells sharing the leading n-1 lattice coordinates, mapped through
 * an exact affine step and quantized back into a cell range. */
struct AffineRowArgs {
  int n = 0;
  double transition[kMaxDim * kMaxDim] = {};  // row-major n x n
  double offset[kMaxDim] = {};
  double spacing = 0.0;
  std::int64_t lead[kMaxDim] = {};  // coordinates 0..n-2 of the row
  std::int64_t first = 0;           // last-axis coordinate of element 0
  std::size_t length = 0;
  // Target domain.
  double kmin[kMaxDim] = {};
  double kmax[kMaxDim] = {};
  double stride[kMaxDim] = {};
};

// Packed reach values: entry time in the upper 24 bits, mode set in the low 8.
inline constexpr std::uint32_t kPackedInfTime = 0xFFFFFFu;
inline constexpr std::uint32_t kPackedIdentity = kPackedInfTime << 8;

// Smaller time wins; equal times merge mode sets.
inline std::uint32_t packed_min_union(std::uint32_t a, std::uint32_t b) {
  const std::uint32_t ta = a >> 8;
  const std::uint32_t tb = b >> 8;
  if (ta < tb) return a;
  if (tb < ta) return b;
  return a | b;
}

// Smaller time wins; ties keep the left operand.
inline std::uint32_t packed_min_first(std::uint32_t a, std::uint32_t b) {
  return (b >> 8) < (a >> 8) ? b : a;
}

struct Kernels {
  const char* name;

  // dst[i] |= a[i] | b[i]
  void (*accumulate_or)(std::uint8_t* dst, const std::uint8_t* a,
                        const std::uint8_t* b, std::size_t n);

  // dst[i] = dst[i] (+) a[i] (+) b[i] with (+) = smaller time wins, equal
  // times merge their mode sets.
  void (*accumulate_min_union)(std::uint32_t* dst, const std::uint32_t* a,
                               const std::uint32_t* b, std::size_t n);

  // Same but ties keep the left operand.
  void (*accumulate_min_first)(std::uint32_t* dst, const std::uint32_t* a,
                               const std::uint32_t* b, std::size_t n);

  // init & src[0] & ... & src[n-1]
  std::uint8_t (*and_reduce)(const std::uint8_t* src, std::size_t n,
                             std::uint8_t init);

  void (*affine_quantize_row)(const AffineRowArgs& args, std::int32_t* out);
};

const Kernels& scalar_kernels();

// nullptr when the AVX2 variant is not built or the CPU lacks AVX2.
const Kernels* avx2_kernels();

// The variant used by the library. Defaults to the best supported one;
// QSWITCH_SIMD=scalar in the environment forces the scalar path.
const Kernels& active_kernels();

// Test hook: select a variant by name ("scalar" or "avx2"). Returns false if
// the variant is unavailable.
bool select_kernels(const char* name);

}  // namespace qswitch::simd
