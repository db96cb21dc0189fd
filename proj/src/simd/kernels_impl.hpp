#pragma once

#include <cstddef>
#include <cstdint>

#include "qswitch/simd/kernels.hpp"

namespace qswitch::simd::detail {

// Scalar tail shared by the vector variants: fills out[begin, length).
void affine_quantize_scalar(const AffineRowArgs& args, std::size_t begin,
                            std::int32_t* out);

}  // namespace qswitch::simd::detail
