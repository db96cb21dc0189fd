#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qswitch/lattice.hpp"

namespace qswitch {

/* Filters over the relation ball: dst[q] = fold of src[q + d] for every ball
 * offset d, where cells outside src_range contribute the identity. The ball
 * is decomposed into last-axis spans; each span is a sliding-window pass over
 * one source row (van Herk / Gil-Werman), so the cost per span is linear in
 * the row length regardless of the window width. */

/* Mode-mask dilation: bitwise OR over the ball. */
void dilate_ball_scan(const CellRange& src_range,
                      std::span<const std::uint8_t> src,
                      const CellRange& dst_range, std::span<std::uint8_t> dst,
                      const RelationBall& ball, int threads = 0);

/* Same result as dilate_ball_scan for Euclidean balls, computed per mode from
 * an exact squared Euclidean distance transform. */
void dilate_distance_transform(const CellRange& src_range,
                               std::span<const std::uint8_t> src,
                               const CellRange& dst_range,
                               std::span<std::uint8_t> dst,
                               std::int64_t max_square_index,
                               std::size_t modes, int threads = 0);

enum class TieRule {
  Merge,      // equal times merge their mode sets
  KeepFirst,  // equal times keep the lexicographically first offset
};

/* Minimum over the ball of packed (time << 8 | modes) values. */
void min_filter_packed(const CellRange& src_range,
                       std::span<const std::uint32_t> src,
                       const CellRange& dst_range, std::span<std::uint32_t> dst,
                       const RelationBall& ball, TieRule ties, int threads = 0);

inline constexpr std::int64_t kNoFeature = INT64_MAX / 4;

/* Exact squared distance (in lattice units) from every cell of the range to
 * the nearest cell with features[c] != 0; kNoFeature if there is none. */
std::vector<std::int64_t> squared_distance_transform(
    const CellRange& range, std::span<const std::uint8_t> features,
    int threads = 0);

}  // namespace qswitch
