#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "qswitch/ball_filter.hpp"
#include "qswitch/simd/kernels.hpp"

using namespace qswitch;

namespace {

/* Unit-spacing lattice in n dimensions and a Euclidean ball with the given
 * squared radius (in cells). */
RelationBall unit_ball(int n, double radius_sq) {
  const double eta = std::sqrt(static_cast<double>(n)) / 2.0;
  const Lattice lat(n, eta);
  const SamplingParams p{1.0, eta, eta + std::sqrt(radius_sq)};
  return RelationBall::build(lat, qtest::quadratic_cert(n, 1.0), p);
}

CellRange random_range(int n, std::mt19937_64& rng, int lo, int hi) {
  std::uniform_int_distribution<int> start(lo, lo + 3), len(1, hi);
  std::vector<std::int64_t> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = start(rng);
    b[i] = a[i] + len(rng) - 1;
  }
  return CellRange(a, b);
}

std::vector<std::uint8_t> random_masks(std::size_t count, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::uint8_t> v(count);
  for (auto& x : v) {
    if (u(rng) < density) x = static_cast<std::uint8_t>(1 + rng() % 7);
  }
  return v;
}

}  // namespace

TEST_CASE("ball filter: ball scan and distance transform equal brute force") {
  std::mt19937_64 rng(21);
  const std::vector<std::pair<int, double>> shapes = {
      {1, 0.5}, {1, 9.0}, {2, 0.5}, {2, 2.0}, {2, 5.3}, {2, 13.0}, {3, 3.0}, {3, 6.5}};
  for (const auto& [n, r2] : shapes) {
    const RelationBall ball = unit_ball(n, r2);
    const auto offsets = oracle::disc(n, ball.max_square_index());
    CHECK(ball.offsets() == offsets);
    for (int trial = 0; trial < 6; ++trial) {
      const int len = n == 3 ? 7 : (n == 2 ? 17 : 40);
      const CellRange src = random_range(n, rng, 0, len);
      const CellRange dst = random_range(n, rng, -2, len + 2);
      const auto masks = random_masks(src.count(), trial % 2 ? 0.05 : 0.4, rng);
      const auto want = oracle::dilate(src, masks, dst, offsets);
      for (int threads : {1, 3}) {
        std::vector<std::uint8_t> a(dst.count(), 0xAA), b(dst.count(), 0xAA);
        dilate_ball_scan(src, masks, dst, a, ball, threads);
        dilate_distance_transform(src, masks, dst, b, ball.max_square_index(), 3, threads);
        CHECK(a == want);
        CHECK(b == want);
      }
    }
  }
}

TEST_CASE("ball filter: same source and destination range") {
  std::mt19937_64 rng(8);
  const RelationBall ball = unit_ball(2, 8.0);
  const CellRange r({0, 0}, {30, 25});
  const auto masks = random_masks(r.count(), 0.02, rng);
  std::vector<std::uint8_t> a(r.count()), b(r.count());
  dilate_ball_scan(r, masks, r, a, ball);
  dilate_distance_transform(r, masks, r, b, ball.max_square_index(), 3);
  const auto want = oracle::dilate(r, masks, r, ball.offsets());
  CHECK(a == want);
  CHECK(b == want);
}

TEST_CASE("ball filter: packed min filter equals brute-force minimum") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& [n, r2] : std::vector<std::pair<int, double>>{{1, 4.0}, {2, 0.5}, {2, 5.0}, {2, 10.0}, {3, 2.0}}) {
    const RelationBall ball = unit_ball(n, r2);
    for (int trial = 0; trial < 6; ++trial) {
      const int len = n == 3 ? 6 : (n == 2 ? 15 : 40);
      const CellRange src = random_range(n, rng, 0, len);
      const CellRange dst = random_range(n, rng, -2, len + 2);
      std::vector<std::uint32_t> J(src.count()), packed(src.count());
      std::vector<std::uint8_t> K(src.count());
      for (std::size_t c = 0; c < src.count(); ++c) {
        if (u(rng) < 0.3) {
          J[c] = oracle::kInf;
          K[c] = 0;
          packed[c] = simd::kPackedIdentity;
        } else {
          J[c] = static_cast<std::uint32_t>(rng() % 4);
          K[c] = static_cast<std::uint8_t>(1 + rng() % 255);
          packed[c] = (J[c] << 8) | K[c];
        }
      }
      for (bool full : {true, false}) {
        const auto want = oracle::ball_min(src, J, K, dst, ball.offsets(), full);
        std::vector<std::uint32_t> out(dst.count());
        min_filter_packed(src, packed, dst, out, ball, full ? TieRule::Merge : TieRule::KeepFirst, 2);
        for (std::size_t c = 0; c < dst.count(); ++c) {
          if (want.J[c] == oracle::kInf) {
            CHECK(out[c] == simd::kPackedIdentity);
          } else {
            CHECK((out[c] >> 8) == want.J[c]);
            CHECK((out[c] & 0xFFu) == want.K[c]);
          }
        }
      }
    }
  }
}

TEST_CASE("squared distance transform equals brute force") {
  std::mt19937_64 rng(4);
  for (int n : {1, 2, 3}) {
    for (int trial = 0; trial < 8; ++trial) {
      const CellRange r = random_range(n, rng, -3, n == 3 ? 8 : 20);
      std::vector<std::uint8_t> f(r.count());
      for (auto& x : f) x = (rng() % 13) == 0;
      const auto d = squared_distance_transform(r, f, 1 + trial % 3);
      for (std::size_t c = 0; c < r.count(); ++c) {
        std::int64_t best = kNoFeature;
        const Cell q = r.cell_at(c);
        for (std::size_t g = 0; g < r.count(); ++g) {
          if (!f[g]) continue;
          const Cell p = r.cell_at(g);
          std::int64_t sq = 0;
          for (int i = 0; i < n; ++i) sq += (p.k[i] - q.k[i]) * (p.k[i] - q.k[i]);
          best = std::min(best, sq);
        }
        CHECK(d[c] == best);
      }
    }
  }
}
