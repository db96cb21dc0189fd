#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "qswitch/abstraction.hpp"
#include "qswitch/simd/kernels.hpp"

using namespace qswitch;
using namespace qswitch::simd;

namespace {

const Kernels& scalar() { return scalar_kernels(); }

/* The vector variant, or the scalar one when AVX2 is unavailable so the
 * comparisons degenerate to self-checks. */
const Kernels& vectorized() {
  const Kernels* k = avx2_kernels();
  return k ? *k : scalar_kernels();
}

std::vector<std::uint32_t> random_packed(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::uint32_t> v(n);
  for (auto& x : v) {
    const std::uint32_t t = rng() % 5 == 0 ? kPackedInfTime : static_cast<std::uint32_t>(rng() % 6);
    x = (t << 8) | static_cast<std::uint32_t>(rng() % 256);
  }
  return v;
}

}  // namespace

TEST_CASE("simd: AVX2 availability matches the CPU") {
#if defined(__x86_64__)
  if (__builtin_cpu_supports("avx2")) {
    REQUIRE(avx2_kernels() != nullptr);
    CHECK(std::string(avx2_kernels()->name) == "avx2");
  }
#endif
  CHECK(std::string(scalar().name) == "scalar");
  CHECK(select_kernels("scalar"));
  CHECK(&active_kernels() == &scalar_kernels());
  CHECK_FALSE(select_kernels("neon"));
  if (avx2_kernels()) {
    CHECK(select_kernels("avx2"));
    CHECK(&active_kernels() == avx2_kernels());
  }
}

TEST_CASE("simd: OR accumulate") {
  std::mt19937_64 rng(1);
  for (std::size_t n : {0u, 1u, 7u, 31u, 32u, 33u, 100u, 1000u}) {
    std::vector<std::uint8_t> a(n), b(n), d0(n), d1(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<std::uint8_t>(rng());
      b[i] = static_cast<std::uint8_t>(rng());
      d0[i] = d1[i] = static_cast<std::uint8_t>(rng());
    }
    std::vector<std::uint8_t> want = d0;
    for (std::size_t i = 0; i < n; ++i) want[i] |= a[i] | b[i];
    scalar().accumulate_or(d0.data(), a.data(), b.data(), n);
    vectorized().accumulate_or(d1.data(), a.data(), b.data(), n);
    CHECK(d0 == want);
    CHECK(d1 == want);
  }
}

TEST_CASE("simd: packed min accumulate") {
  std::mt19937_64 rng(2);
  for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 63u, 500u}) {
    const auto a = random_packed(n, rng);
    const auto b = random_packed(n, rng);
    const auto d = random_packed(n, rng);
    std::vector<std::uint32_t> wu(n), wf(n);
    for (std::size_t i = 0; i < n; ++i) {
      wu[i] = packed_min_union(packed_min_union(d[i], a[i]), b[i]);
      wf[i] = packed_min_first(packed_min_first(d[i], a[i]), b[i]);
    }
    for (const Kernels* k : {&scalar(), &vectorized()}) {
      auto u = d, f = d;
      k->accumulate_min_union(u.data(), a.data(), b.data(), n);
      k->accumulate_min_first(f.data(), a.data(), b.data(), n);
      CHECK(u == wu);
      CHECK(f == wf);
    }
  }
}

TEST_CASE("simd: packed min helpers") {
  CHECK(packed_min_union((3u << 8) | 1u, (3u << 8) | 4u) == ((3u << 8) | 5u));
  CHECK(packed_min_union((2u << 8) | 1u, (3u << 8) | 4u) == ((2u << 8) | 1u));
  CHECK(packed_min_first((3u << 8) | 1u, (3u << 8) | 4u) == ((3u << 8) | 1u));
  CHECK(packed_min_first(kPackedIdentity, (9u << 8) | 2u) == ((9u << 8) | 2u));
}

TEST_CASE("simd: AND reduce") {
  std::mt19937_64 rng(3);
  for (std::size_t n : {0u, 1u, 31u, 32u, 33u, 64u, 1000u}) {
    std::vector<std::uint8_t> v(n);
    for (auto& x : v) x = static_cast<std::uint8_t>(rng() | 0xF0u | (rng() & 0x0Fu));
    std::uint8_t want = 0xFF;
    for (auto x : v) want &= x;
    CHECK(scalar().and_reduce(v.data(), n, 0xFF) == want);
    CHECK(vectorized().and_reduce(v.data(), n, 0xFF) == want);
    CHECK(vectorized().and_reduce(v.data(), n, 0x0F) == (want & 0x0F));
  }
}

TEST_CASE("simd: affine row kernel is bit-identical across variants") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n : {1, 2, 3, 5}) {
    for (int trial = 0; trial < 40; ++trial) {
      AffineRowArgs a;
      a.n = n;
      for (int i = 0; i < n * n; ++i) a.transition[i] = (i % (n + 1) == 0 ? 1.0 : 0.0) + 0.1 * u(rng);
      for (int i = 0; i < n; ++i) a.offset[i] = 3.0 * u(rng);
      a.spacing = 0.05 + 0.01 * (trial % 5);
      std::size_t stride = 1;
      for (int i = n - 1; i >= 0; --i) {
        a.kmin[i] = -40;
        a.kmax[i] = 40;
        a.stride[i] = static_cast<double>(stride);
        stride *= 81;
      }
      for (int i = 0; i + 1 < n; ++i) a.lead[i] = static_cast<std::int64_t>(rng() % 60) - 30;
      a.first = -40;
      a.length = 81 + trial % 9;
      std::vector<std::int32_t> s(a.length, 7), v(a.length, 9);
      scalar().affine_quantize_row(a, s.data());
      vectorized().affine_quantize_row(a, v.data());
      CHECK(s == v);
    }
  }
}

TEST_CASE("simd: non-finite images are flagged by both variants") {
  AffineRowArgs a;
  a.n = 1;
  a.transition[0] = 1e308;
  a.spacing = 1.0;
  a.kmin[0] = -10;
  a.kmax[0] = 10;
  a.stride[0] = 1;
  a.first = -2;
  a.length = 5;
  for (const Kernels* k : {&scalar(), &vectorized()}) {
    std::vector<std::int32_t> out(5);
    k->affine_quantize_row(a, out.data());
    CHECK(out[0] == kNonFiniteIndex);
    CHECK(out[1] == kOutIndex);
    CHECK(out[2] == 0 + 10);
    CHECK(out[4] == kNonFiniteIndex);
  }
}

TEST_CASE("simd: thermal abstraction identical under both variants") {
  const SwitchedSystem sys = make_thermal_system({});
  const Lattice lat(2, 0.0035);
  const Box box = cube(2, 17.5, 22.5);
  REQUIRE(select_kernels("scalar"));
  const SymbolicModel s = build_abstraction(sys, lat, box, 5.0);
  if (avx2_kernels()) REQUIRE(select_kernels("avx2"));
  const SymbolicModel v = build_abstraction(sys, lat, box, 5.0);
  CHECK(s.table() == v.table());
}
