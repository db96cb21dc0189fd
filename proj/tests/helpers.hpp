#pragma once

#include <cmath>
#include <initializer_list>
#include <random>
#include <vector>

#include "qswitch/abstraction.hpp"
#include "qswitch/lattice.hpp"
#include "qswitch/system_model.hpp"

namespace qtest {

using namespace qswitch;

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

/* V = |x - y|^2 with alpha_lo = alpha_hi = gamma = r^2. */
inline LyapunovCertificate quadratic_cert(int n, double kappa) {
  LyapunovCertificate c;
  c.M = Mat::Identity(n, n);
  c.alpha_lo = {1.0, 2.0};
  c.alpha_hi = {1.0, 2.0};
  c.gamma = {1.0, 2.0};
  c.kappa = kappa;
  return c;
}

inline LyapunovCertificate thermal_cert() { return quadratic_cert(2, 0.0084); }

/* Lattice with spacing exactly 1 in one dimension. */
inline Lattice unit_lattice_1d() { return Lattice(1, 0.5); }

/* Hand-built 1-D model over [kmin, kmax] from per-mode shift amounts. */
inline SymbolicModel shift_model_1d(std::int64_t kmin, std::int64_t kmax,
                                    const std::vector<std::int64_t>& shifts) {
  const CellRange d({kmin}, {kmax});
  std::vector<std::int32_t> succ;
  for (std::int64_t sh : shifts) {
    for (std::int64_t k = kmin; k <= kmax; ++k) {
      const std::int64_t t = k + sh;
      succ.push_back(t < kmin || t > kmax ? SymbolicModel::kOut
                                          : static_cast<std::int32_t>(t - kmin));
    }
  }
  return SymbolicModel(unit_lattice_1d(), d, shifts.size(), 1.0, succ);
}

/* Random successor table over a 2-D range; out_rate is the chance of OUT. */
inline SymbolicModel random_model_2d(std::int64_t w, std::int64_t h, std::size_t modes,
                                     double out_rate, std::uint64_t seed, int reach = 2) {
  const CellRange d({0, 0}, {w - 1, h - 1});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> step(-reach, reach);
  std::vector<std::int32_t> succ(d.count() * modes);
  for (std::size_t p = 0; p < modes; ++p) {
    for (std::size_t c = 0; c < d.count(); ++c) {
      const Cell q = d.cell_at(c);
      Cell t = q;
      t.k[0] += step(rng);
      t.k[1] += step(rng);
      succ[p * d.count() + c] = (u(rng) < out_rate || !d.contains(t))
                                    ? SymbolicModel::kOut
                                    : static_cast<std::int32_t>(d.index(t));
    }
  }
  return SymbolicModel(Lattice(2, std::sqrt(2.0) / 2.0), d, modes, 1.0, succ);
}

}  // namespace qtest
