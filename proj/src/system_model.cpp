#include "qswitch/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "qswitch/error.hpp"

namespace qswitch {

namespace {

void require_finite(const Vec& v, const char* where) {
  if (!v.allFinite()) {
    throw Error(ErrorKind::IntegrationOverflow,
                std::string("non-finite state in ") + where);
  }
}

std::vector<int> first_primes(std::size_t count) {
  std::vector<int> primes;
  for (int c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (int p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

double radical_inverse(std::size_t i, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (i > 0) {
    result += f * static_cast<double>(i % base);
    i /= base;
    f /= base;
  }
  return result;
}

}  // namespace

Box::Box(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size()) {
    throw Error(ErrorKind::InvalidArgument, "box bounds differ in dimension");
  }
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) {
      throw Error(ErrorKind::EmptySpec, "box is empty on axis " +
                                            std::to_string(i));
    }
  }
}

bool Box::contains(const Vec& x) const {
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
  }
  return true;
}

Box cube(int n, double lo, double hi) {
  return Box(Vec::Constant(n, lo), Vec::Constant(n, hi));
}

ModeDynamics ModeDynamics::affine(Mat a, Vec b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw Error(ErrorKind::InvalidArgument, "affine mode dimension mismatch");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "affine mode has non-finite data");
  }
  ModeDynamics m;
  m.kind = Kind::Affine;
  m.n = static_cast<int>(b.size());
  m.A = std::move(a);
  m.b = std::move(b);
  return m;
}

ModeDynamics ModeDynamics::generic(int n, VectorField f) {
  if (n <= 0 || !f) {
    throw Error(ErrorKind::InvalidArgument, "generic mode needs n > 0 and a field");
  }
  ModeDynamics m;
  m.kind = Kind::Generic;
  m.n = n;
  m.field = std::move(f);
  return m;
}

Vec ModeDynamics::evaluate(const Vec& x) const {
  if (kind == Kind::Affine) return A * x + b;
  return field(x);
}

SwitchedSystem::SwitchedSystem(std::vector<ModeDynamics> modes)
    : modes_(std::move(modes)) {
  if (modes_.empty()) {
    throw Error(ErrorKind::InvalidArgument, "switched system needs a mode");
  }
  if (modes_.size() > 8) {
    throw Error(ErrorKind::InvalidArgument, "at most 8 modes are supported");
  }
  n_ = modes_.front().n;
  for (const auto& m : modes_) {
    if (m.n != n_) {
      throw Error(ErrorKind::InvalidArgument, "modes differ in dimension");
    }
  }
}

bool SwitchedSystem::all_affine() const {
  return std::all_of(modes_.begin(), modes_.end(),
                     [](const ModeDynamics& m) { return m.is_affine(); });
}

double PowerKInf::operator()(double r) const { return c * std::pow(r, e); }

double PowerKInf::inverse(double s) const { return std::pow(s / c, 1.0 / e); }

void PowerKInf::validate() const {
  if (!(c > 0.0) || !(e >= 1.0) || !std::isfinite(c) || !std::isfinite(e)) {
    throw Error(ErrorKind::InvalidArgument,
                "class-K-infinity power needs c > 0 and e >= 1");
  }
}

double LyapunovCertificate::value(const Vec& x, const Vec& y) const {
  const Vec d = x - y;
  return d.dot(M * d);
}

bool LyapunovCertificate::metric_is_identity() const {
  return M == Mat::Identity(M.rows(), M.cols());
}

void LyapunovCertificate::validate(int n) const {
  if (M.rows() != n || M.cols() != n) {
    throw Error(ErrorKind::InvalidArgument, "certificate metric has wrong size");
  }
  if (!is_symmetric_positive_definite(M)) {
    throw Error(ErrorKind::InvalidArgument,
                "certificate metric is not symmetric positive definite");
  }
  alpha_lo.validate();
  alpha_hi.validate();
  gamma.validate();
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw Error(ErrorKind::InvalidArgument, "kappa must be positive");
  }
}

void SamplingParams::validate() const {
  if (!(tau > 0.0) || !(eta > 0.0) || !(epsilon > eta) ||
      !std::isfinite(tau) || !std::isfinite(epsilon)) {
    throw Error(ErrorKind::InvalidArgument,
                "sampling parameters need tau > 0 and epsilon > eta > 0");
  }
}

Vec AffineFlow::apply(const Vec& x) const { return transition * x + offset; }

AffineFlow affine_flow(const ModeDynamics& mode, double tau) {
  if (!mode.is_affine()) {
    throw Error(ErrorKind::InvalidArgument, "exact flow needs an affine mode");
  }
  if (!(tau > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "tau must be positive");
  }
  const int n = mode.n;
  Mat aug = Mat::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = mode.A * tau;
  aug.topRightCorner(n, 1) = mode.b * tau;
  const Mat e = expm(aug);
  AffineFlow f{e.topLeftCorner(n, n), e.topRightCorner(n, 1)};
  if (!f.transition.allFinite() || !f.offset.allFinite()) {
    throw Error(ErrorKind::IntegrationOverflow, "matrix exponential overflowed");
  }
  return f;
}

Vec flow_exact(const ModeDynamics& mode, const Vec& x, double tau) {
  Vec y = affine_flow(mode, tau).apply(x);
  require_finite(y, "flow_exact");
  return y;
}

Vec flow_rk4(const ModeDynamics& mode, const Vec& x, double tau, int substeps) {
  if (substeps < 1) {
    throw Error(ErrorKind::InvalidArgument, "substeps must be >= 1");
  }
  const double h = tau / substeps;
  Vec y = x;
  for (int i = 0; i < substeps; ++i) {
    const Vec k1 = mode.evaluate(y);
    const Vec k2 = mode.evaluate(y + 0.5 * h * k1);
    const Vec k3 = mode.evaluate(y + 0.5 * h * k2);
    const Vec k4 = mode.evaluate(y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    require_finite(y, "flow_rk4");
  }
  return y;
}

Vec flow(const ModeDynamics& mode, const Vec& x, double tau,
         const FlowOptions& opts) {
  if (mode.is_affine()) return flow_exact(mode, x, tau);
  return flow_rk4(mode, x, tau, opts.substeps);
}

double precision_bound(const LyapunovCertificate& cert,
                       const SamplingParams& params) {
  const double decay = std::exp(-cert.kappa * params.tau);
  const double eta = params.eta;
  const double inner =
      (cert.gamma(2.0 * eta) + cert.gamma(eta) * decay) / (1.0 - decay);
  return eta + cert.alpha_lo.inverse(inner);
}

bool check_precision(const LyapunovCertificate& cert,
                     const SamplingParams& params) {
  return params.epsilon >= precision_bound(cert, params);
}

double max_eta(const LyapunovCertificate& cert, double tau, double epsilon) {
  if (!(epsilon > 0.0)) return 0.0;
  auto ok = [&](double eta) {
    return precision_bound(cert, SamplingParams{tau, eta, epsilon}) <= epsilon;
  };
  // The bound is >= eta, so the answer lies in (0, epsilon).
  double lo = 0.0;
  double hi = epsilon;
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (ok(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double estimate_kappa(const SwitchedSystem& sys,
                      const LyapunovCertificate& cert) {
  if (!sys.all_affine()) {
    throw Error(ErrorKind::InvalidArgument, "kappa estimate needs affine modes");
  }
  if (!cert.metric_is_identity()) {
    throw Error(ErrorKind::InvalidArgument, "kappa estimate needs M = I");
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& m : sys.modes()) {
    worst = std::max(worst, max_symmetric_eigenvalue(m.A));
  }
  const double kappa = -2.0 * worst;
  if (!(kappa > 0.0)) {
    throw Error(ErrorKind::NotIncrementallyStable,
                "no positive decay rate: a mode has a non-negative symmetric "
                "eigenvalue");
  }
  return kappa;
}

CertificateReport validate_certificate(const SwitchedSystem& sys,
                                       const LyapunovCertificate& cert,
                                       const Box& box, std::size_t samples) {
  if (samples < 1) {
    throw Error(ErrorKind::InvalidArgument, "samples must be >= 1");
  }
  const int n = sys.dim();
  const auto primes = first_primes(4 * static_cast<std::size_t>(n));

  CertificateReport rep;
  rep.samples = samples;
  rep.worst_sandwich_margin = std::numeric_limits<double>::infinity();
  rep.worst_gamma_margin = std::numeric_limits<double>::infinity();
  rep.worst_decay_margin = std::numeric_limits<double>::infinity();

  auto tolerance = [](double scale) { return 1e-9 * std::max(1.0, scale); };

  std::vector<Vec> pts(4, Vec(n));
  for (std::size_t s = 1; s <= samples; ++s) {
    for (int j = 0; j < 4; ++j) {
      for (int i = 0; i < n; ++i) {
        const double u = radical_inverse(s, primes[j * n + i]);
        pts[j][i] = box.lo[i] + u * (box.hi[i] - box.lo[i]);
      }
    }
    const Vec& x1 = pts[0];
    const Vec& x2 = pts[1];
    const Vec& y1 = pts[2];
    const Vec& y2 = pts[3];

    const double v = cert.value(x1, x2);
    const double r = (x1 - x2).norm();
    const double lower = v - cert.alpha_lo(r);
    const double upper = cert.alpha_hi(r) - v;
    const double sandwich = std::min(lower, upper);
    rep.worst_sandwich_margin = std::min(rep.worst_sandwich_margin, sandwich);
    if (sandwich < -tolerance(v)) ++rep.sandwich_violations;

    const double dv = std::abs(v - cert.value(y1, y2));
    const double g = cert.gamma((x1 - y1).norm() + (x2 - y2).norm());
    const double gm = g - dv;
    rep.worst_gamma_margin = std::min(rep.worst_gamma_margin, gm);
    if (gm < -tolerance(dv)) ++rep.gamma_violations;

    const Vec d = x1 - x2;
    for (const auto& m : sys.modes()) {
      if (!m.is_affine()) continue;
      const Mat lie = m.A.transpose() * cert.M + cert.M * m.A;
      const double rate = d.dot(lie * d);
      const double margin = -cert.kappa * v - rate;
      rep.worst_decay_margin = std::min(rep.worst_decay_margin, margin);
      if (margin < -tolerance(v)) ++rep.decay_violations;
    }
  }
  return rep;
}

SwitchedSystem make_thermal_system(const ThermalParameters& p) {
  Mat a0(2, 2);
  a0 << -p.a21 - p.ae1, p.a21, p.a12, -p.a12 - p.ae2;
  Vec b0(2);
  b0 << p.ae1 * p.te, p.ae2 * p.te;

  Mat a1 = a0;
  a1(0, 0) -= p.af;
  Vec b1 = b0;
  b1[0] += p.af * p.tf;

  return SwitchedSystem({ModeDynamics::affine(a0, b0),
                         ModeDynamics::affine(a1, b1)});
}

}  // namespace qswitch
