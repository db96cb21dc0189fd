#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "qswitch/box.hpp"
#include "qswitch/linalg.hpp"

namespace qswitch {

using VectorField = std::function<Vec(const Vec&)>;

/* One mode of a switched system: either x' = A x + b, or an arbitrary
 * vector field integrated numerically. */
struct ModeDynamics {
  enum class Kind { Affine, Generic };

  Kind kind = Kind::Affine;
  Mat A;
  Vec b;
  VectorField field;
  int n = 0;

  static ModeDynamics affine(Mat a, Vec b);
  static ModeDynamics generic(int n, VectorField f);

  bool is_affine() const { return kind == Kind::Affine; }
  Vec evaluate(const Vec& x) const;
};

class SwitchedSystem {
 public:
  explicit SwitchedSystem(std::vector<ModeDynamics> modes);

  int dim() const { return n_; }
  std::size_t mode_count() const { return modes_.size(); }
  const ModeDynamics& mode(std::size_t p) const { return modes_.at(p); }
  const std::vector<ModeDynamics>& modes() const { return modes_; }
  bool all_affine() const;

 private:
  int n_ = 0;
  std::vector<ModeDynamics> modes_;
};

/* K-infinity function r -> c * r^e restricted to power form so it can be
 * inverted in closed form. */
struct PowerKInf {
  double c = 1.0;
  double e = 1.0;

  double operator()(double r) const;
  double inverse(double s) const;
  void validate() const;

  friend bool operator==(const PowerKInf&, const PowerKInf&) = default;
};

/* Quadratic incremental Lyapunov function V(x, y) = (x-y)^T M (x-y) with its
 * comparison functions and decay rate. */
struct LyapunovCertificate {
  Mat M;
  PowerKInf alpha_lo;
  PowerKInf alpha_hi;
  PowerKInf gamma;
  double kappa = 0.0;

  double value(const Vec& x, const Vec& y) const;
  bool metric_is_identity() const;
  void validate(int n) const;
};

struct SamplingParams {
  double tau = 0.0;
  double eta = 0.0;
  double epsilon = 0.0;

  void validate() const;
};

struct FlowOptions {
  int substeps = 1000;
};

/* Exact sampled-time map of an affine mode, x -> transition * x + offset,
 * taken from exp of the augmented matrix [[A, b], [0, 0]] * tau. */
struct AffineFlow {
  Mat transition;
  Vec offset;

  Vec apply(const Vec& x) const;
};

AffineFlow affine_flow(const ModeDynamics& mode, double tau);

Vec flow_exact(const ModeDynamics& mode, const Vec& x, double tau);
Vec flow_rk4(const ModeDynamics& mode, const Vec& x, double tau, int substeps);

/* Exact for affine modes, RK4 otherwise. */
Vec flow(const ModeDynamics& mode, const Vec& x, double tau,
         const FlowOptions& opts = {});

/* Right-hand side of the precision condition:
 *   eta + alpha_lo^{-1}((gamma(2 eta) + gamma(eta) e^{-kappa tau}) / (1 - e^{-kappa tau})) */
double precision_bound(const LyapunovCertificate& cert,
                       const SamplingParams& params);

bool check_precision(const LyapunovCertificate& cert,
                     const SamplingParams& params);

/* Largest eta for which check_precision holds, by bisection. */
double max_eta(const LyapunovCertificate& cert, double tau, double epsilon);

/* Tightest decay rate for V = |x - y|^2: -2 max_p lambda_max(sym(A_p)). */
double estimate_kappa(const SwitchedSystem& sys,
                      const LyapunovCertificate& cert);

struct CertificateReport {
  std::size_t samples = 0;
  std::size_t sandwich_violations = 0;
  std::size_t gamma_violations = 0;
  // Smallest slack seen; negative means a violated inequality.
  double worst_sandwich_margin = 0.0;
  double worst_gamma_margin = 0.0;
  // Informational: sampled violations of dV/dt <= -kappa V (affine modes only).
  std::size_t decay_violations = 0;
  double worst_decay_margin = 0.0;

  bool passed() const {
    return sandwich_violations == 0 && gamma_violations == 0;
  }
};

CertificateReport validate_certificate(const SwitchedSystem& sys,
                                       const LyapunovCertificate& cert,
                                       const Box& box, std::size_t samples);

/* Two-room building with a switchable heater. */
struct ThermalParameters {
  double a21 = 5e-2;
  double a12 = 5e-2;
  double ae1 = 5e-3;
  double ae2 = 3.3e-3;
  double af = 8.3e-3;
  double te = 10.0;
  double tf = 50.0;

  friend bool operator==(const ThermalParameters&, const ThermalParameters&) = default;
};

SwitchedSystem make_thermal_system(const ThermalParameters& p);

}  // namespace qswitch
