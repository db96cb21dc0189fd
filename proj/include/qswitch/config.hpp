#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qswitch/box.hpp"
#include "qswitch/synthesis.hpp"
#include "qswitch/system_model.hpp"

namespace qswitch {

/* Problem description read from an INI-style file:
 *
 *   [system]       preset = thermal (with a21 a12 ae1 ae2 af te tf), or
 *                  dimension = n, modes = m, mode<p>.A = rows ';'-separated,
 *                  mode<p>.b = vector
 *   [certificate]  M = identity | matrix, alpha_lo / alpha_hi / gamma = c e,
 *                  kappa
 *   [params]       tau, eta (number or auto), epsilon
 *   [spec]         kind = safety | reach, safe.lo, safe.hi, target.lo,
 *                  target.hi
 *   [runtime]      substeps, threads, seed
 *
 * Lines starting with '#' or ';' are comments. */
struct AffineModeSpec {
  Mat A;
  Vec b;
  friend bool operator==(const AffineModeSpec&, const AffineModeSpec&) = default;
};

struct ProblemConfig {
  bool thermal = false;
  ThermalParameters thermal_params;
  int dimension = 0;
  std::vector<AffineModeSpec> modes;  // explicit systems only

  LyapunovCertificate cert;

  double tau = 0.0;
  std::optional<double> eta;  // nullopt means "auto"
  double epsilon = 0.0;

  SpecKind kind = SpecKind::Safety;
  Box safe;
  std::optional<Box> target;

  int substeps = 1000;
  int threads = 0;
  std::uint64_t seed = 1;

  SwitchedSystem build_system() const;
  /* eta, or the largest admissible eta when set to auto. */
  double resolved_eta() const;
  SamplingParams params() const;
};

ProblemConfig parse_config(std::string_view text);
ProblemConfig load_config(const std::string& path);
/* Canonical text; parse_config(format_config(c)) reproduces c exactly. */
std::string format_config(const ProblemConfig& cfg);

/* Shortest decimal that parses back to the same double. */
std::string format_number(double v);
double parse_number(std::string_view text);

}  // namespace qswitch
