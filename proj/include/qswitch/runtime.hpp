#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "qswitch/box.hpp"
#include "qswitch/determinizer.hpp"
#include "qswitch/lattice.hpp"
#include "qswitch/mode_set.hpp"
#include "qswitch/synthesis.hpp"
#include "qswitch/system_model.hpp"

namespace qswitch {

struct Specification {
  SpecKind kind = SpecKind::Safety;
  Box safe;
  std::optional<Box> target;  // reach only

  static Specification safety(Box safe);
  static Specification reach(Box safe, Box target);

  bool in_safe(const Vec& x) const { return safe.contains(x); }
  bool in_target(const Vec& x) const { return target && target->contains(x); }
};

/* Closed-loop controller x -> set of modes.
 *   tree, safety: {K_d(Q(x))} on the safe box, else empty
 *   tree, reach:  {K_d(Q(x))} on safe minus target, else every mode
 *   array, safety: K(Q(x)) on the safe box, else empty
 *   array, reach:  K(Q(x)) on safe minus target when nonempty, else every mode */
class Controller {
 public:
  enum class Variant { Array, Tree };

  static Controller from_array(RefinedController K, Lattice lat, Specification spec);
  static Controller from_tree(DecisionTree tree, Lattice lat, Specification spec);

  Variant variant() const { return variant_; }
  const Specification& spec() const { return spec_; }
  const Lattice& lattice() const { return lat_; }
  std::size_t mode_count() const { return modes_; }

  ModeSet enabled(const Vec& x) const;

 private:
  Controller(Variant v, Lattice lat, Specification spec, std::size_t modes);

  Variant variant_;
  Lattice lat_;
  Specification spec_;
  std::size_t modes_;
  std::optional<RefinedController> array_;
  std::optional<DecisionTree> tree_;
};

inline constexpr int kBlocked = -1;

/* Lowest enabled mode, or kBlocked. */
int step(const Controller& ctrl, const Vec& x);
/* Uniformly chosen enabled mode, or kBlocked. */
int step(const Controller& ctrl, const Vec& x, std::mt19937_64& rng);

/* Uniform double in [0, 1) from the top 53 bits; identical on every platform. */
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/* Sampled-time plant with the per-mode affine maps computed once. */
class SampledPlant {
 public:
  SampledPlant(const SwitchedSystem& sys, double tau, FlowOptions opts = {});
  Vec next(const Vec& x, std::size_t mode) const;
  std::size_t mode_count() const { return sys_->mode_count(); }

 private:
  const SwitchedSystem* sys_;
  double tau_;
  FlowOptions opts_;
  std::vector<std::optional<AffineFlow>> affine_;
};

/* modes[i] is the mode applied at states[i]; the last state has none. */
struct Trajectory {
  std::vector<Vec> states;
  std::vector<int> modes;
  bool blocked = false;

  std::size_t length() const { return states.size(); }
};

struct RunOptions {
  bool random_selection = false;
  std::uint64_t seed = 0;
};

Trajectory run_closed_loop(const SampledPlant& plant, const Controller& ctrl,
                           const Vec& x0, std::size_t steps, const RunOptions& opts = {});

inline constexpr std::size_t kNeverEntered = SIZE_MAX;

/* Smallest k with states[0..k] in Y_S and states[k] in Y_T, else kNeverEntered. */
std::size_t entry_time(const Trajectory& traj, const Box& safe, const Box& target);

struct MonteCarloOptions {
  std::size_t runs = 100;
  std::size_t steps = 500;
  std::uint64_t seed = 1;
  bool random_selection = false;
  // Rejection-sampling budget per run for drawing a start inside the domain.
  std::size_t max_draws = 100000;
};

struct MonteCarloReport {
  std::size_t runs = 0;
  std::size_t starts_not_found = 0;
  // Safety: runs that left Y_S or blocked.
  std::size_t safety_violations = 0;
  std::size_t blocked_runs = 0;
  // States where the applied mode was not in K(Q(x)) although K was nonempty.
  std::size_t membership_violations = 0;
  // Reach: runs whose entry time exceeded J_tilde(Q(x0)) (including never).
  std::size_t reach_violations = 0;
  // Reach: max over runs of entry time minus bound; INT64_MIN if no runs.
  std::int64_t max_excess = INT64_MIN;

  bool passed() const {
    return starts_not_found == 0 && safety_violations == 0 && membership_violations == 0 &&
           reach_violations == 0;
  }
};

/* Seeded runs from starts drawn uniformly in Y_S, kept when K(Q(x0)) is
 * nonempty (safety) or J_tilde(Q(x0)) is finite (reach). */
MonteCarloReport monte_carlo_validate(const SampledPlant& plant, const Controller& ctrl,
                                      const RefinedController& K,
                                      const MonteCarloOptions& opts);

}  // namespace qswitch
