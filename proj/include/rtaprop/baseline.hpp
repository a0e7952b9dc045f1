#ifndef RTAPROP_BASELINE_HPP_
#define RTAPROP_BASELINE_HPP_

#include "rtaprop/filter.hpp"
#include "rtaprop/geo.hpp"
#include "rtaprop/spline.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace rtaprop::baseline {

// ---------------------------------------------------------------------------
// Constant-growth (uLPA) envelope
// ---------------------------------------------------------------------------

/// The arrival-time envelope grows at `growth_rate` seconds per second of
/// flight until `activation_fraction` of each segment, then converges
/// linearly to +/- `rta_tolerance_s` at the waypoint.
struct UlpaConfig {
  double growth_rate = 1.06;
  double activation_fraction = 2.0 / 3.0;
  double rta_tolerance_s = 10.0;

  void validate() const;
};

struct UlpaBound {
  std::size_t waypoint_index = 0;
  double nominal_rta = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

std::vector<UlpaBound> ulpa_bounds(const geo::LocalPlan& plan, const UlpaConfig& cfg);

/// Envelope half-width (seconds) at plan-local time t. Starts at 0 at the
/// first waypoint; every later waypoint is enforced to the tolerance.
double ulpa_half_width(const geo::LocalPlan& plan, const UlpaConfig& cfg, double t);

struct UlpaSample {
  std::size_t segment;
  double t;
  double half_width;
};
/// Envelope sampled at stride dt within each segment, including the breakpoints' ends.
std::vector<UlpaSample> ulpa_trace(const geo::LocalPlan& plan, const UlpaConfig& cfg, double dt);

// ---------------------------------------------------------------------------
// Gated-update filter
// ---------------------------------------------------------------------------

/// No update while progress < activation; Q = Q_min afterwards.
filter::NoiseSchedule gated_schedule(const filter::FilterConfig& cfg,
                                     double activation = 2.0 / 3.0);

std::vector<filter::SegmentTrace> gated_kf(const spline::TrajectorySpline& spline,
                                           const geo::LocalPlan& plan,
                                           const filter::FilterConfig& cfg);

// ---------------------------------------------------------------------------
// Monte Carlo oracle
// ---------------------------------------------------------------------------

struct McConfig {
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  double dt_s = 0.0; ///< step stride; 0 means use the filter config's dt
  std::size_t jobs = 1;

  void validate() const;
};

struct McStep {
  std::size_t segment;
  std::size_t step;
  double t;
  filter::Vector6d mean;
  filter::Matrix6d cov;
};

struct MonteCarloResult {
  /// Filter run that supplied the gain schedule.
  std::vector<filter::SegmentTrace> reference;
  std::vector<McStep> steps;
  /// arrival_times[k][i]: first crossing by sample i of waypoint k's plane (normal
  /// to the incoming chord at the final waypoint, bisecting the turn elsewhere)
  /// (plan-local seconds); NaN when no crossing was observed. Index 0 is the start.
  std::vector<std::vector<double>> arrival_times;
  std::size_t samples = 0;

  /// Empirical covariance at the passage of waypoint k (k >= 1).
  const filter::Matrix6d& waypoint_cov(std::size_t k) const;
  std::vector<std::size_t> waypoint_step_index;
};

/// Simulates the closed-loop linear-Gaussian system the filter describes:
///   x' = A x + B u + w,   w ~ N(0, R)
///   x  = (I - K C) x' + K (z + v),   v ~ N(0, Q)
/// with the gain schedule K taken from a filter run under the same noise
/// schedule. The empirical covariance of x converges to the filter covariance.
/// Sample i draws from Philox stream i, so results do not depend on `jobs`.
MonteCarloResult monte_carlo_oracle(const spline::TrajectorySpline& spline,
                                    const geo::LocalPlan& plan,
                                    const filter::FilterConfig& cfg, const McConfig& mc,
                                    const filter::NoiseSchedule& schedule);
inline MonteCarloResult monte_carlo_oracle(const spline::TrajectorySpline& spline,
                                           const geo::LocalPlan& plan,
                                           const filter::FilterConfig& cfg,
                                           const McConfig& mc) {
  return monte_carlo_oracle(spline, plan, cfg, mc, filter::blended_schedule(cfg));
}

/// ||a - b||_F / ||b||_F
double relative_frobenius(const filter::Matrix6d& a, const filter::Matrix6d& b);

/// Largest single-step decrease of the position standard deviation
/// sqrt(var_x + var_y + var_z) over a trace (0 if it never decreases).
double max_step_std_drop(const std::vector<filter::SegmentTrace>& traces);
/// Largest single-step absolute change of the same quantity.
double max_step_std_change(const std::vector<filter::SegmentTrace>& traces);
/// Position standard deviation series including the initial entry state.
std::vector<double> position_std_series(const std::vector<filter::SegmentTrace>& traces);

void write_ulpa_csv(std::ostream& out, const std::vector<UlpaSample>& trace);
void write_ulpa_bounds_csv(std::ostream& out, const std::vector<UlpaBound>& bounds);
/// Per-step empirical covariance diagonals.
void write_oracle_csv(std::ostream& out, const MonteCarloResult& mc);
/// One file arrivals_wp<k>.csv per waypoint k >= 1 under `dir`.
void write_arrival_samples(const std::filesystem::path& dir, const MonteCarloResult& mc);

} // namespace rtaprop::baseline

#endif // RTAPROP_BASELINE_HPP_
