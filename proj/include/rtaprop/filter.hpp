#ifndef RTAPROP_FILTER_HPP_
#define RTAPROP_FILTER_HPP_

// Naming note: following the source method, Q is the *measurement* noise
// covariance (3x3, position) and R is the *process* noise covariance (6x6,
// white-noise acceleration). This is the reverse of the usual textbook letters.

#include "rtaprop/geo.hpp"
#include "rtaprop/spline.hpp"

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rtaprop::filter {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Matrix63d = Eigen::Matrix<double, 6, 3>;
using Matrix36d = Eigen::Matrix<double, 3, 6>;

enum class ProgressMode {
  Time,     ///< elapsed segment time / segment duration (default)
  Distance, ///< arc length flown along the spline / segment arc length
};

struct FilterConfig {
  double dt_s = 1.0;
  double sigma_a2 = 1.0; ///< acceleration noise variance, m^2/s^4
  Eigen::Matrix3d q_max = Eigen::Matrix3d::Identity() * 1e8;
  Eigen::Matrix3d q_min = Eigen::Matrix3d::Identity();
  double k_gain = 10.0;
  double lpa = 0.0; ///< sigmoid activation threshold in [0, 1)
  ProgressMode progress_mode = ProgressMode::Time;

  void set_q_max_scale(double s) { q_max = Eigen::Matrix3d::Identity() * s; }
  void set_q_min_scale(double s) { q_min = Eigen::Matrix3d::Identity() * s; }

  /// Throws InputError unless dt > 0, sigma_a2 >= 0, lpa in [0, 1),
  /// Q_min positive definite and Q_max - Q_min positive semidefinite.
  void validate() const;
};

struct FilterState {
  Vector6d mean = Vector6d::Zero(); ///< [x, y, z, vx, vy, vz]
  Matrix6d cov = Matrix6d::Zero();
  double t = 0.0;
};

/// One predict(+update) step. `mean`/`cov` are the post-step state at `t`.
struct StepRecord {
  std::size_t step = 0; ///< 1-based within the segment
  double t = 0.0;
  double dt = 0.0;      ///< length of this step (last step may be partial)
  double progress = 0.0;
  double blend = 0.0;   ///< sigmoid weight; NaN when the schedule is not sigmoid-based
  bool updated = false;
  Eigen::Vector3d u = Eigen::Vector3d::Zero(); ///< control (spline velocity at step start)
  Eigen::Vector3d z = Eigen::Vector3d::Zero(); ///< planned position at t
  Eigen::Matrix3d q = Eigen::Matrix3d::Zero(); ///< measurement noise used (zero if !updated)
  Matrix63d gain = Matrix63d::Zero();
  Vector6d mean = Vector6d::Zero();
  Matrix6d cov = Matrix6d::Zero();

  /// Mean diagonal of Q; NaN when no update ran.
  double q_scale() const;
};

struct SegmentTrace {
  std::size_t segment = 0;
  FilterState entry;
  std::vector<StepRecord> steps;
  std::vector<std::string> warnings;

  FilterState exit() const;
  /// Covariance at passage of the segment's end waypoint.
  const Matrix6d& waypoint_cov() const { return steps.back().cov; }
};

Matrix6d transition_matrix(double dt);
Matrix63d control_matrix(double dt);
Matrix36d measurement_matrix();
/// White-noise-acceleration block matrix scaled by sigma_a2 (rank 1 per axis).
Matrix6d process_noise(double dt, double sigma_a2);

/// 1 / (1 + exp(k (p - lpa))), evaluated without overflow.
double sigmoid_blend(double p, double k_gain, double lpa);
Eigen::Matrix3d measurement_noise(double p, const FilterConfig& cfg);

FilterState predict(const FilterState& state, const Eigen::Vector3d& u, double dt,
                    double sigma_a2);
inline FilterState predict(const FilterState& state, const Eigen::Vector3d& u,
                           const FilterConfig& cfg) {
  return predict(state, u, cfg.dt_s, cfg.sigma_a2);
}

struct UpdateResult {
  FilterState state;
  Matrix63d gain;
};
/// Position-measurement update with Joseph-form covariance.
UpdateResult update_with_gain(const FilterState& state, const Eigen::Vector3d& z,
                              const Eigen::Matrix3d& q);
inline FilterState update(const FilterState& state, const Eigen::Vector3d& z,
                          const Eigen::Matrix3d& q) {
  return update_with_gain(state, z, q).state;
}

/// Measurement noise to use at a given progress, or nullopt to skip the update.
struct ScheduleEntry {
  Eigen::Matrix3d q;
  double blend;
};
using NoiseSchedule = std::function<std::optional<ScheduleEntry>(double progress)>;

/// The sigmoid-blended schedule: always update, Q = measurement_noise(p).
NoiseSchedule blended_schedule(const FilterConfig& cfg);

/// Known plan start: position at the first waypoint, zero state velocity, zero covariance.
FilterState initial_state(const spline::TrajectorySpline& spline);

SegmentTrace propagate_segment(const spline::TrajectorySpline& spline, std::size_t segment,
                               const FilterState& entry, const FilterConfig& cfg,
                               const NoiseSchedule& schedule);
inline SegmentTrace propagate_segment(const spline::TrajectorySpline& spline,
                                      std::size_t segment, const FilterState& entry,
                                      const FilterConfig& cfg) {
  return propagate_segment(spline, segment, entry, cfg, blended_schedule(cfg));
}

std::vector<SegmentTrace> propagate_plan(const spline::TrajectorySpline& spline,
                                         const geo::LocalPlan& plan, const FilterConfig& cfg,
                                         const NoiseSchedule& schedule);
inline std::vector<SegmentTrace> propagate_plan(const spline::TrajectorySpline& spline,
                                                const geo::LocalPlan& plan,
                                                const FilterConfig& cfg) {
  return propagate_plan(spline, plan, cfg, blended_schedule(cfg));
}

/// Velocity-block diagonal of the covariance at each waypoint; zero at waypoint 0.
std::vector<Eigen::Vector3d> waypoint_velocity_variances(const std::vector<SegmentTrace>& traces);

/// Trace CSV: segment, step, t, p, sigma_blend, q_scale, mean x6, cov diagonal x6, trace.
void write_trace_csv(std::ostream& out, const std::vector<SegmentTrace>& traces);

} // namespace rtaprop::filter

#endif // RTAPROP_FILTER_HPP_
