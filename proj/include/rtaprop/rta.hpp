#ifndef RTAPROP_RTA_HPP_
#define RTAPROP_RTA_HPP_

#include "rtaprop/filter.hpp"
#include "rtaprop/geo.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace rtaprop::rta {

struct SegmentKinematics {
  Eigen::Vector3d delta_p; ///< p_k - p_{k-1}, meters
  double delta_t = 0.0;    ///< RTA difference, seconds
  Eigen::Vector3d v;       ///< constant cruise velocity delta_p / delta_t
};

struct RtaConfig {
  double delta = 1.0;            ///< threshold factor
  std::optional<double> v_bar0;  ///< nominal speed, m/s; defaults to the plan's mean speed
  double confidence = 0.95;
};

struct RtaEstimate {
  std::size_t waypoint_index = 0;
  double nominal_rta = 0.0; ///< seconds since plan epoch
  double time_variance = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Kinematics of the segment ending at waypoint k (1 <= k < size).
SegmentKinematics segment_kinematics(const geo::LocalPlan& plan, std::size_t k);

/// Arrival-time variance contributed by one segment:
/// delta_t * |sigma2_v| / |v| when |sigma2_v| / |v| < delta * v_bar0, else 0.
double segment_time_variance(const SegmentKinematics& kin, const Eigen::Vector3d& sigma2_v,
                             double delta, double v_bar0);

/// Running sum: element k is the sum of the first k+1 inputs.
std::vector<double> cumulative_variance(std::span<const double> per_segment);

/// Two-sided standard-normal quantile z with P(|Z| <= z) = confidence.
double two_sided_z(double confidence);

std::pair<double, double> rta_bounds(double nominal, double variance, double confidence);

/// Total chord length over total duration.
double mean_cruise_speed(const geo::LocalPlan& plan);

/// Per-waypoint estimates from a propagated plan; waypoint 0 has zero variance.
std::vector<RtaEstimate> estimate_rtas(const geo::LocalPlan& plan,
                                       const std::vector<filter::SegmentTrace>& traces,
                                       const RtaConfig& cfg);

/// Bounds CSV: waypoint, nominal_rta, variance, lower, upper, confidence.
void write_bounds_csv(std::ostream& out, const std::vector<RtaEstimate>& estimates,
                      double confidence);

} // namespace rtaprop::rta

#endif // RTAPROP_RTA_HPP_
