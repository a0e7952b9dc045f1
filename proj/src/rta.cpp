#include "rtaprop/rta.hpp"

#include "rtaprop/error.hpp"

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include <cmath>
#include <ostream>

namespace rtaprop::rta {

SegmentKinematics segment_kinematics(const geo::LocalPlan& plan, std::size_t k) {
  if (k < 1 || k >= plan.size()) {
    throw InputError(fmt::format("segment index {} out of range [1, {})", k, plan.size()));
  }
  SegmentKinematics kin;
  kin.delta_p = plan.points[k].position - plan.points[k - 1].position;
  kin.delta_t = plan.points[k].t - plan.points[k - 1].t;
  if (!(kin.delta_t > 0.0) || !(kin.delta_p.norm() > 0.0)) {
    throw InputError(fmt::format("zero-length segment ending at waypoint {}", k));
  }
  kin.v = kin.delta_p / kin.delta_t;
  return kin;
}

double segment_time_variance(const SegmentKinematics& kin, const Eigen::Vector3d& sigma2_v,
                             double delta, double v_bar0) {
  if (!(delta > 0.0)) {
    throw InputError(fmt::format("threshold factor delta must be positive, got {}", delta));
  }
  if (!(v_bar0 > 0.0)) {
    throw InputError(fmt::format("nominal speed v_bar0 must be positive, got {}", v_bar0));
  }
  if ((sigma2_v.array() < 0.0).any() || !sigma2_v.allFinite()) {
    throw InputError("velocity variances must be finite and non-negative");
  }
  const double speed = kin.v.norm();
  if (!(speed > 0.0)) {
    throw InputError("segment speed must be positive");
  }
  const double ratio = sigma2_v.norm() / speed;
  return ratio < delta * v_bar0 ? kin.delta_t * ratio : 0.0;
}

std::vector<double> cumulative_variance(std::span<const double> per_segment) {
  std::vector<double> out;
  out.reserve(per_segment.size());
  double sum = 0.0;
  for (double v : per_segment) {
    if (!(v >= 0.0)) {
      throw InputError(fmt::format("segment variance must be non-negative, got {}", v));
    }
    sum += v;
    out.push_back(sum);
  }
  return out;
}

double two_sided_z(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw InputError(fmt::format("confidence must lie in (0, 1), got {}", confidence));
  }
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, 0.5 + 0.5 * confidence);
}

std::pair<double, double> rta_bounds(double nominal, double variance, double confidence) {
  if (!(variance >= 0.0)) {
    throw InputError(fmt::format("variance must be non-negative, got {}", variance));
  }
  const double half = two_sided_z(confidence) * std::sqrt(variance);
  return {nominal - half, nominal + half};
}

double mean_cruise_speed(const geo::LocalPlan& plan) {
  double length = 0.0;
  for (std::size_t k = 1; k < plan.size(); ++k) {
    length += (plan.points[k].position - plan.points[k - 1].position).norm();
  }
  return length / (plan.points.back().t - plan.points.front().t);
}

std::vector<RtaEstimate> estimate_rtas(const geo::LocalPlan& plan,
                                       const std::vector<filter::SegmentTrace>& traces,
                                       const RtaConfig& cfg) {
  if (traces.size() + 1 != plan.size()) {
    throw InputError("trace count does not match plan segments");
  }
  const double v_bar0 = cfg.v_bar0.value_or(mean_cruise_speed(plan));
  const auto sigma2_v = filter::waypoint_velocity_variances(traces);

  std::vector<double> per_segment;
  for (std::size_t k = 1; k < plan.size(); ++k) {
    per_segment.push_back(
        segment_time_variance(segment_kinematics(plan, k), sigma2_v[k], cfg.delta, v_bar0));
  }
  const auto cumulative = cumulative_variance(per_segment);

  std::vector<RtaEstimate> out;
  out.reserve(plan.size());
  for (std::size_t k = 0; k < plan.size(); ++k) {
    RtaEstimate e;
    e.waypoint_index = k;
    e.nominal_rta = plan.origin.rta_s + plan.points[k].t;
    e.time_variance = k == 0 ? 0.0 : cumulative[k - 1];
    std::tie(e.lower, e.upper) = rta_bounds(e.nominal_rta, e.time_variance, cfg.confidence);
    out.push_back(e);
  }
  return out;
}

void write_bounds_csv(std::ostream& out, const std::vector<RtaEstimate>& estimates,
                      double confidence) {
  out << "waypoint,nominal_rta,variance,lower,upper,confidence\n";
  for (const auto& e : estimates) {
    out << fmt::format("{},{:.12g},{:.12g},{:.12g},{:.12g},{:.6g}\n", e.waypoint_index,
                       e.nominal_rta, e.time_variance, e.lower, e.upper, confidence);
  }
}

} // namespace rtaprop::rta
