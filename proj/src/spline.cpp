#include "rtaprop/spline.hpp"

#include "rtaprop/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace rtaprop::spline {

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

// One-sided three-point end slope, clamped so the end segment stays monotone.
double end_slope(double h0, double h1, double d0, double d1) {
  double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if (sign(m) != sign(d0)) {
    m = 0.0;
  } else if (sign(d0) != sign(d1) && std::abs(m) > 3.0 * std::abs(d0)) {
    m = 3.0 * d0;
  }
  return m;
}

} // namespace

std::vector<double> pchip_slopes(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  std::vector<double> m(n, 0.0);
  if (n < 2) {
    return m;
  }
  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x[k + 1] - x[k];
    d[k] = (y[k + 1] - y[k]) / h[k];
  }
  if (n == 2) {
    m[0] = m[1] = d[0];
    return m;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (sign(d[k - 1]) * sign(d[k]) <= 0) {
      m[k] = 0.0;
    } else {
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
    }
  }
  m[0] = end_slope(h[0], h[1], d[0], d[1]);
  m[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  return m;
}

TrajectorySpline::TrajectorySpline(std::vector<double> knot_times,
                                   std::vector<Eigen::Vector3d> positions)
    : times_(std::move(knot_times)), positions_(std::move(positions)) {
  if (times_.size() < 2 || times_.size() != positions_.size()) {
    throw InputError("spline fit needs >= 2 knots with one position per knot");
  }
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1])) {
      throw InputError(fmt::format("duplicate or decreasing knot time at index {}", k));
    }
  }
  slopes_.assign(times_.size(), Eigen::Vector3d::Zero());
  std::vector<double> axis(times_.size());
  for (int a = 0; a < 3; ++a) {
    for (std::size_t k = 0; k < times_.size(); ++k) {
      axis[k] = positions_[k][a];
    }
    const auto m = pchip_slopes(times_, axis);
    for (std::size_t k = 0; k < times_.size(); ++k) {
      slopes_[k][a] = m[k];
    }
  }
}

std::size_t TrajectorySpline::segment_index(double t) const {
  if (!(t >= times_.front() && t <= times_.back())) {
    throw DomainError(fmt::format("t = {} outside spline domain [{}, {}]", t, times_.front(),
                                  times_.back()));
  }
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto idx = static_cast<std::size_t>(std::distance(times_.begin(), it));
  return std::min(idx == 0 ? 0 : idx - 1, segment_count() - 1);
}

TrajectorySpline::Local TrajectorySpline::locate(double t) const {
  const std::size_t seg = segment_index(t);
  const double h = times_[seg + 1] - times_[seg];
  return {seg, h, (t - times_[seg]) / h};
}

Eigen::Vector3d TrajectorySpline::position_at(double t) const {
  const auto [k, h, s] = locate(t);
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * positions_[k] + h10 * h * slopes_[k] + h01 * positions_[k + 1] +
         h11 * h * slopes_[k + 1];
}

Eigen::Vector3d TrajectorySpline::velocity_at(double t) const {
  const auto [k, h, s] = locate(t);
  const double s2 = s * s;
  const double d00 = (6 * s2 - 6 * s) / h;
  const double d10 = 3 * s2 - 4 * s + 1;
  const double d01 = (-6 * s2 + 6 * s) / h;
  const double d11 = 3 * s2 - 2 * s;
  return d00 * positions_[k] + d10 * slopes_[k] + d01 * positions_[k + 1] + d11 * slopes_[k + 1];
}

Eigen::Vector3d TrajectorySpline::acceleration_at(double t) const {
  const auto [k, h, s] = locate(t);
  const double dd00 = (12 * s - 6) / (h * h);
  const double dd10 = (6 * s - 4) / h;
  const double dd01 = (-12 * s + 6) / (h * h);
  const double dd11 = (6 * s - 2) / h;
  return dd00 * positions_[k] + dd10 * slopes_[k] + dd01 * positions_[k + 1] +
         dd11 * slopes_[k + 1];
}

TrajectorySpline fit_trajectory(const geo::LocalPlan& plan) {
  std::vector<double> t;
  std::vector<Eigen::Vector3d> p;
  t.reserve(plan.size());
  p.reserve(plan.size());
  for (const auto& pt : plan.points) {
    t.push_back(pt.t);
    p.push_back(pt.position);
  }
  return TrajectorySpline(std::move(t), std::move(p));
}

void write_debug_csv(std::ostream& out, const TrajectorySpline& spline, double stride) {
  if (!(stride > 0.0)) {
    throw InputError("debug dump stride must be positive");
  }
  out << "t,x,y,z,vx,vy,vz,ax,ay,az\n";
  const auto steps = static_cast<std::size_t>(
      std::floor((spline.end_time() - spline.start_time()) / stride + 1e-9));
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = std::min(spline.start_time() + static_cast<double>(i) * stride,
                              spline.end_time());
    const auto p = spline.position_at(t);
    const auto v = spline.velocity_at(t);
    const auto a = spline.acceleration_at(t);
    out << fmt::format("{:.6f},{:.6f},{:.6f},{:.6f},{:.9f},{:.9f},{:.9f},{:.9f},{:.9f},{:.9f}\n",
                       t, p.x(), p.y(), p.z(), v.x(), v.y(), v.z(), a.x(), a.y(), a.z());
  }
}

} // namespace rtaprop::spline
