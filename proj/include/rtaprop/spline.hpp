#ifndef RTAPROP_SPLINE_HPP_
#define RTAPROP_SPLINE_HPP_

#include "rtaprop/geo.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <span>
#include <vector>

namespace rtaprop::spline {

/// Piecewise cubic Hermite interpolant of a 3D trajectory over time.
///
/// Knot slopes follow the shape-preserving PCHIP rule (weighted harmonic mean
/// of adjacent secants, zeroed at local extrema, one-sided three-point
/// formula with monotonicity clamp at the ends), applied independently per
/// axis. The result passes through every knot, is C1, and never overshoots
/// axis-monotone data. Evaluation outside [front, back] throws DomainError.
class TrajectorySpline {
public:
  TrajectorySpline(std::vector<double> knot_times, std::vector<Eigen::Vector3d> positions);

  Eigen::Vector3d position_at(double t) const;
  Eigen::Vector3d velocity_at(double t) const;
  /// Second derivative. At interior knots the right segment's value is returned.
  Eigen::Vector3d acceleration_at(double t) const;

  std::span<const double> knot_times() const { return times_; }
  std::span<const Eigen::Vector3d> knot_positions() const { return positions_; }
  std::span<const Eigen::Vector3d> knot_slopes() const { return slopes_; }

  std::size_t segment_count() const { return times_.size() - 1; }
  double start_time() const { return times_.front(); }
  double end_time() const { return times_.back(); }

  /// Segment containing t; interior knots belong to the segment on their right.
  std::size_t segment_index(double t) const;

private:
  struct Local {
    std::size_t seg;
    double h;
    double s; ///< normalized coordinate in [0, 1]
  };
  Local locate(double t) const;

  std::vector<double> times_;
  std::vector<Eigen::Vector3d> positions_;
  std::vector<Eigen::Vector3d> slopes_;
};

TrajectorySpline fit_trajectory(const geo::LocalPlan& plan);

/// Shape-preserving knot slopes for scalar data (exposed for testing).
std::vector<double> pchip_slopes(std::span<const double> x, std::span<const double> y);

/// CSV dump of (t, x, y, z, vx, vy, vz, ax, ay, az) sampled every `stride` seconds.
void write_debug_csv(std::ostream& out, const TrajectorySpline& spline, double stride);

} // namespace rtaprop::spline

#endif // RTAPROP_SPLINE_HPP_
