#ifndef RTAPROP_GEO_HPP_
#define RTAPROP_GEO_HPP_

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rtaprop::geo {

/// WGS-84 position. Altitude is height above the ellipsoid.
struct Geodetic {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double alt_m = 0.0;
};

struct GeoWaypoint {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double alt_m = 0.0;
  double rta_s = 0.0; ///< seconds since plan epoch

  Geodetic position() const { return {lat_deg, lon_deg, alt_m}; }
};

/// Minimum 3D separation between consecutive waypoints.
inline constexpr double kMinWaypointSeparationM = 1.0;

/// Only ellipsoidal heights are accepted; there is no geoid model.
inline constexpr std::string_view kAltitudeReferenceEllipsoid = "ellipsoid";

/// Validated 4D flight plan: >= 2 waypoints, strictly increasing RTA,
/// no coincident consecutive waypoints.
struct FlightPlan {
  std::string plan_id;
  std::vector<GeoWaypoint> waypoints;
};

/// Checks every FlightPlan invariant; throws InputError naming the waypoint index.
void validate(const FlightPlan& plan);

/// Parses the JSON flight-plan document (see docs/formats.md).
FlightPlan parse_flight_plan(std::string_view document);
FlightPlan load_flight_plan(const std::filesystem::path& path);

/// Canonical serialization: sorted keys, two-space indent, trailing newline.
std::string serialize_flight_plan(const FlightPlan& plan);

Eigen::Vector3d geodetic_to_ecef(const Geodetic& g);
Geodetic ecef_to_geodetic(const Eigen::Vector3d& ecef);

/// East-North-Up tangent frame anchored at a geodetic origin.
class LocalFrame {
public:
  explicit LocalFrame(const Geodetic& origin);

  Eigen::Vector3d to_local(const Geodetic& g) const;
  Geodetic to_geodetic(const Eigen::Vector3d& enu) const;

  const Geodetic& origin() const { return origin_; }

private:
  Geodetic origin_;
  Eigen::Vector3d origin_ecef_;
  Eigen::Matrix3d ecef_to_enu_;
};

struct LocalPoint {
  Eigen::Vector3d position; ///< meters, ENU
  double t = 0.0;           ///< seconds relative to the first waypoint's RTA
};

struct LocalPlan {
  std::string plan_id;
  GeoWaypoint origin;
  std::vector<LocalPoint> points;

  std::size_t size() const { return points.size(); }
  LocalFrame frame() const { return LocalFrame(origin.position()); }
};

LocalPlan to_local_frame(const FlightPlan& plan);

} // namespace rtaprop::geo

#endif // RTAPROP_GEO_HPP_
