#include "rtaprop/geo.hpp"

#include "rtaprop/error.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace rtaprop::geo {

namespace {

constexpr double kSemiMajor = 6378137.0;
constexpr double kFlattening = 1.0 / 298.257223563;
constexpr double kEccSq = kFlattening * (2.0 - kFlattening);

constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

double read_number(const nlohmann::json& wp, const char* key, std::size_t index) {
  auto it = wp.find(key);
  if (it == wp.end()) {
    throw InputError(fmt::format("waypoint {}: missing field '{}'", index, key));
  }
  if (!it->is_number()) {
    throw InputError(fmt::format("waypoint {}: field '{}' is not a number", index, key));
  }
  return it->get<double>();
}

} // namespace

void validate(const FlightPlan& plan) {
  const auto& wps = plan.waypoints;
  if (wps.size() < 2) {
    throw InputError(fmt::format("flight plan needs at least 2 waypoints, got {}", wps.size()));
  }
  for (std::size_t i = 0; i < wps.size(); ++i) {
    const auto& w = wps[i];
    if (!std::isfinite(w.lat_deg) || w.lat_deg < -90.0 || w.lat_deg > 90.0) {
      throw InputError(fmt::format("latitude {} out of range at index {}", w.lat_deg, i));
    }
    if (!std::isfinite(w.lon_deg) || w.lon_deg < -180.0 || w.lon_deg > 180.0) {
      throw InputError(fmt::format("longitude {} out of range at index {}", w.lon_deg, i));
    }
    if (!std::isfinite(w.alt_m)) {
      throw InputError(fmt::format("altitude not finite at index {}", i));
    }
    if (!std::isfinite(w.rta_s) || w.rta_s < 0.0) {
      throw InputError(fmt::format("RTA {} invalid at index {}", w.rta_s, i));
    }
    if (i > 0) {
      if (!(w.rta_s > wps[i - 1].rta_s)) {
        throw InputError(fmt::format("non-monotone RTA at index {}", i));
      }
      const double sep =
          (geodetic_to_ecef(w.position()) - geodetic_to_ecef(wps[i - 1].position())).norm();
      if (sep <= kMinWaypointSeparationM) {
        throw InputError(fmt::format(
            "waypoint at index {} coincides with its predecessor ({:.3f} m apart)", i, sep));
      }
    }
  }
}

FlightPlan parse_flight_plan(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(fmt::format("malformed flight plan: {}", e.what()));
  }
  if (!doc.is_object()) {
    throw InputError("malformed flight plan: top level must be an object");
  }
  for (const auto& [key, _] : doc.items()) {
    if (key != "plan_id" && key != "altitude_reference" && key != "waypoints") {
      throw InputError(fmt::format("malformed flight plan: unknown field '{}'", key));
    }
  }
  if (!doc.contains("plan_id") || !doc["plan_id"].is_string()) {
    throw InputError("malformed flight plan: 'plan_id' must be a string");
  }
  if (!doc.contains("altitude_reference") || !doc["altitude_reference"].is_string()) {
    throw InputError("malformed flight plan: 'altitude_reference' must be a string");
  }
  const auto ref = doc["altitude_reference"].get<std::string>();
  if (ref != kAltitudeReferenceEllipsoid) {
    throw InputError(fmt::format("unsupported altitude_reference '{}' (expected '{}')", ref,
                                 kAltitudeReferenceEllipsoid));
  }
  if (!doc.contains("waypoints") || !doc["waypoints"].is_array()) {
    throw InputError("malformed flight plan: 'waypoints' must be an array");
  }

  FlightPlan plan;
  plan.plan_id = doc["plan_id"].get<std::string>();
  const auto& wps = doc["waypoints"];
  for (std::size_t i = 0; i < wps.size(); ++i) {
    const auto& wp = wps[i];
    if (!wp.is_object()) {
      throw InputError(fmt::format("waypoint {}: must be an object", i));
    }
    for (const auto& [key, _] : wp.items()) {
      if (key != "lat_deg" && key != "lon_deg" && key != "alt_m" && key != "rta_s") {
        throw InputError(fmt::format("waypoint {}: unknown field '{}'", i, key));
      }
    }
    plan.waypoints.push_back({read_number(wp, "lat_deg", i), read_number(wp, "lon_deg", i),
                              read_number(wp, "alt_m", i), read_number(wp, "rta_s", i)});
  }
  validate(plan);
  return plan;
}

FlightPlan load_flight_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError(fmt::format("cannot open flight plan '{}'", path.string()));
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_flight_plan(ss.str());
  } catch (const InputError& e) {
    throw InputError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string serialize_flight_plan(const FlightPlan& plan) {
  nlohmann::json doc;
  doc["plan_id"] = plan.plan_id;
  doc["altitude_reference"] = std::string(kAltitudeReferenceEllipsoid);
  doc["waypoints"] = nlohmann::json::array();
  for (const auto& w : plan.waypoints) {
    doc["waypoints"].push_back(
        {{"lat_deg", w.lat_deg}, {"lon_deg", w.lon_deg}, {"alt_m", w.alt_m}, {"rta_s", w.rta_s}});
  }
  return doc.dump(2) + "\n";
}

Eigen::Vector3d geodetic_to_ecef(const Geodetic& g) {
  const double lat = deg2rad(g.lat_deg);
  const double lon = deg2rad(g.lon_deg);
  const double s = std::sin(lat);
  const double n = kSemiMajor / std::sqrt(1.0 - kEccSq * s * s);
  return {(n + g.alt_m) * std::cos(lat) * std::cos(lon),
          (n + g.alt_m) * std::cos(lat) * std::sin(lon),
          (n * (1.0 - kEccSq) + g.alt_m) * s};
}

Geodetic ecef_to_geodetic(const Eigen::Vector3d& ecef) {
  const double p = std::hypot(ecef.x(), ecef.y());
  const double lon = std::atan2(ecef.y(), ecef.x());
  double lat = std::atan2(ecef.z(), p * (1.0 - kEccSq));
  // Fixed-point iteration on latitude; converges in a handful of steps near the surface.
  for (int i = 0; i < 30; ++i) {
    const double s = std::sin(lat);
    const double n = kSemiMajor / std::sqrt(1.0 - kEccSq * s * s);
    const double next = std::atan2(ecef.z() + kEccSq * n * s, p);
    const bool done = std::abs(next - lat) < 1e-15;
    lat = next;
    if (done) {
      break;
    }
  }
  const double s = std::sin(lat);
  const double c = std::cos(lat);
  const double h = p * c + ecef.z() * s - kSemiMajor * std::sqrt(1.0 - kEccSq * s * s);
  return {rad2deg(lat), rad2deg(lon), h};
}

LocalFrame::LocalFrame(const Geodetic& origin)
    : origin_(origin), origin_ecef_(geodetic_to_ecef(origin)) {
  const double lat = deg2rad(origin.lat_deg);
  const double lon = deg2rad(origin.lon_deg);
  const double sl = std::sin(lat), cl = std::cos(lat);
  const double so = std::sin(lon), co = std::cos(lon);
  ecef_to_enu_ << -so, co, 0.0,
                  -sl * co, -sl * so, cl,
                  cl * co, cl * so, sl;
}

Eigen::Vector3d LocalFrame::to_local(const Geodetic& g) const {
  return ecef_to_enu_ * (geodetic_to_ecef(g) - origin_ecef_);
}

Geodetic LocalFrame::to_geodetic(const Eigen::Vector3d& enu) const {
  return ecef_to_geodetic(origin_ecef_ + ecef_to_enu_.transpose() * enu);
}

LocalPlan to_local_frame(const FlightPlan& plan) {
  validate(plan);
  LocalPlan local;
  local.plan_id = plan.plan_id;
  local.origin = plan.waypoints.front();
  const LocalFrame frame(local.origin.position());
  const double t0 = local.origin.rta_s;
  for (std::size_t i = 0; i < plan.waypoints.size(); ++i) {
    const auto& w = plan.waypoints[i];
    Eigen::Vector3d p = i == 0 ? Eigen::Vector3d::Zero() : frame.to_local(w.position());
    local.points.push_back({p, w.rta_s - t0});
  }
  return local;
}

} // namespace rtaprop::geo
