#ifndef RTAPROP_TESTS_SUPPORT_HPP_
#define RTAPROP_TESTS_SUPPORT_HPP_

#include "rtaprop/geo.hpp"
#include "rtaprop/spline.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

namespace rtaprop::test {

struct Wp {
  double x, y, z, t;
};

inline geo::GeoWaypoint default_origin() { return {40.6413, -73.7781, 150.0, 0.0}; }

/// Local plan built directly in the ENU frame.
inline geo::LocalPlan local_plan(std::initializer_list<Wp> wps, std::string id = "fixture") {
  geo::LocalPlan p;
  p.plan_id = std::move(id);
  p.origin = default_origin();
  for (const auto& w : wps) {
    p.points.push_back({Eigen::Vector3d(w.x, w.y, w.z), w.t});
  }
  p.origin.rta_s = p.points.front().t;
  return p;
}

inline geo::LocalPlan local_plan(const std::vector<Wp>& wps, std::string id = "fixture") {
  geo::LocalPlan p;
  p.plan_id = std::move(id);
  p.origin = default_origin();
  for (const auto& w : wps) {
    p.points.push_back({Eigen::Vector3d(w.x, w.y, w.z), w.t});
  }
  p.origin.rta_s = p.points.front().t;
  return p;
}

/// Geodetic plan whose waypoints project to the given ENU points.
inline geo::FlightPlan geo_plan(const std::vector<Wp>& wps, std::string id = "fixture") {
  const geo::LocalFrame frame(default_origin().position());
  geo::FlightPlan plan;
  plan.plan_id = std::move(id);
  for (const auto& w : wps) {
    const auto g = frame.to_geodetic({w.x, w.y, w.z});
    plan.waypoints.push_back({g.lat_deg, g.lon_deg, g.alt_m, w.t});
  }
  return plan;
}

// Fixture plans shared by the acceptance suite and unit tests.
inline std::vector<Wp> straight_wps() { return {{0, 0, 0, 0}, {600, 0, 0, 60}}; }
inline std::vector<Wp> l_shaped_wps() {
  return {{0, 0, 0, 0}, {900, 0, 0, 90}, {900, 900, 0, 180}};
}
inline std::vector<Wp> six_wp_wps() {
  return {{0, 0, 0, 0},          {800, 100, 30, 70},    {1500, 600, 60, 150},
          {2100, 500, 60, 210},  {2900, 1100, 20, 300}, {3500, 1300, 0, 360}};
}

/// Random plan with strictly increasing x (monotone along the east axis).
inline std::vector<Wp> random_monotone_x(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> step(50.0, 800.0), lateral(-400.0, 400.0),
      vert(-50.0, 50.0), dt(20.0, 120.0);
  std::vector<Wp> out{{0, 0, 0, 0}};
  for (std::size_t i = 1; i < n; ++i) {
    const auto& p = out.back();
    out.push_back({p.x + step(rng), p.y + lateral(rng), p.z + vert(rng), p.t + dt(rng)});
  }
  return out;
}

inline std::filesystem::path fixture(const std::string& rel) {
  return std::filesystem::path(RTAPROP_FIXTURE_DIR) / rel;
}

} // namespace rtaprop::test

#endif // RTAPROP_TESTS_SUPPORT_HPP_
