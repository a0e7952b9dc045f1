#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles/geodesic.hpp"
#include "support.hpp"

#include "rtaprop/error.hpp"
#include "rtaprop/geo.hpp"

#include <random>

using namespace rtaprop;

namespace {

std::string plan_doc(const std::string& waypoints, const std::string& ref = "ellipsoid") {
  return R"({"plan_id": "T1", "altitude_reference": ")" + ref + R"(", "waypoints": [)" +
         waypoints + "]}";
}

std::string error_of(const std::string& doc) {
  try {
    geo::parse_flight_plan(doc);
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

} // namespace

TEST_CASE("minimal two-waypoint plan parses") {
  const auto plan = geo::parse_flight_plan(plan_doc(
      R"({"lat_deg": 40.0, "lon_deg": -74.0, "alt_m": 100.0, "rta_s": 0.0},
         {"lat_deg": 40.01, "lon_deg": -74.0, "alt_m": 100.0, "rta_s": 60.0})"));
  CHECK(plan.plan_id == "T1");
  REQUIRE(plan.waypoints.size() == 2);
  CHECK(plan.waypoints[1].rta_s == 60.0);
}

TEST_CASE("parse errors name the offending waypoint") {
  const std::string a = R"({"lat_deg": 40.0, "lon_deg": -74.0, "alt_m": 100.0, "rta_s": 0.0})";
  const std::string b = R"({"lat_deg": 40.01, "lon_deg": -74.0, "alt_m": 100.0, "rta_s": 60.0})";
  const std::string c = R"({"lat_deg": 40.02, "lon_deg": -74.0, "alt_m": 100.0, "rta_s": 60.0})";

  CHECK(error_of(plan_doc(a + "," + b + "," + c)).find("non-monotone RTA at index 2") !=
        std::string::npos);

  const std::string bad_lat = R"({"lat_deg": 91.0, "lon_deg": -74.0, "alt_m": 100.0, "rta_s": 60.0})";
  const auto msg = error_of(plan_doc(a + "," + bad_lat));
  CHECK(msg.find("latitude") != std::string::npos);
  CHECK(msg.find("index 1") != std::string::npos);

  CHECK(error_of(plan_doc(a)).find("at least 2 waypoints") != std::string::npos);
  CHECK(error_of(plan_doc(a + "," + b, "msl")).find("altitude_reference") != std::string::npos);
  CHECK(error_of("{not json").find("malformed") != std::string::npos);
  CHECK(error_of(plan_doc(a + R"(,{"lat_deg": 40.0, "lon_deg": -74.0, "alt_m": 100.5, "rta_s": 9.0})"))
            .find("coincides") != std::string::npos);
  CHECK(error_of(plan_doc(a + R"(,{"lat_deg": 40.0, "lon_deg": -74.0, "rta_s": 9.0})"))
            .find("waypoint 1: missing field 'alt_m'") != std::string::npos);
}

TEST_CASE("local frame: origin and pure vertical displacement") {
  geo::FlightPlan plan{"V", {{12.5, 45.25, 100.0, 10.0}, {12.5, 45.25, 200.0, 70.0}}};
  const auto local = geo::to_local_frame(plan);
  CHECK(local.points[0].position == Eigen::Vector3d::Zero());
  CHECK(local.points[0].t == 0.0);
  CHECK(local.points[1].t == 60.0);
  CHECK(std::abs(local.points[1].position.x()) < 1e-9);
  CHECK(std::abs(local.points[1].position.y()) < 1e-9);
  CHECK(std::abs(local.points[1].position.z() - 100.0) < 1e-8);
}

TEST_CASE("local frame: 0.01 deg of longitude at the equator against Vincenty") {
  geo::FlightPlan plan{"E", {{0.0, 0.0, 0.0, 0.0}, {0.0, 0.01, 0.0, 60.0}}};
  const auto local = geo::to_local_frame(plan);
  const double geodesic = oracle::vincenty_distance(0.0, 0.0, 0.0, 0.01);
  CHECK(geodesic == doctest::Approx(1113.195).epsilon(1e-6));
  CHECK(std::abs(local.points[1].position.x() - geodesic) < 1.0);
  CHECK(local.points[1].position.x() == doctest::Approx(1113.2).epsilon(1e-4));
}

TEST_CASE("property: geodetic -> local -> geodetic round trip") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lat(-85.0, 85.0), lon(-180.0, 180.0), alt(-100.0, 5000.0),
      offset(-50000.0, 50000.0), up(-500.0, 3000.0);
  for (int trial = 0; trial < 200; ++trial) {
    const geo::LocalFrame frame({lat(rng), lon(rng), alt(rng)});
    for (int i = 0; i < 10; ++i) {
      const Eigen::Vector3d enu(offset(rng), offset(rng), up(rng));
      const auto g = frame.to_geodetic(enu);
      const auto back = frame.to_local(g);
      CHECK((back - enu).norm() < 1e-6);
      const auto g2 = frame.to_geodetic(back);
      CHECK(std::abs(g2.lat_deg - g.lat_deg) < 1e-6);
      CHECK(std::abs(g2.alt_m - g.alt_m) < 1e-3);
    }
  }
}

TEST_CASE("property: ENU chord length matches the geodesic within 0.1% below 50 km") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lat(-80.0, 80.0), lon(-179.0, 179.0), d(-0.3, 0.3);
  for (int trial = 0; trial < 300; ++trial) {
    const double la = lat(rng), lo = lon(rng);
    const double la2 = la + d(rng), lo2 = lo + d(rng);
    const double geodesic = oracle::vincenty_distance(la, lo, la2, lo2);
    if (geodesic > 50000.0 || geodesic < 1.0) {
      continue;
    }
    const geo::LocalFrame frame({la, lo, 0.0});
    const double chord = frame.to_local({la2, lo2, 0.0}).norm();
    CHECK(std::abs(chord - geodesic) / geodesic < 1e-3);
  }
}

TEST_CASE("property: serialize(parse(x)) is the identity on canonical documents") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<test::Wp> wps = test::random_monotone_x(rng, 2 + trial % 7);
    const auto plan = test::geo_plan(wps, "P" + std::to_string(trial));
    const auto canonical = geo::serialize_flight_plan(plan);
    const auto reparsed = geo::parse_flight_plan(canonical);
    CHECK(geo::serialize_flight_plan(reparsed) == canonical);
    REQUIRE(reparsed.waypoints.size() == plan.waypoints.size());
    for (std::size_t i = 0; i < plan.waypoints.size(); ++i) {
      CHECK(reparsed.waypoints[i].lat_deg == plan.waypoints[i].lat_deg);
      CHECK(reparsed.waypoints[i].rta_s == plan.waypoints[i].rta_s);
    }
  }
}
