#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"

#include "rtaprop/cli/commands.hpp"
#include "rtaprop/io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace rtaprop;

namespace {

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rtaprop");
  std::vector<const char*> argv;
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / "rtaprop_cli_test" / name;
  fs::remove_all(p);
  return p;
}

/// Relative path -> contents of every file under dir.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      out[fs::relative(e.path(), dir).generic_string()] = io::read_text_file(e.path());
    }
  }
  return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(io::read_text_file(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      row.push_back(cell);
    }
    rows.push_back(row);
  }
  return rows;
}

std::string plan(const std::string& name) {
  return test::fixture("plans/" + name + ".json").string();
}
std::string config(const std::string& name) {
  return test::fixture("configs/" + name + ".conf").string();
}

} // namespace

TEST_CASE("propagate writes trace, bounds and manifest") {
  const auto out = scratch("prop");
  REQUIRE(run_cli({"propagate", plan("straight"), "--out", out.string()}) == cli::kSuccess);
  CHECK(fs::exists(out / "trace.csv"));
  const auto bounds = read_csv(out / "bounds.csv");
  CHECK(bounds.size() == 1 + 2);
  const auto manifest = nlohmann::json::parse(io::read_text_file(out / "manifest.json"));
  CHECK(manifest["command"] == "propagate");
  CHECK(manifest["tool_version"] == cli::kToolVersion);
  CHECK(manifest["inputs"][0]["sha256"].get<std::string>().size() == 64);
  CHECK(manifest["config"]["dt_s"] == "1");
}

TEST_CASE("propagate is byte-identical across reruns") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  REQUIRE(run_cli({"propagate", plan("six_wp"), "--out", a.string()}) == 0);
  REQUIRE(run_cli({"propagate", plan("six_wp"), "--out", b.string()}) == 0);
  CHECK(snapshot(a) == snapshot(b));
}

TEST_CASE("zero-noise config collapses bounds to nominal") {
  const auto out = scratch("zero");
  REQUIRE(run_cli({"propagate", plan("six_wp"), "--config", config("zero_noise"), "--out",
                   out.string()}) == 0);
  const auto rows = read_csv(out / "bounds.csv");
  REQUIRE(rows.size() == 7);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const double nominal = std::stod(rows[r][1]);
    CHECK(std::abs(std::stod(rows[r][3]) - nominal) <= 1e-6);
    CHECK(std::abs(std::stod(rows[r][4]) - nominal) <= 1e-6);
  }
}

TEST_CASE("compare: outputs and determinism independent of jobs") {
  const auto a = scratch("cmp_a"), b = scratch("cmp_b");
  REQUIRE(run_cli({"compare", plan("l_shaped"), "--config", config("quick_mc"), "--out",
                   a.string()}) == 0);
  REQUIRE(run_cli({"compare", plan("l_shaped"), "--config", config("quick_mc"), "--out",
                   b.string(), "--jobs", "3"}) == 0);
  for (const char* f : {"trace_blended.csv", "trace_gated.csv", "bounds_blended.csv",
                        "bounds_gated.csv", "ulpa_bounds.csv", "ulpa_envelope.csv", "oracle.csv",
                        "oracle_check.csv", "summary.csv", "timing.csv", "manifest.json",
                        "arrivals/arrivals_wp1.csv", "arrivals/arrivals_wp2.csv"}) {
    CHECK_MESSAGE(fs::exists(a / f), f);
  }
  auto sa = snapshot(a), sb = snapshot(b);
  sa.erase("timing.csv");
  sb.erase("timing.csv");
  CHECK(sa == sb);

  const auto summary = read_csv(a / "summary.csv");
  CHECK(summary[0][0] == "method");
  CHECK(summary.size() >= 4);
}

TEST_CASE("compare: seed override changes the oracle, not the filters") {
  const auto a = scratch("seed_a"), b = scratch("seed_b");
  REQUIRE(run_cli({"compare", plan("straight"), "--config", config("quick_mc"), "--out",
                   a.string()}) == 0);
  REQUIRE(run_cli({"compare", plan("straight"), "--config", config("quick_mc"), "--out",
                   b.string(), "--seed", "8"}) == 0);
  const auto sa = snapshot(a), sb = snapshot(b);
  CHECK(sa.at("trace_blended.csv") == sb.at("trace_blended.csv"));
  CHECK(sa.at("oracle.csv") != sb.at("oracle.csv"));
  CHECK(nlohmann::json::parse(sb.at("manifest.json"))["seed"] == 8);
}

TEST_CASE("synth then tune, deterministically") {
  const auto corpus = scratch("corpus");
  REQUIRE(run_cli({"synth", plan("l_shaped"), "--flights", "6", "--samples", "200", "--out",
                   corpus.string()}) == 0);
  CHECK(fs::exists(corpus / "plans"));
  CHECK(fs::exists(corpus / "adsb"));
  const auto a = scratch("tune_a"), b = scratch("tune_b");
  for (const auto& out : {a, b}) {
    REQUIRE(run_cli({"tune", (corpus / "adsb").string(), (corpus / "plans").string(), "--out",
                     out.string()}) == 0);
  }
  CHECK(snapshot(a) == snapshot(b));
  const auto report = nlohmann::json::parse(io::read_text_file(a / "tuning_report.json"));
  CHECK(report.contains("q_max_estimate_m2"));
  CHECK(report["flights_used"] == 4);
}

TEST_CASE("error exit codes") {
  const auto out = scratch("err");
  CHECK(run_cli({"propagate", "/nonexistent/plan.json", "--out", out.string()}) ==
        cli::kInputError);
  CHECK(run_cli({"propagate", plan("straight"), "--config", plan("straight"), "--out",
                 out.string()}) == cli::kInputError);
  CHECK(run_cli({"frobnicate"}) != cli::kSuccess);
  CHECK(run_cli({"propagate", plan("straight")}) != cli::kSuccess); // --out is required
}

TEST_CASE("tune runs on the shipped demo corpus") {
  const fs::path data(RTAPROP_DATA_DIR);
  const auto out = scratch("demo");
  REQUIRE(run_cli({"tune", (data / "synthetic" / "adsb").string(),
                   (data / "synthetic" / "plans").string(), "--config",
                   (data / "demo.conf").string(), "--out", out.string()}) == 0);
  const auto report = nlohmann::json::parse(io::read_text_file(out / "tuning_report.json"));
  CHECK(report["flights_used"].get<int>() >= 1);
  for (int a = 0; a < 3; ++a) {
    CHECK(report["q_max_estimate_m2"][a][a].get<double>() == doctest::Approx(100.0).epsilon(0.2));
  }
}
