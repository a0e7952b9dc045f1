#include "rtaprop/config.hpp"

#include "rtaprop/error.hpp"
#include "rtaprop/io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <functional>
#include <map>
#include <set>

namespace rtaprop {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == s.npos) {
    return {};
  }
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

double to_double(std::string_view v, std::string_view key) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InputError(fmt::format("config key '{}': '{}' is not a number", key, v));
  }
  return out;
}

std::uint64_t to_u64(std::string_view v, std::string_view key) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InputError(fmt::format("config key '{}': '{}' is not a non-negative integer", key, v));
  }
  return out;
}

std::vector<double> to_list(std::string_view v, std::string_view key) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = v.find(',', start);
    out.push_back(to_double(trim(v.substr(start, comma == v.npos ? v.npos : comma - start)), key));
    if (comma == v.npos) {
      break;
    }
    start = comma + 1;
  }
  return out;
}

Eigen::Matrix3d to_matrix(std::string_view v, std::string_view key) {
  const auto vals = to_list(v, key);
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  if (vals.size() == 1) {
    m.diagonal().setConstant(vals[0]);
  } else if (vals.size() == 3) {
    m.diagonal() << vals[0], vals[1], vals[2];
  } else if (vals.size() == 9) {
    for (int i = 0; i < 9; ++i) {
      m(i / 3, i % 3) = vals[static_cast<std::size_t>(i)];
    }
  } else {
    throw InputError(
        fmt::format("config key '{}': expected 1, 3 or 9 values, got {}", key, vals.size()));
  }
  return m;
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table{
      {"dt_s", [](RunConfig& c, std::string_view v) { c.filter.dt_s = to_double(v, "dt_s"); }},
      {"sigma_a2_m2s4",
       [](RunConfig& c, std::string_view v) { c.filter.sigma_a2 = to_double(v, "sigma_a2_m2s4"); }},
      {"q_max_scale_m2",
       [](RunConfig& c, std::string_view v) {
         c.filter.set_q_max_scale(to_double(v, "q_max_scale_m2"));
       }},
      {"q_min_scale_m2",
       [](RunConfig& c, std::string_view v) {
         c.filter.set_q_min_scale(to_double(v, "q_min_scale_m2"));
       }},
      {"q_max_m2", [](RunConfig& c, std::string_view v) { c.filter.q_max = to_matrix(v, "q_max_m2"); }},
      {"q_min_m2", [](RunConfig& c, std::string_view v) { c.filter.q_min = to_matrix(v, "q_min_m2"); }},
      {"k_gain", [](RunConfig& c, std::string_view v) { c.filter.k_gain = to_double(v, "k_gain"); }},
      {"lpa", [](RunConfig& c, std::string_view v) { c.filter.lpa = to_double(v, "lpa"); }},
      {"progress_mode",
       [](RunConfig& c, std::string_view v) {
         if (v == "time") {
           c.filter.progress_mode = filter::ProgressMode::Time;
         } else if (v == "distance") {
           c.filter.progress_mode = filter::ProgressMode::Distance;
         } else {
           throw InputError(fmt::format("progress_mode must be 'time' or 'distance', got '{}'", v));
         }
       }},
      {"rta_delta", [](RunConfig& c, std::string_view v) { c.rta.delta = to_double(v, "rta_delta"); }},
      {"rta_v_bar0_mps",
       [](RunConfig& c, std::string_view v) {
         if (v == "auto") {
           c.rta.v_bar0.reset();
         } else {
           c.rta.v_bar0 = to_double(v, "rta_v_bar0_mps");
         }
       }},
      {"confidence",
       [](RunConfig& c, std::string_view v) { c.rta.confidence = to_double(v, "confidence"); }},
      {"ulpa_growth_rate_s_per_s",
       [](RunConfig& c, std::string_view v) {
         c.ulpa.growth_rate = to_double(v, "ulpa_growth_rate_s_per_s");
       }},
      {"ulpa_activation_fraction",
       [](RunConfig& c, std::string_view v) {
         c.ulpa.activation_fraction = to_double(v, "ulpa_activation_fraction");
       }},
      {"ulpa_tolerance_s",
       [](RunConfig& c, std::string_view v) {
         c.ulpa.rta_tolerance_s = to_double(v, "ulpa_tolerance_s");
       }},
      {"mc_samples",
       [](RunConfig& c, std::string_view v) {
         c.mc.samples = static_cast<std::size_t>(to_u64(v, "mc_samples"));
       }},
      {"mc_dt_s", [](RunConfig& c, std::string_view v) { c.mc.dt_s = to_double(v, "mc_dt_s"); }},
      {"seed", [](RunConfig& c, std::string_view v) { c.set_seed(to_u64(v, "seed")); }},
      {"tune_max_rms_m",
       [](RunConfig& c, std::string_view v) { c.tuning.max_rms_m = to_double(v, "tune_max_rms_m"); }},
      {"tune_train_fraction",
       [](RunConfig& c, std::string_view v) {
         c.tuning.train_fraction = to_double(v, "tune_train_fraction");
       }},
  };
  return table;
}

std::string num(double v) { return fmt::format("{}", v); }

std::string mat(const Eigen::Matrix3d& m) {
  std::string out;
  for (int i = 0; i < 9; ++i) {
    out += (i ? "," : "") + num(m(i / 3, i % 3));
  }
  return out;
}

} // namespace

void RunConfig::validate() const {
  filter.validate();
  ulpa.validate();
  mc.validate();
  rta::two_sided_z(rta.confidence);
  if (!(rta.delta > 0.0)) {
    throw InputError("rta_delta must be positive");
  }
  if (rta.v_bar0 && !(*rta.v_bar0 > 0.0)) {
    throw InputError("rta_v_bar0_mps must be positive");
  }
  if (!(tuning.max_rms_m > 0.0)) {
    throw InputError("tune_max_rms_m must be positive");
  }
  if (!(tuning.train_fraction > 0.0 && tuning.train_fraction <= 1.0)) {
    throw InputError("tune_train_fraction must lie in (0, 1]");
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == text.npos ? text.npos : nl - pos);
    pos = nl == text.npos ? text.size() : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != line.npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == line.npos) {
      throw InputError(fmt::format("config line {}: expected 'key = value'", line_no));
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw InputError(fmt::format("config line {}: unknown key '{}'", line_no, key));
    }
    if (!seen.emplace(key).second) {
      throw InputError(fmt::format("config line {}: duplicate key '{}'", line_no, key));
    }
    try {
      it->second(cfg, value);
    } catch (const InputError& e) {
      throw InputError(fmt::format("config line {}: {}", line_no, e.what()));
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(io::read_text_file(path));
  } catch (const InputError& e) {
    throw InputError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<std::pair<std::string, std::string>> config_snapshot(const RunConfig& c) {
  return {
      {"dt_s", num(c.filter.dt_s)},
      {"sigma_a2_m2s4", num(c.filter.sigma_a2)},
      {"q_max_m2", mat(c.filter.q_max)},
      {"q_min_m2", mat(c.filter.q_min)},
      {"k_gain", num(c.filter.k_gain)},
      {"lpa", num(c.filter.lpa)},
      {"progress_mode",
       c.filter.progress_mode == filter::ProgressMode::Time ? "time" : "distance"},
      {"rta_delta", num(c.rta.delta)},
      {"rta_v_bar0_mps", c.rta.v_bar0 ? num(*c.rta.v_bar0) : "auto"},
      {"confidence", num(c.rta.confidence)},
      {"ulpa_growth_rate_s_per_s", num(c.ulpa.growth_rate)},
      {"ulpa_activation_fraction", num(c.ulpa.activation_fraction)},
      {"ulpa_tolerance_s", num(c.ulpa.rta_tolerance_s)},
      {"mc_samples", std::to_string(c.mc.samples)},
      {"mc_dt_s", num(c.mc.dt_s)},
      {"seed", std::to_string(c.mc.seed)},
      {"tune_max_rms_m", num(c.tuning.max_rms_m)},
      {"tune_train_fraction", num(c.tuning.train_fraction)},
  };
}

} // namespace rtaprop
