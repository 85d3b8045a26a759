#include "cvfad/cli_config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>

#include <fmt/format.h>

#include "cvfad/errors.hpp"

namespace cvfad::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Walks one JSON object, handing each known key to its setter and rejecting
// everything else.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigInvalid(fmt::format("{} must be an object", path_));
  }

  Section& number(const std::string& key, const std::function<void(double)>& set) {
    handlers_[key] = [this, key, set](const json& v) {
      if (!v.is_number()) throw ConfigInvalid(fmt::format("{}.{} must be a number", path_, key));
      set(v.get<double>());
    };
    return *this;
  }
  Section& integer(const std::string& key, const std::function<void(long)>& set) {
    handlers_[key] = [this, key, set](const json& v) {
      if (!v.is_number_integer()) throw ConfigInvalid(fmt::format("{}.{} must be an integer", path_, key));
      set(v.get<long>());
    };
    return *this;
  }
  Section& boolean(const std::string& key, const std::function<void(bool)>& set) {
    handlers_[key] = [this, key, set](const json& v) {
      if (!v.is_boolean()) throw ConfigInvalid(fmt::format("{}.{} must be true or false", path_, key));
      set(v.get<bool>());
    };
    return *this;
  }
  Section& optional_number(const std::string& key, const std::function<void(std::optional<double>)>& set) {
    handlers_[key] = [this, key, set](const json& v) {
      if (v.is_null()) return set(std::nullopt);
      if (!v.is_number()) throw ConfigInvalid(fmt::format("{}.{} must be a number or null", path_, key));
      set(v.get<double>());
    };
    return *this;
  }
  Section& text(const std::string& key, const std::function<void(std::string)>& set) {
    handlers_[key] = [this, key, set](const json& v) {
      if (!v.is_string()) throw ConfigInvalid(fmt::format("{}.{} must be a string", path_, key));
      set(v.get<std::string>());
    };
    return *this;
  }
  Section& any(const std::string& key, const std::function<void(const json&)>& set) {
    handlers_[key] = set;
    return *this;
  }

  void apply() const {
    for (const auto& [key, value] : obj_.items()) {
      const auto it = handlers_.find(key);
      if (it == handlers_.end()) throw ConfigInvalid(fmt::format("unknown key {}.{}", path_, key));
      it->second(value);
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::map<std::string, std::function<void(const json&)>> handlers_;
};

constexpr double kMilli = 1e-3;
constexpr double kMicro = 1e-6;

// Unit conversions leave round-off in the last digits; 12 significant
// digits round-trips every value a person would type.
double tidy(double x) { return std::stod(fmt::format("{:.12g}", x)); }

}  // namespace

CliConfig default_config() {
  CliConfig cfg;
  cfg.scenario = sim::table1_scenario(0.5e-3);
  refresh_notch(cfg);
  return cfg;
}

void refresh_notch(CliConfig& cfg) {
  try {
    cfg.scenario.loop.ad.notch =
        cfg.notch_m ? diffkit::NotchDesign{*cfg.notch_m}
                    : diffkit::design_notch_for_band(cfg.notch_center_hz, cfg.scenario.ts_control_s);
  } catch (const ConfigInvalid&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigInvalid(fmt::format("cannot size the notch: {}", e.what()));
  }
}

CliConfig parse_config(const json& doc) {
  CliConfig cfg = default_config();
  auto& sc = cfg.scenario;
  double ts = sc.ts_control_s;

  Section(doc, "config")
      .any("lcl",
           [&](const json& v) {
             Section(v, "lcl")
                 .number("l1_mh", [&](double x) { sc.lcl.l1 = x * kMilli; })
                 .number("l2_mh", [&](double x) { sc.lcl.l2 = x * kMilli; })
                 .number("lg_mh", [&](double x) { sc.lcl.lg = x * kMilli; })
                 .number("cf_uf", [&](double x) { sc.lcl.cf = x * kMicro; })
                 .apply();
           })
      .any("pr",
           [&](const json& v) {
             Section(v, "pr")
                 .number("kp_v_per_a", [&](double x) { sc.loop.pr.kp = x; })
                 .number("kr_v_per_a_s", [&](double x) { sc.loop.pr.kr = x; })
                 .number("f0_hz", [&](double x) { sc.loop.pr.omega_c = 2.0 * std::numbers::pi * x; })
                 .apply();
           })
      .any("ad",
           [&](const json& v) {
             Section(v, "ad")
                 .number("ka_v_per_a", [&](double x) { sc.loop.ad.ka = x; })
                 .number("lead_pz", [&](double x) { sc.loop.ad.lead.pole_pz = x; })
                 .optional_number("notch_m", [&](std::optional<double> x) { cfg.notch_m = x; })
                 .number("notch_center_hz", [&](double x) { cfg.notch_center_hz = x; })
                 .apply();
           })
      .number("kpwm", [&](double x) { sc.loop.kpwm = x; })
      .number("ts_us", [&](double x) { ts = x * kMicro; })
      .any("grid",
           [&](const json& v) {
             Section(v, "grid")
                 .number("voltage_rms_v", [&](double x) { sc.grid_voltage_rms = x; })
                 .number("freq_hz", [&](double x) { sc.grid_freq_hz = x; })
                 .apply();
           })
      .any("reference",
           [&](const json& v) {
             Section(v, "reference")
                 .number("amplitude_a", [&](double x) { sc.ref.amplitude_a = x; })
                 .number("phase_deg", [&](double x) { sc.ref.phase_rad = x * std::numbers::pi / 180.0; })
                 .number("freq_hz", [&](double x) { sc.ref.omega_rad_s = 2.0 * std::numbers::pi * x; })
                 .any("steps",
                      [&](const json& steps) {
                        if (!steps.is_array()) throw ConfigInvalid("reference.steps must be an array");
                        sc.ref.schedule.clear();
                        for (const auto& s : steps) {
                          std::pair<double, double> ev{0.0, 0.0};
                          Section(s, "reference.steps[]")
                              .number("t_ms", [&](double x) { ev.first = x * kMilli; })
                              .number("amplitude_a", [&](double x) { ev.second = x; })
                              .apply();
                          sc.ref.schedule.push_back(ev);
                        }
                      })
                 .apply();
           })
      .any("sim",
           [&](const json& v) {
             Section(v, "sim")
                 .number("t_end_ms", [&](double x) { sc.t_end_s = x * kMilli; })
                 .integer("substeps", [&](long x) { sc.substeps_per_sample = static_cast<int>(x); })
                 .integer("delay_samples", [&](long x) { sc.delay_samples = static_cast<int>(x); })
                 .boolean("grid_feedforward", [&](bool x) { sc.grid_feedforward = x; })
                 .optional_number("command_limit_v", [&](std::optional<double> x) { sc.command_limit_v = x; })
                 .any("ad_schedule",
                      [&](const json& events) {
                        if (!events.is_array()) throw ConfigInvalid("sim.ad_schedule must be an array");
                        sc.ad_schedule.clear();
                        for (const auto& e : events) {
                          std::pair<double, bool> ev{0.0, false};
                          Section(e, "sim.ad_schedule[]")
                              .number("t_ms", [&](double x) { ev.first = x * kMilli; })
                              .boolean("enabled", [&](bool x) { ev.second = x; })
                              .apply();
                          sc.ad_schedule.push_back(ev);
                        }
                      })
                 .apply();
           })
      .any("output",
           [&](const json& v) {
             Section(v, "output")
                 .text("dir", [&](std::string x) { cfg.out_dir = std::move(x); })
                 .boolean("svg", [&](bool x) { cfg.svg = x; })
                 .apply();
           })
      .apply();

  sc.ts_control_s = ts;
  sc.loop.ad.ts = ts;
  sc.loop.ad.cf = sc.lcl.cf;
  refresh_notch(cfg);
  sc.validate();
  return cfg;
}

CliConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid(fmt::format("cannot open config file {}", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigInvalid(fmt::format("{}: {}", path.string(), e.what()));
  }
  return parse_config(doc);
}

ordered_json to_json(const CliConfig& cfg) {
  const auto& sc = cfg.scenario;
  ordered_json steps = ordered_json::array();
  for (const auto& [t, a] : sc.ref.schedule) steps.push_back({{"t_ms", tidy(t / kMilli)}, {"amplitude_a", a}});
  ordered_json schedule = ordered_json::array();
  for (const auto& [t, on] : sc.ad_schedule) schedule.push_back({{"t_ms", tidy(t / kMilli)}, {"enabled", on}});
  const double two_pi = 2.0 * std::numbers::pi;

  ordered_json doc;
  doc["lcl"] = {{"l1_mh", tidy(sc.lcl.l1 / kMilli)},
                {"l2_mh", tidy(sc.lcl.l2 / kMilli)},
                {"lg_mh", tidy(sc.lcl.lg / kMilli)},
                {"cf_uf", tidy(sc.lcl.cf / kMicro)}};
  doc["pr"] = {{"kp_v_per_a", sc.loop.pr.kp},
               {"kr_v_per_a_s", sc.loop.pr.kr},
               {"f0_hz", tidy(sc.loop.pr.omega_c / two_pi)}};
  doc["ad"] = {{"ka_v_per_a", sc.loop.ad.ka},
               {"lead_pz", sc.loop.ad.lead.pole_pz},
               {"notch_m", cfg.notch_m ? ordered_json(*cfg.notch_m) : ordered_json(nullptr)},
               {"notch_center_hz", cfg.notch_center_hz}};
  doc["kpwm"] = sc.loop.kpwm;
  doc["ts_us"] = tidy(sc.ts_control_s / kMicro);
  doc["grid"] = {{"voltage_rms_v", sc.grid_voltage_rms}, {"freq_hz", sc.grid_freq_hz}};
  doc["reference"] = {{"amplitude_a", sc.ref.amplitude_a},
                      {"phase_deg", tidy(sc.ref.phase_rad * 180.0 / std::numbers::pi)},
                      {"freq_hz", tidy(sc.ref.omega_rad_s / two_pi)},
                      {"steps", steps}};
  doc["sim"] = {{"t_end_ms", tidy(sc.t_end_s / kMilli)},
                {"substeps", sc.substeps_per_sample},
                {"delay_samples", sc.delay_samples},
                {"grid_feedforward", sc.grid_feedforward},
                {"command_limit_v", sc.command_limit_v ? ordered_json(*sc.command_limit_v) : ordered_json(nullptr)},
                {"ad_schedule", schedule}};
  doc["output"] = {{"dir", cfg.out_dir}, {"svg", cfg.svg}};
  return doc;
}

}  // namespace cvfad::cli
