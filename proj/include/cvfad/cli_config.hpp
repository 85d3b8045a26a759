#pragma once

// JSON configuration for bench-cli. Every physical quantity carries its unit
// in the key name; unknown keys are rejected.

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "cvfad/sim.hpp"

namespace cvfad::cli {

struct CliConfig {
  sim::ScenarioConfig scenario;
  // Center frequency used to pick the notch m when notch_m is not given.
  double notch_center_hz = 2800.0;
  std::optional<double> notch_m;
  std::string out_dir = "out";
  bool svg = true;
};

// Reference-design values with damping on from t = 0 and lg = 0.5 mH.
CliConfig default_config();

// Missing keys keep their defaults. Throws ConfigInvalid on unknown keys,
// wrong types or values that fail validation.
CliConfig parse_config(const nlohmann::json& doc);
CliConfig load_config(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const CliConfig& cfg);

// Recomputes the AD notch from notch_m / notch_center_hz after edits.
void refresh_notch(CliConfig& cfg);

}  // namespace cvfad::cli
