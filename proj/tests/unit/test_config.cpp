#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cvfad/cli_config.hpp"
#include "cvfad/errors.hpp"

using namespace cvfad;
using nlohmann::json;

TEST_CASE("default configuration") {
  const auto cfg = cli::default_config();
  const auto& sc = cfg.scenario;
  CHECK(sc.lcl.l1 == 1.6e-3);
  CHECK(sc.lcl.l2 == 0.4e-3);
  CHECK(sc.lcl.lg == 0.5e-3);
  CHECK(sc.lcl.cf == 9.8e-6);
  CHECK(sc.loop.pr.kp == 8.3);
  CHECK(sc.loop.pr.kr == 400.0);
  CHECK(sc.loop.ad.ka == 12.0);
  CHECK(sc.loop.ad.lead.pole_pz == 0.75);
  CHECK(sc.loop.ad.notch.m == 0.125);
  CHECK(sc.loop.ad.ts == sc.ts_control_s);
  CHECK(sc.ts_control_s == 1e-4);
  CHECK(sc.grid_voltage_rms == 110.0);
  CHECK(sc.delay_samples == 0);
  CHECK_FALSE(cfg.notch_m.has_value());
  CHECK_NOTHROW(sc.validate());
}

TEST_CASE("empty document keeps defaults; partial documents override") {
  const auto d = cli::parse_config(json::object());
  CHECK(cli::to_json(d) == cli::to_json(cli::default_config()));

  const auto c = cli::parse_config(json::parse(R"({"lcl": {"lg_mh": 3}, "ad": {"ka_v_per_a": 9.5, "notch_m": 0.5},
                                                   "ts_us": 50, "sim": {"delay_samples": 1, "command_limit_v": 175}})"));
  CHECK(c.scenario.lcl.lg == doctest::Approx(3e-3));
  CHECK(c.scenario.loop.ad.ka == 9.5);
  CHECK(c.scenario.loop.ad.notch.m == 0.5);
  CHECK(c.scenario.ts_control_s == doctest::Approx(5e-5));
  CHECK(c.scenario.loop.ad.ts == c.scenario.ts_control_s);
  CHECK(c.scenario.delay_samples == 1);
  REQUIRE(c.scenario.command_limit_v.has_value());
  CHECK(*c.scenario.command_limit_v == 175.0);
  CHECK(c.scenario.lcl.l1 == 1.6e-3);
}

TEST_CASE("notch is resized when the sample time changes") {
  const auto c = cli::parse_config(json::parse(R"({"ts_us": 80})"));
  CHECK(c.scenario.loop.ad.notch.m == diffkit::design_notch_for_band(2800.0, 8e-5).m);
  // centre above Nyquist
  CHECK_THROWS_AS(cli::parse_config(json::parse(R"({"ts_us": 200})")), ConfigInvalid);
  // an explicit m skips the design step
  CHECK(cli::parse_config(json::parse(R"({"ts_us": 200, "ad": {"notch_m": 2}})")).scenario.loop.ad.notch.m == 2.0);
}

TEST_CASE("invalid documents are rejected") {
  const char* bad[] = {
      R"({"lcl": {"l3_mh": 1}})",
      R"({"unknown": 1})",
      R"({"lcl": {"lg_mh": "big"}})",
      R"({"lcl": {"lg_mh": -1}})",
      R"({"sim": {"substeps": 2.5}})",
      R"({"sim": {"delay_samples": 3}})",
      R"({"sim": {"ad_schedule": [{"t_ms": 5, "enabled": 1}]}})",
      R"({"sim": {"ad_schedule": {"t_ms": 5}}})",
      R"({"reference": {"steps": [{"t_ms": 5, "amp": 3}]}})",
      R"({"ad": {"notch_m": -0.5}})",
      R"({"ad": {"lead_pz": 1.5}})",
      R"({"output": {"svg": "yes"}})",
      R"([1, 2])",
  };
  for (const char* doc : bad) {
    CAPTURE(doc);
    CHECK_THROWS_AS(cli::parse_config(json::parse(doc)), ConfigInvalid);
  }
}

TEST_CASE("property: to_json and parse_config round trip") {
  auto cfg = cli::default_config();
  cfg.scenario.lcl.lg = 3e-3;
  cfg.scenario.ref.schedule = {{0.08, 30.0}};
  cfg.scenario.ad_schedule = {{0.0, false}, {0.1, true}};
  cfg.scenario.command_limit_v = 175.0;
  cfg.notch_m = 0.25;
  cli::refresh_notch(cfg);
  const auto doc = cli::to_json(cfg);
  const auto back = cli::parse_config(json::parse(doc.dump()));
  CHECK(cli::to_json(back) == doc);
  CHECK(back.scenario.loop.ad.notch.m == 0.25);
}

TEST_CASE("bundled config matches the defaults") {
  const auto path = std::filesystem::path(CVFAD_SOURCE_DIR) / "config" / "table1.json";
  const auto cfg = cli::load_config(path);
  CHECK(cli::to_json(cfg) == cli::to_json(cli::default_config()));
  CHECK_THROWS_AS(cli::load_config("/nonexistent/cfg.json"), ConfigInvalid);
  const auto tmp = std::filesystem::temp_directory_path() / "cvfad_bad_config.json";
  std::ofstream(tmp) << "{ not json";
  CHECK_THROWS_AS(cli::load_config(tmp), ConfigInvalid);
  std::filesystem::remove(tmp);
}
