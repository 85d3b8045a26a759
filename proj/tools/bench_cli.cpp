// bench-cli: frequency responses, pole maps, simulations and sweeps for the
// CVF-AD current loop. Exit codes: 0 ok, 2 config, 3 compute, 4 non-finite output.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cvfad/cli_config.hpp"
#include "cvfad/diffkit.hpp"
#include "cvfad/errors.hpp"
#include "cvfad/plant.hpp"
#include "cvfad/sim.hpp"
#include "cvfad/svg.hpp"
#include "cvfad/ztf.hpp"

namespace fs = std::filesystem;
using namespace cvfad;

namespace {

enum Exit { kOk = 0, kConfig = 2, kCompute = 3, kNonFinite = 4 };

struct NonFinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything is rendered in memory and only written once all work succeeded.
struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;
  void add(std::string name, std::string body) { files.emplace_back(std::move(name), std::move(body)); }
};

void write_outputs(const Outputs& out, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& [name, body] : out.files) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error(fmt::format("cannot write {}", (dir / name).string()));
    f << body;
  }
}

void require_finite(double v, const std::string& what) {
  if (std::isnan(v)) throw NonFinite(fmt::format("NaN in {}", what));
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n == 1) return {lo};
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

// ---- bode ----------------------------------------------------------------

const std::vector<std::string> kBodeTargets{"lcl",   "lcl-damped",    "backward", "forward", "tustin",   "lead",
                                            "notch", "backward-lead", "proposed", "ad",      "open-loop"};

ztf::RationalTF bode_target(const cli::CliConfig& cfg, const std::string& target) {
  const auto& sc = cfg.scenario;
  const auto& ad = sc.loop.ad;
  const double ts = sc.ts_control_s;
  if (target == "lcl") return plant::lcl_tf(sc.lcl);
  if (target == "lcl-damped") return plant::damped_lcl_tf(sc.lcl, ad.ka, sc.loop.kpwm);
  if (target == "backward") return diffkit::make_backward(ts);
  if (target == "forward") return diffkit::make_forward(ts);
  if (target == "tustin") return diffkit::make_tustin(ts);
  if (target == "lead") return diffkit::make_lead(ad.lead, ts);
  if (target == "notch") return diffkit::make_notch(ad.notch, ts);
  if (target == "backward-lead") return diffkit::make_backward_lead(ad.lead, ts);
  if (target == "proposed") return diffkit::make_proposed(ad.lead, ad.notch, ts);
  if (target == "ad") return diffkit::make_ad_filter(ad);
  return plant::open_loop_tf(sc.lcl, sc.loop);
}

void cmd_bode(const cli::CliConfig& cfg, const std::string& target, double fmin, double fmax, int points,
              Outputs& out) {
  const auto tf = bode_target(cfg, target);
  const auto fr = ztf::freq_response(tf, ztf::logspace(fmin, fmax, points));
  for (const auto& v : fr.values) {
    require_finite(v.real(), target + " response");
    require_finite(v.imag(), target + " response");
  }
  std::ostringstream csv;
  ztf::write_csv(csv, fr);
  out.add(target + "_bode.csv", csv.str());

  if (cfg.svg) {
    svg::Figure fig;
    fig.title = fmt::format("{} frequency response", target);
    svg::Series mag{fr.freqs_hz, {}, svg::palette(0), "", false};
    for (const auto& v : fr.values) mag.y.push_back(20.0 * std::log10(std::abs(v)));
    svg::Series ph{fr.freqs_hz, ztf::unwrapped_phase_deg(fr), svg::palette(1), "", false};
    fig.panels.push_back({"frequency (Hz)", "magnitude (dB)", true, std::nullopt, std::nullopt, {mag}, {}});
    fig.panels.push_back({"frequency (Hz)", "phase (deg)", true, std::nullopt, std::nullopt, {ph}, {}});
    out.add(target + "_bode.svg", svg::render(fig));
  }
  std::cout << fmt::format("bode {}: {} points, {:g}-{:g} Hz\n", target, fr.freqs_hz.size(), fmin, fmax);
}

// ---- pzmap ---------------------------------------------------------------

void cmd_pzmap(const cli::CliConfig& cfg, double ka_min, double ka_max, int ka_count, std::vector<double> lg_mh,
               std::optional<int> delay, Outputs& out) {
  const auto& sc = cfg.scenario;
  if (lg_mh.empty()) lg_mh.push_back(sc.lcl.lg * 1e3);
  const int d = delay.value_or(sc.delay_samples);
  const auto kas = linspace(ka_min, ka_max, ka_count);

  std::ostringstream csv;
  csv << "ka,lg_h,pole_re,pole_im,pole_mag,stable\n";
  svg::Panel panel{"Re z", "Im z", false, std::pair{-1.3, 1.3}, std::pair{-1.3, 1.3}, {}, {}};
  svg::Series circle{{}, {}, "#444", "unit circle", false};
  for (int i = 0; i <= 360; ++i) {
    const double a = i * std::numbers::pi / 180.0;
    circle.x.push_back(std::cos(a));
    circle.y.push_back(std::sin(a));
  }
  panel.series.push_back(circle);

  std::vector<std::string> summary;
  for (double lg : lg_mh) {
    plant::LCLParams lcl = sc.lcl;
    lcl.lg = lg * 1e-3;
    const auto rows = plant::ka_pole_sweep(lcl, sc.loop, sc.ts_control_s, d, kas);
    for (const auto& r : rows) {
      svg::Series pts{{}, {}, svg::ramp(ka_max > ka_min ? (r.ka - ka_min) / (ka_max - ka_min) : 1.0), "", true};
      for (const auto& p : r.poles) {
        require_finite(p.real(), "pole");
        require_finite(p.imag(), "pole");
        csv << fmt::format("{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{}\n", r.ka, r.lg_h, p.real(), p.imag(), std::abs(p),
                           r.stable ? 1 : 0);
        pts.x.push_back(p.real());
        pts.y.push_back(p.imag());
      }
      panel.series.push_back(std::move(pts));
    }

    // First unstable -> stable transition on the grid, refined by bisection.
    std::string verdict = "none";
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      if (!rows[i].stable && rows[i + 1].stable) {
        const auto ka = plant::find_min_stable_ka(lcl, sc.loop, sc.ts_control_s, d, rows[i].ka, rows[i + 1].ka);
        verdict = ka ? fmt::format("{:.6g}", *ka) : "none";
        break;
      }
    }
    const bool all_stable = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.stable; });
    const bool none_stable = std::none_of(rows.begin(), rows.end(), [](const auto& r) { return r.stable; });
    summary.push_back(fmt::format("pzmap lg_mh={:g} delay={} crossing_ka={} ({})", lg, d, verdict,
                                  all_stable ? "stable at every ka" : none_stable ? "unstable at every ka" : "mixed"));
  }
  out.add("pzmap.csv", csv.str());
  if (cfg.svg) {
    svg::Figure fig{"closed-loop poles, colour = ka (blue low, red high)", 640, 530, {panel}};
    out.add("pzmap.svg", svg::render(fig));
  }
  for (const auto& s : summary) std::cout << s << "\n";
}

// ---- simulate ------------------------------------------------------------

void check_trace(const sim::SimTrace& tr) {
  for (std::size_t i = 0; i < tr.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      require_finite(tr.i2_abc[k][i], "grid current");
      require_finite(tr.vc_abc[k][i], "capacitor voltage");
    }
    require_finite(tr.v_cmd_alpha[i], "command");
    require_finite(tr.v_cmd_beta[i], "command");
  }
}

void cmd_simulate(const cli::CliConfig& cfg, Outputs& out) {
  const auto& sc = cfg.scenario;
  const auto tr = sim::run_scenario(sc);
  check_trace(tr);
  const auto m = sim::tail_metrics(sc, tr);

  std::ostringstream trace_csv, metrics_csv;
  sim::write_trace_csv(trace_csv, tr);
  sim::write_metrics_csv(metrics_csv, {{sc.lcl.lg, sc.loop.ad.ka, m}});
  out.add("trace.csv", trace_csv.str());
  out.add("metrics.csv", metrics_csv.str());

  if (cfg.svg) {
    svg::Panel panel{"time (ms)", "grid current (A)", false, std::nullopt, std::nullopt, {}, {}};
    const char* names[3] = {"i2 a", "i2 b", "i2 c"};
    for (int k = 0; k < 3; ++k) {
      svg::Series s{{}, tr.i2_abc[k], svg::palette(static_cast<std::size_t>(k)), names[k], false};
      for (double t : tr.time_s) s.x.push_back(t * 1e3);
      panel.series.push_back(std::move(s));
    }
    for (const auto& [t, on] : sc.ad_schedule)
      if (t > 0.0) panel.vlines.push_back({t * 1e3, on ? "AD on" : "AD off"});
    for (const auto& [t, a] : sc.ref.schedule) panel.vlines.push_back({t * 1e3, fmt::format("ref {:g} A", a)});
    svg::Figure fig{fmt::format("three-phase grid current, lg = {:g} mH", sc.lcl.lg * 1e3), 900, 360, {panel}};
    out.add("currents.svg", svg::render(fig));
  }

  if (tr.diverged)
    std::cout << fmt::format("simulate: diverged at t = {:.4f} s (state magnitude above 1e6)\n", tr.time_s.back() + sc.ts_control_s);
  else
    std::cout << fmt::format("simulate: {} samples, thd {:.3f} %, fundamental {:.3f} A\n", tr.size(), m.thd_pct,
                             m.fundamental_peak_a);
}

// ---- sweep ---------------------------------------------------------------

void cmd_sweep(const cli::CliConfig& cfg, const std::string& axis, const std::vector<double>& values, Outputs& out) {
  const bool lg_axis = axis == "lg";
  std::vector<double> v = values;
  if (lg_axis)
    for (double& x : v) x *= 1e-3;
  const auto rows = sim::sweep(cfg.scenario, lg_axis ? sim::SweepAxis::Lg : sim::SweepAxis::Ka, v);
  for (const auto& r : rows) {
    require_finite(r.metrics.thd_pct, "thd");
    require_finite(r.metrics.fundamental_peak_a, "fundamental");
  }
  std::ostringstream csv;
  sim::write_metrics_csv(csv, rows);
  out.add("sweep_metrics.csv", csv.str());

  if (cfg.svg) {
    svg::Series thd{values, {}, svg::palette(0), "", true};
    svg::Series fund{values, {}, svg::palette(1), "", true};
    for (const auto& r : rows) {
      thd.y.push_back(r.metrics.diverged ? std::nan("") : r.metrics.thd_pct);
      fund.y.push_back(r.metrics.diverged ? std::nan("") : r.metrics.fundamental_peak_a);
    }
    const std::string xl = lg_axis ? "lg (mH)" : "ka (V/A)";
    svg::Figure fig{"sweep (diverged rows omitted)", 900, 260, {}};
    fig.panels.push_back({xl, "THD (%)", false, std::nullopt, std::nullopt, {thd}, {}});
    fig.panels.push_back({xl, "fundamental (A)", false, std::nullopt, std::nullopt, {fund}, {}});
    out.add("sweep.svg", svg::render(fig));
  }
  for (const auto& r : rows)
    std::cout << fmt::format("sweep lg_mh={:g} ka={:g} diverged={} thd={:.3f}\n", r.lg_h * 1e3, r.ka, r.metrics.diverged,
                             r.metrics.thd_pct);
}

// ---- diff-error ----------------------------------------------------------

void cmd_diff_error(const cli::CliConfig& cfg, double fmin, double fmax, int points, Outputs& out) {
  const auto& ad = cfg.scenario.loop.ad;
  const double ts = cfg.scenario.ts_control_s;
  const std::vector<std::pair<std::string, ztf::RationalTF>> tfs{
      {"backward", diffkit::make_backward(ts)},
      {"forward", diffkit::make_forward(ts)},
      {"tustin", diffkit::make_tustin(ts)},
      {"backward-lead", diffkit::make_backward_lead(ad.lead, ts)},
      {"proposed", diffkit::make_proposed(ad.lead, ad.notch, ts)},
  };
  std::ostringstream csv;
  csv << "target,max_mag_err_db,mag_err_at_hz,max_phase_err_deg,phase_err_at_hz\n";
  svg::Panel mag{"frequency (Hz)", "magnitude error (dB)", true, std::nullopt, std::nullopt, {}, {}};
  svg::Panel ph{"frequency (Hz)", "phase error (deg)", true, std::nullopt, std::nullopt, {}, {}};
  const auto freqs = ztf::logspace(fmin, fmax, points);
  std::size_t colour = 0;
  for (const auto& [name, tf] : tfs) {
    const auto e = diffkit::differentiator_error(tf, fmin, fmax, points);
    require_finite(e.max_mag_err_db, name);
    csv << fmt::format("{},{:.12g},{:.12g},{:.12g},{:.12g}\n", name, e.max_mag_err_db, e.mag_err_at_hz, e.max_phase_err_deg,
                       e.phase_err_at_hz);
    const auto fr = ztf::freq_response(tf, freqs);
    svg::Series sm{freqs, {}, svg::palette(colour), name, false};
    svg::Series sp{freqs, {}, svg::palette(colour), name, false};
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      const double w = 2.0 * std::numbers::pi * freqs[i];
      sm.y.push_back(20.0 * std::log10(std::abs(fr.values[i]) / w));
      sp.y.push_back(std::remainder(std::arg(fr.values[i]) * 180.0 / std::numbers::pi - 90.0, 360.0));
    }
    mag.series.push_back(std::move(sm));
    ph.series.push_back(std::move(sp));
    ++colour;
    std::cout << fmt::format("diff-error {}: max |mag err| {:.4f} dB at {:.1f} Hz, max |phase err| {:.3f} deg at {:.1f} Hz\n",
                             name, e.max_mag_err_db, e.mag_err_at_hz, e.max_phase_err_deg, e.phase_err_at_hz);
  }
  out.add("diff_error.csv", csv.str());
  if (cfg.svg) out.add("diff_error.svg", svg::render({"differentiators against the ideal j w", 900, 300, {mag, ph}}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CVF-AD current-loop analysis and simulation"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  bool no_svg = false;
  app.add_option("--config", config_path, "JSON config file (default: built-in reference design)");
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_flag("--no-svg", no_svg, "skip SVG plots");

  auto* bode = app.add_subcommand("bode", "frequency response of one block");
  std::string target;
  double fmin = 10.0, fmax = 4000.0;
  int points = 400;
  bode->add_option("--target", target, "block to evaluate")->required()->check(CLI::IsMember(kBodeTargets));
  bode->add_option("--fmin", fmin, "lowest frequency, Hz")->capture_default_str();
  bode->add_option("--fmax", fmax, "highest frequency, Hz")->capture_default_str();
  bode->add_option("--points", points, "log-spaced points")->capture_default_str()->check(CLI::Range(2, 1000000));

  auto* pz = app.add_subcommand("pzmap", "closed-loop poles over a ka sweep");
  double ka_min = 0.0, ka_max = 12.0;
  int ka_count = 25;
  std::vector<double> pz_lg;
  std::optional<int> pz_delay;
  pz->add_option("--ka-min", ka_min, "")->capture_default_str();
  pz->add_option("--ka-max", ka_max, "")->capture_default_str();
  pz->add_option("--ka-count", ka_count, "")->capture_default_str()->check(CLI::Range(1, 100000));
  pz->add_option("--lg-mh", pz_lg, "grid inductances, mH (default: config)")->delimiter(',');
  pz->add_option("--delay", pz_delay, "computation delay in samples, 0 or 1 (default: config)");

  auto* simc = app.add_subcommand("simulate", "time-domain run with trace and metrics");
  std::string case_name = "custom";
  std::optional<double> sim_lg, t_end_ms;
  simc->add_option("--case", case_name, "case1, case2 or custom")->capture_default_str()->check(CLI::IsMember({"case1", "case2", "custom"}));
  simc->add_option("--lg-mh", sim_lg, "grid inductance, mH");
  simc->add_option("--t-end-ms", t_end_ms, "run length, ms");

  auto* sw = app.add_subcommand("sweep", "metrics over a grid-inductance or ka sweep");
  std::string axis = "lg";
  std::vector<double> values;
  sw->add_option("--axis", axis, "lg (values in mH) or ka")->capture_default_str()->check(CLI::IsMember({"lg", "ka"}));
  sw->add_option("--values", values, "sweep values")->required()->delimiter(',');

  auto* de = app.add_subcommand("diff-error", "differentiator errors against the ideal derivative");
  double de_fmin = 100.0, de_fmax = 3000.0;
  int de_points = 200;
  de->add_option("--fmin", de_fmin, "")->capture_default_str();
  de->add_option("--fmax", de_fmax, "")->capture_default_str();
  de->add_option("--points", de_points, "")->capture_default_str()->check(CLI::Range(2, 1000000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  cli::CliConfig cfg;
  try {
    cfg = config_path.empty() ? cli::default_config() : cli::load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (no_svg) cfg.svg = false;
    auto& sc = cfg.scenario;
    if (simc->parsed()) {
      if (sim_lg) sc.lcl.lg = *sim_lg * 1e-3;
      if (t_end_ms) sc.t_end_s = *t_end_ms * 1e-3;
      if (case_name == "case1") {
        sc.ad_schedule = {{0.0, false}, {0.1, true}};
      } else if (case_name == "case2") {
        sc.ad_schedule = {{0.0, true}};
        sc.ref.schedule = {{0.08, 30.0}};
      }
    }
    if (pz->parsed() && pz_delay && *pz_delay != 0 && *pz_delay != 1) throw ConfigInvalid("--delay must be 0 or 1");
    if ((bode->parsed() && !(fmin > 0.0 && fmax > fmin)) || (de->parsed() && !(de_fmin > 0.0 && de_fmax > de_fmin)))
      throw ConfigInvalid("need 0 < fmin < fmax");
    if (pz->parsed() && !(ka_min >= 0.0 && ka_max >= ka_min)) throw ConfigInvalid("need 0 <= ka-min <= ka-max");
    sc.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }

  Outputs out;
  try {
    if (bode->parsed()) cmd_bode(cfg, target, fmin, fmax, points, out);
    if (pz->parsed()) cmd_pzmap(cfg, ka_min, ka_max, ka_count, pz_lg, pz_delay, out);
    if (simc->parsed()) cmd_simulate(cfg, out);
    if (sw->parsed()) cmd_sweep(cfg, axis, values, out);
    if (de->parsed()) cmd_diff_error(cfg, de_fmin, de_fmax, de_points, out);
  } catch (const NonFinite& e) {
    std::cerr << "non-finite result: " << e.what() << "\n";
    return kNonFinite;
  } catch (const ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "compute error: " << e.what() << "\n";
    return kCompute;
  }

  try {
    write_outputs(out, cfg.out_dir);
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kCompute;
  }
  return kOk;
}
