#include "cvfad/sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <ostream>

#include <fftw3.h>
#include <fmt/format.h>

#include "cvfad/errors.hpp"

namespace cvfad::sim {

namespace {

constexpr double kDivergenceLimit = 1e6;
constexpr int kPlantStates = 5;  // i1, vc, i2, grid cos, grid sin

}  // namespace

void ScenarioConfig::validate() const {
  try {
    lcl.validate();
    loop.validate();
    ref.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigInvalid(e.what());
  }
  if (!(t_end_s > 0.0)) throw ConfigInvalid("t_end_s must be positive");
  if (!(ts_control_s > 0.0)) throw ConfigInvalid("ts_control_s must be positive");
  if (substeps_per_sample < 1) throw ConfigInvalid("substeps_per_sample must be at least 1");
  if (delay_samples != 0 && delay_samples != 1) throw ConfigInvalid("delay_samples must be 0 or 1");
  if (!(grid_voltage_rms >= 0.0) || !(grid_freq_hz > 0.0)) throw ConfigInvalid("bad grid voltage or frequency");
  if (std::abs(loop.ad.ts - ts_control_s) > 1e-12 * ts_control_s)
    throw ConfigInvalid("damping filter sample time differs from the control sample time");
  for (std::size_t i = 1; i < ad_schedule.size(); ++i)
    if (!(ad_schedule[i].first > ad_schedule[i - 1].first))
      throw ConfigInvalid("damping schedule times must be strictly increasing");
  if (command_limit_v && !(*command_limit_v > 0.0)) throw ConfigInvalid("command limit must be positive");
  const double h = ts_control_s / substeps_per_sample;
  const double f_res = std::max(plant::resonance_frequency(lcl), plant::network_resonance_frequency(lcl));
  if (f_res >= 0.5 / h) throw ConfigInvalid("plant resonance is above the substep Nyquist rate");
}

bool ScenarioConfig::ad_enabled_at(double t) const {
  bool on = false;
  for (const auto& [time, flag] : ad_schedule) {
    if (time <= t) on = flag;
    else break;
  }
  return on;
}

SimTrace run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();

  const double ts = cfg.ts_control_s;
  const double h = ts / cfg.substeps_per_sample;
  const double w_grid = 2.0 * std::numbers::pi * cfg.grid_freq_hz;
  const double v_peak = cfg.grid_voltage_rms * std::numbers::sqrt2;

  // Per-phase plant with the grid source folded in as an undamped oscillator,
  // so the whole substep is an exact ZOH update.
  const auto ss = plant::state_space(cfg.lcl);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(kPlantStates, kPlantStates);
  a.topLeftCorner(3, 3) = ss.a;
  a.block(0, 3, 3, 1) = ss.b.col(1);
  a(3, 4) = -w_grid;
  a(4, 3) = w_grid;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(kPlantStates, 1);
  b.topRows(3) = ss.b.col(0);
  const auto dss = plant::zoh_discretize(a, b, h);
  const Eigen::VectorXd bd = dss.bd.col(0);

  std::array<Eigen::VectorXd, 3> x;
  for (int k = 0; k < 3; ++k) {
    x[k] = Eigen::VectorXd::Zero(kPlantStates);
    const double phase = -2.0 * std::numbers::pi * k / 3.0;
    x[k](3) = v_peak * std::cos(phase);
    x[k](4) = v_peak * std::sin(phase);
  }

  ctrl::ControllerState state(cfg.loop.pr, cfg.loop.ad);
  ctrl::AlphaBeta pending{};

  const auto n_samples = static_cast<std::size_t>(std::floor(cfg.t_end_s / ts + 1e-9)) + 1;
  SimTrace tr;
  tr.ref_omega_rad_s = cfg.ref.omega_rad_s;
  tr.ref_phase_rad = cfg.ref.phase_rad;
  tr.time_s.reserve(n_samples);

  for (std::size_t n = 0; n < n_samples; ++n) {
    const double t = static_cast<double>(n) * ts;

    bool finite = true;
    for (const auto& xs : x)
      for (int i = 0; i < 3; ++i)
        if (!(std::abs(xs(i)) <= kDivergenceLimit)) finite = false;
    if (!finite) {
      tr.diverged = true;
      break;
    }

    const auto i2 = ctrl::clarke(x[0](2), x[1](2), x[2](2));
    const auto vc = ctrl::clarke(x[0](1), x[1](1), x[2](1));
    const bool ad_on = cfg.ad_enabled_at(t);
    auto cmd = ctrl::control_step(state, {i2, vc}, ctrl::reference_sample(cfg.ref, t), ad_on);
    if (cfg.grid_feedforward) {
      cmd.alpha += v_peak * std::cos(w_grid * t);
      cmd.beta += v_peak * std::sin(w_grid * t);
    }
    if (cfg.command_limit_v) cmd = ctrl::clamp_command(cmd, *cfg.command_limit_v);

    tr.time_s.push_back(t);
    for (int k = 0; k < 3; ++k) {
      tr.i2_abc[k].push_back(x[k](2));
      tr.vc_abc[k].push_back(x[k](1));
    }
    tr.v_cmd_alpha.push_back(cmd.alpha);
    tr.v_cmd_beta.push_back(cmd.beta);
    tr.ad_enabled.push_back(ad_on);
    tr.ref_amplitude.push_back(cfg.ref.amplitude_at(t));

    const ctrl::AlphaBeta applied = cfg.delay_samples == 1 ? pending : cmd;
    pending = cmd;
    const auto v = ctrl::inverse_clarke(applied);
    const std::array<double, 3> v_inv{cfg.loop.kpwm * v.a, cfg.loop.kpwm * v.b, cfg.loop.kpwm * v.c};
    for (int k = 0; k < 3; ++k)
      for (int s = 0; s < cfg.substeps_per_sample; ++s) x[k] = dss.ad * x[k] + bd * v_inv[k];
  }
  return tr;
}

namespace {

// Amplitude spectrum |X_j| for j = 0..N/2 via FFTW. Planning is not
// thread-safe, so it is serialized.
std::vector<double> magnitude_spectrum(const double* data, int n) {
  double* in = fftw_alloc_real(static_cast<std::size_t>(n));
  fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
  fftw_plan plan;
#pragma omp critical(cvfad_fftw)
  plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  std::copy(data, data + n, in);
  fftw_execute(plan);
  std::vector<double> mag(static_cast<std::size_t>(n / 2 + 1));
  for (std::size_t j = 0; j < mag.size(); ++j) mag[j] = std::hypot(out[j][0], out[j][1]);
#pragma omp critical(cvfad_fftw)
  fftw_destroy_plan(plan);
  fftw_free(in);
  fftw_free(out);
  return mag;
}

}  // namespace

TraceMetrics compute_metrics(const SimTrace& trace, double t0, double t1, double f0, double f_res) {
  if (trace.size() < 2) throw WindowTooShort("trace holds fewer than two samples");
  if (!(f0 > 0.0) || !(f_res > 0.0)) throw std::invalid_argument("f0 and f_res must be positive");
  const double ts = trace.time_s[1] - trace.time_s[0];
  t1 = std::min(t1, trace.time_s.back());
  if (!(t0 >= 0.0) || !(t1 > t0)) throw WindowTooShort("empty metrics window");

  const auto periods = static_cast<int>(std::floor((t1 - t0) * f0 + 1e-9));
  if (periods < 2) throw WindowTooShort(fmt::format("window spans {} fundamental periods, need 2", (t1 - t0) * f0));

  const auto i0 = static_cast<std::size_t>(std::ceil(t0 / ts - 1e-9));
  const std::size_t available = trace.size() - i0;
  int k = periods;
  double samples = 0.0;
  for (int cand = periods; cand >= 2; --cand) {
    samples = cand / (f0 * ts);
    if (std::abs(samples - std::round(samples)) < 1e-6 && std::round(samples) <= static_cast<double>(available)) {
      k = cand;
      break;
    }
    if (cand == 2) {
      k = periods;
      samples = std::floor(periods / (f0 * ts));
    }
  }
  const auto n = static_cast<int>(std::min<double>(std::round(samples), static_cast<double>(available)));

  TraceMetrics m;
  m.diverged = trace.diverged;
  const double* xa = trace.i2_abc[0].data() + i0;
  const auto mag = magnitude_spectrum(xa, n);
  const double scale = 2.0 / n;
  const auto half = static_cast<std::size_t>(n / 2);

  m.fundamental_peak_a = scale * mag[static_cast<std::size_t>(k)];
  double harm = 0.0;
  for (int hn = 2; hn <= 50; ++hn) {
    const auto j = static_cast<std::size_t>(hn * k);
    if (j >= half) break;
    harm += (scale * mag[j]) * (scale * mag[j]);
  }
  m.thd_pct = m.fundamental_peak_a > 0.0 ? 100.0 * std::sqrt(harm) / m.fundamental_peak_a : 0.0;

  const double df = 1.0 / (n * ts);
  double band = 0.0, total = 0.0;
  for (std::size_t j = 1; j <= half; ++j) {
    const double e = mag[j] * mag[j];
    total += e;
    const double f = static_cast<double>(j) * df;
    if (f >= 0.9 * f_res && f <= 1.1 * f_res) band += e;
  }
  m.resonance_band_ratio = total > 0.0 ? band / total : 0.0;

  // Per-cycle tracking error against the phase-a reference.
  const double cycle = 1.0 / (f0 * ts);
  std::vector<bool> ok;
  std::vector<std::size_t> starts;
  for (int c = 0;; ++c) {
    const auto s = static_cast<std::size_t>(std::llround(c * cycle));
    const auto e = static_cast<std::size_t>(std::llround((c + 1) * cycle));
    if (e > static_cast<std::size_t>(n)) break;
    double err2 = 0.0, ref2 = 0.0;
    for (std::size_t i = i0 + s; i < i0 + e; ++i) {
      const double r = trace.ref_amplitude[i] * std::cos(trace.ref_omega_rad_s * trace.time_s[i] + trace.ref_phase_rad);
      const double d = trace.i2_abc[0][i] - r;
      err2 += d * d;
      ref2 += r * r;
    }
    ok.push_back(ref2 > 0.0 && std::sqrt(err2 / ref2) < 0.02);
    starts.push_back(s);
  }
  for (std::size_t c = ok.size(); c-- > 0;) {
    if (!ok[c]) break;
    m.settle_time_s = static_cast<double>(starts[c]) * ts;
  }
  return m;
}

double dominant_frequency(const SimTrace& trace, double t0, double t1, double f_min_hz) {
  if (trace.size() < 2) throw WindowTooShort("trace holds fewer than two samples");
  const double ts = trace.time_s[1] - trace.time_s[0];
  t1 = std::min(t1, trace.time_s.back());
  const auto i0 = static_cast<std::size_t>(std::ceil(t0 / ts - 1e-9));
  const auto i1 = static_cast<std::size_t>(std::floor(t1 / ts + 1e-9));
  if (!(t0 >= 0.0) || i1 < i0 + 4) throw WindowTooShort("window holds too few samples for a spectrum");
  const auto n = static_cast<int>(i1 - i0);
  const auto mag = magnitude_spectrum(trace.i2_abc[0].data() + i0, n);
  const double df = 1.0 / (n * ts);
  std::size_t best = 0;
  for (std::size_t j = 1; j < mag.size(); ++j)
    if (static_cast<double>(j) * df >= f_min_hz && (best == 0 || mag[j] > mag[best])) best = j;
  if (best == 0) throw std::invalid_argument("no spectral line above f_min_hz");
  return static_cast<double>(best) * df;
}

TraceMetrics tail_metrics(const ScenarioConfig& cfg, const SimTrace& trace, const SweepOptions& opts) {
  TraceMetrics m;
  if (trace.size() >= 2) {
    const double t1 = trace.time_s.back();
    const double t0 = std::max(0.0, t1 - opts.window_periods / cfg.grid_freq_hz);
    try {
      m = compute_metrics(trace, t0, t1, cfg.grid_freq_hz, plant::network_resonance_frequency(cfg.lcl));
    } catch (const WindowTooShort&) {
      m = {};
    }
  }
  m.diverged = trace.diverged;
  return m;
}

namespace {

SweepRow sweep_row(const ScenarioConfig& tmpl, SweepAxis axis, double value, const SweepOptions& opts) {
  ScenarioConfig cfg = tmpl;
  (axis == SweepAxis::Lg ? cfg.lcl.lg : cfg.loop.ad.ka) = value;
  return {cfg.lcl.lg, cfg.loop.ad.ka, tail_metrics(cfg, run_scenario(cfg), opts)};
}

}  // namespace

std::vector<SweepRow> sweep(const ScenarioConfig& tmpl, SweepAxis axis, const std::vector<double>& values,
                            const SweepOptions& opts) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  std::vector<SweepRow> rows(values.size());
  std::vector<std::exception_ptr> errors(values.size());
  const auto n = static_cast<long>(values.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      rows[u] = sweep_row(tmpl, axis, values[u], opts);
    } catch (...) {
      errors[u] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

std::vector<SweepRow> sweep_serial(const ScenarioConfig& tmpl, SweepAxis axis, const std::vector<double>& values,
                                   const SweepOptions& opts) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (double v : values) rows.push_back(sweep_row(tmpl, axis, v, opts));
  return rows;
}

void write_trace_csv(std::ostream& os, const SimTrace& tr) {
  os << "t_s,i2_a,i2_b,i2_c,vc_a,vc_b,vc_c,vcmd_alpha,vcmd_beta,ad_on,ref_amp\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    os << fmt::format("{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{},{:.12g}\n", tr.time_s[i],
                      tr.i2_abc[0][i], tr.i2_abc[1][i], tr.i2_abc[2][i], tr.vc_abc[0][i], tr.vc_abc[1][i], tr.vc_abc[2][i],
                      tr.v_cmd_alpha[i], tr.v_cmd_beta[i], tr.ad_enabled[i] ? 1 : 0, tr.ref_amplitude[i]);
  }
}

void write_metrics_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "lg_h,ka,thd_pct,fund_peak_a,res_band_ratio,settle_s,diverged\n";
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    os << fmt::format("{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{},{}\n", r.lg_h, r.ka, m.thd_pct, m.fundamental_peak_a,
                      m.resonance_band_ratio, m.settle_time_s ? fmt::format("{:.12g}", *m.settle_time_s) : "",
                      m.diverged ? 1 : 0);
  }
}

ScenarioConfig table1_scenario(double lg_h) {
  ScenarioConfig cfg;
  cfg.lcl = {1.6e-3, 0.4e-3, lg_h, 9.8e-6};
  cfg.loop.pr = {8.3, 400.0, 2.0 * std::numbers::pi * 60.0};
  cfg.loop.ad.ka = 12.0;
  cfg.loop.ad.cf = 9.8e-6;
  cfg.loop.ad.lead = {0.75};
  cfg.loop.ad.ts = 1e-4;
  cfg.loop.ad.notch = diffkit::design_notch_for_band(2800.0, 1e-4);
  cfg.loop.kpwm = 1.0;
  cfg.ref.amplitude_a = 20.0;
  cfg.ref.omega_rad_s = 2.0 * std::numbers::pi * 60.0;
  cfg.ts_control_s = 1e-4;
  cfg.ad_schedule = {{0.0, true}};
  return cfg;
}

ScenarioConfig case1_scenario(double lg_h) {
  ScenarioConfig cfg = table1_scenario(lg_h);
  cfg.ad_schedule = {{0.0, false}, {0.1, true}};
  return cfg;
}

ScenarioConfig case2_scenario(double lg_h) {
  ScenarioConfig cfg = table1_scenario(lg_h);
  cfg.ref.schedule = {{0.08, 30.0}};
  return cfg;
}

}  // namespace cvfad::sim
