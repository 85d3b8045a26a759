#include "cvfad/diffkit.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "cvfad/errors.hpp"

namespace cvfad::diffkit {

using ztf::RationalTF;

void LeadDesign::validate() const {
  if (!(pole_pz > 0.0 && pole_pz < 1.0)) throw std::invalid_argument(fmt::format("lead pole {} outside (0, 1)", pole_pz));
}

void NotchDesign::validate() const {
  if (!(m > 0.0)) throw std::invalid_argument(fmt::format("notch m = {} must be positive", m));
}

void ADParams::validate() const {
  if (!(ka >= 0.0)) throw std::invalid_argument("ka must be nonnegative");
  if (!(cf > 0.0)) throw std::invalid_argument("cf must be positive");
  if (!(ts > 0.0)) throw std::invalid_argument("ts must be positive");
  lead.validate();
  notch.validate();
}

namespace {
void require_ts(double ts) {
  if (!(ts > 0.0)) throw std::invalid_argument("sample time must be positive");
}
}  // namespace

RationalTF make_backward(double ts) {
  require_ts(ts);
  return RationalTF::discrete({1.0, -1.0}, {ts, 0.0}, ts);
}

RationalTF make_forward(double ts) {
  require_ts(ts);
  return RationalTF::discrete({1.0 / ts, -1.0 / ts}, {1.0}, ts);
}

RationalTF make_tustin(double ts) {
  require_ts(ts);
  const double k = 2.0 / ts;
  return RationalTF::discrete({k, -k}, {1.0, 1.0}, ts);
}

RationalTF make_lead(const LeadDesign& design, double ts) {
  design.validate();
  require_ts(ts);
  return RationalTF::discrete({design.pole_pz, 0.0}, {1.0, design.pole_pz}, ts);
}

RationalTF make_notch(const NotchDesign& design, double ts) {
  design.validate();
  require_ts(ts);
  const double m = design.m;
  return RationalTF::discrete({2.0 * (m + 1.0), m + 1.0, -(m + 1.0)}, {2.0 * m + 2.0, 1.0, -1.0}, ts);
}

RationalTF make_backward_lead(const LeadDesign& design, double ts) {
  design.validate();
  require_ts(ts);
  const double k = design.pole_pz / ts;
  return RationalTF::discrete({k, -k}, {1.0, design.pole_pz}, ts);
}

RationalTF make_proposed(const LeadDesign& lead, const NotchDesign& notch, double ts) {
  return ztf::cascade(make_backward_lead(lead, ts), make_notch(notch, ts));
}

RationalTF make_ad_filter(const ADParams& p) {
  p.validate();
  return make_proposed(p.lead, p.notch, p.ts).scaled(p.ka * p.cf);
}

DifferentiatorError differentiator_error(const RationalTF& tf, double f_lo, double f_hi, int n) {
  if (n < 2) throw std::invalid_argument("differentiator_error needs n >= 2");
  if (!(f_lo > 0.0 && f_hi > f_lo)) throw std::invalid_argument("need 0 < f_lo < f_hi");
  if (tf.domain() == ztf::Domain::Z && f_hi >= 0.5 / *tf.sample_time())
    throw NyquistExceeded(fmt::format("f_hi = {} Hz is not below Nyquist", f_hi));

  const auto freqs = ztf::logspace(f_lo, f_hi, n);
  const auto fr = ztf::freq_response(tf, freqs);
  DifferentiatorError err;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    const double w = 2.0 * std::numbers::pi * freqs[i];
    const auto g = fr.values[i];
    const double mag_err = 20.0 * std::log10(std::abs(g) / w);
    double phase_err = std::arg(g) * 180.0 / std::numbers::pi - 90.0;
    phase_err = std::remainder(phase_err, 360.0);
    if (std::abs(mag_err) > err.max_mag_err_db) {
      err.max_mag_err_db = std::abs(mag_err);
      err.mag_err_at_hz = freqs[i];
    }
    if (std::abs(phase_err) > err.max_phase_err_deg) {
      err.max_phase_err_deg = std::abs(phase_err);
      err.phase_err_at_hz = freqs[i];
    }
  }
  return err;
}

NotchDesign design_notch_for_band(double f_center, double ts) {
  require_ts(ts);
  if (!(f_center > 0.0)) throw std::invalid_argument("f_center must be positive");
  if (f_center >= 0.5 / ts) throw NyquistExceeded(fmt::format("notch band centre {} Hz is not below Nyquist", f_center));

  constexpr std::array kLadder{0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  constexpr std::array kNarrow{0.25, 0.125, 0.0625, 0.03125, 0.015625};
  constexpr double kMaxDeviationDb = 0.5;

  const auto z = std::polar(1.0, 2.0 * std::numbers::pi * f_center * ts);
  auto deviation_db = [&](double m) {
    return std::abs(20.0 * std::log10(std::abs(ztf::evaluate(make_notch({m}, ts), z))));
  };
  for (double m : kLadder)
    if (deviation_db(m) < kMaxDeviationDb) return {m};
  for (double m : kNarrow)
    if (deviation_db(m) < kMaxDeviationDb) return {m};
  throw NoFeasibleM(fmt::format("no notch width keeps {} Hz within {} dB", f_center, kMaxDeviationDb));
}

}  // namespace cvfad::diffkit
