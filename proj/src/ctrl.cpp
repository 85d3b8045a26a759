#include "cvfad/ctrl.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cvfad/errors.hpp"

namespace cvfad::ctrl {

namespace {
const double kSqrt3 = std::sqrt(3.0);
}

void PRParams::validate() const {
  if (!(kp > 0.0)) throw std::invalid_argument("kp must be positive");
  if (!(kr >= 0.0)) throw std::invalid_argument("kr must be nonnegative");
  if (!(omega_c > 0.0)) throw std::invalid_argument("omega_c must be positive");
}

AlphaBeta clarke(double a, double b, double c) { return {(2.0 * a - b - c) / 3.0, (b - c) / kSqrt3}; }

Abc inverse_clarke(AlphaBeta v) {
  const double half_a = -0.5 * v.alpha;
  const double half_b = 0.5 * kSqrt3 * v.beta;
  return {v.alpha, half_a + half_b, half_a - half_b};
}

ztf::RationalTF make_pr(const PRParams& p, double ts) {
  p.validate();
  if (!(ts > 0.0)) throw std::invalid_argument("ts must be positive");
  if (p.omega_c >= std::numbers::pi / ts)
    throw NyquistExceeded(fmt::format("resonant frequency {} rad/s is not below Nyquist", p.omega_c));

  // s -> w (z - 1) / (z + 1), w = wc / tan(wc ts / 2)
  const double w = p.omega_c / std::tan(0.5 * p.omega_c * ts);
  const double w2 = w * w, wc2 = p.omega_c * p.omega_c;
  const poly::Coeffs den{w2 + wc2, 2.0 * (wc2 - w2), w2 + wc2};
  const poly::Coeffs resonant{p.kr * w, 0.0, -p.kr * w};
  return ztf::RationalTF::discrete(poly::add(poly::scale(den, p.kp), resonant), den, ts);
}

void ReferenceSpec::validate() const {
  if (!(amplitude_a >= 0.0)) throw std::invalid_argument("reference amplitude must be nonnegative");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i].second >= 0.0)) throw std::invalid_argument("scheduled amplitudes must be nonnegative");
    if (i > 0 && !(schedule[i].first > schedule[i - 1].first))
      throw std::invalid_argument("reference schedule times must be strictly increasing");
  }
}

double ReferenceSpec::amplitude_at(double t) const {
  double a = amplitude_a;
  for (const auto& [time, amp] : schedule) {
    if (time <= t) a = amp;
    else break;
  }
  return a;
}

AlphaBeta reference_sample(const ReferenceSpec& spec, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("reference time must be nonnegative");
  const double a = spec.amplitude_at(t);
  const double theta = spec.omega_rad_s * t + spec.phase_rad;
  return {a * std::cos(theta), a * std::sin(theta)};
}

ControllerState::ControllerState(const PRParams& pr, const diffkit::ADParams& ad)
    : ControllerState(pr, diffkit::make_ad_filter(ad), ad.ts) {}

ControllerState::ControllerState(const PRParams& pr, const ztf::RationalTF& ad_filter, double ts) : ts_(ts) {
  const auto pr_tf = make_pr(pr, ts);
  if (ad_filter.domain() != ztf::Domain::Z || std::abs(*ad_filter.sample_time() - ts) > 1e-12 * ts)
    throw DomainMismatch("damping filter must be discrete at the controller sample time");
  if (!ad_filter.is_proper()) throw NonCausal("damping filter is improper and cannot run inside the loop");
  pr_alpha_ = ztf::DiscreteFilter(pr_tf);
  pr_beta_ = ztf::DiscreteFilter(pr_tf);
  ad_alpha_ = ztf::DiscreteFilter(ad_filter);
  ad_beta_ = ztf::DiscreteFilter(ad_filter);
  initialized_ = true;
}

void ControllerState::reset() {
  pr_alpha_.reset();
  pr_beta_.reset();
  ad_alpha_.reset();
  ad_beta_.reset();
  prev_command_ = {};
}

AlphaBeta control_step(ControllerState& state, const Measurement& meas, AlphaBeta ref, bool ad_enabled) {
  if (!state.initialized_) throw NotInitialized("controller state was never initialized");
  const double u_alpha = state.pr_alpha_.step(ref.alpha - meas.i2.alpha);
  const double u_beta = state.pr_beta_.step(ref.beta - meas.i2.beta);
  const double d_alpha = state.ad_alpha_.step(meas.vc.alpha);
  const double d_beta = state.ad_beta_.step(meas.vc.beta);
  AlphaBeta cmd{u_alpha, u_beta};
  if (ad_enabled) {
    cmd.alpha -= d_alpha;
    cmd.beta -= d_beta;
  }
  state.prev_command_ = cmd;
  return cmd;
}

AlphaBeta clamp_command(AlphaBeta v, double limit) {
  return {std::clamp(v.alpha, -limit, limit), std::clamp(v.beta, -limit, limit)};
}

}  // namespace cvfad::ctrl
