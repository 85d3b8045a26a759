#pragma once

// Digital current controller: Clarke transforms, discrete PR regulator,
// reference generation and the capacitor-voltage damping branch.

#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "cvfad/diffkit.hpp"
#include "cvfad/ztf.hpp"

namespace cvfad::ctrl {

struct PRParams {
  double kp = 8.3;                             // V/A
  double kr = 400.0;                           // V/(A s)
  double omega_c = 2.0 * std::numbers::pi * 60.0;  // rad/s
  void validate() const;
};

struct AlphaBeta {
  double alpha = 0.0;
  double beta = 0.0;
};

struct Abc {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

// Amplitude-invariant Clarke transform.
AlphaBeta clarke(double a, double b, double c);
Abc inverse_clarke(AlphaBeta v);

/// Tustin discretization of kp + kr s / (s^2 + wc^2) prewarped at wc, so the
/// resonator poles sit on the unit circle at angle +-wc ts.
ztf::RationalTF make_pr(const PRParams& p, double ts);

struct ReferenceSpec {
  double amplitude_a = 20.0;
  double phase_rad = 0.0;
  double omega_rad_s = 2.0 * std::numbers::pi * 60.0;
  // (time, amplitude) steps, times strictly increasing
  std::vector<std::pair<double, double>> schedule;
  void validate() const;
  double amplitude_at(double t) const;
};

// A cos(wt + phase), A sin(wt + phase) with A from the schedule.
AlphaBeta reference_sample(const ReferenceSpec& spec, double t);

struct Measurement {
  AlphaBeta i2;
  AlphaBeta vc;
};

/// Per-axis controller state. Default-constructed state is uninitialized and
/// control_step() refuses it.
class ControllerState {
 public:
  ControllerState() = default;
  ControllerState(const PRParams& pr, const diffkit::ADParams& ad);
  // For custom damping blocks; the block must be proper and share the PR rate.
  ControllerState(const PRParams& pr, const ztf::RationalTF& ad_filter, double ts);

  bool initialized() const { return initialized_; }
  double sample_time() const { return ts_; }
  AlphaBeta prev_command() const { return prev_command_; }
  void reset();

 private:
  friend AlphaBeta control_step(ControllerState&, const Measurement&, AlphaBeta, bool);

  bool initialized_ = false;
  double ts_ = 0.0;
  ztf::DiscreteFilter pr_alpha_, pr_beta_;
  ztf::DiscreteFilter ad_alpha_, ad_beta_;
  AlphaBeta prev_command_;
};

/// One controller sample: v_cmd = PR(i_ref - i2) - (ad_enabled ? AD(vc) : 0).
/// The AD filters advance every sample; ad_enabled only gates their output.
AlphaBeta control_step(ControllerState& state, const Measurement& meas, AlphaBeta ref, bool ad_enabled);

// Per-axis symmetric limit.
AlphaBeta clamp_command(AlphaBeta v, double limit);

}  // namespace cvfad::ctrl
