#pragma once

// LCL plant models, damped and open-loop transfer functions, exact ZOH
// discretization and the discrete closed current loop.

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cvfad/ctrl.hpp"
#include "cvfad/diffkit.hpp"
#include "cvfad/ztf.hpp"

namespace cvfad::plant {

struct LCLParams {
  double l1 = 1.6e-3;  // H, inverter side
  double l2 = 0.4e-3;  // H, grid side
  double lg = 0.0;     // H, grid
  double cf = 9.8e-6;  // F

  void validate() const;
  double l2_eff() const { return l2 + lg; }
  double kf() const { return 1.0 / (l1 * l2_eff() * cf); }
  // sqrt((l1 + l2) / (l1 (l2 + lg) cf)); lg enters the denominator only.
  double omega_r() const;
  // Natural frequency of the lossless network, sqrt((l1 + l2 + lg) / (l1 (l2 + lg) cf)).
  // Equal to omega_r() at lg = 0.
  double omega_network() const;
};

struct LoopParams {
  ctrl::PRParams pr;
  diffkit::ADParams ad;
  double kpwm = 1.0;
  void validate() const;
};

/// Per-axis realization: states {i1, vc, i2}, inputs {v_inv, v_grid},
/// outputs {i2, vc}. Uses l2 + lg throughout, so its oscillatory eigenvalues
/// sit at omega_network().
struct StateSpaceModel {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::MatrixXd c;
  std::array<std::string, 3> state_labels{"i1", "vc", "i2"};
};

struct DiscreteStateSpace {
  Eigen::MatrixXd ad;
  Eigen::MatrixXd bd;
  double h = 0.0;
};

double resonance_frequency(const LCLParams& p);
// Hz, from omega_network(); what the state-space plant actually rings at.
double network_resonance_frequency(const LCLParams& p);

// Kf / (s (s^2 + wr^2)), v_inv to i2.
ztf::RationalTF lcl_tf(const LCLParams& p);

// Kf / (s (s^2 + (kpwm ka / l1) s + wr^2)).
ztf::RationalTF damped_lcl_tf(const LCLParams& p, double ka, double kpwm);

// (kp + kr s / (s^2 + wc^2)) kpwm Kf / (s (s^2 + (kpwm ka / l1) s + wr^2)).
ztf::RationalTF open_loop_tf(const LCLParams& p, const LoopParams& lp);

StateSpaceModel state_space(const LCLParams& p);

/// A_d = exp(a h), B_d = int_0^h exp(a t) dt b, from one augmented matrix
/// exponential.
DiscreteStateSpace zoh_discretize(const StateSpaceModel& ss, double h);
DiscreteStateSpace zoh_discretize(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double h);

/// Characteristic polynomial det(xI - m), descending powers (Faddeev-LeVerrier).
poly::Coeffs characteristic_polynomial(const Eigen::MatrixXd& m);

/// SISO transfer function c (xI - a)^-1 b via det(xI - a + b c) - det(xI - a).
ztf::RationalTF siso_tf(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::RowVectorXd& c,
                        ztf::Domain domain, std::optional<double> ts = std::nullopt);

/// Reference-to-grid-current transfer function of the sampled loop.
///
/// The plant is ZOH-discretized at ts, the PR comes from ctrl::make_pr and the
/// damping block from diffkit::make_ad_filter. The command is
/// v = PR (r - i2) - AD vc, applied after delay_samples (0 or 1) samples.
ztf::RationalTF closed_loop_discrete(const LCLParams& p, const LoopParams& lp, double ts, int delay_samples = 0);

struct PoleSweepRow {
  double ka = 0.0;
  double lg_h = 0.0;
  std::vector<std::complex<double>> poles;
  double max_magnitude = 0.0;
  bool stable = false;
};

// One closed_loop_discrete per ka value; OpenMP over rows.
std::vector<PoleSweepRow> ka_pole_sweep(const LCLParams& p, const LoopParams& lp, double ts, int delay_samples,
                                        const std::vector<double>& kas);
// Serial reference for ka_pole_sweep.
std::vector<PoleSweepRow> ka_pole_sweep_serial(const LCLParams& p, const LoopParams& lp, double ts, int delay_samples,
                                               const std::vector<double>& kas);

/// Smallest damping gain in [ka_lo, ka_hi] that makes the loop stable,
/// by bisection on the stability verdict. Requires an unstable loop at ka_lo
/// and a stable one at ka_hi; returns nullopt when they do not bracket.
std::optional<double> find_min_stable_ka(const LCLParams& p, const LoopParams& lp, double ts, int delay_samples,
                                         double ka_lo, double ka_hi, double tol = 1e-6);

}  // namespace cvfad::plant
