#include "cvfad/plant.hpp"

#include <cmath>
#include <exception>
#include <numbers>

#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "cvfad/errors.hpp"

namespace cvfad::plant {

using ztf::RationalTF;

void LCLParams::validate() const {
  if (!(l1 > 0.0 && l2 > 0.0 && cf > 0.0)) throw std::invalid_argument("l1, l2 and cf must be positive");
  if (!(lg >= 0.0)) throw std::invalid_argument("lg must be nonnegative");
}

double LCLParams::omega_r() const { return std::sqrt((l1 + l2) / (l1 * l2_eff() * cf)); }

double LCLParams::omega_network() const { return std::sqrt((l1 + l2_eff()) / (l1 * l2_eff() * cf)); }

void LoopParams::validate() const {
  pr.validate();
  ad.validate();
  if (!(kpwm > 0.0)) throw std::invalid_argument("kpwm must be positive");
}

double resonance_frequency(const LCLParams& p) {
  p.validate();
  return p.omega_r() / (2.0 * std::numbers::pi);
}

double network_resonance_frequency(const LCLParams& p) {
  p.validate();
  return p.omega_network() / (2.0 * std::numbers::pi);
}

RationalTF lcl_tf(const LCLParams& p) { return damped_lcl_tf(p, 0.0, 1.0); }

RationalTF damped_lcl_tf(const LCLParams& p, double ka, double kpwm) {
  p.validate();
  if (!(ka >= 0.0)) throw std::invalid_argument("ka must be nonnegative");
  const double wr = p.omega_r();
  return RationalTF::continuous({p.kf()}, {1.0, kpwm * ka / p.l1, wr * wr, 0.0});
}

RationalTF open_loop_tf(const LCLParams& p, const LoopParams& lp) {
  lp.validate();
  const double wc2 = lp.pr.omega_c * lp.pr.omega_c;
  const auto pr = RationalTF::continuous({lp.pr.kp, lp.pr.kr, lp.pr.kp * wc2}, {1.0, 0.0, wc2});
  return ztf::cascade(pr, damped_lcl_tf(p, lp.ad.ka, lp.kpwm).scaled(lp.kpwm));
}

StateSpaceModel state_space(const LCLParams& p) {
  p.validate();
  StateSpaceModel ss;
  ss.a = Eigen::MatrixXd::Zero(3, 3);
  ss.a(0, 1) = -1.0 / p.l1;
  ss.a(1, 0) = 1.0 / p.cf;
  ss.a(1, 2) = -1.0 / p.cf;
  ss.a(2, 1) = 1.0 / p.l2_eff();
  ss.b = Eigen::MatrixXd::Zero(3, 2);
  ss.b(0, 0) = 1.0 / p.l1;
  ss.b(2, 1) = -1.0 / p.l2_eff();
  ss.c = Eigen::MatrixXd::Zero(2, 3);
  ss.c(0, 2) = 1.0;
  ss.c(1, 1) = 1.0;
  return ss;
}

DiscreteStateSpace zoh_discretize(const StateSpaceModel& ss, double h) { return zoh_discretize(ss.a, ss.b, h); }

DiscreteStateSpace zoh_discretize(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("discretization step must be positive");
  const auto n = a.rows();
  const auto m = b.cols();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a * h;
  aug.topRightCorner(n, m) = b * h;
  const Eigen::MatrixXd e = aug.exp();
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m), h};
}

poly::Coeffs characteristic_polynomial(const Eigen::MatrixXd& m) {
  const auto n = m.rows();
  poly::Coeffs c(static_cast<std::size_t>(n) + 1, 0.0);
  c[0] = 1.0;
  Eigen::MatrixXd mk = Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    mk = m * mk + c[static_cast<std::size_t>(k - 1)] * eye;
    c[static_cast<std::size_t>(k)] = -(m * mk).trace() / static_cast<double>(k);
  }
  return c;
}

RationalTF siso_tf(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::RowVectorXd& c, ztf::Domain domain,
                   std::optional<double> ts) {
  const poly::Coeffs den = characteristic_polynomial(a);
  const poly::Coeffs closed = characteristic_polynomial(a - b * c);
  poly::Coeffs num(den.size(), 0.0);
  for (std::size_t i = 0; i < den.size(); ++i) {
    const double d = closed[i] - den[i];
    // Differences at roundoff level are exact cancellations.
    num[i] = std::abs(d) <= 1e-12 * (std::abs(closed[i]) + std::abs(den[i])) ? 0.0 : d;
  }
  return domain == ztf::Domain::S ? RationalTF::continuous(num, den) : RationalTF::discrete(num, den, *ts);
}

RationalTF closed_loop_discrete(const LCLParams& p, const LoopParams& lp, double ts, int delay_samples) {
  lp.validate();
  if (delay_samples != 0 && delay_samples != 1) throw std::invalid_argument("delay_samples must be 0 or 1");
  if (std::abs(lp.ad.ts - ts) > 1e-12 * ts)
    throw DomainMismatch(fmt::format("damping filter rate {} s differs from loop rate {} s", lp.ad.ts, ts));

  const auto ss = state_space(p);
  const auto dss = zoh_discretize(ss, ts);
  const Eigen::VectorXd bv = dss.bd.col(0) * lp.kpwm;
  const auto gi = siso_tf(dss.ad, bv, ss.c.row(0), ztf::Domain::Z, ts);
  const auto gv = siso_tf(dss.ad, bv, ss.c.row(1), ztf::Domain::Z, ts);
  const auto pr = ctrl::make_pr(lp.pr, ts);
  const auto ad = diffkit::make_ad_filter(lp.ad);

  poly::Coeffs zd = gi.den();
  zd.resize(zd.size() + static_cast<std::size_t>(delay_samples), 0.0);

  using poly::multiply;
  const auto den_raw = poly::add(poly::add(multiply(multiply(zd, ad.den()), pr.den()),
                                           multiply(multiply(ad.num(), gv.num()), pr.den())),
                                 multiply(multiply(pr.num(), gi.num()), ad.den()));
  double scale = 0.0;
  for (double c : den_raw) scale = std::max(scale, std::abs(c));
  if (std::abs(den_raw.front()) <= 1e-12 * scale)
    throw AlgebraicLoop("direct-feedthrough loop cancels the leading closed-loop coefficient");

  const auto num = multiply(multiply(pr.num(), ad.den()), gi.num());
  return RationalTF::discrete(num, den_raw, ts);
}

namespace {

PoleSweepRow pole_row(const LCLParams& p, LoopParams lp, double ts, int delay, double ka) {
  lp.ad.ka = ka;
  const auto cl = closed_loop_discrete(p, lp, ts, delay);
  PoleSweepRow row;
  row.ka = ka;
  row.lg_h = p.lg;
  row.poles = ztf::poles(cl);
  const auto rep = ztf::is_stable(cl);
  row.max_magnitude = rep.max_pole_magnitude;
  row.stable = rep.stable;
  return row;
}

}  // namespace

std::vector<PoleSweepRow> ka_pole_sweep(const LCLParams& p, const LoopParams& lp, double ts, int delay_samples,
                                        const std::vector<double>& kas) {
  std::vector<PoleSweepRow> rows(kas.size());
  std::vector<std::exception_ptr> errors(kas.size());
  const auto n = static_cast<long>(kas.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      rows[static_cast<std::size_t>(i)] = pole_row(p, lp, ts, delay_samples, kas[static_cast<std::size_t>(i)]);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

std::vector<PoleSweepRow> ka_pole_sweep_serial(const LCLParams& p, const LoopParams& lp, double ts,
                                               int delay_samples, const std::vector<double>& kas) {
  std::vector<PoleSweepRow> rows;
  rows.reserve(kas.size());
  for (double ka : kas) rows.push_back(pole_row(p, lp, ts, delay_samples, ka));
  return rows;
}

std::optional<double> find_min_stable_ka(const LCLParams& p, const LoopParams& lp, double ts, int delay_samples,
                                         double ka_lo, double ka_hi, double tol) {
  if (!(ka_hi > ka_lo) || !(ka_lo >= 0.0)) throw std::invalid_argument("need 0 <= ka_lo < ka_hi");
  auto stable_at = [&](double ka) {
    LoopParams q = lp;
    q.ad.ka = ka;
    return ztf::is_stable(closed_loop_discrete(p, q, ts, delay_samples)).stable;
  };
  if (stable_at(ka_lo) || !stable_at(ka_hi)) return std::nullopt;
  double lo = ka_lo, hi = ka_hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (stable_at(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace cvfad::plant
