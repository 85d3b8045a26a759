#include "cvfad/ztf.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cvfad/errors.hpp"

namespace cvfad::ztf {

namespace {

constexpr double kPoleHitThreshold = 1e-300;

bool same_sample_time(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

void require_compatible(const RationalTF& a, const RationalTF& b) {
  if (a.domain() != b.domain()) throw DomainMismatch("cannot combine s-domain and z-domain systems");
  if (a.domain() == Domain::Z && !same_sample_time(*a.sample_time(), *b.sample_time()))
    throw DomainMismatch(fmt::format("sample times differ: {} s vs {} s", *a.sample_time(), *b.sample_time()));
}

}  // namespace

RationalTF::RationalTF(Domain d, poly::Coeffs num, poly::Coeffs den, std::optional<double> ts)
    : domain_(d), num_(poly::trim(num)), den_(poly::trim(den)), sample_time_(ts) {
  if (poly::is_zero(den_)) throw std::invalid_argument("denominator is identically zero");
  if (d == Domain::Z && (!ts || !(*ts > 0.0))) throw std::invalid_argument("discrete system needs a positive sample time");
  if (d == Domain::S && ts) throw std::invalid_argument("continuous system cannot carry a sample time");
}

RationalTF RationalTF::continuous(poly::Coeffs num, poly::Coeffs den) {
  return RationalTF(Domain::S, std::move(num), std::move(den), std::nullopt);
}

RationalTF RationalTF::discrete(poly::Coeffs num, poly::Coeffs den, double sample_time_s) {
  return RationalTF(Domain::Z, std::move(num), std::move(den), sample_time_s);
}

RationalTF RationalTF::unity(Domain domain, std::optional<double> sample_time_s) {
  return RationalTF(domain, {1.0}, {1.0}, sample_time_s);
}

RationalTF RationalTF::scaled(double k) const {
  return RationalTF(domain_, poly::scale(num_, k), den_, sample_time_);
}

std::complex<double> evaluate(const RationalTF& tf, std::complex<double> point) {
  const double lead = tf.den().front();
  const std::complex<double> d = poly::eval(tf.den(), point) / lead;
  if (std::abs(d) <= kPoleHitThreshold) throw PoleHit(fmt::format("evaluation at a pole ({}, {})", point.real(), point.imag()));
  return (poly::eval(tf.num(), point) / lead) / d;
}

FrequencyResponse freq_response(const RationalTF& tf, std::span<const double> freqs_hz) {
  if (freqs_hz.empty()) throw std::invalid_argument("empty frequency grid");
  for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
    if (!(freqs_hz[i] > 0.0)) throw std::invalid_argument("frequencies must be positive");
    if (i > 0 && !(freqs_hz[i] > freqs_hz[i - 1])) throw std::invalid_argument("frequencies must be strictly increasing");
  }
  if (tf.domain() == Domain::Z) {
    const double nyquist = 0.5 / *tf.sample_time();
    if (freqs_hz.back() >= nyquist)
      throw NyquistExceeded(fmt::format("{} Hz is not below the Nyquist frequency {} Hz", freqs_hz.back(), nyquist));
  }

  FrequencyResponse fr;
  fr.source_domain = tf.domain();
  fr.freqs_hz.assign(freqs_hz.begin(), freqs_hz.end());
  fr.values.reserve(freqs_hz.size());
  for (double f : freqs_hz) {
    const double w = 2.0 * std::numbers::pi * f;
    const std::complex<double> point =
        tf.domain() == Domain::S ? std::complex<double>(0.0, w) : std::polar(1.0, w * *tf.sample_time());
    try {
      fr.values.push_back(evaluate(tf, point));
    } catch (const PoleHit&) {
      fr.values.emplace_back(std::numeric_limits<double>::infinity(), 0.0);
    }
  }
  return fr;
}

RationalTF cascade(const RationalTF& a, const RationalTF& b) {
  require_compatible(a, b);
  auto num = poly::multiply(a.num(), b.num());
  auto den = poly::multiply(a.den(), b.den());
  return a.domain() == Domain::S ? RationalTF::continuous(std::move(num), std::move(den))
                                 : RationalTF::discrete(std::move(num), std::move(den), *a.sample_time());
}

RationalTF parallel(const RationalTF& a, const RationalTF& b) {
  require_compatible(a, b);
  auto num = poly::add(poly::multiply(a.num(), b.den()), poly::multiply(b.num(), a.den()));
  auto den = poly::multiply(a.den(), b.den());
  return a.domain() == Domain::S ? RationalTF::continuous(std::move(num), std::move(den))
                                 : RationalTF::discrete(std::move(num), std::move(den), *a.sample_time());
}

std::vector<std::complex<double>> poles(const RationalTF& tf) {
  if (tf.den_degree() < 1) throw std::invalid_argument("poles() needs a denominator of degree >= 1");
  return poly::roots(tf.den());
}

std::vector<std::complex<double>> zeros(const RationalTF& tf) {
  if (tf.is_zero()) return {};
  return poly::roots(tf.num());
}

StabilityReport is_stable(const RationalTF& tf, double tol) {
  if (tf.domain() != Domain::Z) throw WrongDomain("stability classification is only defined for discrete systems");
  StabilityReport r;
  if (tf.den_degree() < 1) {
    r.stable = true;
    return r;
  }
  for (const auto& p : poly::roots(tf.den())) {
    const double mag = std::abs(p);
    if (mag > r.max_pole_magnitude) {
      r.max_pole_magnitude = mag;
      r.worst_pole = p;
    }
  }
  r.stable = r.max_pole_magnitude < 1.0 - tol;
  r.marginal = !r.stable && r.max_pole_magnitude <= 1.0 + tol;
  return r;
}

DiscreteFilter::DiscreteFilter(const RationalTF& tf) {
  if (tf.domain() != Domain::Z) throw WrongDomain("only discrete systems can be filtered");
  if (!tf.is_proper())
    throw NonCausal(fmt::format("numerator degree {} exceeds denominator degree {}", tf.num_degree(), tf.den_degree()));
  const std::size_t n = tf.den().size();
  const double a0 = tf.den().front();
  a_.resize(n);
  b_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) a_[i] = tf.den()[i] / a0;
  const std::size_t pad = n - tf.num().size();
  for (std::size_t i = 0; i < tf.num().size(); ++i) b_[pad + i] = tf.num()[i] / a0;
  state_.assign(n - 1, 0.0);
}

double DiscreteFilter::step(double x) {
  if (b_.empty()) throw NotInitialized("filter used before construction");
  if (state_.empty()) return b_[0] * x;
  const double y = b_[0] * x + state_[0];
  const std::size_t m = state_.size();
  for (std::size_t i = 0; i + 1 < m; ++i) state_[i] = state_[i + 1] + b_[i + 1] * x - a_[i + 1] * y;
  state_[m - 1] = b_[m] * x - a_[m] * y;
  return y;
}

void DiscreteFilter::reset() { std::fill(state_.begin(), state_.end(), 0.0); }

std::vector<double> filter(const RationalTF& tf, std::span<const double> input) {
  DiscreteFilter f(tf);
  std::vector<double> out;
  out.reserve(input.size());
  for (double x : input) out.push_back(f.step(x));
  return out;
}

std::vector<double> unwrapped_phase_deg(const FrequencyResponse& fr) {
  std::vector<double> out(fr.values.size(), std::numeric_limits<double>::quiet_NaN());
  double offset = 0.0;
  std::optional<double> prev;
  for (std::size_t i = 0; i < fr.values.size(); ++i) {
    const auto& v = fr.values[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) continue;
    const double raw = std::arg(v) * 180.0 / std::numbers::pi;
    if (prev) {
      double cand = raw + offset;
      while (cand - *prev > 180.0) {
        offset -= 360.0;
        cand -= 360.0;
      }
      while (cand - *prev <= -180.0) {
        offset += 360.0;
        cand += 360.0;
      }
    }
    out[i] = raw + offset;
    prev = out[i];
  }
  return out;
}

void write_csv(std::ostream& os, const FrequencyResponse& fr) {
  const auto phase = unwrapped_phase_deg(fr);
  os << "freq_hz,mag_db,phase_deg,re,im\n";
  for (std::size_t i = 0; i < fr.values.size(); ++i) {
    const auto& v = fr.values[i];
    const double mag_db = std::isinf(v.real()) ? std::numeric_limits<double>::infinity() : 20.0 * std::log10(std::abs(v));
    fmt::print(os, "{:.12g},{:.12g},{:.12g},{:.12g},{:.12g}\n", fr.freqs_hz[i], mag_db, phase[i], v.real(), v.imag());
  }
}

void write_poles_csv(std::ostream& os, std::span<const std::complex<double>> poles) {
  os << "re,im,magnitude\n";
  for (const auto& p : poles) fmt::print(os, "{:.12g},{:.12g},{:.12g}\n", p.real(), p.imag(), std::abs(p));
}

std::vector<double> logspace(double f_lo, double f_hi, int n) {
  if (n < 1 || !(f_lo > 0.0) || !(f_hi >= f_lo)) throw std::invalid_argument("bad logspace bounds");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = f_lo;
    return out;
  }
  const double a = std::log10(f_lo), b = std::log10(f_hi);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (n - 1));
  out.front() = f_lo;
  out.back() = f_hi;
  return out;
}

}  // namespace cvfad::ztf
