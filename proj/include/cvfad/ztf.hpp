#pragma once

// Rational transfer functions in the s- or z-domain: construction, algebra,
// evaluation, frequency response, poles, stability and time-domain filtering.

#include <complex>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cvfad/poly.hpp"

namespace cvfad::ztf {

enum class Domain { S, Z };

/// Rational function num(x)/den(x), coefficients in descending powers.
///
/// Coefficient vectors are trimmed of leading zeros on construction. The
/// denominator must keep a nonzero leading coefficient. Discrete systems carry
/// their sample time; continuous ones do not.
class RationalTF {
 public:
  static RationalTF continuous(poly::Coeffs num, poly::Coeffs den);
  static RationalTF discrete(poly::Coeffs num, poly::Coeffs den, double sample_time_s);
  static RationalTF unity(Domain domain, std::optional<double> sample_time_s = std::nullopt);

  Domain domain() const { return domain_; }
  const poly::Coeffs& num() const { return num_; }
  const poly::Coeffs& den() const { return den_; }
  std::optional<double> sample_time() const { return sample_time_; }

  int num_degree() const { return poly::degree(num_); }
  int den_degree() const { return poly::degree(den_); }
  // degree(num) <= degree(den)
  bool is_proper() const { return num_degree() <= den_degree(); }
  bool is_zero() const { return poly::is_zero(num_); }

  RationalTF scaled(double k) const;

 private:
  RationalTF(Domain d, poly::Coeffs num, poly::Coeffs den, std::optional<double> ts);

  Domain domain_;
  poly::Coeffs num_;
  poly::Coeffs den_;
  std::optional<double> sample_time_;
};

struct FrequencyResponse {
  std::vector<double> freqs_hz;
  // A sample that landed exactly on a pole holds {+inf, 0}.
  std::vector<std::complex<double>> values;
  Domain source_domain = Domain::Z;
};

/// Evaluates num(x)/den(x). Throws PoleHit when |den(x)| <= 1e-300 after
/// scaling the denominator to be monic.
std::complex<double> evaluate(const RationalTF& tf, std::complex<double> point);

/// s = j2πf for continuous systems, z = exp(j2πf·Ts) for discrete ones.
/// Frequencies must be positive and strictly increasing; discrete systems also
/// require f < 1/(2·Ts).
FrequencyResponse freq_response(const RationalTF& tf, std::span<const double> freqs_hz);

/// Product a·b with no pole-zero cancellation.
RationalTF cascade(const RationalTF& a, const RationalTF& b);

/// Sum a + b over the common denominator den_a·den_b.
RationalTF parallel(const RationalTF& a, const RationalTF& b);

std::vector<std::complex<double>> poles(const RationalTF& tf);
std::vector<std::complex<double>> zeros(const RationalTF& tf);

struct StabilityReport {
  bool stable = false;    // every pole strictly inside 1 - tol
  bool marginal = false;  // not stable, but no pole beyond 1 + tol
  double max_pole_magnitude = 0.0;
  std::complex<double> worst_pole{};
};

StabilityReport is_stable(const RationalTF& tf, double tol = 1e-9);

/// Direct-form-II-transposed realization with mutable state.
class DiscreteFilter {
 public:
  DiscreteFilter() = default;
  explicit DiscreteFilter(const RationalTF& tf);

  double step(double x);
  void reset();
  std::span<const double> state() const { return state_; }

 private:
  std::vector<double> b_;
  std::vector<double> a_;
  std::vector<double> state_;
};

/// Runs the input through the filter from zero initial state.
std::vector<double> filter(const RationalTF& tf, std::span<const double> input);

// CSV writers. Phase is unwrapped along increasing frequency.
void write_csv(std::ostream& os, const FrequencyResponse& fr);
void write_poles_csv(std::ostream& os, std::span<const std::complex<double>> poles);

std::vector<double> unwrapped_phase_deg(const FrequencyResponse& fr);

std::vector<double> logspace(double f_lo, double f_hi, int n);

}  // namespace cvfad::ztf
