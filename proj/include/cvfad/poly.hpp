#pragma once

// Dense real polynomials stored as coefficient vectors in descending powers.

#include <complex>
#include <span>
#include <vector>

namespace cvfad::poly {

using Coeffs = std::vector<double>;

// Drops leading zeros. An all-zero (or empty) input becomes {0}.
Coeffs trim(std::span<const double> p);

Coeffs multiply(std::span<const double> a, std::span<const double> b);
Coeffs add(std::span<const double> a, std::span<const double> b);
Coeffs scale(std::span<const double> p, double k);

// Horner evaluation.
std::complex<double> eval(std::span<const double> p, std::complex<double> x);

// Expands prod (x - r_i), keeping only the real part of the result.
Coeffs from_roots(std::span<const std::complex<double>> roots);

// Roots as eigenvalues of the companion matrix of the monic polynomial,
// sorted by (real, imag). Leading and trailing zero coefficients are handled.
std::vector<std::complex<double>> roots(std::span<const double> p);

inline int degree(std::span<const double> p) { return static_cast<int>(p.size()) - 1; }

bool is_zero(std::span<const double> p);

}  // namespace cvfad::poly
