#include "cvfad/poly.hpp"

#include <algorithm>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

namespace cvfad::poly {

Coeffs trim(std::span<const double> p) {
  auto first = std::find_if(p.begin(), p.end(), [](double c) { return c != 0.0; });
  if (first == p.end()) return {0.0};
  return Coeffs(first, p.end());
}

Coeffs multiply(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {0.0};
  Coeffs out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Coeffs add(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::max(a.size(), b.size());
  Coeffs out(n, 0.0);
  // Align on the constant term.
  for (std::size_t i = 0; i < a.size(); ++i) out[n - a.size() + i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[n - b.size() + i] += b[i];
  return out;
}

Coeffs scale(std::span<const double> p, double k) {
  Coeffs out(p.begin(), p.end());
  for (double& c : out) c *= k;
  return out;
}

std::complex<double> eval(std::span<const double> p, std::complex<double> x) {
  std::complex<double> acc = 0.0;
  for (double c : p) acc = acc * x + c;
  return acc;
}

Coeffs from_roots(std::span<const std::complex<double>> roots) {
  std::vector<std::complex<double>> acc{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(acc.size() + 1, 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      next[i] += acc[i];
      next[i + 1] -= acc[i] * r;
    }
    acc = std::move(next);
  }
  Coeffs out(acc.size());
  std::transform(acc.begin(), acc.end(), out.begin(), [](auto c) { return c.real(); });
  return out;
}

std::vector<std::complex<double>> roots(std::span<const double> p) {
  Coeffs q = trim(p);
  if (q.size() < 2) return {};

  std::vector<std::complex<double>> out;
  while (q.size() > 1 && q.back() == 0.0) {
    out.emplace_back(0.0, 0.0);
    q.pop_back();
  }

  const int n = static_cast<int>(q.size()) - 1;
  if (n == 1) {
    out.emplace_back(-q[1] / q[0], 0.0);
  } else if (n > 1) {
    // Companion matrix of the monic polynomial; already upper Hessenberg.
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) companion(0, j) = -q[j + 1] / q[0];
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw std::runtime_error("companion eigensolve did not converge");
    const auto& ev = solver.eigenvalues();
    for (int i = 0; i < n; ++i) out.push_back(ev(i));
  }

  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

bool is_zero(std::span<const double> p) {
  return std::all_of(p.begin(), p.end(), [](double c) { return c == 0.0; });
}

}  // namespace cvfad::poly
