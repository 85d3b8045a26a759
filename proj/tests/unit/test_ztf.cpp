#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "cvfad/diffkit.hpp"
#include "cvfad/errors.hpp"
#include "cvfad/ztf.hpp"

using namespace cvfad;
using ztf::RationalTF;
using cd = std::complex<double>;

namespace {

constexpr double kTs = 1e-4;
constexpr double kPi = std::numbers::pi;

// Random stable discrete system with real coefficients.
RationalTF random_stable(std::mt19937& rng, int order) {
  std::uniform_real_distribution<double> radius(0.05, 0.9), angle(0.0, kPi), coef(-2.0, 2.0);
  std::vector<cd> poles;
  while (static_cast<int>(poles.size()) < order) {
    if (order - static_cast<int>(poles.size()) >= 2 && coef(rng) > 0.0) {
      const cd p = std::polar(radius(rng), angle(rng));
      poles.push_back(p);
      poles.push_back(std::conj(p));
    } else {
      poles.emplace_back(radius(rng) * (coef(rng) > 0 ? 1.0 : -1.0), 0.0);
    }
  }
  poly::Coeffs num(static_cast<std::size_t>(order) + 1);
  for (auto& c : num) c = coef(rng);
  return RationalTF::discrete(num, poly::from_roots(poles), kTs);
}

}  // namespace

TEST_CASE("construction normalizes and validates") {
  const auto tf = RationalTF::discrete({0.0, 0.0, 1.0, -1.0}, {0.0, kTs, 0.0}, kTs);
  CHECK(tf.num() == poly::Coeffs{1.0, -1.0});
  CHECK(tf.den() == poly::Coeffs{kTs, 0.0});
  CHECK(tf.sample_time() == kTs);
  CHECK_THROWS_AS(RationalTF::discrete({1.0}, {0.0, 0.0}, kTs), std::invalid_argument);
  CHECK_THROWS_AS(RationalTF::discrete({1.0}, {1.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(RationalTF::discrete({1.0}, {1.0}, -1.0), std::invalid_argument);
  CHECK_FALSE(RationalTF::continuous({1.0}, {1.0, 0.0}).sample_time().has_value());
  CHECK(RationalTF::continuous({1.0, 2.0, 3.0}, {1.0, 0.0}).is_proper() == false);
}

TEST_CASE("evaluate examples") {
  CHECK(std::abs(ztf::evaluate(diffkit::make_backward(kTs), 1.0)) == 0.0);
  CHECK_THROWS_AS(ztf::evaluate(RationalTF::discrete({1.0}, {1.0, -0.5}, kTs), 0.5), PoleHit);
  CHECK(std::abs(ztf::evaluate(diffkit::make_notch({1.0}, kTs), 1.0) - 1.0) < 1e-15);
}

TEST_CASE("freq_response examples and closed forms") {
  SUBCASE("backward vanishes toward DC") {
    const std::vector<double> f{1e-3};
    const auto fr = ztf::freq_response(diffkit::make_backward(kTs), f);
    CHECK(std::abs(fr.values[0]) == doctest::Approx(2 * kPi * 1e-3).epsilon(1e-6));
  }
  SUBCASE("tustin magnitude is (2/Ts) tan(w Ts / 2)") {
    const auto f = ztf::logspace(10.0, 4900.0, 50);
    const auto fr = ztf::freq_response(diffkit::make_tustin(kTs), f);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double oracle = 2.0 / kTs * std::tan(kPi * f[i] * kTs);
      CHECK(std::abs(fr.values[i]) == doctest::Approx(oracle).epsilon(1e-10));
    }
    const std::vector<double> quarter{2500.0};
    CHECK(std::abs(ztf::freq_response(diffkit::make_tustin(kTs), quarter).values[0]) == doctest::Approx(2.0e4).epsilon(1e-10));
  }
  SUBCASE("ideal derivative s at 60 Hz") {
    const std::vector<double> f{60.0};
    const auto fr = ztf::freq_response(RationalTF::continuous({1.0, 0.0}, {1.0}), f);
    CHECK(std::abs(fr.values[0]) == doctest::Approx(376.99111843).epsilon(1e-9));
    CHECK(fr.source_domain == ztf::Domain::S);
  }
  SUBCASE("Nyquist and grid checks") {
    const std::vector<double> at_nyq{5000.0}, unsorted{10.0, 5.0}, nonpos{0.0};
    CHECK_THROWS_AS(ztf::freq_response(diffkit::make_backward(kTs), at_nyq), NyquistExceeded);
    CHECK_THROWS_AS(ztf::freq_response(diffkit::make_backward(kTs), unsorted), std::invalid_argument);
    CHECK_THROWS_AS(ztf::freq_response(diffkit::make_backward(kTs), nonpos), std::invalid_argument);
  }
  SUBCASE("exact pole hits are stored as +inf") {
    const double f = 1.0 / (2.0 * kPi);
    REQUIRE(2.0 * kPi * f == 1.0);
    const std::vector<double> grid{0.5 * f, f, 2.0 * f};
    const auto fr = ztf::freq_response(RationalTF::continuous({1.0}, {1.0, 0.0, 1.0}), grid);
    CHECK(std::isinf(fr.values[1].real()));
    CHECK(std::isfinite(std::abs(fr.values[0])));
    CHECK(std::isfinite(std::abs(fr.values[2])));
  }
}

TEST_CASE("evaluation is bit-identical to the frequency-response sample") {
  std::mt19937 rng(7);
  const auto tf = random_stable(rng, 5);
  const auto f = ztf::logspace(1.0, 4900.0, 40);
  const auto fr = ztf::freq_response(tf, f);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(ztf::evaluate(tf, std::polar(1.0, 2.0 * kPi * f[i] * kTs)) == fr.values[i]);
}

TEST_CASE("cascade") {
  const diffkit::LeadDesign lead{0.75};
  SUBCASE("backward times lead equals backward-lead up to the matched z/z factor") {
    const auto c = ztf::cascade(diffkit::make_backward(kTs), diffkit::make_lead(lead, kTs));
    CHECK(c.num() == poly::Coeffs{0.75, -0.75, 0.0});
    CHECK(c.den() == poly::Coeffs{kTs, kTs * 0.75, 0.0});
    const auto f = ztf::logspace(10.0, 4900.0, 60);
    const auto a = ztf::freq_response(c, f);
    const auto b = ztf::freq_response(diffkit::make_backward_lead(lead, kTs), f);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(a.values[i] - b.values[i]) <= 1e-12 * std::abs(b.values[i]));
  }
  SUBCASE("unity is the identity") {
    const auto tf = diffkit::make_proposed(lead, {0.125}, kTs);
    const auto c = ztf::cascade(tf, RationalTF::unity(ztf::Domain::Z, kTs));
    CHECK(c.num() == tf.num());
    CHECK(c.den() == tf.den());
  }
  SUBCASE("poles are the union, no cancellation") {
    const auto a = RationalTF::discrete({1.0, -0.5}, {1.0, -0.2}, kTs);
    const auto b = RationalTF::discrete({1.0}, {1.0, -0.5}, kTs);
    const auto p = ztf::poles(ztf::cascade(a, b));
    REQUIRE(p.size() == 2);
    CHECK(std::abs(p[0] - 0.2) < 1e-12);
    CHECK(std::abs(p[1] - 0.5) < 1e-12);
  }
  SUBCASE("domain and rate mismatches") {
    CHECK_THROWS_AS(ztf::cascade(diffkit::make_backward(kTs), RationalTF::continuous({1.0}, {1.0, 1.0})), DomainMismatch);
    CHECK_THROWS_AS(ztf::cascade(diffkit::make_backward(kTs), diffkit::make_backward(2 * kTs)), DomainMismatch);
  }
}

TEST_CASE("property: cascade multiplies and parallel adds responses") {
  std::mt19937 rng(11);
  const auto f = ztf::logspace(5.0, 4400.0, 30);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_stable(rng, 1 + trial % 4);
    const auto b = random_stable(rng, 1 + (trial + 2) % 5);
    const auto fa = ztf::freq_response(a, f), fb = ztf::freq_response(b, f);
    const auto fc = ztf::freq_response(ztf::cascade(a, b), f);
    const auto fp = ztf::freq_response(ztf::parallel(a, b), f);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const cd prod = fa.values[i] * fb.values[i];
      CHECK(std::abs(fc.values[i] - prod) <= 1e-12 * std::abs(prod) + 1e-300);
      const cd sum = fa.values[i] + fb.values[i];
      CHECK(std::abs(fp.values[i] - sum) <= 1e-10 * (std::abs(fa.values[i]) + std::abs(fb.values[i])));
    }
  }
}

TEST_CASE("poles examples") {
  auto p = ztf::poles(RationalTF::discrete({1.0}, {1.0, -0.5}, kTs));
  REQUIRE(p.size() == 1);
  CHECK(std::abs(p[0] - 0.5) < 1e-15);
  p = ztf::poles(diffkit::make_notch({1.0}, kTs));
  REQUIRE(p.size() == 2);
  CHECK(std::abs(p[0] - (-1.0 - std::sqrt(17.0)) / 8.0) < 1e-10);
  CHECK(std::abs(p[1] - (-1.0 + std::sqrt(17.0)) / 8.0) < 1e-10);
  p = ztf::poles(RationalTF::discrete({1.0}, {1.0, 0.0, 1.0}, kTs));
  CHECK(std::abs(p[0] - cd{0, -1}) < 1e-12);
  CHECK(std::abs(p[1] - cd{0, 1}) < 1e-12);
  CHECK_THROWS_AS(ztf::poles(RationalTF::discrete({1.0}, {2.0}, kTs)), std::invalid_argument);
}

TEST_CASE("property: poles of real systems close under conjugation") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    poly::Coeffs den(static_cast<std::size_t>(2 + trial % 9));
    for (auto& c : den) c = coef(rng);
    den[0] = 1.0 + std::abs(den[0]);
    const auto p = ztf::poles(RationalTF::discrete({1.0}, den, kTs));
    for (const auto& r : p) {
      double best = 1e300;
      for (const auto& q : p) best = std::min(best, std::abs(q - std::conj(r)));
      CHECK(best < 1e-9);
    }
  }
}

TEST_CASE("is_stable examples") {
  auto r = ztf::is_stable(RationalTF::discrete({1.0}, {1.0, -0.5}, kTs));
  CHECK(r.stable);
  CHECK(r.max_pole_magnitude == doctest::Approx(0.5));
  CHECK(std::abs(r.worst_pole - 0.5) < 1e-15);
  r = ztf::is_stable(RationalTF::discrete({1.0}, {1.0, -2.0}, kTs));
  CHECK_FALSE(r.stable);
  CHECK_FALSE(r.marginal);
  r = ztf::is_stable(RationalTF::discrete({1.0}, {1.0, 0.0, 1.0}, kTs));
  CHECK_FALSE(r.stable);
  CHECK(r.marginal);
  CHECK_THROWS_AS(ztf::is_stable(RationalTF::continuous({1.0}, {1.0, 1.0})), WrongDomain);
}

TEST_CASE("notch is stable for any m > 0 (quadratic-formula oracle)") {
  for (double m : {0.1, 1.0, 10.0, 100.0}) {
    const double a = 2 * m + 2, disc = 1.0 + 4.0 * a;
    const double r1 = (-1.0 - std::sqrt(disc)) / (2 * a), r2 = (-1.0 + std::sqrt(disc)) / (2 * a);
    CHECK(std::max(std::abs(r1), std::abs(r2)) < 1.0);
    const auto p = ztf::poles(diffkit::make_notch({m}, kTs));
    CHECK(std::abs(p[0].real() - r1) < 1e-10);
    CHECK(std::abs(p[1].real() - r2) < 1e-10);
    CHECK(ztf::is_stable(diffkit::make_notch({m}, kTs)).stable);
  }
}

TEST_CASE("filter examples") {
  SUBCASE("backward differentiator on a ramp") {
    std::vector<double> x(50);
    for (std::size_t n = 0; n < x.size(); ++n) x[n] = static_cast<double>(n) * kTs;
    const auto y = ztf::filter(diffkit::make_backward(kTs), x);
    CHECK(y[0] == 0.0);
    for (std::size_t n = 1; n < y.size(); ++n) CHECK(y[n] == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("unity passes input bit-exactly") {
    const std::vector<double> x{0.1, -3.7, 1e-300, 6.02e23, -0.0};
    const auto y = ztf::filter(RationalTF::unity(ztf::Domain::Z, kTs), x);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
  }
  SUBCASE("improper and continuous systems are rejected") {
    const std::vector<double> x{1.0};
    CHECK_THROWS_AS(ztf::filter(diffkit::make_forward(kTs), x), NonCausal);
    CHECK_THROWS_AS(ztf::filter(RationalTF::continuous({1.0}, {1.0, 1.0}), x), WrongDomain);
  }
  SUBCASE("reset returns the filter to zero state") {
    ztf::DiscreteFilter f(diffkit::make_proposed({0.75}, {0.125}, kTs));
    const double first = f.step(1.0);
    f.step(0.3);
    f.reset();
    CHECK(f.step(1.0) == first);
  }
}

TEST_CASE("property: filter is linear") {
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    const auto tf = random_stable(rng, 2 + trial % 6);
    std::vector<double> x(300), y(300), mix(300);
    const double a = g(rng), b = g(rng);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = g(rng);
      y[i] = g(rng);
      mix[i] = a * x[i] + b * y[i];
    }
    const auto fx = ztf::filter(tf, x), fy = ztf::filter(tf, y), fm = ztf::filter(tf, mix);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double ref = a * fx[i] + b * fy[i];
      CHECK(std::abs(fm[i] - ref) <= 1e-12 * (std::abs(a * fx[i]) + std::abs(b * fy[i]) + 1e-12));
    }
  }
}

TEST_CASE("property: steady-state sinusoidal response matches freq_response") {
  std::mt19937 rng(13);
  std::vector<RationalTF> systems{diffkit::make_proposed({0.75}, {0.125}, kTs), diffkit::make_notch({0.5}, kTs),
                                  diffkit::make_backward_lead({0.75}, kTs)};
  for (int i = 0; i < 6; ++i) systems.push_back(random_stable(rng, 1 + i));
  for (const auto& tf : systems) {
    const double rho = ztf::is_stable(tf).max_pole_magnitude;
    REQUIRE(rho < 1.0);
    // enough samples for the transient to fall below 1e-9 of itself
    const auto settle = static_cast<std::size_t>(std::ceil(std::log(1e-9) / std::log(std::max(rho, 1e-3)))) + 50;
    for (double f : {37.0, 600.0, 2800.0, 4400.0}) {
      const double w = 2 * kPi * f;
      const std::vector<double> grid{f};
      const cd h = ztf::freq_response(tf, grid).values[0];
      std::vector<double> x(settle + 200);
      for (std::size_t n = 0; n < x.size(); ++n) x[n] = std::cos(w * static_cast<double>(n) * kTs);
      const auto y = ztf::filter(tf, x);
      double err = 0.0;
      for (std::size_t n = settle; n < x.size(); ++n) {
        const double pred = std::abs(h) * std::cos(w * static_cast<double>(n) * kTs + std::arg(h));
        err = std::max(err, std::abs(y[n] - pred));
      }
      CHECK(err <= 1e-6 * std::abs(h) + 1e-12);
    }
  }
}

TEST_CASE("CSV writers and phase unwrapping") {
  const auto f = ztf::logspace(10.0, 4000.0, 5);
  const auto fr = ztf::freq_response(diffkit::make_backward(kTs), f);
  std::ostringstream os;
  ztf::write_csv(os, fr);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "freq_hz,mag_db,phase_deg,re,im");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 5);

  // a pure delay z^-3 has phase -3 w Ts, which unwraps to a straight line
  const auto delay = RationalTF::discrete({1.0}, {1.0, 0.0, 0.0, 0.0}, kTs);
  const auto g = ztf::logspace(100.0, 4990.0, 200);
  const auto ph = ztf::unwrapped_phase_deg(ztf::freq_response(delay, g));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(ph[i] == doctest::Approx(-1080.0 * g[i] * kTs).epsilon(1e-9));

  std::ostringstream ps;
  const std::vector<cd> p{{0.5, 0.5}};
  ztf::write_poles_csv(ps, p);
  CHECK(ps.str().rfind("re,im,magnitude\n0.5,0.5,0.707106781187", 0) == 0);
}
