// Unit tests: gamma values, Laplace leading terms vs the quadrature oracle,
// and exact heat exponents with their corollary bounds.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "subheat/laplace.hpp"

using namespace subheat;

namespace {
LaplaceForm make_form(std::vector<int> m, std::vector<double> c, int flat = 0) {
  LaplaceForm f;
  f.exponents = std::move(m);
  f.diag_coeffs = std::move(c);
  f.flat_dims = flat;
  return f;
}
const double kAlpha = 1.5 * M_PI * M_PI;

double oracle_of_form(const LaplaceForm& form, double t, double tol) {
  auto g = [&](const Eigen::VectorXd& u) {
    double s = 0;
    for (int i = 0; i < u.size(); ++i)
      s += form.diag_coeffs[i] * std::pow(u[i], 2 * form.exponents[i]);
    return s;
  };
  auto one = [](const Eigen::VectorXd&) { return 1.0; };
  std::vector<std::array<double, 2>> box(form.exponents.size(), {-1.0, 1.0});
  return laplace_oracle(g, one, box, t, tol);
}
}  // namespace

TEST_CASE("gamma values at the required arguments") {
  // 40-digit reference values, truncated.
  CHECK(std::abs(gamma_at(0.5) / 1.7724538509055160273 - 1) < 1e-12);
  CHECK(std::abs(gamma_at(0.25) / 3.6256099082219083119 - 1) < 1e-12);
  CHECK(std::abs(gamma_at(1.0 / 6) / 5.5663160017802352043 - 1) < 1e-12);
  CHECK(gamma_at(1.0) == doctest::Approx(1.0));
  CHECK(gamma_at(4.0) == doctest::Approx(6.0));
}

TEST_CASE("leading term closed forms") {
  // Single Gaussian direction: sqrt(pi t).
  auto g1 = laplace_leading(1.0, make_form({1}, {1.0}, 0));
  CHECK(g1.t_power == Rational(1, 2));
  CHECK(g1.error_order == Rational(1, 1));
  for (double t : {1.0, 0.1, 1e-4})
    CHECK(g1.at(t) == doctest::Approx(std::sqrt(M_PI * t)).epsilon(1e-13));

  // Single quartic direction: Gamma(1/4)/2 * t^{1/4}.
  auto g2 = laplace_leading(1.0, make_form({2}, {1.0}, 0));
  CHECK(g2.t_power == Rational(1, 4));
  CHECK(g2.error_order == Rational(1, 2));
  CHECK(g2.coefficient == doctest::Approx(3.6256099082219083119 / 2).epsilon(1e-13));

  // The scaling substitution: c rescales the coefficient by c^{-1/(2m)}.
  auto g3 = laplace_leading(2.0, make_form({1, 2}, {8.0, kAlpha / 24}, 0));
  CHECK(g3.t_power == Rational(3, 4));
  double expect = 2.0 * std::sqrt(M_PI / 8) *
                  (3.6256099082219083119 / 2) * std::pow(24 / kAlpha, 0.25);
  CHECK(g3.coefficient == doctest::Approx(expect).epsilon(1e-13));

  CHECK_THROWS_AS(laplace_leading(1.0, make_form({1}, {0.0}, 0)), std::invalid_argument);
  CHECK_THROWS_AS(laplace_leading(1.0, make_form({1}, {-2.0}, 0)), std::invalid_argument);
}

TEST_CASE("oracle agrees with textbook integrals") {
  auto one = [](const Eigen::VectorXd&) { return 1.0; };
  // Gaussian
  auto gsq = [](const Eigen::VectorXd& u) { return u[0] * u[0]; };
  double v = laplace_oracle(gsq, one, {{-1.0, 1.0}}, 1e-4, 1e-8);
  CHECK(std::abs(v / std::sqrt(M_PI * 1e-4) - 1) < 1e-3);

  // Quartic
  auto g4 = [](const Eigen::VectorXd& u) { return std::pow(u[0], 4); };
  v = laplace_oracle(g4, one, {{-1.0, 1.0}}, 1e-4, 1e-8);
  CHECK(std::abs(v / (3.6256099082219083119 / 2 * 0.1) - 1) < 1e-2);

  // Mixed 2D with a polynomial amplitude: product of 1D leading terms.
  auto gm = [](const Eigen::VectorXd& u) { return u[0] * u[0] + std::pow(u[1], 4); };
  auto fa = [](const Eigen::VectorXd& u) { return 1 + u[0] * u[0]; };
  v = laplace_oracle(gm, fa, {{-1.0, 1.0}, {-1.0, 1.0}}, 1e-4, 1e-8);
  double lead = std::sqrt(M_PI * 1e-4) * (3.6256099082219083119 / 2 * 0.1);
  CHECK(std::abs(v / lead - 1) < 1e-2);
}

TEST_CASE("leading term matches the oracle with shrinking deviation") {
  // Transverse forms of the catalogue pairs (flat directions integrate out).
  std::vector<LaplaceForm> forms = {
      make_form({1, 2}, {8.0, kAlpha / 24}, 0),                // quartic landmark pair
      make_form({1, 1}, {M_PI * M_PI / 2, 2 * M_PI}, 1),       // vertical Morse-Bott pair
      make_form({1, 1, 1}, {2.0, 3.5, 9.42}, 0),               // generic Morse pair
  };
  for (const auto& form : forms) {
    auto lead = laplace_leading(1.0, form);
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {1e-2, 1e-3, 1e-4}) {
      double dev = std::abs(oracle_of_form(form, t, 1e-7) / lead.at(t) - 1);
      CHECK(dev < prev + 1e-6);  // monotone shrink up to quadrature tolerance
      prev = dev;
    }
    CHECK(prev < 0.02);  // within 2% at t = 1e-4
  }
}

TEST_CASE("heat exponents are exact rationals with the corollary bounds") {
  Rational a = heat_exponent(2, make_form({1, 2}, {8.0, kAlpha / 24}, 0));
  CHECK(a == Rational(5, 4));
  CHECK(heat_exponent(3, make_form({1, 1}, {1.0, 1.0}, 1)) == Rational(2));
  CHECK(heat_exponent(3, make_form({1, 1, 1}, {1.0, 1.0, 1.0}, 0)) == Rational(3, 2));

  // n/2 <= alpha <= n - 1/2; alpha >= n/2 + 1/4 when any m >= 2.
  auto check_bounds = [](int n, const LaplaceForm& f) {
    Rational al = heat_exponent(n, f);
    CHECK(al.to_double() >= n / 2.0 - 1e-15);
    CHECK(al.to_double() <= n - 0.5 + 1e-15);
    for (int m : f.exponents)
      if (m >= 2) {
        CHECK(al.to_double() >= n / 2.0 + 0.25 - 1e-15);
        break;
      }
  };
  check_bounds(2, make_form({1, 2}, {8.0, kAlpha / 24}, 0));
  check_bounds(3, make_form({1, 1}, {1.0, 1.0}, 1));
  check_bounds(3, make_form({1, 1, 1}, {1.0, 1.0, 1.0}, 0));
  check_bounds(6, make_form({1, 1, 1, 1, 2}, {1, 2, 3, 4, 5}, 1));

  CHECK_THROWS_AS(heat_exponent(4, make_form({1, 1}, {1.0, 1.0}, 1)), std::invalid_argument);
}

TEST_CASE("oracle reports non-convergence instead of a silent bad value") {
  // Integrable 1/sqrt singularity at the peak: bisection cannot reach the
  // requested tolerance within the depth limit.
  auto g = [](const Eigen::VectorXd& u) { return (u[0] - 0.3) * (u[0] - 0.3); };
  auto f = [](const Eigen::VectorXd& u) { return 1.0 / std::sqrt(std::abs(u[0] - 0.3) + 1e-300); };
  CHECK_THROWS_AS(laplace_oracle(g, f, {{-1.0, 1.0}}, 1e-4, 1e-8), std::runtime_error);
}
