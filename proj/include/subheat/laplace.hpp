// laplace.hpp — Laplace-integral leading terms for diagonal phases, a
// brute-force quadrature oracle, and the exact heat exponent.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <vector>

#include "subheat/hinged.hpp"
#include "subheat/rational.hpp"

namespace subheat {

// Gamma function used by the leading-term formulas; |rel err| <= 1e-12 at the
// half/quarter/sixth-integer arguments the expansions need.
double gamma_at(double x);

// Leading term of ∫ f e^{-g/t} du for g = Σ c_i u_i^{2 m_i}: the value
// factorizes per direction as f0 · Γ(1/(2m))/m · (t/c)^{1/(2m)}.
struct LaplaceLeading {
  double coefficient = 0;      // at(t) = coefficient * t^{t_power}
  Rational t_power{0, 1};      // Σ 1/(2 m_i)
  Rational error_order{1, 1};  // relative first correction is O(t^{error_order})
  double at(double t) const;
};

LaplaceLeading laplace_leading(double f0, const LaplaceForm& form);

// Brute-force cross-check: adaptive tensor Gauss–Kronrod quadrature of
// f(u) * exp(-g(u)/t) over an axis-aligned box (1 to 3 dimensions). Throws on
// non-convergence with the achieved estimate in the message.
double laplace_oracle(const std::function<double(const Eigen::VectorXd&)>& g,
                      const std::function<double(const Eigen::VectorXd&)>& f,
                      const std::vector<std::array<double, 2>>& box, double t, double tol);

// α = n − Σ_i 1/(2 m_i), exactly; flat directions contribute nothing.
Rational heat_exponent(int n, const LaplaceForm& form);

}  // namespace subheat
