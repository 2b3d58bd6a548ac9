// laplace.cpp — diagonal Laplace leading terms, quadrature oracle, exponents.
#include "subheat/laplace.hpp"

#include <cmath>
#include <stdexcept>

#include "subheat/quadrature.hpp"
#include "subheat/util.hpp"

namespace subheat {

double gamma_at(double x) { return std::tgamma(x); }

double LaplaceLeading::at(double t) const {
  return coefficient * std::pow(t, t_power.to_double());
}

LaplaceLeading laplace_leading(double f0, const LaplaceForm& form) {
  if (!std::isfinite(f0)) throw std::invalid_argument("laplace_leading: f0 must be finite");
  LaplaceLeading out;
  out.coefficient = f0;
  bool any_quartic = false;
  for (size_t i = 0; i < form.exponents.size(); ++i) {
    int m = form.exponents[i];
    double c = form.diag_coeffs[i];
    if (m < 1) throw std::invalid_argument("laplace_leading: exponents must be >= 1");
    if (!(c > 0)) throw std::invalid_argument("laplace_leading: coefficients must be positive");
    if (m >= 2) any_quartic = true;
    // ∫ exp(-c u^{2m} / t) du = Γ(1/(2m))/m * (t/c)^{1/(2m)}
    out.coefficient *= gamma_at(1.0 / (2 * m)) / m * std::pow(c, -1.0 / (2 * m));
    out.t_power = out.t_power + Rational(1, 2 * m);
  }
  // Pure Morse phases correct at relative O(t); with a quartic direction the
  // first surviving correction is the squared odd quintic term, O(sqrt(t)).
  out.error_order = any_quartic ? Rational(1, 2) : Rational(1, 1);
  return out;
}

double laplace_oracle(const std::function<double(const Eigen::VectorXd&)>& g,
                      const std::function<double(const Eigen::VectorXd&)>& f,
                      const std::vector<std::array<double, 2>>& box, double t, double tol) {
  const int dim = static_cast<int>(box.size());
  if (dim < 1 || dim > 3)
    throw std::invalid_argument("laplace_oracle: box must have 1 to 3 dimensions");
  if (!(t > 0)) throw std::invalid_argument("laplace_oracle: t must be positive");
  std::vector<double> lo(dim), hi(dim);
  for (int d = 0; d < dim; ++d) {
    lo[d] = box[d][0];
    hi[d] = box[d][1];
  }
  QuadOptions opts;
  opts.rel_tol = tol;
  opts.max_depth = 30;
  Eigen::VectorXd u(dim);
  auto integrand = [&](const double* x) {
    for (int d = 0; d < dim; ++d) u[d] = x[d];
    return f(u) * std::exp(-g(u) / t);
  };
  QuadResult r = integrate_tensor(integrand, lo, hi, opts);
  if (!r.converged)
    throw std::runtime_error("laplace_oracle: quadrature did not converge (value " +
                             fmt17(r.value) + ", est_error " + fmt17(r.est_error) + ")");
  return r.value;
}

Rational heat_exponent(int n, const LaplaceForm& form) {
  if (static_cast<int>(form.exponents.size()) + form.flat_dims != n)
    throw std::invalid_argument("heat_exponent: transverse + flat dimensions must equal n");
  Rational alpha(n, 1);
  for (int m : form.exponents) alpha = alpha - Rational(1, 2 * m);
  return alpha;
}

}  // namespace subheat
