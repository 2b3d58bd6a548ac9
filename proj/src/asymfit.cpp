// asymfit.cpp — two-stage exponent fit and the bound-clause verdict record.
#include "subheat/asymfit.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "subheat/util.hpp"

namespace subheat {

AsymptoticFit fit_exponential(const std::vector<std::pair<double, double>>& samples) {
  const int n = static_cast<int>(samples.size());
  if (n < 6) throw std::invalid_argument("fit_exponential: need at least 6 samples");
  double tmin = samples[0].first, tmax = samples[0].first;
  for (const auto& [t, lp] : samples) {
    if (!(t > 0)) throw std::invalid_argument("fit_exponential: t must be positive");
    if (!std::isfinite(lp)) throw std::invalid_argument("fit_exponential: log p must be finite");
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
  }
  if (tmax / tmin < std::sqrt(10.0))
    throw std::invalid_argument(
        "fit_exponential: t range spans less than half a decade; the design is ill-conditioned");

  // stage 1: -4 t log p = d2 + b t + c t log t
  Eigen::MatrixXd A1(n, 3);
  Eigen::VectorXd y1(n);
  for (int i = 0; i < n; ++i) {
    const double t = samples[i].first, lp = samples[i].second;
    A1(i, 0) = 1.0;
    A1(i, 1) = t;
    A1(i, 2) = t * std::log(t);
    y1[i] = -4.0 * t * lp;
  }
  const Eigen::Vector3d c1 = A1.colPivHouseholderQr().solve(y1);
  AsymptoticFit fit;
  fit.d2_hat = std::max(c1[0], 0.0);
  fit.t_min = tmin;
  fit.t_max = tmax;

  // stage 2: log p + d2/(4t) = log C - alpha log t
  Eigen::MatrixXd A2(n, 2);
  Eigen::VectorXd y2(n);
  for (int i = 0; i < n; ++i) {
    const double t = samples[i].first, lp = samples[i].second;
    A2(i, 0) = 1.0;
    A2(i, 1) = std::log(t);
    y2[i] = lp + fit.d2_hat / (4.0 * t);
  }
  const Eigen::Vector2d c2 = A2.colPivHouseholderQr().solve(y2);
  fit.alpha_hat = -c2[1];
  fit.C_hat = std::exp(c2[0]);
  fit.residual_rms = std::sqrt((A2 * c2 - y2).squaredNorm() / n);
  return fit;
}

Verdict corollary_verdict(const AsymptoticFit& fit, int n, int kernel_dim,
                          double predicted_alpha, double eps) {
  Verdict v;
  v.fit = fit;
  v.n = n;
  v.kernel_dim = kernel_dim;
  v.predicted_alpha = predicted_alpha;
  v.eps = eps;
  const double a = fit.alpha_hat, h = 0.5 * n;
  v.clauses.i = (h - eps <= a) && (a <= n - 0.5 + eps);
  v.clauses.ii = kernel_dim > 0 ? (a >= h + 0.25 - eps) : true;
  v.clauses.iii = kernel_dim == 0 ? (std::abs(a - h) <= eps) : true;
  return v;
}

std::string Verdict::json() const {
  JsonWriter w;
  w.begin_object()
      .field("d2_hat", fit.d2_hat)
      .field("alpha_hat", fit.alpha_hat)
      .field("C_hat", fit.C_hat)
      .field("residual_rms", fit.residual_rms)
      .field("t_min", fit.t_min)
      .field("t_max", fit.t_max)
      .field("n", n)
      .field("kernel_dim", kernel_dim);
  if (std::isfinite(predicted_alpha))
    w.field("predicted_alpha", predicted_alpha);
  else
    w.field_raw("predicted_alpha", "null");
  w.field("eps", eps)
      .begin_object("clauses")
      .field("i", clauses.i)
      .field("ii", clauses.ii)
      .field("iii", clauses.iii)
      .end_object()
      .field("all_pass", all_pass())
      .end_object();
  return w.str();
}

}  // namespace subheat
