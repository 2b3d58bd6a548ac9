// hinged.cpp — hinged energy evaluation with warm-started leg caches, FD
// derivative data at midpoints, and reduction to a diagonal Laplace form.
#include "subheat/hinged.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "subheat/flow.hpp"
#include "subheat/util.hpp"

namespace subheat {

namespace {

// Chebyshev separation of two solutions, periodic-aware in the chart angles.
double chart_sep(const Model& m, const Eigen::VectorXd& a, const Eigen::VectorXd& b, double dT) {
  double g = std::abs(dT);
  for (int i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    if (m.chart_dims[static_cast<size_t>(i)].periodic) d = std::remainder(d, 2 * M_PI);
    g = std::max(g, std::abs(d));
  }
  return g;
}

// Multistart seeding runs on the adaptive integrator; the FD-grade residual
// tolerance only makes sense on a frozen discretization.
ShootOptions seeding(const HingedOptions& o) {
  ShootOptions s = o.shoot;
  s.newton_tol = std::max(s.newton_tol, 1e-10);
  s.flow.fixed_steps = 0;
  return s;
}

double richardson(double coarse, double fine) { return (4 * fine - coarse) / 3; }

}  // namespace

HingedField::HingedField(const Model& m, Eigen::VectorXd x, Eigen::VectorXd y,
                         Eigen::VectorXd z0, Eigen::MatrixXd chart, HingedOptions opts)
    : m_(&m),
      x_(std::move(x)),
      y_(std::move(y)),
      z0_(std::move(z0)),
      chart_(std::move(chart)),
      opts_(std::move(opts)) {
  if (chart_.size() == 0) chart_ = Eigen::MatrixXd::Identity(m.n, m.n);
  if (chart_.rows() != m.n || chart_.cols() < 1 || chart_.cols() > m.n)
    throw std::invalid_argument("hinged: chart must be n x k with 1 <= k <= n");
  DistanceResult pair = distance(m, x_, y_, seeding(opts_));
  d_ = pair.d;
  d2_ = d_ * d_;
  legx_.base = x_;
  legy_.base = y_;
  seed_leg(legx_);
  seed_leg(legy_);
  h0_ = eval(z0_);
  if (std::abs(h0_ - 0.25 * d2_) > 1e-6)
    throw std::invalid_argument("hinged: z0 is off the midpoint set (h(z0) - d^2/4 = " +
                                fmt17(h0_ - 0.25 * d2_) + ")");
}

void HingedField::seed_leg(Leg& leg) const {
  Leg::Entry e;
  e.z = z0_;
  if ((leg.base - z0_).norm() < 1e-14) {  // z0 coincides with this endpoint
    leg.entries.push_back(std::move(e));
    return;
  }
  DistanceResult r = distance(*m_, leg.base, z0_, seeding(opts_));
  if (r.solutions.empty())
    throw ShootError("hinged: no geodesic from a leg endpoint to z0", r.best_residual);
  // Freeze the step count from the minimizing branch's variational solve; all
  // stencil evaluations for this leg then share one discretization, so the
  // integrator error cancels in finite differences.
  const GeodesicSolution& best = r.solutions.front();
  FlowOptions probe = opts_.shoot.flow;
  probe.fixed_steps = 0;
  probe.store_dense = false;
  Trajectory tr = integrate_hamilton(*m_, leg.base, best.p0, best.T, probe, true);
  leg.fixed_steps = static_cast<int>(1.25 * tr.steps_taken) + 4;
  ShootOptions warm = opts_.shoot;
  warm.flow.fixed_steps = leg.fixed_steps;
  for (const auto& s : r.solutions) {
    auto ref = refine_single(*m_, leg.base, z0_, s.theta, s.T, warm);
    if (ref) e.sols.push_back(*ref);
  }
  if (e.sols.empty())
    throw ShootError("hinged: fixed-step refinement lost every branch at z0", r.best_residual);
  std::sort(e.sols.begin(), e.sols.end(),
            [](const GeodesicSolution& a, const GeodesicSolution& b) { return a.T < b.T; });
  if (e.sols.size() > 6) e.sols.resize(6);
  e.d = e.sols.front().T;
  leg.entries.push_back(std::move(e));
}

double HingedField::leg_distance(Leg& leg, const Eigen::VectorXd& z) const {
  if ((z - leg.base).norm() < 1e-14) return 0.0;
  const Leg::Entry* nearest = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : leg.entries) {
    double g = (z - e.z).norm();
    if (g < 1e-13) return e.d;
    if (g < best) {
      best = g;
      nearest = &e;
    }
  }
  ShootOptions warm = opts_.shoot;
  warm.flow.fixed_steps = leg.fixed_steps;
  Leg::Entry e;
  e.z = z;
  if (nearest) {
    for (const auto& s : nearest->sols) {
      auto ref = refine_single(*m_, leg.base, z, s.theta, s.T, warm);
      if (!ref) continue;
      bool dup = false;
      for (const auto& t : e.sols)
        if (chart_sep(*m_, ref->theta, t.theta, ref->T - t.T) < 1e-8) {
          dup = true;
          break;
        }
      if (!dup) e.sols.push_back(*ref);
    }
  }
  if (e.sols.empty()) {
    // Cold path: full multistart, then re-solve on the frozen grid.
    DistanceResult r = distance(*m_, leg.base, z, seeding(opts_));
    for (const auto& s : r.solutions) {
      auto ref = refine_single(*m_, leg.base, z, s.theta, s.T, warm);
      if (ref) e.sols.push_back(*ref);
    }
    if (e.sols.empty())
      throw ShootError("hinged: stencil distance lost all branches", r.best_residual);
  }
  std::sort(e.sols.begin(), e.sols.end(),
            [](const GeodesicSolution& a, const GeodesicSolution& b) { return a.T < b.T; });
  if (e.sols.size() > 6) e.sols.resize(6);
  e.d = e.sols.front().T;
  double out = e.d;
  leg.entries.push_back(std::move(e));
  return out;
}

double HingedField::eval(const Eigen::VectorXd& z) const {
  double dx = leg_distance(legx_, z);
  double dy = leg_distance(legy_, z);
  return 0.5 * (dx * dx + dy * dy);
}

double HingedField::eval_offset(const Eigen::VectorXd& w) const { return eval(z0_ + chart_ * w); }

Eigen::VectorXd HingedField::grad() const {
  const int k = static_cast<int>(chart_.cols());
  const double h = opts_.hess_step;
  Eigen::VectorXd g(k);
  for (int i = 0; i < k; ++i) {
    auto d1 = [&](double tau) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
      w[i] = tau;
      double fp = eval_offset(w);
      w[i] = -tau;
      double fm = eval_offset(w);
      return (fp - fm) / (2 * tau);
    };
    g[i] = richardson(d1(h), d1(h / 2));
  }
  return g;
}

const HingedHessian& HingedField::hessian() const {
  if (hess_) return *hess_;
  const int k = static_cast<int>(chart_.cols());
  const double h = opts_.hess_step;
  const double f0 = h0_;
  auto at = [&](int i, double a, int j, double b) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
    w[i] += a;
    w[j] += b;
    return eval_offset(w);
  };
  Eigen::MatrixXd H(k, k);
  double worst = 0;
  for (int i = 0; i < k; ++i) {
    auto d2 = [&](double tau) { return (at(i, tau, i, 0) - 2 * f0 + at(i, -tau, i, 0)) / (tau * tau); };
    double a = d2(h), b = d2(h / 2);
    H(i, i) = richardson(a, b);
    worst = std::max(worst, std::abs(b - a) / 3);
  }
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      auto dm = [&](double tau) {
        return (at(i, tau, j, tau) - at(i, tau, j, -tau) - at(i, -tau, j, tau) +
                at(i, -tau, j, -tau)) /
               (4 * tau * tau);
      };
      double a = dm(h), b = dm(h / 2);
      H(i, j) = H(j, i) = richardson(a, b);
      worst = std::max(worst, std::abs(b - a) / 3);
    }
  HingedHessian out;
  out.matrix = 0.5 * (H + H.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.matrix);
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  double lmax = out.eigenvalues.cwiseAbs().maxCoeff();
  if (out.eigenvalues.minCoeff() < -1e-6 * lmax)
    throw std::runtime_error("hinged: Hessian indefinite beyond tolerance at z0 (min eigenvalue " +
                             fmt17(out.eigenvalues.minCoeff()) + ")");
  for (int i = 0; i < k; ++i)
    if (out.eigenvalues[i] < opts_.kernel_rel_tol * lmax) ++out.kernel_dim;
  out.fd_uncertainty = worst;
  hess_ = std::move(out);
  return *hess_;
}

const std::vector<TaylorCoeff>& HingedField::taylor4() const {
  if (taylor_) return *taylor_;
  const int k = static_cast<int>(chart_.cols());
  if (k > 3) throw std::invalid_argument("hinged: taylor4 supports at most 3 chart directions");
  const double s = opts_.quartic_step;

  // Values cached on the union of the two 5-node tensor grids, keyed in s/2
  // units so the coarse ({-4,-2,0,2,4}) and fine ({-2,-1,0,1,2}) grids share
  // their common points.
  std::map<std::vector<int>, double> vals;
  auto value_at = [&](const std::vector<int>& u) {
    auto it = vals.find(u);
    if (it != vals.end()) return it->second;
    Eigen::VectorXd w(k);
    for (int i = 0; i < k; ++i) w[i] = 0.5 * s * u[i];
    double v = eval_offset(w);
    vals.emplace(u, v);
    return v;
  };

  // 5-node central-difference weights at {-2,-1,0,1,2}*tau for orders 0..4;
  // each row is second-order accurate, so Richardson over {s, s/2} applies.
  static const double W[5][5] = {
      {0, 0, 1, 0, 0},       // f
      {0, -0.5, 0, 0.5, 0},  // f' * tau
      {0, 1, -2, 1, 0},      // f'' * tau^2
      {-0.5, 1, 0, -1, 0.5}, // f''' * tau^3
      {1, -4, 6, -4, 1},     // f'''' * tau^4
  };

  auto deriv = [&](const std::vector<int>& gamma, int tau_units) {
    // Tensor-product stencil; dims with gamma_d = 0 contribute only their
    // center node. tau_units is the node spacing in s/2 units (2 or 1).
    int degree = 0;
    for (int d = 0; d < k; ++d) degree += gamma[d];
    double tau = 0.5 * s * tau_units;
    std::vector<int> node(k, -2);
    double sum = 0;
    for (;;) {
      double wprod = 1;
      for (int d = 0; d < k; ++d) wprod *= W[gamma[d]][node[d] + 2];
      if (wprod != 0) {
        std::vector<int> key(k);
        for (int d = 0; d < k; ++d) key[d] = node[d] * tau_units;
        sum += wprod * value_at(key);
      }
      int d = 0;
      for (; d < k; ++d) {
        if (++node[d] <= 2) break;
        node[d] = -2;
      }
      if (d == k) break;
    }
    return sum / std::pow(tau, degree);
  };

  // Multi-indices of total degree <= 4, ordered by degree then lexicographic.
  std::vector<std::vector<int>> gammas;
  std::vector<int> g(k, 0);
  std::function<void(int, int, int)> gen = [&](int d, int left, int target) {
    if (d == k) {
      if (left == 0) gammas.push_back(g);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      g[d] = e;
      gen(d + 1, left - e, target);
    }
    g[d] = 0;
  };
  for (int degree = 0; degree <= 4; ++degree) gen(0, degree, degree);

  std::vector<TaylorCoeff> table;
  for (const auto& gamma : gammas) {
    double fact = 1;
    for (int d = 0; d < k; ++d)
      for (int e = 2; e <= gamma[d]; ++e) fact *= e;
    TaylorCoeff c;
    c.powers = gamma;
    double coarse = deriv(gamma, 2) / fact;
    double fine = deriv(gamma, 1) / fact;
    c.value = richardson(coarse, fine);
    c.uncertainty = std::abs(fine - coarse) / 3;
    c.reliable = c.uncertainty <= 0.1 * std::abs(c.value);
    table.push_back(std::move(c));
  }
  taylor_ = std::move(table);
  return *taylor_;
}

int HingedField::gamma_dim() const {
  if (gamma_ >= 0) return gamma_;
  MidpointSet mp = midpoints(*m_, x_, y_, seeding(opts_));
  gamma_ = mp.dim_estimate;
  return gamma_;
}

double hinged_eval(const Model& m, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& z, const ShootOptions& opts) {
  // Shoot from the endpoints toward z (distance is symmetric): z itself may be
  // a point where the covector chart degenerates, e.g. the grushin x = 0 line.
  double dxz = distance(m, x, z, opts).d;
  double dzy = distance(m, y, z, opts).d;
  return 0.5 * (dxz * dxz + dzy * dzy);
}

HingedHessian hinged_hessian(const Model& m, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& z0, const HingedOptions& opts) {
  HingedField f(m, x, y, z0, Eigen::MatrixXd(), opts);
  return f.hessian();
}

LaplaceForm to_laplace_form(const HingedField& f) {
  const Eigen::MatrixXd& chart = f.chart();
  if (chart.cols() != chart.rows())
    throw std::invalid_argument("to_laplace_form needs a full (square) chart");
  const HingedHessian& H = f.hessian();
  const int n = static_cast<int>(chart.cols());
  double lmax = H.eigenvalues.cwiseAbs().maxCoeff();
  std::vector<int> kernel, morse;
  for (int i = 0; i < n; ++i)
    (H.eigenvalues[i] < f.options().kernel_rel_tol * lmax ? kernel : morse).push_back(i);

  LaplaceForm out;
  out.jacobian_at_z0 = std::abs(chart.determinant());
  for (int i : morse) {
    out.exponents.push_back(1);
    out.diag_coeffs.push_back(H.eigenvalues[i]);
  }
  if (kernel.empty()) return out;

  if (f.gamma_dim() > 0) {
    // Morse–Bott: the kernel is tangent to a continuum of minima.
    if (static_cast<int>(kernel.size()) != f.gamma_dim())
      throw UnsupportedDegeneracy("hinged: Hessian corank " + std::to_string(kernel.size()) +
                                  " does not match continuum dimension " +
                                  std::to_string(f.gamma_dim()));
    out.flat_dims = static_cast<int>(kernel.size());
    return out;
  }
  if (kernel.size() > 1)
    throw UnsupportedDegeneracy("hinged: corank >= 2 at an isolated minimum is unsupported");

  // Corank-1 quartic path: quartic coefficient along the kernel, minus the
  // cross-term correction from the splitting substitution u -> u - (a/lambda)v^2
  // (which removes each u v^2 monomial and shifts v^4 by -a^2/(2 lambda)).
  const double s = f.options().quartic_step;
  const double f0 = f.h0();
  Eigen::VectorXd v = H.eigenvectors.col(kernel[0]);
  auto fv = [&](double b) { return f.eval_offset(b * v); };
  auto d4 = [&](double tau) {
    return (fv(-2 * tau) - 4 * fv(-tau) + 6 * f0 - 4 * fv(tau) + fv(2 * tau)) / std::pow(tau, 4);
  };
  auto d3 = [&](double tau) {
    return (-0.5 * fv(-2 * tau) + fv(-tau) - fv(tau) + 0.5 * fv(2 * tau)) / std::pow(tau, 3);
  };
  double a04 = richardson(d4(s), d4(s / 2)) / 24.0;
  double a03 = richardson(d3(s), d3(s / 2)) / 6.0;
  if (std::abs(a03) > 1e-4 * std::max(1.0, std::abs(a04)))
    throw UnsupportedDegeneracy("hinged: cubic term along the kernel direction (minimum is not an even normal form)");
  double correction = 0;
  for (int j : morse) {
    Eigen::VectorXd u = H.eigenvectors.col(j);
    auto fm = [&](double a, double b) { return f.eval_offset(a * u + b * v); };
    auto t3 = [&](double tau) {
      double plus = fm(tau, tau) - 2 * fm(tau, 0) + fm(tau, -tau);
      double minus = fm(-tau, tau) - 2 * fm(-tau, 0) + fm(-tau, -tau);
      return (plus - minus) / (2 * tau * tau * tau);
    };
    double aj = richardson(t3(s), t3(s / 2)) / 2.0;
    correction += aj * aj / (2 * H.eigenvalues[j]);
  }
  double cv = a04 - correction;
  if (!(cv > 1e-8 * std::max(1.0, lmax)))
    throw UnsupportedDegeneracy("hinged: quartic along the kernel vanishes (outside the corank-1 quartic normal form)");
  out.exponents.push_back(2);
  out.diag_coeffs.push_back(cv);
  return out;
}

}  // namespace subheat
