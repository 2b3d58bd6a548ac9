// heat.cpp — two-step group kernels (hyperbolic form, contour-shifted on the
// vertical axis), closed vertical formulas, the Grushin oscillator integral in
// long double, and the Chapman-Kolmogorov semigroup glue.
#include "subheat/heat.hpp"

#include <cmath>
#include <complex>
#include <algorithm>
#include <limits>

#include "subheat/quadrature.hpp"
#include "subheat/util.hpp"

namespace subheat {

namespace {

// lambda/sinh(lambda) and lambda/tanh(lambda) as even functions of lambda,
// series below 1e-4 where the quotients lose digits.
double lam_over_sinh(double lam) {
  lam = std::abs(lam);
  if (lam < 1e-4) {
    double m = lam * lam;
    return 1.0 - m / 6.0 + 7.0 * m * m / 360.0;
  }
  if (lam > 700.0) return 0.0;  // sinh would overflow; the value is below 1e-301
  return lam / std::sinh(lam);
}

double lam_over_tanh(double lam) {
  lam = std::abs(lam);
  if (lam < 1e-4) {
    double m = lam * lam;
    return 1.0 + m / 3.0 - m * m / 45.0;
  }
  return lam / std::tanh(lam);
}

// log sinh v for v > 0 without overflow.
double log_sinh(double v) { return v - std::log(2.0) + std::log1p(-std::exp(-2.0 * v)); }

// Eigenstructure of a single skew bracket matrix B: eigenvalues of B^2 are
// -beta_i^2 (pairs plus zeros), eigenvectors give the x projections for W.
struct SkewSpec {
  Eigen::VectorXd beta;           // k entries, sqrt(-mu_i), descending with vecs order
  Eigen::MatrixXd vecs;           // eigenvectors of B^2 (columns)
  std::vector<double> pair_beta;  // one entry per +-i beta pair
  double rate = 0;                // 0.5 * sum beta: envelope decay of V
};

SkewSpec skew_spec(const Eigen::MatrixXd& B) {
  SkewSpec sp;
  Eigen::MatrixXd S = B * B;  // symmetric, spectrum <= 0
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const int k = static_cast<int>(S.rows());
  sp.beta.resize(k);
  for (int i = 0; i < k; ++i) sp.beta[i] = std::sqrt(std::max(0.0, -es.eigenvalues()[i]));
  sp.vecs = es.eigenvectors();
  sp.rate = 0.5 * sp.beta.sum();
  // nonzero betas come in equal pairs; keep one of each
  std::vector<double> nz;
  for (int i = 0; i < k; ++i)
    if (sp.beta[i] > 1e-9) nz.push_back(sp.beta[i]);
  std::sort(nz.begin(), nz.end());
  for (size_t i = 0; i + 1 < nz.size(); i += 2) sp.pair_beta.push_back(0.5 * (nz[i] + nz[i + 1]));
  return sp;
}

struct TailInt {
  double value = 0, est = 0, stop = 0, fmax = 0;
  long evals = 0;
};

// Integral over [0, inf) of an f whose magnitude decays roughly like
// e^{-rate*tau} past a head region: integrate [0, head], then geometrically
// growing blocks until two consecutive blocks are negligible against the
// running total.  The magnitude floor from summing fmax-sized values is added
// to the estimate by the caller.
template <typename F>
TailInt integrate_to_decay(F&& f, double head, double rate, double rel_tol) {
  TailInt out;
  auto tracked = [&](double u) {
    double v = f(u);
    out.fmax = std::max(out.fmax, std::abs(v));
    return v;
  };
  double L = std::max(head, 6.0 / std::max(rate, 1e-3));
  double a = 0, b = L;
  int calm = 0;
  for (int block = 0; block < 48; ++block) {
    QuadOptions o;
    o.rel_tol = rel_tol * 0.3;
    o.abs_tol = rel_tol * 0.3 * std::abs(out.value);
    auto r = integrate(tracked, a, b, o);
    out.evals += r.evals;
    out.value += r.value;
    out.est += r.est_error;
    out.stop = b;
    if (std::abs(r.value) <= rel_tol * 0.25 * std::abs(out.value)) {
      if (++calm >= 2) {
        out.est += std::abs(r.value);
        return out;
      }
    } else {
      calm = 0;
    }
    a = b;
    L *= 2;
    b = a + L;
  }
  out.est = std::max(out.est, std::abs(out.value));  // decay never observed: distrust
  return out;
}

std::string num(double v) { return fmt17(v); }

}  // namespace

KernelSample gaveau_kernel(const Model& m, const Eigen::VectorXd& q, double t, double rel_tol) {
  if (t <= 0) throw std::invalid_argument("gaveau_kernel: t must be positive");
  if (m.z_dim < 1 || m.bracket_B.empty())
    throw std::invalid_argument("gaveau_kernel: model lacks two-step bracket data");
  if (q.size() != m.n) throw std::invalid_argument("gaveau_kernel: point dimension mismatch");
  const int md = m.z_dim;
  const Eigen::VectorXd x = q.head(m.x_dim);
  const Eigen::VectorXd z = q.tail(md);
  const double xn2 = x.squaredNorm();
  const double logpref = std::log(2.0) - 0.5 * m.hausdorff_q * std::log(4.0 * M_PI * t);

  double logI = 0, est_rel = 0;  // log of the tau integral and its relative error

  if (md == 1) {
    const SkewSpec sp = skew_spec(m.bracket_B[0]);
    const double bmax = sp.beta.maxCoeff();
    if (bmax <= 0) throw std::invalid_argument("gaveau_kernel: bracket matrix is zero");
    const double omega = std::abs(z[0]) / t;
    const Eigen::VectorXd c = (sp.vecs.transpose() * x).array().square();

    // Vertical points with real oscillation: move the contour to
    // Im tau = sigma just below the first sinh zero at pi/bmax, extracting
    // the e^{-omega*sigma} decay instead of asking the real axis to cancel
    // down to it.  Worthwhile once sigma is substantial.
    double sigma = 0.0;
    if (xn2 < 1e-24 && omega > 0) {
      const double delta = std::min(1.0, bmax / omega);
      sigma = (M_PI - delta) / bmax;
      if (sigma * bmax > M_PI - 1e-6)
        throw KernelError("gaveau_kernel: contour shift would touch the sinh zero (|z|/t = " +
                          num(omega) + " too large)");
      if (sigma <= 0.3) sigma = 0.0;
    }

    if (sigma > 0) {
      auto f = [&](double tau) {
        std::complex<double> prod(1.0, 0.0);
        const std::complex<double> w(tau, sigma);
        for (double pb : sp.pair_beta) {
          std::complex<double> u = pb * w;
          prod *= u / std::sinh(u);
        }
        // Re[prod * e^{i omega tau}]; the imaginary part is odd and drops out.
        return prod.real() * std::cos(omega * tau) - prod.imag() * std::sin(omega * tau);
      };
      auto r = integrate_to_decay(f, 24.0 / std::max(omega, 1.0), sp.rate, rel_tol * 0.5);
      r.est += 1.1e-16 * r.fmax * r.stop;  // roundoff floor of the panel sums
      if (!(r.value > 0) || r.est > 0.5 * r.value)
        throw KernelError("gaveau_kernel: shifted quadrature failed (value " + num(r.value) +
                          ", est " + num(r.est) + ")");
      logI = std::log(2.0) - omega * sigma + std::log(r.value);
      est_rel = r.est / r.value;
    } else {
      auto f = [&](double tau) {
        double V = 1.0;
        for (int i = 0; i < sp.beta.size(); ++i) V *= lam_over_sinh(sp.beta[i] * tau);
        V = std::sqrt(V);
        double Wxx = 0.0;
        for (int i = 0; i < sp.beta.size(); ++i) Wxx += c[i] * lam_over_tanh(sp.beta[i] * tau);
        return V * std::exp(-Wxx / (4.0 * t)) * std::cos(omega * tau);
      };
      const double rate = sp.rate + c.dot(sp.beta) / (4.0 * t);
      auto r = integrate_to_decay(f, 2.0, rate, rel_tol * 0.5);
      r.est += 1.1e-16 * r.fmax * r.stop;
      if (!(r.value > 0) || r.est > 0.5 * r.value)
        throw KernelError("gaveau_kernel: quadrature failed (value " + num(r.value) + ", est " +
                          num(r.est) + ")");
      logI = std::log(2.0) + std::log(r.value);
      est_rel = r.est / r.value;
    }
  } else if (md <= 3) {
    // Tensor quadrature over the truncated cube; per-node eigendecomposition
    // of B(tau)^2.  Decay rate of V probed over direction samples.
    const int k = m.k;
    std::vector<Eigen::MatrixXd> Bs(m.bracket_B.begin(), m.bracket_B.end());
    double rate = std::numeric_limits<double>::infinity();
    {
      std::vector<Eigen::VectorXd> dirs;
      for (int mask = 1; mask < (1 << md); ++mask) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(md);
        for (int h = 0; h < md; ++h)
          if (mask & (1 << h)) d[h] = 1.0;
        dirs.push_back(d.normalized());
      }
      for (const auto& d : dirs) {
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(k, k);
        for (int h = 0; h < md; ++h) B += d[h] * Bs[h];
        rate = std::min(rate, skew_spec(B).rate);
      }
    }
    const double R = 52.0 / std::max(rate, 0.05);
    std::vector<Eigen::Matrix3d> B3;  // stack-friendly copies for the common k = 3 case
    if (k == 3)
      for (const auto& Bm : Bs) B3.push_back(Bm);
    auto eval = [&](const double* u) {
      double V = 1.0, Wxx = 0.0;
      if (k == 3) {
        Eigen::Matrix3d B = u[0] * B3[0];
        for (int h = 1; h < md; ++h) B += u[h] * B3[h];
        Eigen::Matrix3d S = B * B;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
        if (xn2 < 1e-24) {
          es.computeDirect(S, Eigen::EigenvaluesOnly);
          for (int i = 0; i < 3; ++i)
            V *= lam_over_sinh(std::sqrt(std::max(0.0, -es.eigenvalues()[i])));
        } else {
          es.computeDirect(S);
          for (int i = 0; i < 3; ++i) {
            const double lam = std::sqrt(std::max(0.0, -es.eigenvalues()[i]));
            V *= lam_over_sinh(lam);
            const double pr = es.eigenvectors().col(i).dot(x.head<3>());
            Wxx += pr * pr * lam_over_tanh(lam);
          }
        }
      } else {
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(k, k);
        for (int h = 0; h < md; ++h) B += u[h] * Bs[h];
        Eigen::MatrixXd S = B * B;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
        for (int i = 0; i < k; ++i) {
          const double lam = std::sqrt(std::max(0.0, -es.eigenvalues()[i]));
          V *= lam_over_sinh(lam);
          if (xn2 >= 1e-24) {
            const double pr = es.eigenvectors().col(i).dot(x);
            Wxx += pr * pr * lam_over_tanh(lam);
          }
        }
      }
      V = std::sqrt(std::max(V, 0.0));
      double dot = 0.0;
      for (int h = 0; h < md; ++h) dot += u[h] * z[h];
      double g = V * std::cos(dot / t);
      if (xn2 >= 1e-24) g *= std::exp(-Wxx / (4.0 * t));
      return g;
    };
    std::vector<double> lo(md, -R), hi(md, R);
    QuadOptions o;
    o.rel_tol = rel_tol * 0.5;
    auto r = integrate_tensor(eval, lo, hi, o);
    double est = r.est_error + std::exp(-rate * R) * std::pow(R + 2.0, md) * 8.0 +
                 1.1e-16 * std::pow(2.0 * R, md);
    if (!r.converged)
      throw KernelError("gaveau_kernel: tensor quadrature did not converge (value " +
                        num(r.value) + ", est " + num(est) + ")");
    if (!(r.value > 0) || est > 0.5 * r.value)
      throw KernelError("gaveau_kernel: tensor quadrature failed (value " + num(r.value) +
                        ", est " + num(est) + ")");
    logI = std::log(r.value);
    est_rel = est / r.value;
  } else {
    throw std::invalid_argument("gaveau_kernel: vertical dimension above 3 unsupported");
  }

  KernelSample s;
  s.t = t;
  s.x = Eigen::VectorXd::Zero(m.n);
  s.y = q;
  s.log_value = logpref + logI;
  s.value = std::exp(s.log_value);
  s.est_error = s.value * est_rel;
  s.method = "gaveau_integral";
  return s;
}

double heisenberg_kernel(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double t,
                         double rel_tol) {
  static const Model& hm = model_by_name("heisenberg");
  // left translation: p_t(a, b) = p_t(0, a^{-1} b)
  Eigen::VectorXd d(3);
  d << b[0] - a[0], b[1] - a[1], b[2] - a[2] + 0.5 * (a[1] * b[0] - a[0] * b[1]);
  return gaveau_kernel(hm, d, t, rel_tol).value;
}

double heisenberg_vertical_closed_log(double z, double t) {
  if (t <= 0) throw std::invalid_argument("heisenberg_vertical_closed: t must be positive");
  const double u = std::abs(M_PI * z / t);
  // log(1 + cosh u) = u - log 2 + 2 log1p(e^{-u})
  return -2.0 * std::log(t) - 3.0 * std::log(2.0) -
         (u - std::log(2.0) + 2.0 * std::log1p(std::exp(-u)));
}

double heisenberg_vertical_closed(double z, double t) {
  return std::exp(heisenberg_vertical_closed_log(z, t));
}

double free36_vertical_closed_log(double t) {
  if (t <= 0) throw std::invalid_argument("free36_vertical_closed: t must be positive");
  return 4.0 * log_sinh(M_PI / (2.0 * t)) - 3.0 * log_sinh(M_PI / t) - std::log(32.0) -
         0.5 * std::log(M_PI) - 3.5 * std::log(t);
}

double free36_vertical_closed(double t) { return std::exp(free36_vertical_closed_log(t)); }

KernelSample free36_vertical_radial(double t, double rel_tol) {
  if (t <= 0) throw std::invalid_argument("free36_vertical_radial: t must be positive");
  const double rho = 1.0 / t;
  // I = int_0^inf tau^2 sin(rho tau)/sinh(tau) dtau; for rho away from zero
  // the same contour shift as the vertical kernel kills the e^{-pi rho}
  // cancellation (integrand amplitude w^2/sinh w, odd parity: take Im).
  double I, est;
  const double sigma = M_PI - std::min(1.0, 1.0 / rho);
  if (sigma > 0.3) {
    auto f = [&](double tau) {
      const std::complex<double> w(tau, sigma);
      const std::complex<double> g = w * w / std::sinh(w);
      return g.imag() * std::cos(rho * tau) + g.real() * std::sin(rho * tau);  // Im[g e^{i rho tau}]
    };
    auto r = integrate_to_decay(f, 24.0 / std::max(rho, 1.0), 1.0, rel_tol * 0.5);
    r.est += 1.1e-16 * r.fmax * r.stop;
    if (!(r.value > 0) || r.est > 0.5 * r.value)
      throw KernelError("free36_vertical_radial: shifted quadrature failed (value " +
                        num(r.value) + ", est " + num(r.est) + ")");
    const double damp = std::exp(-rho * sigma);
    I = damp * r.value;
    est = damp * r.est;
  } else {
    auto f = [&](double tau) {
      if (tau < 1e-8) return rho * tau * tau;
      return tau * tau * std::sin(rho * tau) / std::sinh(tau);
    };
    auto r = integrate_to_decay(f, 2.0, 1.0, rel_tol * 0.5);
    r.est += 1.1e-16 * r.fmax * r.stop;
    if (!(r.value > 0) || r.est > 0.5 * r.value)
      throw KernelError("free36_vertical_radial: quadrature failed (value " + num(r.value) +
                        ", est " + num(r.est) + ")");
    I = r.value;
    est = r.est;
  }
  const double logp =
      std::log(8.0 * M_PI) - 4.5 * std::log(4.0 * M_PI * t) + std::log(I) - std::log(rho);
  KernelSample s;
  s.t = t;
  s.x = Eigen::VectorXd::Zero(6);
  s.y = Eigen::VectorXd::Zero(6);
  s.y[5] = 1.0;
  s.log_value = logp;
  s.value = std::exp(logp);
  s.est_error = s.value * (est / I);
  s.method = "radial_reduction";
  return s;
}

KernelSample grushin_kernel(const Eigen::Vector2d& q, const Eigen::Vector2d& qp, double t,
                            double rel_tol) {
  if (t <= 0) throw std::invalid_argument("grushin_kernel: t must be positive");
  using LD = long double;
  const LD X = q[0], Xp = qp[0];
  const double om = std::abs(q[1] - qp[1]) / t;
  if (om > 1e4)
    throw KernelError(
        "grushin_kernel: oscillation frequency |y-y'|/t = " + num(om) +
        " exceeds 1e4; achievable relative tolerance is roughly " + num(1.1e-19 * om * om));
  const LD A = X * Xp / t;
  const LD Bc = (X * X + Xp * Xp) / (2.0L * t);
  // tau/sinh(2 tau) and tau/tanh(2 tau), even, series near zero
  auto s_ = [](LD u) {
    u = std::abs(u);
    if (u < 1e-8L) return 0.5L - u * u / 3.0L;
    return u / sinhl(2.0L * u);
  };
  auto c_ = [](LD u) {
    u = std::abs(u);
    if (u < 1e-8L) return 0.5L + u * u * 2.0L / 3.0L;
    return u / tanhl(2.0L * u);
  };
  auto E = [&](LD u) { return A * s_(u) - Bc * c_(u); };
  // envelope maximum of the exponent (factored out so the summation works on
  // O(1) numbers regardless of how small p is)
  LD M = E(0), uM = 0;
  for (int i = 1; i <= 3000; ++i) {
    const LD u = i * (6.0L / 3000.0L);
    const LD v = E(u);
    if (v > M) {
      M = v;
      uM = u;
    }
  }
  for (LD h = 6.0L / 3000.0L; h > 1e-9L; h *= 0.25L) {  // local refine
    for (int sgn = -1; sgn <= 1; sgn += 2) {
      const LD u = uM + sgn * h;
      if (u >= 0 && E(u) > M) {
        M = E(u);
        uM = u;
      }
    }
  }
  auto logamp = [&](LD u) {
    const LD s = s_(u);
    return 0.5L * logl(s > 0 ? s : 1e-300L) + E(u) - M;
  };
  auto f = [&](LD u) { return sqrtl(s_(u)) * expl(E(u) - M) * cosl(om * u); };
  LD T = 1.0L;
  while (T < 2e4L && logamp(T) > -48.0L) T *= 1.5L;

  LD S = 0, estS = 0, sumabs = 0;
  long evals = 0;
  if (om * static_cast<double>(T) < 6.0) {
    QuadOptions o;
    o.rel_tol = 1e-15;
    o.max_depth = 40;
    auto r = integrate(f, 0.0L, T, o);
    S = r.value;
    estS = r.est_error;
    evals = r.evals;
    sumabs = std::abs(r.value);
  } else {
    // panels between consecutive zeros of the cosine, summed compensated,
    // with the epsilon table as an alternating-tail refinement
    CompensatedSum<LD> tot;
    EpsilonTable<LD> eps;
    LD a = 0, panel_err = 0, peak = 0, tail = std::numeric_limits<LD>::infinity();
    const LD step = static_cast<LD>(M_PI) / om;
    int k = 0;
    while (a < T && k < 300000) {
      const LD b = std::min(k == 0 ? step * 0.5L : a + step, T);
      QuadOptions o;
      o.rel_tol = 1e-14;
      o.abs_tol = static_cast<double>(peak) * 1e-18;
      o.max_depth = 28;
      auto r = integrate(f, a, b, o);
      evals += r.evals;
      panel_err += r.est_error;
      tot.add(r.value);
      eps.add(tot.value());
      peak = std::max(peak, static_cast<LD>(std::abs(r.value)));
      sumabs += std::abs(r.value);
      a = b;
      ++k;
      if (k >= 4) {
        tail = expl(logamp(a)) * 1.5L;  // decay rate >= ~1 past the head
        if (tail <= rel_tol * 0.05L * std::abs(tot.value())) break;
      }
    }
    S = tot.value();
    estS = panel_err + (std::isfinite(static_cast<double>(tail)) ? tail : 0.0L);
    // alternating-series acceleration, adopted when it claims better
    const LD be = eps.best(), st = eps.stability();
    if (eps.count() >= 8 && std::isfinite(static_cast<double>(be)) &&
        std::isfinite(static_cast<double>(st)) && st * 2.0L < estS) {
      S = be;
      estS = panel_err + 2.0L * st;
    }
  }
  estS += 3.3e-19L * sumabs;  // long-double roundoff floor of the summation
  if (!(S > 0) || estS >= S)
    throw KernelError("grushin_kernel: cancellation exhausted long-double precision (sum " +
                      num(static_cast<double>(S)) + ", est " + num(static_cast<double>(estS)) +
                      ")");
  const LD logp = -1.5L * logl(2.0L * static_cast<LD>(M_PI) * t) + M + logl(2.0L * S);
  KernelSample out;
  out.t = t;
  out.x = q;
  out.y = qp;
  out.log_value = static_cast<double>(logp);
  out.value = std::exp(out.log_value);
  out.est_error = out.value * static_cast<double>(estS / S);
  out.method = "mehler_integral";
  return out;
}

double semigroup_glue(const PointKernel& kernel, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y, double t,
                      const std::vector<std::array<double, 2>>& box, double rel_tol) {
  const int n = static_cast<int>(box.size());
  if (n < 1 || n > 3) throw std::invalid_argument("semigroup_glue: box dimension must be 1..3");
  if (x.size() != n || y.size() != n)
    throw std::invalid_argument("semigroup_glue: endpoint dimension mismatch");
  if (t <= 0) throw std::invalid_argument("semigroup_glue: t must be positive");
  auto val = [&](const Eigen::VectorXd& zp) {
    return kernel(x, zp, 0.5 * t) * kernel(zp, y, 0.5 * t);
  };

  // truncation audit: the integrand on the box faces must already be
  // negligible against the interior maximum
  double imax = 0;
  {
    const int G = 7;
    std::array<int, 3> idx{0, 0, 0};
    const int total = static_cast<int>(std::pow(G, n));
    for (int flat = 0; flat < total; ++flat) {
      int rem = flat;
      Eigen::VectorXd zp(n);
      for (int d = 0; d < n; ++d) {
        idx[d] = rem % G;
        rem /= G;
        const double frac = 0.15 + 0.7 * idx[d] / (G - 1);
        zp[d] = box[d][0] + (box[d][1] - box[d][0]) * frac;
      }
      imax = std::max(imax, val(zp));
    }
  }
  if (!(imax > 0))
    throw KernelError("semigroup_glue: integrand vanishes on the interior scan; box misplaced");
  double fmax = 0;
  int worst_axis = 0;
  {
    const int G = 5;
    for (int axis = 0; axis < n; ++axis) {
      for (int side = 0; side < 2; ++side) {
        const int total = static_cast<int>(std::pow(G, n - 1));
        for (int flat = 0; flat < total; ++flat) {
          int rem = flat;
          Eigen::VectorXd zp(n);
          for (int d = 0; d < n; ++d) {
            if (d == axis) {
              zp[d] = box[d][side];
              continue;
            }
            const int i = rem % G;
            rem /= G;
            zp[d] = box[d][0] + (box[d][1] - box[d][0]) * i / (G - 1);
          }
          const double v = val(zp);
          if (v > fmax) {
            fmax = v;
            worst_axis = axis;
          }
        }
      }
    }
  }
  if (fmax > rel_tol * imax) {
    const double decay = std::log(imax / std::max(fmax, 1e-300));
    const double need = std::log(fmax / (rel_tol * imax));
    const double half = 0.5 * (box[worst_axis][1] - box[worst_axis][0]);
    const double suggest = half * (1.0 + (decay > 0.5 ? need / decay : 1.0));
    throw KernelError("semigroup_glue: boundary integrand is " + num(fmax / imax) +
                      " of the interior max (tolerance " + num(rel_tol) +
                      "); enlarge axis " + std::to_string(worst_axis) +
                      " to half-width about " + num(suggest));
  }

  std::vector<double> lo(n), hi(n);
  for (int d = 0; d < n; ++d) {
    lo[d] = box[d][0];
    hi[d] = box[d][1];
  }
  auto f = [&](const double* u) {
    Eigen::VectorXd zp(n);
    for (int d = 0; d < n; ++d) zp[d] = u[d];
    return val(zp);
  };
  QuadOptions o;
  o.rel_tol = rel_tol;
  auto r = integrate_tensor(f, lo, hi, o);
  if (!r.converged)
    throw KernelError("semigroup_glue: quadrature did not converge (value " + num(r.value) +
                      ", est " + num(r.est_error) + ")");
  return r.value;
}

std::vector<KernelSample> heisenberg_vertical_samples(double z, const std::vector<double>& ts) {
  for (double t : ts)
    if (t <= 0) throw std::invalid_argument("heisenberg_vertical_samples: t must be positive");
  std::vector<KernelSample> out(ts.size());
  parallel_for(static_cast<int>(ts.size()), [&](int i) {
    KernelSample s;
    s.t = ts[i];
    s.x = Eigen::VectorXd::Zero(3);
    s.y = Eigen::VectorXd::Zero(3);
    s.y[2] = z;
    s.log_value = heisenberg_vertical_closed_log(z, ts[i]);
    s.value = std::exp(s.log_value);
    s.est_error = s.value * 1e-15;
    s.method = "closed_form";
    out[i] = s;
  });
  return out;
}

std::vector<KernelSample> free36_vertical_samples(const std::vector<double>& ts) {
  for (double t : ts)
    if (t <= 0) throw std::invalid_argument("free36_vertical_samples: t must be positive");
  std::vector<KernelSample> out(ts.size());
  parallel_for(static_cast<int>(ts.size()), [&](int i) {
    KernelSample s;
    s.t = ts[i];
    s.x = Eigen::VectorXd::Zero(6);
    s.y = Eigen::VectorXd::Zero(6);
    s.y[5] = 1.0;
    s.log_value = free36_vertical_closed_log(ts[i]);
    s.value = std::exp(s.log_value);
    s.est_error = s.value * 1e-15;
    s.method = "closed_form";
    out[i] = s;
  });
  return out;
}

std::vector<KernelSample> grushin_samples(const Eigen::Vector2d& q, const Eigen::Vector2d& qp,
                                          const std::vector<double>& ts, double rel_tol) {
  std::vector<KernelSample> out;
  out.reserve(ts.size());
  for (double t : ts) out.push_back(grushin_kernel(q, qp, t, rel_tol));
  return out;
}

std::string samples_csv(const std::vector<KernelSample>& samples) {
  std::string out = "t,value,log_value,method,est_error\n";
  for (const auto& s : samples)
    out += fmt17(s.t) + "," + fmt17(s.value) + "," + fmt17(s.log_value) + "," + s.method + "," +
           fmt17(s.est_error) + "\n";
  return out;
}

}  // namespace subheat
