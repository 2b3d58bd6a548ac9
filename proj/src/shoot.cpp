// Multistart shooting: damped Newton on (chart angles, arrival time) with the
// exact variational Jacobian, solution clustering, and cut-time bisection.
// Two phases keep the cost down: a loose-tolerance search over the whole start
// grid, then full-tolerance polish of the surviving cluster representatives.
#include "subheat/shoot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "subheat/util.hpp"

namespace subheat {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0) r += kTwoPi;
  return r;
}

// Chebyshev gap in (theta, T) respecting periodic chart dimensions.
double chart_gap(const Model& m, const Eigen::VectorXd& a, const Eigen::VectorXd& b, double Ta,
                 double Tb) {
  double g = std::abs(Ta - Tb);
  for (int i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    if (m.chart_dims[i].periodic) {
      d = std::fmod(d, kTwoPi);
      if (d > M_PI) d -= kTwoPi;
      if (d < -M_PI) d += kTwoPi;
    }
    g = std::max(g, std::abs(d));
  }
  return g;
}

void wrap_theta(const Model& m, Eigen::VectorXd& th) {
  for (int i = 0; i < th.size(); ++i)
    if (m.chart_dims[i].periodic) th[i] = wrap_angle(th[i]);
}

// dp0/dtheta by central differences (the chart itself is cheap and smooth).
Eigen::MatrixXd chart_jacobian(const Model& m, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& th) {
  const int nd = static_cast<int>(th.size());
  Eigen::MatrixXd J(m.n, nd);
  const double h = 1e-6;
  Eigen::VectorXd tp = th, tm = th;
  for (int i = 0; i < nd; ++i) {
    tp[i] = th[i] + h;
    tm[i] = th[i] - h;
    J.col(i) = (m.covector_chart(x, tp) - m.covector_chart(x, tm)) / (2 * h);
    tp[i] = th[i];
    tm[i] = th[i];
  }
  return J;
}

Eigen::VectorXd hamiltonian_velocity(const Model& m, const Eigen::VectorXd& q,
                                     const Eigen::VectorXd& p) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m.n);
  Eigen::VectorXd u = m.controls(q, p);
  for (int i = 0; i < m.k; ++i) v += u[i] * m.frame_field(i, q);
  return v;
}

// Generous upper bound on the arrival time of any solution worth keeping:
// horizontal displacement contributes linearly, vertical displacement via a
// square root (two-step scaling d ~ sqrt(|z|)).
double arrival_cap(const Model& m, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  double r = (y - x).norm();
  if (m.z_dim > 0) {
    double dx = (y.head(m.x_dim) - x.head(m.x_dim)).norm();
    double dz = (y.tail(m.z_dim) - x.tail(m.z_dim)).norm();
    return 8 * (dx + std::sqrt(dz) + r) + 1;
  }
  return 8 * (r + std::sqrt(r)) + 1;
}

struct StartPoint {
  Eigen::VectorXd theta;
  double T;
};

// Start grid: angles sampled uniformly (64 per periodic dimension by default),
// unbounded momentum dimensions on a kappa-scaled heuristic grid with
// kappa = 2*pi / |x - y|, and a short T-grid spanning [0.5, 3]*|x - y|.
std::vector<StartPoint> build_starts(const Model& m, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& y, const ShootOptions& opts,
                                     int densify) {
  const double r = std::max((y - x).norm(), 1e-3);
  const double kappa = kTwoPi / r;
  const std::vector<double> tgrid{0.5 * r, 1.25 * r, 3.0 * r};

  std::vector<Eigen::VectorXd> thetas;
  if (m.name == "free36") {
    // Direction part: quasi-random sphere points through the stereographic
    // chart; momentum part: grid along the vertical displacement direction.
    int nsph = opts.n_start * densify * densify;
    std::vector<Eigen::Vector3d> dirs;
    for (auto& u : fibonacci_sphere(nsph)) {
      Eigen::Vector3d v(u[0], u[1], u[2]);
      if (v[2] < -0.995) v = Eigen::Vector3d(v[0], v[1], -0.995).normalized();
      dirs.emplace_back(v);
    }
    Eigen::Vector3d dz = y.tail(3) - x.tail(3);
    std::vector<Eigen::Vector3d> ws;
    ws.emplace_back(Eigen::Vector3d::Zero());
    if (dz.norm() > 1e-9) {
      Eigen::Vector3d zh = dz.normalized();
      for (double s : {0.5, 1.0, 2.0, 4.0}) {
        ws.emplace_back(s * kappa * zh);
        ws.emplace_back(-s * kappa * zh);
      }
    } else {
      for (int h = 0; h < 3; ++h) {
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e[h] = kappa;
        ws.emplace_back(e);
        ws.emplace_back(-e);
      }
    }
    for (auto& u : dirs)
      for (auto& w : ws) {
        Eigen::VectorXd th(5);
        th << u[0] / (1 + u[2]), u[1] / (1 + u[2]), w[0], w[1], w[2];
        thetas.push_back(th);
      }
  } else {
    // Cartesian product of per-dimension 1D grids.
    std::vector<std::vector<double>> grids;
    for (const auto& cd : m.chart_dims) {
      std::vector<double> g;
      if (cd.periodic) {
        int na = opts.n_start * densify;
        for (int i = 0; i < na; ++i) g.push_back(kTwoPi * i / na);
      } else {
        // Minimizers satisfy |w| T <= 2*pi (first conjugate time), so the
        // grid tops out at twice the nominal kappa.
        g.push_back(0.0);
        for (double s : {0.25, 0.5, 1.0, 2.0}) {
          g.push_back(s * kappa * cd.scale);
          g.push_back(-s * kappa * cd.scale);
        }
      }
      grids.push_back(std::move(g));
    }
    std::vector<Eigen::VectorXd> acc{Eigen::VectorXd(0)};
    for (const auto& g : grids) {
      std::vector<Eigen::VectorXd> next;
      for (const auto& pre : acc)
        for (double v : g) {
          Eigen::VectorXd th(pre.size() + 1);
          th.head(pre.size()) = pre;
          th[pre.size()] = v;
          next.push_back(th);
        }
      acc.swap(next);
    }
    thetas.swap(acc);
  }

  std::vector<StartPoint> starts;
  starts.reserve(thetas.size() * tgrid.size());
  for (const auto& th : thetas)
    for (double T : tgrid) starts.push_back({th, T});
  return starts;
}

struct RefineOutcome {
  bool converged = false;
  bool absorbed = false;  // fell into an already-found cluster
  GeodesicSolution sol;
  double final_residual = std::numeric_limits<double>::infinity();
};

// Clusters already found by earlier starts; shared read-mostly between runs.
struct FoundSet {
  std::mutex mu;
  std::vector<std::pair<Eigen::VectorXd, double>> reps;  // (theta, T)
  bool near(const Model& m, const Eigen::VectorXd& th, double T, double radius) {
    std::lock_guard<std::mutex> lk(mu);
    for (auto& r : reps)
      if (chart_gap(m, th, r.first, T, r.second) <= radius) return true;
    return false;
  }
  void add(const Eigen::VectorXd& th, double T) {
    std::lock_guard<std::mutex> lk(mu);
    reps.emplace_back(th, T);
  }
};

RefineOutcome newton_refine(const Model& m, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            Eigen::VectorXd theta, double T, double tol,
                            const FlowOptions& flow, int max_iter, double T_cap,
                            FoundSet* found = nullptr, double absorb_radius = 0) {
  RefineOutcome out;
  const int nd = static_cast<int>(theta.size());
  const double far_scale = std::max((y - x).norm(), 1e-3);
  FlowOptions lean = flow;
  lean.store_dense = false;
  double lambda = 1e-3;

  auto endpoint = [&](const Eigen::VectorXd& th, double t, Eigen::VectorXd& q) -> bool {
    try {
      q = exp_map(m, x, m.covector_chart(x, th), t, lean);
      return q.allFinite();
    } catch (const std::exception&) {
      return false;
    }
  };

  for (int iter = 0; iter < max_iter; ++iter) {
    Trajectory traj;
    Eigen::VectorXd p0;
    try {
      p0 = m.covector_chart(x, theta);
      traj = integrate_hamilton(m, x, p0, T, lean, true);
    } catch (const std::exception&) {
      return out;
    }
    Eigen::VectorXd qT = traj.q_at(T);
    Eigen::VectorXd F = qT - y;
    double res = F.norm();
    if (!std::isfinite(res)) return out;
    if (res < out.final_residual) {
      // Keep the best iterate: at folds of the endpoint map (cut = conjugate
      // points) the residual floor is reached before the tolerance, and the
      // best iterate is still the right cluster representative.
      out.final_residual = res;
      Eigen::VectorXd tw = theta;
      wrap_theta(m, tw);
      out.sol.theta = std::move(tw);
      out.sol.p0 = p0;
      out.sol.T = T;
      out.sol.residual = res;
    }
    if (res <= tol) {
      out.converged = true;
      if (found) found->add(out.sol.theta, T);
      return out;
    }
    // Entering the capture radius of a solution another start already found:
    // stop early, the cluster representative is the same.
    if (found && iter > 0 && found->near(m, theta, T, absorb_radius)) {
      out.absorbed = true;
      return out;
    }
    // A basin that has not pulled close by now never will.
    if (iter >= 8 && res > 0.5 * far_scale) return out;

    Eigen::MatrixXd J(m.n, nd + 1);
    J.leftCols(nd) = traj.jacobian_q_at(T) * chart_jacobian(m, x, theta);
    J.col(nd) = hamiltonian_velocity(m, qT, traj.p_at(T));

    Eigen::MatrixXd A = J.transpose() * J;
    Eigen::VectorXd g = J.transpose() * F;
    const double scale = std::max(A.trace() / (nd + 1), 1e-300);

    bool accepted = false;
    for (int inner = 0; inner < 6 && !accepted; ++inner) {
      Eigen::MatrixXd M = A + lambda * scale * Eigen::MatrixXd::Identity(nd + 1, nd + 1);
      Eigen::VectorXd delta = M.ldlt().solve(-g);
      Eigen::VectorXd th_try = theta + delta.head(nd);
      double T_try = T + delta[nd];
      if (T_try < 0.05 * T) T_try = 0.05 * T;
      if (T_try > T_cap) {
        lambda *= 10;
        continue;
      }
      Eigen::VectorXd q_try;
      if (endpoint(th_try, T_try, q_try) && (q_try - y).norm() < res) {
        theta = th_try;
        T = T_try;
        lambda = std::max(lambda / 3, 1e-12);
        accepted = true;
      } else {
        lambda *= 10;
      }
    }
    if (!accepted) return out;
  }
  return out;
}

std::vector<GeodesicSolution> cluster_and_sort(const Model& m,
                                               std::vector<GeodesicSolution> sols,
                                               double radius) {
  // Lowest residual first so each cluster keeps its most converged member.
  std::stable_sort(sols.begin(), sols.end(),
                   [](const GeodesicSolution& a, const GeodesicSolution& b) {
                     return a.residual < b.residual;
                   });
  std::vector<GeodesicSolution> reps;
  for (auto& s : sols) {
    bool absorbed = false;
    for (auto& r : reps)
      if (chart_gap(m, s.theta, r.theta, s.T, r.T) <= radius) {
        absorbed = true;
        break;
      }
    if (!absorbed) reps.push_back(std::move(s));
  }
  std::stable_sort(reps.begin(), reps.end(),
                   [](const GeodesicSolution& a, const GeodesicSolution& b) {
                     if (a.T != b.T) return a.T < b.T;
                     for (int i = 0; i < a.theta.size(); ++i)
                       if (a.theta[i] != b.theta[i]) return a.theta[i] < b.theta[i];
                     return false;
                   });
  return reps;
}

DistanceResult distance_impl(const Model& m, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                             const ShootOptions& opts, int densify, bool polish) {
  DistanceResult out;
  if ((x - y).norm() < 1e-14) return out;

  const double T_cap = arrival_cap(m, x, y);
  auto starts = build_starts(m, x, y, opts, densify);

  // Search phase: loose flow tolerance, loose residual target; the polish
  // phase below restores full precision on the few surviving representatives.
  FlowOptions search_flow = opts.flow;
  search_flow.abs_tol = std::max(opts.flow.abs_tol, 1e-7);
  search_flow.rel_tol = std::max(opts.flow.rel_tol, 1e-7);
  const double search_tol = std::max(1e-5, opts.newton_tol * 100);
  const int search_iter = std::min(opts.newton_max_iter, 14);

  FoundSet found;
  std::vector<RefineOutcome> slots(starts.size());
  parallel_for(static_cast<int>(starts.size()), [&](int i) {
    slots[i] = newton_refine(m, x, y, starts[i].theta, starts[i].T, search_tol, search_flow,
                             search_iter, T_cap, &found, opts.cluster_radius);
  });

  out.best_residual = std::numeric_limits<double>::infinity();
  std::vector<GeodesicSolution> sols;
  for (auto& s : slots) {
    out.best_residual = std::min(out.best_residual, s.final_residual);
    if (s.converged) sols.push_back(std::move(s.sol));
  }
  if (sols.empty())
    throw ShootError("shooting failed: no start converged (best residual " +
                         fmt17(out.best_residual) + ")",
                     out.best_residual);

  std::vector<GeodesicSolution> reps = cluster_and_sort(m, std::move(sols), opts.cluster_radius);

  if (polish) {
    std::vector<GeodesicSolution> polished(reps.size());
    parallel_for(static_cast<int>(reps.size()), [&](int i) {
      RefineOutcome r = newton_refine(m, x, y, reps[i].theta, reps[i].T, opts.newton_tol,
                                      opts.flow, 40, T_cap);
      polished[i] = r.sol.residual < reps[i].residual ? r.sol : reps[i];
    });
    reps = cluster_and_sort(m, std::move(polished), opts.cluster_radius);
  }

  out.solutions = std::move(reps);
  out.d = out.solutions.front().T;
  for (auto& s : out.solutions) s.is_minimizing = s.T <= out.d + 1e-6;
  return out;
}

}  // namespace

DistanceResult distance(const Model& m, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        const ShootOptions& opts) {
  return distance_impl(m, x, y, opts, 1, true);
}

std::optional<GeodesicSolution> refine_single(const Model& m, const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& y,
                                              const Eigen::VectorXd& theta0, double T0,
                                              const ShootOptions& opts) {
  RefineOutcome r = newton_refine(m, x, y, theta0, T0, opts.newton_tol, opts.flow,
                                  opts.newton_max_iter, arrival_cap(m, x, y) + 2 * T0);
  if (!r.converged) return std::nullopt;
  r.sol.is_minimizing = true;  // caller's responsibility to know the regime
  return r.sol;
}

MidpointSet midpoints(const Model& m, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      const ShootOptions& opts) {
  MidpointSet out;
  DistanceResult base = distance_impl(m, x, y, opts, 1, true);
  out.d = base.d;
  if (base.solutions.empty()) return out;

  std::vector<const GeodesicSolution*> mins;
  for (const auto& s : base.solutions)
    if (s.is_minimizing) mins.push_back(&s);

  for (const GeodesicSolution* s : mins) {
    Eigen::VectorXd z = exp_map(m, x, s->p0, s->T / 2, opts.flow);
    bool dup = false;
    for (const auto& seen : out.points)
      if ((z - seen).norm() <= opts.cluster_radius) {
        dup = true;
        break;
      }
    if (!dup) {
      out.points.push_back(std::move(z));
      out.solutions.push_back(*s);
    }
  }

  // Continuum detection: densify the start grid (double the linear density in
  // every angular dimension); a family reveals itself by a growing cluster
  // count with shrinking nearest-neighbour gaps, or by gaps already below
  // 10x the cluster radius.
  if (mins.size() >= 3) {
    auto nn_gap = [&](const std::vector<const GeodesicSolution*>& v) {
      double worst = 0;
      for (size_t i = 0; i < v.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < v.size(); ++j)
          if (j != i)
            best = std::min(best, chart_gap(m, v[i]->theta, v[j]->theta, v[i]->T, v[j]->T));
        worst = std::max(worst, best);
      }
      return worst;
    };
    DistanceResult dense = distance_impl(m, x, y, opts, 2, true);
    std::vector<const GeodesicSolution*> dmins;
    for (const auto& s : dense.solutions)
      if (s.is_minimizing) dmins.push_back(&s);
    double ratio = static_cast<double>(dmins.size()) / static_cast<double>(mins.size());
    double g1 = nn_gap(mins), g2 = dmins.size() >= 2 ? nn_gap(dmins) : g1;
    bool continuum = (g1 <= 10 * opts.cluster_radius && ratio >= 1.4) ||
                     (ratio >= 1.4 && g2 <= 0.7 * g1 + 1e-12);
    if (continuum)
      out.dim_estimate =
          std::max(1, static_cast<int>(std::lround(std::log2(std::max(ratio, 1.0)))));
  }
  return out;
}

double cut_time(const Model& m, const Eigen::VectorXd& x, const Eigen::VectorXd& p0,
                double t_max, const ShootOptions& opts) {
  auto minimizing_at = [&](double t) -> bool {
    Eigen::VectorXd y = exp_map(m, x, p0, t, opts.flow);
    try {
      DistanceResult r = distance_impl(m, x, y, opts, 1, true);
      // When the cut point is also conjugate the shortcut deficit past the cut
      // grows only quadratically (measured t - d ~ 0.2 dt^2), so the band here
      // sets the detection shift ~ sqrt(band / 0.2).  Keep it well above the
      // ~1e-9 noise of the polished distance but small enough for sub-1e-3
      // localization.
      return t <= r.d + 3e-8;
    } catch (const ShootError& e) {
      throw ShootError("cut_time probe at t = " + fmt17(t) + " failed: " + e.what(),
                       e.best_residual);
    }
  };
  if (minimizing_at(t_max)) return std::numeric_limits<double>::quiet_NaN();
  double lo = 0, hi = t_max;
  while (hi - lo > 2e-5 * t_max) {
    double mid = 0.5 * (lo + hi);
    if (minimizing_at(mid))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace subheat
