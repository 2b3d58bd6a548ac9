#include "subheat/flow.hpp"

#include <cmath>
#include <stdexcept>

namespace subheat {

namespace {

// Dormand–Prince RK5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights (Hairer/Norsett/Wanner DOPRI5 continuous extension).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// Hamiltonian vector field with optional exact variational equations.
// All workspace is preallocated; operator() performs no heap allocation.
struct Rhs {
  const Model& m;
  bool variational;
  int n, k, dim;
  Eigen::MatrixXd C;                  // frame constant parts, n x k
  Eigen::MatrixXd X, G;               // frame values / A_i^T p columns, n x k
  Eigen::VectorXd u;                  // controls
  Eigen::MatrixXd Dqq, Dqp, Dpq;      // variational blocks
  double last_H = 0;                  // H at the most recent evaluation point

  Rhs(const Model& model, bool var)
      : m(model),
        variational(var),
        n(model.n),
        k(model.k),
        dim(var ? 2 * model.n + 2 * model.n * model.n : 2 * model.n),
        C(n, k),
        X(n, k),
        G(n, k),
        u(k),
        Dqq(n, n),
        Dqp(n, n),
        Dpq(n, n) {
    for (int i = 0; i < k; ++i) C.col(i) = model.frame_c[i];
  }

  void operator()(const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const auto q = y.head(n);
    const auto p = y.segment(n, n);
    for (int i = 0; i < k; ++i) {
      X.col(i).noalias() = C.col(i) + m.frame_A[i] * q;
      G.col(i).noalias() = m.frame_A[i].transpose() * p;
    }
    u.noalias() = X.transpose() * p;
    dy.head(n).noalias() = X * u;
    dy.segment(n, n).noalias() = -G * u;
    last_H = 0.5 * u.squaredNorm();
    if (!variational) return;

    Dqq.noalias() = X * G.transpose();
    for (int i = 0; i < k; ++i) Dqq.noalias() += u[i] * m.frame_A[i];
    Dqp.noalias() = X * X.transpose();
    Dpq.noalias() = -G * G.transpose();
    Eigen::Map<const Eigen::MatrixXd> J(y.data() + 2 * n, 2 * n, n);
    Eigen::Map<Eigen::MatrixXd> dJ(dy.data() + 2 * n, 2 * n, n);
    dJ.topRows(n).noalias() = Dqq * J.topRows(n);
    dJ.topRows(n).noalias() += Dqp * J.bottomRows(n);
    dJ.bottomRows(n).noalias() = Dpq * J.topRows(n);
    dJ.bottomRows(n).noalias() -= Dqq.transpose() * J.bottomRows(n);
  }
};

}  // namespace

Eigen::VectorXd Trajectory::state_at(double t) const {
  if (steps.empty()) throw std::logic_error("empty trajectory");
  double tc = std::min(std::max(t, steps.front().t0), steps.front().t0 + T);
  size_t lo = 0, hi = steps.size() - 1;
  while (lo < hi) {
    size_t mid = (lo + hi) / 2;
    if (steps[mid].t0 + steps[mid].h < tc)
      lo = mid + 1;
    else
      hi = mid;
  }
  return steps[lo].eval(tc);
}

Eigen::MatrixXd Trajectory::jacobian_q_at(double t) const {
  if (!variational) throw std::logic_error("trajectory lacks variational data");
  Eigen::VectorXd s = state_at(t);
  return Eigen::Map<const Eigen::MatrixXd>(s.data() + 2 * n, 2 * n, n).topRows(n);
}

Trajectory integrate_hamilton(const Model& m, const Eigen::VectorXd& q0,
                              const Eigen::VectorXd& p0, double T,
                              const FlowOptions& opts, bool variational) {
  Rhs rhs(m, variational);
  const int n = m.n, dim = rhs.dim;
  Eigen::VectorXd y(dim);
  y.head(n) = q0;
  y.segment(n, n) = p0;
  if (variational) {
    Eigen::Map<Eigen::MatrixXd> J(y.data() + 2 * n, 2 * n, n);
    J.setZero();
    J.bottomRows(n) = Eigen::MatrixXd::Identity(n, n);  // d(q,p)/dp0 at t = 0
  }

  Trajectory traj;
  traj.T = T;
  traj.n = n;
  traj.variational = variational;
  if (T == 0) {
    DenseStep s;
    s.t0 = 0;
    s.h = 1;
    s.r1 = y;
    s.r2 = s.r3 = s.r4 = s.r5 = Eigen::VectorXd::Zero(dim);
    traj.steps.push_back(std::move(s));
    return traj;
  }

  const double H0 = m.hamiltonian(q0, p0);
  if (T < 0) throw std::invalid_argument("negative integration time");

  double t = 0;
  const bool fixed = opts.fixed_steps > 0;
  double h = fixed ? T / opts.fixed_steps : std::min(1e-2 * std::max(T, 1e-6), T);
  Eigen::VectorXd k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), ytmp(dim),
      ynew(dim), yerr(dim);
  rhs(y, k1);
  int steps_taken = 0;
  int fixed_done = 0;
  while (fixed ? fixed_done < opts.fixed_steps : t < T) {
    if (++steps_taken > opts.max_steps)
      throw std::runtime_error("flow: step limit exceeded");
    // Guard before the end-of-interval clamp: a clamped final step may be
    // arbitrarily small without indicating stiffness.
    if (!fixed && h < 1e-15 * std::max(1.0, T))
      throw std::runtime_error("flow: step size underflow");
    // Fixed mode targets the exact grid point i*T/N so rounding never adds a
    // degenerate extra step.
    if (fixed) h = T * (fixed_done + 1) / opts.fixed_steps - t;
    if (t + h > T) h = T - t;

    ytmp = y + h * (a21 * k1);
    rhs(ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(ytmp, k6);
    ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs(ynew, k7);
    if (!fixed) yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0;
    if (!fixed) {
      for (int i = 0; i < dim; ++i) {
        double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        double r = yerr[i] / sc;
        err += r * r;
      }
      err = std::sqrt(err / dim);
    }

    if (err <= 1.0) {
      if (opts.store_dense) {
        DenseStep s;
        s.t0 = t;
        s.h = h;
        Eigen::VectorXd ydiff = ynew - y;
        Eigen::VectorXd bspl = h * k1 - ydiff;
        s.r1 = y;
        s.r2 = ydiff;
        s.r3 = bspl;
        s.r4 = ydiff - h * k7 - bspl;
        s.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        traj.steps.push_back(std::move(s));
      }
      t += h;
      if (fixed && ++fixed_done == opts.fixed_steps) t = T;
      y.swap(ynew);
      k1.swap(k7);  // FSAL: rhs.last_H refers to the newly accepted state
      traj.energy_drift = std::max(traj.energy_drift, std::abs(rhs.last_H - H0));
      (void)c2;
      (void)c3;
      (void)c4;
      (void)c5;
    }
    if (!fixed) {
      double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h *= std::min(5.0, std::max(0.2, fac));
    }
  }
  traj.steps_taken = steps_taken;
  if (!opts.store_dense) {
    DenseStep s;
    s.t0 = T;
    s.h = 1;
    s.r1 = y;
    s.r2 = s.r3 = s.r4 = s.r5 = Eigen::VectorXd::Zero(dim);
    traj.steps.push_back(std::move(s));
  }
  return traj;
}

Eigen::VectorXd exp_map(const Model& m, const Eigen::VectorXd& x, const Eigen::VectorXd& p0,
                        double t, const FlowOptions& opts) {
  if (t == 0) return x;
  FlowOptions lean = opts;
  lean.store_dense = false;
  return integrate_hamilton(m, x, p0, t, lean, false).q_at(t);
}

Eigen::MatrixXd exp_jacobian(const Model& m, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& p0, double t, const FlowOptions& opts) {
  FlowOptions lean = opts;
  lean.store_dense = false;
  Trajectory tr = integrate_hamilton(m, x, p0, t, lean, true);
  return tr.jacobian_q_at(t);
}

int rank_deficiency(const Eigen::MatrixXd& J, double rel_threshold) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  double smax = sv[0];
  int def = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] < rel_threshold * std::max(smax, 1e-300)) ++def;
  return def;
}

std::vector<ConjugateEvent> conjugate_scan(const Model& m, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& p0, double T,
                                           const FlowOptions& opts) {
  FlowOptions dense_opts = opts;
  dense_opts.store_dense = true;
  Trajectory tr = integrate_hamilton(m, x, p0, T, dense_opts, true);
  auto det_at = [&](double t) {
    Eigen::MatrixXd Jq = tr.jacobian_q_at(t);
    return Jq.determinant();
  };

  // Fine scan: several samples per accepted step.
  std::vector<double> ts, ds;
  for (const auto& s : tr.steps) {
    int sub = 8;
    for (int i = 0; i < sub; ++i) {
      double t = s.t0 + s.h * i / sub;
      if (t <= 1e-12 * std::max(1.0, T)) continue;
      ts.push_back(t);
      ds.push_back(det_at(t));
    }
  }
  ts.push_back(T);
  ds.push_back(det_at(T));

  double gmax = 0;
  for (double d : ds) gmax = std::max(gmax, std::abs(d));
  if (gmax == 0) return {};

  // det ~ c t^n near t = 0, so integration noise can flip its sign where it
  // is far below scale; only crossings with at least one well-resolved side
  // count as roots.
  std::vector<ConjugateEvent> events;
  const double t_res = 1e-8 * std::max(1.0, T);
  const double noise_floor = 1e-9 * gmax;
  for (size_t i = 0; i + 1 < ts.size(); ++i) {
    if (ds[i] * ds[i + 1] < 0 && std::max(std::abs(ds[i]), std::abs(ds[i + 1])) > noise_floor) {
      double lo = ts[i], hi = ts[i + 1], flo = ds[i];
      while (hi - lo > t_res) {
        double mid = 0.5 * (lo + hi), fm = det_at(mid);
        if (flo * fm <= 0)
          hi = mid;
        else {
          lo = mid;
          flo = fm;
        }
      }
      events.push_back({0.5 * (lo + hi), true});
    } else if (i > 0) {
      // Grazing dip: local minimum of |det| below threshold, no sign change.
      if (std::abs(ds[i]) < 1e-10 * gmax && std::abs(ds[i]) <= std::abs(ds[i - 1]) &&
          std::abs(ds[i]) <= std::abs(ds[i + 1])) {
        if (events.empty() || std::abs(events.back().t - ts[i]) > 100 * t_res)
          events.push_back({ts[i], false});
      }
    }
  }
  return events;
}

double first_conjugate_time(const Model& m, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& p0, double T_max, const FlowOptions& opts) {
  auto events = conjugate_scan(m, x, p0, T_max, opts);
  for (const auto& ev : events)
    if (ev.sign_change) return ev.t;
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace subheat
