// flow.hpp — normal geodesic flow: Dormand–Prince RK5(4) with dense output,
// exact variational equations, exponential map, and conjugate-point scans.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "subheat/model.hpp"

namespace subheat {

struct FlowOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_steps = 200000;
  // When false, only the final state is retained (endpoint queries stay valid;
  // interior dense output is unavailable). Saves the per-step storage cost.
  bool store_dense = true;
  // When positive, take exactly this many equal-length steps with no error
  // control. The endpoint then depends smoothly on (q0, p0, T), so finite
  // differences of shooting solutions cancel the discretization error
  // (internal differentiation); used by stencil-based derivative code.
  int fixed_steps = 0;
};

// One accepted step with the quartic continuous-extension coefficients.
struct DenseStep {
  double t0 = 0, h = 0;
  Eigen::VectorXd r1, r2, r3, r4, r5;
  Eigen::VectorXd eval(double t) const {
    double th = (t - t0) / h, th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
};

// Dense-output trajectory of the (optionally variational) Hamiltonian flow.
// State layout: [q (n), p (n)] then, if variational, d(q,p)/dp0 column-major
// (2n x n entries).
class Trajectory {
 public:
  double T = 0;
  int n = 0;
  bool variational = false;
  double energy_drift = 0;  // max |H(t) - H(0)| over accepted steps
  int steps_taken = 0;      // accepted integration steps
  std::vector<DenseStep> steps;

  Eigen::VectorXd state_at(double t) const;
  Eigen::VectorXd q_at(double t) const { return state_at(t).head(n); }
  Eigen::VectorXd p_at(double t) const { return state_at(t).segment(n, n); }
  // dq(t)/dp0 block of the variational solution.
  Eigen::MatrixXd jacobian_q_at(double t) const;
};

Trajectory integrate_hamilton(const Model& m, const Eigen::VectorXd& q0,
                              const Eigen::VectorXd& p0, double T,
                              const FlowOptions& opts = {}, bool variational = false);

// Endpoint of the normal geodesic from x with initial covector p0 at time t.
Eigen::VectorXd exp_map(const Model& m, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& p0, double t, const FlowOptions& opts = {});

// n x n Jacobian dq(t)/dp0 of the exponential map at fixed t.
Eigen::MatrixXd exp_jacobian(const Model& m, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& p0, double t,
                             const FlowOptions& opts = {});

// Number of singular values below rel_threshold * sigma_max.
int rank_deficiency(const Eigen::MatrixXd& J, double rel_threshold = 1e-6);

struct ConjugateEvent {
  double t = 0;
  bool sign_change = true;  // false: |det| grazed zero without switching sign
};

// Zeros of det dq(t)/dp0 on (0, T]: sign changes refined by bisection on the
// dense output to 1e-8 * max(1, T); dips below 1e-10 * running max without a
// sign change are reported as flagged (grazing) roots.
std::vector<ConjugateEvent> conjugate_scan(const Model& m, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& p0, double T,
                                           const FlowOptions& opts = {});

// First sign-change conjugate time in (0, T_max], or NaN when none found.
double first_conjugate_time(const Model& m, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& p0, double T_max,
                            const FlowOptions& opts = {});

}  // namespace subheat
