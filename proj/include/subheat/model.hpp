// model.hpp — sub-Riemannian model spaces given by affine orthonormal frames.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace subheat {

// Description of one chart coordinate for the unit-energy covector set
// Lambda_x = {p : H(x,p) = 1/2} (an (n-1)-manifold).
struct ChartDim {
  bool periodic = false;  // periodic coords live on [0, 2*pi)
  double scale = 1.0;     // step heuristic for non-periodic coords
};

// A model space on R^n with orthonormal frame fields X_i(q) = c_i + A_i q.
// Two-step group structure (Heisenberg, free (3,6)) is captured by the
// bracket matrices B_h: X_i = d/dx_i - (1/2) sum_h (B_h x)_i d/dz_h on
// coordinates (x, z); rank-varying models (Grushin) leave bracket_B empty.
struct Model {
  std::string name;
  int n = 0;        // ambient dimension
  int k = 0;        // frame rank
  int hausdorff_q = 0;
  std::vector<Eigen::VectorXd> frame_c;
  std::vector<Eigen::MatrixXd> frame_A;

  std::vector<Eigen::MatrixXd> bracket_B;  // z_dim skew k x k matrices
  int x_dim = 0, z_dim = 0;                // two-step split (0 if unused)

  // Covector chart on Lambda_base: angles th (dim n-1) -> p0 with H = 1/2.
  std::function<Eigen::VectorXd(const Eigen::VectorXd& base, const Eigen::VectorXd& th)>
      covector_chart;
  std::vector<ChartDim> chart_dims;

  Eigen::VectorXd frame_field(int i, const Eigen::VectorXd& q) const {
    return frame_c[i] + frame_A[i] * q;
  }
  // Controls u_i = <p, X_i(q)>.
  Eigen::VectorXd controls(const Eigen::VectorXd& q, const Eigen::VectorXd& p) const {
    Eigen::VectorXd u(k);
    for (int i = 0; i < k; ++i) u[i] = p.dot(frame_field(i, q));
    return u;
  }
  double hamiltonian(const Eigen::VectorXd& q, const Eigen::VectorXd& p) const {
    return 0.5 * controls(q, p).squaredNorm();
  }
};

Model make_heisenberg();
Model make_grushin();
Model make_free36();
// Generic two-step model from bracket matrices (k from their size).
Model make_two_step(const std::string& name, const std::vector<Eigen::MatrixXd>& B);

// Registry lookup by name ("heisenberg" | "grushin" | "free36").
const Model& model_by_name(const std::string& name);

}  // namespace subheat
