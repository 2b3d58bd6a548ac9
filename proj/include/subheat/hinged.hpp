// hinged.hpp — hinged energy h_{x,y}(z) = (d²(x,z) + d²(z,y))/2: warm-started
// evaluation, finite-difference Hessian / quartic Taylor data at a midpoint,
// and reduction to a diagonal Laplace normal form.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <vector>

#include "subheat/model.hpp"
#include "subheat/shoot.hpp"

namespace subheat {

struct HingedOptions {
  double hess_step = 1e-3;       // chart units, Richardson over {h, h/2}
  double quartic_step = 5e-2;    // 5-point stencils, Richardson over {s, s/2}
  double kernel_rel_tol = 1e-6;  // eigenvalue < tol * lambda_max => kernel
  ShootOptions shoot;            // stencil solves run at newton_tol below
  HingedOptions() { shoot.newton_tol = 1e-13; }
};

// One monomial of the degree-<=4 Taylor table in chart coordinates.
struct TaylorCoeff {
  std::vector<int> powers;
  double value = 0;
  double uncertainty = 0;  // Richardson disagreement |D(s) - D(s/2)| / 3
  bool reliable = true;    // false when uncertainty exceeds 10% of |value|
};

struct HingedHessian {
  Eigen::MatrixXd matrix;        // symmetrized, chart coordinates
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // columns, matching eigenvalues
  int kernel_dim = 0;            // #{lambda < kernel_rel_tol * lambda_max}
  double fd_uncertainty = 0;     // worst Richardson disagreement over entries
};

// Diagonal normal form of h - d^2/4 near z0: sum of c_i u_i^(2 m_i) over the
// transverse directions plus flat_dims directions along a continuum of minima.
struct LaplaceForm {
  std::vector<int> exponents;       // m_i (1 = Morse, 2 = corank-1 quartic)
  std::vector<double> diag_coeffs;  // c_i > 0; Hessian eigenvalue for m = 1,
                                    // kernel quartic coefficient for m = 2
  int flat_dims = 0;
  double jacobian_at_z0 = 1;  // ambient volume per unit chart volume
};

// h_{x,y} with derivative evaluators anchored at a minimum z0 (a midpoint).
// The chart columns are the ambient directions probed by grad/hessian/taylor4;
// it defaults to the identity. Leg distances for stencil points are solved by
// warm-started Newton continuation from the solutions found at z0, with the
// integrator discretization frozen per leg so that finite differences cancel
// the flow error (internal differentiation).
class HingedField {
 public:
  HingedField(const Model& m, Eigen::VectorXd x, Eigen::VectorXd y, Eigen::VectorXd z0,
              Eigen::MatrixXd chart = Eigen::MatrixXd(), HingedOptions opts = {});

  const Model& model() const { return *m_; }
  const Eigen::VectorXd& x() const { return x_; }
  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::VectorXd& z0() const { return z0_; }
  const Eigen::MatrixXd& chart() const { return chart_; }
  const HingedOptions& options() const { return opts_; }

  double d() const { return d_; }
  double d2() const { return d2_; }
  double h0() const { return h0_; }  // h(z0), equals d2/4 on the midpoint set

  // h at an arbitrary point (warm-started; falls back to full multistart).
  double eval(const Eigen::VectorXd& z) const;
  // h at a chart offset: eval(z0 + chart * w).
  double eval_offset(const Eigen::VectorXd& w) const;

  Eigen::VectorXd grad() const;             // at z0, chart coordinates
  const HingedHessian& hessian() const;     // cached
  int kernel_dim() const { return hessian().kernel_dim; }
  const std::vector<TaylorCoeff>& taylor4() const;  // cached, needs <= 3 chart dims

  // Local dimension of the midpoint set (shoot-module continuum estimate).
  int gamma_dim() const;

 private:
  struct Leg {
    Eigen::VectorXd base;
    int fixed_steps = 0;
    struct Entry {
      Eigen::VectorXd z;
      double d = 0;
      std::vector<GeodesicSolution> sols;
    };
    std::vector<Entry> entries;
  };

  double leg_distance(Leg& leg, const Eigen::VectorXd& z) const;
  void seed_leg(Leg& leg) const;

  const Model* m_;
  Eigen::VectorXd x_, y_, z0_;
  Eigen::MatrixXd chart_;
  HingedOptions opts_;
  double d_ = 0, d2_ = 0, h0_ = 0;
  mutable Leg legx_, legy_;
  mutable std::optional<HingedHessian> hess_;
  mutable std::optional<std::vector<TaylorCoeff>> taylor_;
  mutable int gamma_ = -1;
};

// One-shot hinged energy (d²(x,z) + d²(z,y)) / 2 by two multistart solves.
double hinged_eval(const Model& m, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& z, const ShootOptions& opts = {});

// FD Hessian of h_{x,y} at z0 in the ambient chart.
HingedHessian hinged_hessian(const Model& m, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& z0, const HingedOptions& opts = {});

// Thrown by to_laplace_form on degeneracies outside the supported normal forms
// (corank >= 2 at an isolated minimum, odd or vanishing kernel terms).
struct UnsupportedDegeneracy : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reduce the field at z0 to a diagonal Laplace form. Requires a square chart.
// Morse directions contribute (m=1, c=eigenvalue); an isolated corank-1 kernel
// contributes (m=2, c = quartic coefficient along the kernel after the
// splitting substitution removes the u v^2 cross terms); continuum directions
// are recorded in flat_dims.
LaplaceForm to_laplace_form(const HingedField& f);

}  // namespace subheat
