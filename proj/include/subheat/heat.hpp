// heat.hpp — explicit heat-kernel evaluators: two-step group integrals in the
// hyperbolic form, closed vertical formulas, the Grushin oscillator integral,
// and the Chapman-Kolmogorov semigroup glue.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "subheat/model.hpp"

namespace subheat {

struct KernelSample {
  double t = 0;
  Eigen::VectorXd x, y;   // endpoints
  double value = 0;       // p_t(x, y)
  double log_value = 0;   // log p_t(x, y); finite even when value underflows
  std::string method;     // closed_form | gaveau_integral | radial_reduction |
                          // mehler_integral | semigroup_glue
  double est_error = 0;   // absolute error estimate on value
};

// Thrown when oscillation frequency, pole proximity, or box truncation makes
// the requested tolerance unreachable; the message reports what would help.
struct KernelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// p_t(0, q) for a two-step group model: z_dim-dimensional integral over the
// dual of the vertical layer, V(tau) exp(-W(tau) x.x / 4t) cos(z.tau / t)
// with V = sqrt(det(L/sinh L)) and W = L/tanh L obtained from the
// eigendecomposition of B(tau)^2 (hyperbolic form; no poles on the real
// axis).  Vertical points (x = 0, z_dim = 1) switch to a contour-shifted
// evaluation that extracts the leading e^{-pi |z| / t} decay explicitly.
KernelSample gaveau_kernel(const Model& m, const Eigen::VectorXd& q, double t,
                           double rel_tol = 1e-10);

// Left-invariant Heisenberg kernel p_t(a, b) via group translation.
double heisenberg_kernel(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double t,
                         double rel_tol = 1e-8);

// Closed forms on the vertical axis (log versions never over/underflow).
double heisenberg_vertical_closed(double z, double t);
double heisenberg_vertical_closed_log(double z, double t);
double free36_vertical_closed(double t);      // at |z| = 1
double free36_vertical_closed_log(double t);  // at |z| = 1

// One-dimensional radial reduction of the rank-3 vertical kernel at |z| = 1:
// 8 pi (4 pi t)^{-9/2} / rho * int_0^inf tau^2 sin(rho tau)/sinh(tau) dtau,
// rho = 1/t, contour-shifted for small t.
KernelSample free36_vertical_radial(double t, double rel_tol = 1e-9);

// Grushin plane kernel (Lebesgue sub-Laplacian) through the oscillator
// integral; long-double zero-interval summation with epsilon acceleration.
KernelSample grushin_kernel(const Eigen::Vector2d& q, const Eigen::Vector2d& qp, double t,
                            double rel_tol = 1e-6);

// p_s(a, b) evaluator used by the glue.
using PointKernel =
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&, double)>;

// Chapman-Kolmogorov glue p_t(x,y) = int_box p_{t/2}(x,z) p_{t/2}(z,y) dz
// with Lebesgue measure.  Checks that the box truncation is harmless
// (boundary integrand below rel_tol * interior max) and throws KernelError
// with a suggested enlargement otherwise.
double semigroup_glue(const PointKernel& kernel, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y, double t,
                      const std::vector<std::array<double, 2>>& box, double rel_tol = 1e-4);

// Sample batches over a t-grid (evaluated through parallel_for).
std::vector<KernelSample> heisenberg_vertical_samples(double z, const std::vector<double>& ts);
std::vector<KernelSample> free36_vertical_samples(const std::vector<double>& ts);
std::vector<KernelSample> grushin_samples(const Eigen::Vector2d& q, const Eigen::Vector2d& qp,
                                          const std::vector<double>& ts, double rel_tol = 1e-6);

// CSV dump: header t,value,log_value,method,est_error, 17-digit values.
std::string samples_csv(const std::vector<KernelSample>& samples);

}  // namespace subheat
