// shoot.hpp — geodesic boundary-value solver: multistart shooting, distance,
// midpoint sets with continuum detection, and cut times.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <vector>

#include "subheat/flow.hpp"
#include "subheat/model.hpp"

namespace subheat {

struct ShootOptions {
  int n_start = 64;              // starts per angular chart dimension
  int newton_max_iter = 100;
  double newton_tol = 1e-10;     // endpoint residual in chart norm
  double cluster_radius = 1e-4;  // dedup radius in (theta, T)
  FlowOptions flow;
};

// One converged shot: unit-energy covector chart coordinates, covector,
// arrival time (= length under arclength parametrization), and residual.
struct GeodesicSolution {
  Eigen::VectorXd theta;
  Eigen::VectorXd p0;
  double T = 0;
  double residual = 0;
  bool is_minimizing = false;
};

struct DistanceResult {
  double d = 0;
  std::vector<GeodesicSolution> solutions;  // deduplicated, sorted by T
  double best_residual = 0;                 // best over all starts (diagnostic)
};

// Thrown when no start converges; carries the best residual seen.
struct ShootError : std::runtime_error {
  double best_residual;
  ShootError(const std::string& msg, double r) : std::runtime_error(msg), best_residual(r) {}
};

// Multistart shooting distance. x = y returns 0 with an empty solution list.
DistanceResult distance(const Model& m, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        const ShootOptions& opts = {});

// Newton refinement from a caller-supplied guess only (no multistart); used to
// track a known solution under small perturbations of the target.
std::optional<GeodesicSolution> refine_single(const Model& m, const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& y,
                                              const Eigen::VectorXd& theta0, double T0,
                                              const ShootOptions& opts = {});

struct MidpointSet {
  double d = 0;
  std::vector<Eigen::VectorXd> points;      // exp(x, p0, T/2) per minimizer
  std::vector<GeodesicSolution> solutions;  // the corresponding minimizers
  int dim_estimate = 0;                     // 0 isolated, >=1 continuum
};

// Midpoints of all minimizing geodesics; continuum dimension estimated by
// re-running with a densified start grid and watching the cluster count.
MidpointSet midpoints(const Model& m, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      const ShootOptions& opts = {});

// Largest time (resolution 1e-4 * t_max) up to which the geodesic t ->
// exp(x, p0, t) stays minimizing, decided by comparing t against the shooting
// distance to the endpoint; NaN if minimizing through t_max.
double cut_time(const Model& m, const Eigen::VectorXd& x, const Eigen::VectorXd& p0,
                double t_max, const ShootOptions& opts = {});

}  // namespace subheat
