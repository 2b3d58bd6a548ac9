// geodesic_forms.hpp — closed-form arclength geodesics for the catalogue
// models, written with stable small-argument kernels so the straight-line
// limits need no branch switching.
#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "subheat/util.hpp"

namespace subheat {

// Heisenberg geodesic from the origin with covector chart (theta, w).
// x + iy traces a circle of radius 1/w; w = 0 degenerates to a line.
inline Eigen::Vector3d heisenberg_geodesic(double theta, double w, double t) {
  double z1 = w * t;
  double x = -std::cos(theta) * w * t * t * cosc2(z1) - std::sin(theta) * t * sinc(z1);
  double y = -std::sin(theta) * w * t * t * cosc2(z1) + std::cos(theta) * t * sinc(z1);
  double z = 0.5 * t * t * t * w * sinc3(z1);
  return {x, y, z};
}

// Grushin geodesic from the base (-1, -pi/4) with covector chart angle theta.
// Equivalent to x = -sin(theta - t sin theta)/sin(theta) and the matching y,
// rewritten so sin(theta) -> 0 is regular.
inline Eigen::Vector2d grushin_geodesic(double theta, double t) {
  double s = std::sin(theta), c = std::cos(theta);
  double zx = t * s, zy = 2.0 * t * s;
  double x = -std::cos(zx) + t * c * sinc(zx);
  double y = -M_PI / 4 + 2.0 * t * t * t * s * sinc3(zy) + t * s * sinc(zy) -
             2.0 * t * t * s * c * cosc2(zy);
  return {x, y};
}

}  // namespace subheat
