// Exponent extraction from heat-kernel samples and verdicts against the
// power-law kernel bounds.
#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace subheat {

struct AsymptoticFit {
  double d2_hat = 0;        // fitted squared distance (clamped at zero)
  double alpha_hat = 0;     // fitted power of 1/t
  double C_hat = 0;         // fitted leading constant
  double residual_rms = 0;  // stage-2 residual root mean square
  double t_min = 0, t_max = 0;
};

// Two-stage least squares on samples (t, log p) of p ~ C t^{-alpha} e^{-d2/4t}:
// stage 1 regresses -4 t log p on (1, t, t log t) — the intercept is d2_hat,
// the extra basis functions absorb the power and constant terms — and stage 2
// regresses log p + d2_hat/(4t) on (1, log t) for alpha_hat and C_hat.
// Requires at least 6 samples with positive t spanning half a decade.
AsymptoticFit fit_exponential(const std::vector<std::pair<double, double>>& samples);

struct VerdictClauses {
  bool i = false;    // n/2 - eps <= alpha_hat <= n - 1/2 + eps
  bool ii = false;   // degenerate hinge: alpha_hat >= n/2 + 1/4 - eps (vacuous otherwise)
  bool iii = false;  // nondegenerate hinge: |alpha_hat - n/2| <= eps (vacuous otherwise)
};

struct Verdict {
  AsymptoticFit fit;
  int n = 0;           // manifold dimension
  int kernel_dim = 0;  // hinged-Hessian degeneracy; 0 means the nondegenerate regime
  double predicted_alpha = std::numeric_limits<double>::quiet_NaN();  // from the normal form
  double eps = 0.05;
  VerdictClauses clauses;
  bool all_pass() const { return clauses.i && clauses.ii && clauses.iii; }
  std::string json() const;
};

// Check the fitted power against the bound clauses for dimension n, with the
// hinged-Hessian kernel dimension selecting which sharp clause applies.
Verdict corollary_verdict(const AsymptoticFit& fit, int n, int kernel_dim,
                          double predicted_alpha = std::numeric_limits<double>::quiet_NaN(),
                          double eps = 0.05);

}  // namespace subheat
