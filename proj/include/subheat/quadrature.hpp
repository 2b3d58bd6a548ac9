// quadrature.hpp — adaptive Gauss–Kronrod panels (1D and tensor-product boxes)
// and oscillatory integrals summed between zeros with epsilon acceleration.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "subheat/util.hpp"

namespace subheat {

struct QuadOptions {
  double abs_tol = 0.0;
  double rel_tol = 1e-10;
  int max_depth = 30;
  bool parallel = false;  // tensor boxes only: evaluate grid points concurrently
};

template <typename Real>
struct QuadResultT {
  Real value{0};
  Real est_error{std::numeric_limits<Real>::infinity()};
  long evals{0};
  bool converged{false};
  int depth{0};
};
using QuadResult = QuadResultT<double>;

namespace gk {
// 15-point Kronrod nodes (ascending) with weights; Gauss-7 weights sit on the
// odd-index nodes. 20-digit literals so the long double path keeps full
// precision.
inline constexpr long double xk[15] = {
    -0.99145537112081263921L, -0.94910791234275852453L, -0.86486442335976907279L,
    -0.74153118559939443986L, -0.58608723546769113029L, -0.40584515137739716691L,
    -0.20778495500789846760L, 0.0L,
    0.20778495500789846760L,  0.40584515137739716691L,  0.58608723546769113029L,
    0.74153118559939443986L,  0.86486442335976907279L,  0.94910791234275852453L,
    0.99145537112081263921L};
inline constexpr long double wk[15] = {
    0.022935322010529224964L, 0.063092092629978553291L, 0.104790010322250183840L,
    0.140653259715525918745L, 0.169004726639267902827L, 0.190350578064785409913L,
    0.204432940075298892414L, 0.209482141084727828013L,
    0.204432940075298892414L, 0.190350578064785409913L, 0.169004726639267902827L,
    0.140653259715525918745L, 0.104790010322250183840L, 0.063092092629978553291L,
    0.022935322010529224964L};
inline constexpr long double wg[15] = {
    0.0L, 0.129484966168869693271L, 0.0L,
    0.279705391489276667901L, 0.0L, 0.381830050505118944950L,
    0.0L, 0.417959183673469387755L,
    0.0L, 0.381830050505118944950L, 0.0L,
    0.279705391489276667901L, 0.0L, 0.129484966168869693271L,
    0.0L};
}  // namespace gk

// One Gauss–Kronrod 7-15 panel on [a, b]; err from the scaled |K-G| heuristic.
template <typename Real, typename F>
void gk15_panel(F&& f, Real a, Real b, Real& kronrod, Real& err) {
  const Real h = (b - a) / 2, c = (a + b) / 2;
  Real sk = 0, sg = 0, sabs = 0;
  for (int i = 0; i < 15; ++i) {
    Real v = f(c + h * static_cast<Real>(gk::xk[i]));
    sk += static_cast<Real>(gk::wk[i]) * v;
    sg += static_cast<Real>(gk::wg[i]) * v;
    sabs += static_cast<Real>(gk::wk[i]) * std::abs(v);
  }
  kronrod = sk * h;
  Real diff = std::abs(sk - sg) * std::abs(h);
  // QUADPACK-style error sharpening: (200 |K-G|)^{1.5} capped by |K-G|.
  Real scale = sabs * std::abs(h);
  if (scale > 0 && diff > 0) {
    Real r = std::pow(static_cast<Real>(200) * diff / scale, static_cast<Real>(1.5)) * scale;
    err = std::min(diff, r);
  } else {
    err = diff;
  }
}

// Adaptive bisection over [a, b]: split the worst panel until the global
// error target max(abs_tol, rel_tol*|value|) is met or all panels reach
// max_depth.
template <typename Real, typename F>
QuadResultT<Real> integrate(F&& f, Real a, Real b, const QuadOptions& opts = {}) {
  struct Seg {
    Real a, b, val, err;
    int depth;
  };
  QuadResultT<Real> res;
  std::vector<Seg> segs;
  Real v, e;
  gk15_panel(f, a, b, v, e);
  res.evals += 15;
  segs.push_back({a, b, v, e, 0});
  auto worst = [&segs]() {
    size_t wi = 0;
    for (size_t i = 1; i < segs.size(); ++i)
      if (segs[i].err > segs[wi].err) wi = i;
    return wi;
  };
  for (;;) {
    Real total = 0, toterr = 0;
    int maxdepth = 0;
    for (const auto& s : segs) {
      total += s.val;
      toterr += s.err;
      maxdepth = std::max(maxdepth, s.depth);
    }
    Real target = std::max(static_cast<Real>(opts.abs_tol),
                           static_cast<Real>(opts.rel_tol) * std::abs(total));
    res.value = total;
    res.est_error = toterr;
    res.depth = maxdepth;
    if (toterr <= target) {
      res.converged = true;
      return res;
    }
    size_t wi = worst();
    if (segs[wi].depth >= opts.max_depth || segs.size() > 100000) {
      res.converged = false;  // saturated; best effort
      return res;
    }
    Seg s = segs[wi];
    Real m = (s.a + s.b) / 2;
    Seg l{s.a, m, 0, 0, s.depth + 1}, r{m, s.b, 0, 0, s.depth + 1};
    gk15_panel(f, l.a, l.b, l.val, l.err);
    gk15_panel(f, r.a, r.b, r.val, r.err);
    res.evals += 30;
    segs[wi] = l;
    segs.push_back(r);
  }
}

template <typename Real>
struct OscResultT {
  Real value{0};
  Real est_error{std::numeric_limits<Real>::infinity()};
  long evals{0};
  bool converged{false};
  bool accelerated{false};  // epsilon-algorithm estimate used
  int panels{0};
};

// Integral over [cuts.front(), cuts.back()] of an oscillatory integrand whose
// sign alternates between consecutive cuts (zeros of the oscillation factor).
// Panels are summed compensated; the partial-sum sequence additionally feeds a
// Wynn epsilon table, whose extrapolation is used when it stabilizes before
// the direct sum does.
template <typename Real, typename F>
OscResultT<Real> integrate_between_zeros(F&& f, const std::vector<Real>& cuts,
                                         const QuadOptions& opts = {}) {
  OscResultT<Real> res;
  if (cuts.size() < 2) return res;
  CompensatedSum<Real> direct;
  EpsilonTable<Real> eps;
  QuadOptions panel_opts = opts;
  panel_opts.rel_tol = std::max(opts.rel_tol * 0.1, 1e-15);
  Real peak = 0, panel_err = 0, last_abs = 0;
  int stable = 0;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    panel_opts.abs_tol = std::max(static_cast<Real>(opts.abs_tol),
                                  peak * static_cast<Real>(opts.rel_tol) * Real(0.01));
    auto pr = integrate(f, cuts[k], cuts[k + 1], panel_opts);
    res.evals += pr.evals;
    direct.add(pr.value);
    eps.add(direct.value());
    peak = std::max(peak, std::abs(pr.value));
    panel_err += pr.est_error;
    last_abs = std::abs(pr.value);
    res.panels = static_cast<int>(k + 1);
    Real target = std::max(static_cast<Real>(opts.abs_tol),
                           static_cast<Real>(opts.rel_tol) * std::abs(direct.value()));
    if (k >= 5) {
      if (last_abs <= Real(0.25) * target) {  // envelope exhausted: direct sum done
        res.value = direct.value();
        res.est_error = panel_err + last_abs;
        res.converged = true;
        return res;
      }
      Real be = eps.best();
      if (std::isfinite(be) && eps.stability() <= static_cast<Real>(opts.rel_tol) * std::abs(be)) {
        if (++stable >= 3) {
          res.value = be;
          res.est_error = panel_err + eps.stability() + std::numeric_limits<Real>::epsilon() * peak;
          res.converged = true;
          res.accelerated = true;
          return res;
        }
      } else {
        stable = 0;
      }
    }
  }
  res.value = direct.value();
  res.est_error = panel_err + last_abs;
  res.converged = last_abs <= std::max(static_cast<Real>(opts.abs_tol),
                                       static_cast<Real>(opts.rel_tol) * std::abs(direct.value()));
  return res;
}

// Adaptive tensor-product Gauss–Kronrod over an axis-aligned box in up to
// 3 dimensions; splits the box with the largest error along its widest axis.
QuadResult integrate_tensor(const std::function<double(const double*)>& f,
                            const std::vector<double>& lo, const std::vector<double>& hi,
                            const QuadOptions& opts = {});

}  // namespace subheat
