#include "subheat/quadrature.hpp"

#include <array>

namespace subheat {

namespace {

struct Box {
  std::array<double, 3> lo{}, hi{};
  double val = 0, err = 0;
  int depth = 0;
};

// Tensor 15^d Kronrod vs 7^d Gauss (Gauss nodes are a subset, so one grid
// evaluation serves both sums).
void eval_box(const std::function<double(const double*)>& f, int dim, Box& box,
              bool parallel, long& evals) {
  int npts = 1;
  for (int d = 0; d < dim; ++d) npts *= 15;
  std::vector<double> vals(npts);
  std::array<double, 3> h{}, c{};
  for (int d = 0; d < dim; ++d) {
    h[d] = (box.hi[d] - box.lo[d]) / 2;
    c[d] = (box.hi[d] + box.lo[d]) / 2;
  }
  auto point_value = [&](int idx) {
    std::array<double, 3> x{};
    int rem = idx;
    for (int d = 0; d < dim; ++d) {
      int i = rem % 15;
      rem /= 15;
      x[d] = c[d] + h[d] * static_cast<double>(gk::xk[i]);
    }
    vals[idx] = f(x.data());
  };
  if (parallel && npts >= 225) {
    parallel_for(npts, point_value);
  } else {
    for (int i = 0; i < npts; ++i) point_value(i);
  }
  evals += npts;

  double sk = 0, sg = 0;
  bool gauss_ok = true;
  for (int idx = 0; idx < npts; ++idx) {
    double wkp = 1, wgp = 1;
    int rem = idx;
    for (int d = 0; d < dim; ++d) {
      int i = rem % 15;
      rem /= 15;
      wkp *= static_cast<double>(gk::wk[i]);
      double g = static_cast<double>(gk::wg[i]);
      if (g == 0.0)
        wgp = 0;
      else
        wgp *= g;
    }
    sk += wkp * vals[idx];
    if (wgp != 0) sg += wgp * vals[idx];
    (void)gauss_ok;
  }
  double scale = 1;
  for (int d = 0; d < dim; ++d) scale *= h[d];
  box.val = sk * scale;
  box.err = std::abs((sk - sg) * scale);
}

}  // namespace

QuadResult integrate_tensor(const std::function<double(const double*)>& f,
                            const std::vector<double>& lo, const std::vector<double>& hi,
                            const QuadOptions& opts) {
  QuadResult res;
  int dim = static_cast<int>(lo.size());
  if (dim < 1 || dim > 3 || hi.size() != lo.size()) return res;

  Box root;
  for (int d = 0; d < dim; ++d) {
    root.lo[d] = lo[d];
    root.hi[d] = hi[d];
  }
  eval_box(f, dim, root, opts.parallel, res.evals);
  std::vector<Box> boxes{root};

  for (;;) {
    double total = 0, toterr = 0;
    int maxdepth = 0;
    for (const auto& b : boxes) {
      total += b.val;
      toterr += b.err;
      maxdepth = std::max(maxdepth, b.depth);
    }
    res.value = total;
    res.est_error = toterr;
    res.depth = maxdepth;
    double target = std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
    if (toterr <= target) {
      res.converged = true;
      return res;
    }
    size_t wi = 0;
    for (size_t i = 1; i < boxes.size(); ++i)
      if (boxes[i].err > boxes[wi].err) wi = i;
    if (boxes[wi].depth >= opts.max_depth || boxes.size() > 200000) {
      res.converged = false;
      return res;
    }
    Box b = boxes[wi];
    int axis = 0;
    for (int d = 1; d < dim; ++d)
      if (b.hi[d] - b.lo[d] > b.hi[axis] - b.lo[axis]) axis = d;
    double mid = (b.lo[axis] + b.hi[axis]) / 2;
    Box l = b, r = b;
    l.hi[axis] = mid;
    r.lo[axis] = mid;
    l.depth = r.depth = b.depth + 1;
    eval_box(f, dim, l, opts.parallel, res.evals);
    eval_box(f, dim, r, opts.parallel, res.evals);
    boxes[wi] = l;
    boxes.push_back(r);
  }
}

}  // namespace subheat
