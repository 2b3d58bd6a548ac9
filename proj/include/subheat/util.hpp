// util.hpp — compensated summation, epsilon-algorithm acceleration, grids,
// deterministic quasi-random sequences, output formatting, parallel map.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace subheat {

// Neumaier-compensated accumulator; value() = sum + running compensation.
template <typename Real = double>
struct CompensatedSum {
  Real sum{0}, comp{0};
  void add(Real x) {
    Real t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  Real value() const { return sum + comp; }
};

// Wynn epsilon algorithm over a sequence of partial sums S_0, S_1, ...
// Accelerates alternating tail sums from oscillatory quadrature.
template <typename Real = double>
class EpsilonTable {
 public:
  void add(Real s) {
    cols_.resize(std::max(cols_.size(), static_cast<size_t>(1)));
    cols_[0].push_back(s);
    for (size_t k = 1;; ++k) {
      if (cols_[k - 1].size() < 2) break;
      if (cols_.size() <= k) cols_.emplace_back();
      size_t i = cols_[k - 1].size() - 2;
      if (cols_[k].size() != i) break;  // already filled or gap (shouldn't happen)
      Real denom = cols_[k - 1][i + 1] - cols_[k - 1][i];
      Real base = (k >= 2) ? cols_[k - 2][i + 1] : Real(0);
      Real v;
      if (denom == Real(0))
        v = std::numeric_limits<Real>::infinity();
      else
        v = base + Real(1) / denom;
      cols_[k].push_back(v);
    }
  }

  // Best extrapolation: deepest even column whose last entry is finite.
  Real best() const {
    for (size_t k = cols_.size(); k-- > 0;) {
      if (k % 2 != 0 || cols_[k].empty()) continue;
      Real v = cols_[k].back();
      if (std::isfinite(v)) return v;
    }
    return cols_.empty() || cols_[0].empty() ? Real(0) : cols_[0].back();
  }

  // Difference between the two deepest finite even-column estimates;
  // serves as a convergence indicator.
  Real stability() const {
    Real prev = std::numeric_limits<Real>::quiet_NaN();
    Real out = std::numeric_limits<Real>::infinity();
    for (size_t k = 0; k < cols_.size(); k += 2) {
      if (cols_[k].empty()) continue;
      Real v = cols_[k].back();
      if (!std::isfinite(v)) continue;
      if (!std::isnan(prev)) out = std::abs(v - prev);
      prev = v;
    }
    return out;
  }

  size_t count() const { return cols_.empty() ? 0 : cols_[0].size(); }

 private:
  std::vector<std::vector<Real>> cols_;
};

// Stable small-argument kernels (series below |z| = 1e-4, closed form above).
inline double sinc(double z) {
  double z2 = z * z;
  if (std::abs(z) < 1e-4) return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
  return std::sin(z) / z;
}
// (1 - cos z) / z^2
inline double cosc2(double z) {
  double z2 = z * z;
  if (std::abs(z) < 1e-4) return 0.5 - z2 / 24.0 + z2 * z2 / 720.0;
  return (1.0 - std::cos(z)) / z2;
}
// (z - sin z) / z^3  ==  (1 - sinc z) / z^2
inline double sinc3(double z) {
  double z2 = z * z;
  if (std::abs(z) < 1e-4) return 1.0 / 6.0 - z2 / 120.0 + z2 * z2 / 5040.0;
  return (z - std::sin(z)) / (z2 * z);
}

// n log-spaced points over [a, b] inclusive.
std::vector<double> log_grid(double a, double b, int n);
// n uniform points over [a, b] inclusive.
std::vector<double> lin_grid(double a, double b, int n);

// Halton low-discrepancy value: index i >= 0 in the given prime base.
double halton(long long index, int base);

// n near-uniform points on S^2 (Fibonacci lattice), deterministic.
std::vector<std::array<double, 3>> fibonacci_sphere(int n);

// Shortest-format then fixed 17-significant-digit decimal for doubles;
// output is locale-independent and deterministic.
std::string fmt17(double x);

// Minimal deterministic JSON emitter (insertion order preserved).
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& begin_object(const std::string& key);
  JsonWriter& end_object();
  JsonWriter& begin_array(const std::string& key);
  JsonWriter& end_array();
  JsonWriter& field(const std::string& key, double v);
  JsonWriter& field(const std::string& key, long long v);
  JsonWriter& field(const std::string& key, int v);
  JsonWriter& field(const std::string& key, bool v);
  JsonWriter& field(const std::string& key, const std::string& v);
  JsonWriter& field_raw(const std::string& key, const std::string& raw);
  JsonWriter& item(double v);
  const std::string& str() const { return out_; }

 private:
  void pre_value();
  void key_prefix(const std::string& key);
  std::string out_;
  std::vector<bool> has_item_;  // per open scope
};

// Worker count: SUBHEAT_THREADS env override, else hardware concurrency.
int thread_count();

// Run fn(i) for i in [0, n); each call writes only caller-owned slot i,
// so results are independent of scheduling.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace subheat
