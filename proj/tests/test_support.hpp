// Deterministic random generators shared by the unit and acceptance suites.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "wgflow/measure.hpp"

namespace wgtest {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0,1), reproducible across standard libraries.
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * unit(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  // Strictly increasing array: random offset plus gaps bounded away from 0.
  std::vector<double> monotone(int n, double scale = 1.0) {
    std::vector<double> x(static_cast<size_t>(n));
    double v = uniform(-scale, scale);
    for (int i = 0; i < n; ++i) {
      v += uniform(0.25, 1.75) * (2.0 * scale / n);
      x[static_cast<size_t>(i)] = v;
    }
    return x;
  }

  wgflow::QuantileMeasure monotone_measure(int n, double scale = 1.0) {
    return wgflow::QuantileMeasure(monotone(n, scale));
  }

  std::vector<double> raw(int n, double scale = 1.0) {
    std::vector<double> x(static_cast<size_t>(n));
    for (auto& v : x) v = uniform(-scale, scale);
    return x;
  }

 private:
  std::mt19937_64 eng_;
};

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace wgtest
