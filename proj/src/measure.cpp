#include "wgflow/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wgflow/normal.hpp"

namespace wgflow {

QuantileMeasure::QuantileMeasure(std::vector<double> values)
    : x_(std::move(values)) {
  if (x_.empty()) {
    throw std::invalid_argument("QuantileMeasure: empty quantile array");
  }
  for (size_t i = 0; i < x_.size(); ++i) {
    if (!std::isfinite(x_[i])) {
      throw std::invalid_argument("QuantileMeasure: non-finite quantile value");
    }
    if (i > 0 && x_[i] < x_[i - 1]) {
      throw std::invalid_argument("QuantileMeasure: quantiles must be nondecreasing");
    }
  }
}

bool QuantileMeasure::strictly_increasing() const {
  for (size_t i = 1; i < x_.size(); ++i) {
    if (x_[i] <= x_[i - 1]) return false;
  }
  return true;
}

double QuantileMeasure::mean() const {
  double s = 0.0;
  for (double v : x_) s += v;
  return s / static_cast<double>(x_.size());
}

double QuantileMeasure::second_moment() const {
  double s = 0.0;
  for (double v : x_) s += v * v;
  return s / static_cast<double>(x_.size());
}

DensityView::DensityView(std::vector<double> g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (grid.size() != values.size() || grid.size() < 2) {
    throw std::invalid_argument("DensityView: need matching grid/value arrays of size >= 2");
  }
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || !std::isfinite(values[i])) {
      throw std::invalid_argument("DensityView: non-finite entry");
    }
    if (i > 0 && grid[i] <= grid[i - 1]) {
      throw std::invalid_argument("DensityView: grid must be strictly increasing");
    }
    if (values[i] < 0.0) {
      throw std::domain_error("DensityView: negative density value");
    }
  }
}

double DensityView::trapezoid_mass() const {
  double s = 0.0;
  for (size_t i = 1; i < grid.size(); ++i) {
    s += 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
  }
  return s;
}

EmpiricalAtoms::EmpiricalAtoms(std::vector<double> pts) : points(std::move(pts)) {
  if (points.empty()) {
    throw std::invalid_argument("EmpiricalAtoms: need at least one point");
  }
  for (double p : points) {
    if (!std::isfinite(p)) {
      throw std::invalid_argument("EmpiricalAtoms: non-finite point");
    }
  }
}

QuantileMeasure quantile_from_density(const DensityView& view, int n) {
  if (n < 2) {
    throw std::invalid_argument("quantile_from_density: n must be >= 2");
  }
  const double mass = view.trapezoid_mass();
  if (std::abs(mass - 1.0) > 1e-6) {
    throw std::domain_error("quantile_from_density: view mass differs from 1 beyond 1e-6");
  }
  const size_t m = view.grid.size();

  // Piecewise-linear CDF through the trapezoid cumulative sums, rescaled so
  // the last node is exactly 1.
  std::vector<double> cdf(m, 0.0);
  for (size_t i = 1; i < m; ++i) {
    cdf[i] = cdf[i - 1] + 0.5 * (view.values[i] + view.values[i - 1]) *
                              (view.grid[i] - view.grid[i - 1]);
  }
  for (size_t i = 0; i < m; ++i) cdf[i] /= cdf[m - 1];

  std::vector<double> x(static_cast<size_t>(n));
  size_t seg = 0;
  for (int i = 0; i < n; ++i) {
    const double s = (i + 0.5) / n;
    while (seg + 2 < m && cdf[seg + 1] <= s) ++seg;
    const double c0 = cdf[seg], c1 = cdf[seg + 1];
    double t = (c1 > c0) ? (s - c0) / (c1 - c0) : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    x[static_cast<size_t>(i)] =
        view.grid[seg] + t * (view.grid[seg + 1] - view.grid[seg]);
  }
  // Guard against rounding inversions at flat CDF segments.
  for (size_t i = 1; i < x.size(); ++i) x[i] = std::max(x[i], x[i - 1]);
  return QuantileMeasure(std::move(x));
}

DensityView density_from_quantile(const QuantileMeasure& q,
                                  std::span<const double> grid) {
  const int n = q.n();
  if (n < 2 || !q.strictly_increasing()) {
    throw std::domain_error(
        "density_from_quantile: measure must be strictly increasing (no "
        "absolutely continuous density exists otherwise)");
  }
  const auto& x = q.values();
  const double first_halfspan = 0.5 * (x[1] - x[0]);
  const double last_halfspan = 0.5 * (x[static_cast<size_t>(n) - 1] - x[static_cast<size_t>(n) - 2]);
  const double lo = x.front() - first_halfspan;
  const double hi = x.back() + last_halfspan;

  std::vector<double> g(grid.begin(), grid.end());
  std::vector<double> vals(g.size(), 0.0);
  for (size_t k = 0; k < g.size(); ++k) {
    const double p = g[k];
    if (p < lo || p > hi) continue;
    // Span index: the extreme spans extend half a width outward.
    auto it = std::upper_bound(x.begin(), x.end(), p);
    int i = static_cast<int>(it - x.begin()) - 1;
    i = std::clamp(i, 0, n - 2);
    vals[k] = 1.0 / (n * (x[static_cast<size_t>(i) + 1] - x[static_cast<size_t>(i)]));
  }
  return DensityView(std::move(g), std::move(vals));
}

double wasserstein2_squared(const QuantileMeasure& a, const QuantileMeasure& b) {
  if (a.n() != b.n()) {
    throw std::invalid_argument(
        "wasserstein2: resolution mismatch, re-grid one measure first");
  }
  double s = 0.0;
  for (int i = 0; i < a.n(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / a.n();
}

double wasserstein2(const QuantileMeasure& a, const QuantileMeasure& b) {
  return std::sqrt(wasserstein2_squared(a, b));
}

QuantileMeasure displacement_interpolate(const QuantileMeasure& a,
                                         const QuantileMeasure& b, double t) {
  if (a.n() != b.n()) {
    throw std::invalid_argument("displacement_interpolate: resolution mismatch");
  }
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("displacement_interpolate: t must lie in [0,1]");
  }
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  std::vector<double> x(static_cast<size_t>(a.n()));
  for (int i = 0; i < a.n(); ++i) {
    x[static_cast<size_t>(i)] = (1.0 - t) * a[i] + t * b[i];
  }
  return QuantileMeasure(std::move(x));
}

std::vector<double> isotonic_project(std::vector<double> v) {
  const size_t n = v.size();
  for (double e : v) {
    if (!std::isfinite(e)) {
      throw std::invalid_argument("isotonic_project: non-finite entry");
    }
  }
  // Pool-adjacent-violators with block means; O(n).
  std::vector<double> mean(n), weight(n);
  std::vector<size_t> len(n);
  size_t m = 0;  // number of blocks
  for (size_t i = 0; i < n; ++i) {
    mean[m] = v[i];
    weight[m] = 1.0;
    len[m] = 1;
    ++m;
    while (m > 1 && mean[m - 2] > mean[m - 1]) {
      const double w = weight[m - 2] + weight[m - 1];
      mean[m - 2] = (weight[m - 2] * mean[m - 2] + weight[m - 1] * mean[m - 1]) / w;
      weight[m - 2] = w;
      len[m - 2] += len[m - 1];
      --m;
    }
  }
  std::vector<double> out;
  out.reserve(n);
  for (size_t b = 0; b < m; ++b) {
    out.insert(out.end(), len[b], mean[b]);
  }
  return out;
}

QuantileMeasure atoms_to_quantile(const EmpiricalAtoms& atoms, int n) {
  if (n < 1) {
    throw std::invalid_argument("atoms_to_quantile: n must be >= 1");
  }
  std::vector<double> sorted = atoms.points;
  std::sort(sorted.begin(), sorted.end());
  const size_t k = sorted.size();
  std::vector<double> x(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double s = (i + 0.5) / n;
    size_t j = static_cast<size_t>(s * static_cast<double>(k));
    if (j >= k) j = k - 1;
    x[static_cast<size_t>(i)] = sorted[j];
  }
  return QuantileMeasure(std::move(x));
}

QuantileMeasure uniform_quantiles(int n, double a, double b) {
  if (n < 1 || !(a < b)) {
    throw std::invalid_argument("uniform_quantiles: need n >= 1 and a < b");
  }
  std::vector<double> x(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[static_cast<size_t>(i)] = a + (b - a) * (i + 0.5) / n;
  }
  return QuantileMeasure(std::move(x));
}

QuantileMeasure gaussian_quantiles(int n, double mean, double sigma) {
  if (n < 1 || !(sigma > 0.0)) {
    throw std::invalid_argument("gaussian_quantiles: need n >= 1 and sigma > 0");
  }
  std::vector<double> x(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[static_cast<size_t>(i)] = mean + sigma * standard_normal_quantile((i + 0.5) / n);
  }
  return QuantileMeasure(std::move(x));
}

}  // namespace wgflow
