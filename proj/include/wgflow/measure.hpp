// Exact 1D optimal-transport primitives on the quantile representation:
// conversions between densities/atoms and quantile arrays, the Wasserstein-2
// distance, displacement interpolation, and monotone (isotonic) projection.
//
// A probability measure on the line is stored as n nondecreasing quantile
// values x[i] ~ F^{-1}((i+1/2)/n); every cell carries mass 1/n. In this
// coordinate system 1D optimal transport is linear: d2 is the plain L2
// distance between quantile arrays and geodesics are segments.
#pragma once

#include <span>
#include <vector>

namespace wgflow {

/// Equal-weight n-atom measure given by nondecreasing quantile values at the
/// mass midpoints (i+1/2)/n. Immutable after construction.
class QuantileMeasure {
 public:
  /// Validates: nonempty, finite entries, nondecreasing.
  explicit QuantileMeasure(std::vector<double> values);

  int n() const { return static_cast<int>(x_.size()); }
  const std::vector<double>& values() const { return x_; }
  double operator[](int i) const { return x_[static_cast<size_t>(i)]; }

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

  /// True when every increment is strictly positive (the measure is
  /// atomless in the piecewise-uniform reconstruction).
  bool strictly_increasing() const;

  double mean() const;
  /// (1/n) sum x[i]^2 — the second moment of the atom representation.
  double second_moment() const;

 private:
  std::vector<double> x_;
};

/// Density samples on a strictly increasing spatial grid.
struct DensityView {
  std::vector<double> grid;
  std::vector<double> values;

  /// Validates: matching sizes >= 2, strictly increasing grid,
  /// nonnegative finite values.
  DensityView(std::vector<double> grid, std::vector<double> values);

  /// Trapezoid integral of the samples over the grid.
  double trapezoid_mass() const;
};

/// Unweighted sample positions (possibly with repeats); each atom carries
/// mass 1/k.
struct EmpiricalAtoms {
  std::vector<double> points;

  explicit EmpiricalAtoms(std::vector<double> pts);
};

/// Quantiles of the piecewise-linear CDF built from `view`, read at the mass
/// midpoints (i+1/2)/n. Requires the view to integrate to 1 within 1e-6.
QuantileMeasure quantile_from_density(const DensityView& view, int n);

/// Piecewise-constant density reconstruction sampled onto `grid`. The span
/// between consecutive atoms carries density 1/(n*(x[i+1]-x[i])); the two
/// extreme spans extend outward by half their width so the reconstruction
/// integrates to 1. Requires a strictly increasing measure.
DensityView density_from_quantile(const QuantileMeasure& q,
                                  std::span<const double> grid);

/// Exact 2-Wasserstein distance between equal-resolution measures:
/// sqrt((1/n) sum (a[i]-b[i])^2). Throws on mismatched n.
double wasserstein2(const QuantileMeasure& a, const QuantileMeasure& b);

/// Squared distance; same contract as wasserstein2.
double wasserstein2_squared(const QuantileMeasure& a, const QuantileMeasure& b);

/// Constant-speed geodesic point (1-t)a + t b in quantile coordinates,
/// t in [0,1].
QuantileMeasure displacement_interpolate(const QuantileMeasure& a,
                                         const QuantileMeasure& b, double t);

/// Euclidean projection onto the cone of nondecreasing arrays
/// (pool-adjacent-violators). Idempotent and mean-preserving.
std::vector<double> isotonic_project(std::vector<double> v);

/// Sorted atoms resampled at the mass midpoints (i+1/2)/n via the empirical
/// CDF pseudo-inverse. For n == k this returns the sorted atom list.
QuantileMeasure atoms_to_quantile(const EmpiricalAtoms& atoms, int n);

/// Quantiles of the uniform law on [a, b], a < b.
QuantileMeasure uniform_quantiles(int n, double a, double b);

/// Quantiles of the normal law with the given mean and standard deviation.
QuantileMeasure gaussian_quantiles(int n, double mean, double sigma);

}  // namespace wgflow
