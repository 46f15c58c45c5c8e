// Equilibrium profiles and checks: the closed-form semicircle minimizer and
// its Euler-Lagrange characterization, direct energy minimization, decay-rate
// fitting, viscosity sweeps, and distributional (weak-form) residuals.
#pragma once

#include <vector>

#include "wgflow/energy.hpp"
#include "wgflow/jko.hpp"
#include "wgflow/measure.hpp"

namespace wgflow {

enum class EquilibriumKind { SemicircleClosedForm, NumericalMinimizer };

struct EquilibriumSpec {
  EquilibriumKind kind = EquilibriumKind::NumericalMinimizer;
  EnergyParams params;
  double theta = 0.0;  // energy at the equilibrium
  QuantileMeasure state;
  double grad_norm = 0.0;
  double init_spread = 0.0;  // max pairwise d2 across initializations
  long iterations = 0;
};

/// Quantiles of the semicircle density (1/(pi*gamma)) sqrt((2*gamma-x^2)+)
/// on [-sqrt(2 gamma), sqrt(2 gamma)] — the minimizer of
/// V + interaction with kernel -gamma*log|x| and confinement x^2/2.
/// CDF inverted by bisection; the output array is exactly antisymmetric.
QuantileMeasure semicircle_quantiles(int n, double gamma);

/// Closed-form equilibrium record: valid only for kappa == 0 with an active
/// log kernel (and alpha > 0); the profile is the semicircle of radius
/// sqrt(2 lambda_w gamma / alpha) and theta is the discrete energy there.
EquilibriumSpec semicircle_equilibrium(const EnergyParams& p, int n);

/// Direct minimization of E_{kappa,alpha} (alpha > 0 required): a warm JKO
/// relaxation from three distinct initial data followed by gradient descent
/// on E itself. Returns the lowest-energy result; init_spread records the
/// max pairwise d2 between the three minimizers (uniqueness probe).
EquilibriumSpec minimize_energy(const EnergyParams& p, int n,
                                const JkoConfig& cfg);

struct CharacterizationResidual {
  double support_spread = 0.0;   // max - min of Phi over the atom positions
  double support_value = 0.0;    // mean of Phi over the atoms
  double off_support_min_gap = 0.0;  // min over off-support x of Phi(x) - support_value
  double c_energy_formula = 0.0;     // 2*theta - int x^2/2 drho with theta = V + W_gamma
};

/// Evaluates Phi(x) = x^2/2 - gamma * int log|x-y| drho(y) on the atoms
/// (with the self-cell integrated in closed form) and at off-support points
/// support-endpoint +- {0.25, 0.5, 1.0}*sqrt(2 gamma). At the minimizer Phi
/// is constant on the support and larger outside.
CharacterizationResidual characterization_residual(const QuantileMeasure& rho_bar,
                                                   double gamma);

struct RateFit {
  double rate = 0.0;       // negated slope of the log-linear fit
  double intercept = 0.0;
  double residual = 0.0;   // RMS deviation of the fit
  int window_first = 0;    // inclusive
  int window_last = 0;     // inclusive
};

/// Log-linear least squares on log(values - floor) over the trimmed window
/// (first 20% and last 5% of samples discarded, values <= floor dropped).
/// Throws std::invalid_argument when fewer than 3 points remain.
RateFit fit_decay_rate(const std::vector<double>& times,
                       const std::vector<double>& values, double floor);

struct SweepRow {
  double kappa = 0.0;
  double sup_distance = 0.0;  // sup over sampled times of d2 to the kappa=0 flow
};

/// Runs the kappa = 0 reference flow and, for each kappa (sorted descending,
/// all > 0), the viscous flow from the same initial datum; reports the sup
/// over step times t <= t_final of the d2 distance between them.
std::vector<SweepRow> inviscid_sweep(const QuantileMeasure& initial,
                                     const std::vector<double>& kappas,
                                     double t_final, const JkoConfig& cfg,
                                     const EnergyParams& p_base);

/// Smooth compactly supported test function exp(-1/(1-u^2)), u=(x-c)/w.
struct BumpFunction {
  double center = 0.0;
  double width = 1.0;

  double value(double x) const;
  double d1(double x) const;
  double d2(double x) const;
};

/// Five overlapping bumps covering the spatial range of a trajectory.
std::vector<BumpFunction> default_bump_family(const FlowTrajectory& t);

struct WeakResidualReport {
  std::vector<double> per_function;  // normalized residual per test function
  double max_normalized = 0.0;
};

/// Distributional residual of the trajectory: for each test function phi,
/// compares the centered time difference of (1/n) sum phi(x_i) against
/// kappa*(1/n) sum phi'' - alpha*(1/n) sum phi' x
///  + (lambda_w*gamma/2)*(1/n^2) sum_{i,j} (phi'(x_i)-phi'(x_j))/(x_i-x_j),
/// the i = j term taken as phi''(x_i). The PowerLaw analogue carries the
/// kernel factor beta*|d|^{-beta} inside the double sum, with the self-cell
/// integrated in closed form. Residuals are normalized by the largest
/// constituent magnitude.
WeakResidualReport weak_residual(const FlowTrajectory& t, const EnergyParams& p,
                                 const std::vector<BumpFunction>& test_fns);

}  // namespace wgflow
