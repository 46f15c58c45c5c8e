// The free energy kappa*U + alpha*V + W on quantile measures, with singular
// logarithmic or negative power-law interaction kernels, its exact partial
// derivatives in quantile coordinates, and the analytic lower bounds.
#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "wgflow/measure.hpp"

namespace wgflow {

/// Marker for energies outside the functional's domain (coincident atoms for
/// the singular kernels, zero spans for the entropy). Compares larger than
/// any finite energy.
double saturated_energy();
bool is_saturated(double e);

enum class KernelKind { Log, PowerLaw };

/// Pair interaction potential. Log: w(x) = -gamma*log|x|. PowerLaw:
/// w(x) = |x|^(-beta) with beta in (0,1); beta >= 1 makes the interaction
/// domain empty and is rejected. lambda_w multiplies the whole term.
struct InteractionKernel {
  KernelKind kind = KernelKind::Log;
  double gamma = 0.3183098861837907;  // 1/pi
  double beta = 0.5;
  double lambda_w = 1.0;

  static InteractionKernel log_kernel(double gamma, double lambda_w = 1.0);
  static InteractionKernel power_law(double beta, double lambda_w = 1.0);

  /// Throws std::domain_error on out-of-range parameters.
  void validate() const;

  /// lambda_w * gamma for Log, 0 for PowerLaw: the coefficient of -log|x|
  /// actually applied. Used by scaling identities and equilibrium radii.
  double effective_log_strength() const;
};

struct EnergyParams {
  double kappa = 0.0;  // diffusion coefficient, >= 0
  double alpha = 0.0;  // confinement coefficient, >= 0
  InteractionKernel kernel;

  void validate() const;
};

/// Discrete entropy integral rho*log(rho) of the piecewise-uniform
/// reconstruction: -sum_i c_i log(n*(x[i+1]-x[i])) over the n-1 spans with
/// quadrature weights c_i = 1/n inside and 3/(2n) at the two extreme spans
/// (the extreme half-cells fold into their neighboring spans, so the weights
/// sum to 1 and affine data is integrated exactly).
/// Returns saturated_energy() on any zero span.
double entropy(const QuantileMeasure& q);

/// (1/(2n)) sum x[i]^2 — exact second-moment functional of the atoms.
double confinement(const QuantileMeasure& q);

/// Interaction energy (1/2) iint w(x-y) drho drho: off-diagonal midpoint sum
/// (lambda_w/(2n^2)) sum_{i != j} w(x_i - x_j) plus the closed-form
/// self-cell integrals (per cell of local width h: gamma*(3/2 - log h) for
/// Log and h^(-beta)*2/((1-beta)(2-beta)) for PowerLaw, times
/// lambda_w/(2n^2)). The diagonal terms make the dilation identity
/// W[s*x] = W[x] - (lambda_w*gamma/2)*log(s) exact for the Log kernel.
/// Returns saturated_energy() on coincident atoms.
double interaction(const QuantileMeasure& q, const InteractionKernel& k);

/// kappa*entropy + alpha*confinement + interaction. Constituents with a zero
/// coefficient are skipped, so e.g. pure confinement is finite on atoms.
double free_energy(const QuantileMeasure& q, const EnergyParams& p);

/// Exact gradient of free_energy with respect to the quantile values.
/// Throws saturation_error when the energy is saturated at q.
std::vector<double> energy_gradient(const QuantileMeasure& q,
                                    const EnergyParams& p);

class saturation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Analytic lower bounds for E_{kappa,alpha}. Fields are present when their
/// validity conditions hold; accessors throw std::domain_error otherwise.
///
///  - positivity:  (1/2)log(e/2), for kappa=0, alpha>=1, Log kernel with
///                 effective strength in [1/pi, 2*sqrt(e)].
///  - unif_baixo:  -(1/2)log(4/(alpha e)), alpha > 0 (the printed constant
///                 for the interaction + half-confinement split at unit
///                 kernel strength).
///  - jensen:      (kappa/2)(log(alpha/(2 kappa)) - log(2 pi)), kappa,
///                 alpha > 0; bounds kappa*U + (alpha/2)*V.
///  - gaussian_bound: -(kappa/2) log(4 pi kappa / alpha); equals jensen (the
///                 Gaussian with variance 2 kappa/alpha attains it).
///  - floor:       the strongest bound valid for the full energy with the
///                 given kernel; absent when E is unbounded below (alpha=0
///                 with an active kernel).
struct LowerBounds {
  std::optional<double> positivity;
  std::optional<double> unif_baixo;
  std::optional<double> jensen;
  std::optional<double> gaussian;
  std::optional<double> floor;

  double positivity_value() const;
  double unif_baixo_value() const;
  double jensen_value() const;
  double gaussian_value() const;
};

LowerBounds lower_bounds(const EnergyParams& p);

namespace detail {

// Raw-array energy/gradient used by the inner solvers. Non-monotone or
// degenerate arrays saturate instead of throwing; the gradient functions
// return false in that case.
double free_energy_raw(std::span<const double> x, const EnergyParams& p);
bool energy_gradient_raw(std::span<const double> x, const EnergyParams& p,
                         std::span<double> out);

}  // namespace detail

}  // namespace wgflow
