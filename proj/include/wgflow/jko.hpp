// Minimizing-movement engine: one implicit step minimizes
// d2^2/(2 tau) + E over monotone quantile arrays; the outer loop records the
// energy/distance/dissipation ledger.
#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wgflow/energy.hpp"
#include "wgflow/measure.hpp"

namespace wgflow {

struct JkoConfig {
  double tau = 1e-2;
  int max_inner_iters = 5000;
  double grad_tol = 1e-8;      // stopping tolerance on projected-gradient norm
  double obj_tol = 1e-12;      // relative objective-decrease stall tolerance
  double backtrack_shrink = 0.5;
  double armijo_c = 1e-4;

  void validate() const;
};

/// (1/(2 tau)) d2^2(prev, candidate) + E[candidate]. Saturates with E.
double jko_objective(const QuantileMeasure& candidate,
                     const QuantileMeasure& prev, double tau,
                     const EnergyParams& p);

struct JkoStepStats {
  int iterations = 0;
  double pg_norm = 0.0;          // projected-gradient norm at the solution
  double objective = 0.0;
  double tie_break_magnitude = 0.0;  // jitter applied to a tied start, if any
};

/// Carries the best iterate when the inner solver runs out of iterations.
class convergence_failure : public std::runtime_error {
 public:
  convergence_failure(std::string msg, std::vector<double> best,
                      double pg_norm, int iterations);
  const std::vector<double>& best_iterate() const { return best_; }
  double pg_norm() const { return pg_norm_; }
  int iterations() const { return iterations_; }

 private:
  std::vector<double> best_;
  double pg_norm_;
  int iterations_;
};

/// One implicit Euler step from prev. Inner solve: Barzilai-Borwein steps
/// with an Armijo backtracking safeguard; iterates are kept monotone by
/// isotonic projection when kappa == 0 and by the entropy log-barrier
/// (saturated trials are rejected and the step shrunk) when kappa > 0.
/// A previous iterate with ties is started from a mass-preserving jittered
/// copy when the energy requires strict monotonicity; the jitter magnitude
/// is reported in stats.
QuantileMeasure jko_step(const QuantileMeasure& prev, const JkoConfig& cfg,
                         const EnergyParams& p, JkoStepStats* stats = nullptr);

struct FlowTrajectory {
  std::vector<double> times;             // step times k*tau, starting at 0
  std::vector<QuantileMeasure> states;   // states[0] == initial
  std::vector<double> energies;          // E at each state
  std::vector<double> step_distances;    // d2(state[k-1], state[k]); [0] = 0
  std::vector<double> dissipation_sums;  // running sum d2^2/(2 tau)
  double tau = 0.0;

  long total_inner_iterations = 0;
  int max_step_iterations = 0;
  double tie_break_magnitude = 0.0;

  int steps() const { return static_cast<int>(states.size()) - 1; }
};

/// Carries the trajectory computed so far when a step fails.
class flow_failure : public std::runtime_error {
 public:
  flow_failure(std::string msg, FlowTrajectory partial);
  const FlowTrajectory& partial() const { return partial_; }

 private:
  FlowTrajectory partial_;
};

FlowTrajectory run_flow(const QuantileMeasure& initial, int steps,
                        const JkoConfig& cfg, const EnergyParams& p);

struct DissipationReport {
  double energy_drop = 0.0;      // E[state 0] - E[state N]
  double dissipation_sum = 0.0;  // sum d2^2 / tau
  double ratio = 1.0;            // dissipation_sum / energy_drop
};

/// Discrete energy-dissipation ledger; the ratio tends to 1 as tau -> 0 on
/// smooth flows, and the per-step minimality inequality gives
/// sum d2^2/(2 tau) <= energy_drop.
DissipationReport dissipation_report(const FlowTrajectory& t);

namespace detail {

// Shared BB + Armijo descent over the monotone cone. Used by jko_step and by
// the direct energy minimization in diagnostics.
struct InnerProblem {
  // Value must return saturated_energy() on infeasible points.
  std::function<double(const std::vector<double>&)> value;
  // Returns false when the gradient does not exist at x.
  std::function<bool(const std::vector<double>&, std::vector<double>&)> grad;
  bool use_isotonic_projection = false;
  double initial_step = 1.0;
};

struct InnerResult {
  std::vector<double> x;
  double value = 0.0;
  double pg_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

InnerResult minimize_monotone(const InnerProblem& prob,
                              std::vector<double> x0, const JkoConfig& cfg);

std::vector<double> tie_break(const std::vector<double>& x, double* magnitude);

}  // namespace detail

}  // namespace wgflow
