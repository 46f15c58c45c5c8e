#include "wgflow/selfsimilar.hpp"

#include <cmath>
#include <stdexcept>

namespace wgflow {

namespace {

QuantileMeasure scale_measure(const QuantileMeasure& q, double s) {
  std::vector<double> x(q.values());
  for (double& v : x) v *= s;
  return QuantileMeasure(std::move(x));
}

}  // namespace

std::pair<QuantileMeasure, double> to_selfsimilar(const QuantileMeasure& q,
                                                  double t) {
  if (!(t >= 0.0)) throw std::domain_error("to_selfsimilar: t must be >= 0");
  const double tau = 0.5 * std::log1p(2.0 * t);
  return {scale_measure(q, 1.0 / std::sqrt(1.0 + 2.0 * t)), tau};
}

std::pair<QuantileMeasure, double> from_selfsimilar(const QuantileMeasure& q,
                                                    double tau) {
  if (!(tau >= 0.0)) throw std::domain_error("from_selfsimilar: tau must be >= 0");
  const double t = 0.5 * std::expm1(2.0 * tau);
  return {scale_measure(q, std::exp(tau)), t};
}

FlowTrajectory original_frame_flow(const QuantileMeasure& initial,
                                   double t_final, const JkoConfig& cfg,
                                   const EnergyParams& p_base) {
  if (p_base.alpha != 0.0) {
    throw std::invalid_argument(
        "original_frame_flow: the original frame has no confinement; pass "
        "alpha == 0 (the rescaled alpha = 1 flow is run internally)");
  }
  if (!(t_final >= 0.0)) {
    throw std::domain_error("original_frame_flow: t_final must be >= 0");
  }

  EnergyParams rescaled = p_base;
  rescaled.alpha = 1.0;

  const double tau_final = 0.5 * std::log1p(2.0 * t_final);
  const int steps = std::max(0, static_cast<int>(std::ceil(tau_final / cfg.tau - 1e-12)));

  FlowTrajectory out;
  out.tau = cfg.tau;
  out.times.push_back(0.0);
  out.states.push_back(initial);
  out.energies.push_back(free_energy(initial, p_base));
  out.step_distances.push_back(0.0);
  out.dissipation_sums.push_back(0.0);
  if (steps == 0) return out;

  FlowTrajectory resc = run_flow(initial, steps, cfg, rescaled);
  for (int k = 1; k <= steps; ++k) {
    const double tau_k = resc.times[static_cast<size_t>(k)];
    auto [state, t_k] = from_selfsimilar(resc.states[static_cast<size_t>(k)], tau_k);
    const double d = wasserstein2(out.states.back(), state);
    out.times.push_back(t_k);
    out.energies.push_back(free_energy(state, p_base));
    out.states.push_back(std::move(state));
    out.step_distances.push_back(d);
    const double dt = out.times[static_cast<size_t>(k)] - out.times[static_cast<size_t>(k) - 1];
    out.dissipation_sums.push_back(out.dissipation_sums.back() + d * d / (2.0 * dt));
  }
  out.total_inner_iterations = resc.total_inner_iterations;
  out.max_step_iterations = resc.max_step_iterations;
  out.tie_break_magnitude = resc.tie_break_magnitude;
  return out;
}

}  // namespace wgflow
