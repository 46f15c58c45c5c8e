#include "wgflow/jko.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace wgflow {

void JkoConfig::validate() const {
  if (!(tau > 0.0)) throw std::domain_error("JkoConfig: tau must be > 0");
  if (max_inner_iters < 1) throw std::domain_error("JkoConfig: max_inner_iters must be >= 1");
  if (!(grad_tol > 0.0)) throw std::domain_error("JkoConfig: grad_tol must be > 0");
  if (!(obj_tol > 0.0)) throw std::domain_error("JkoConfig: obj_tol must be > 0");
  if (!(backtrack_shrink > 0.0 && backtrack_shrink < 1.0)) {
    throw std::domain_error("JkoConfig: backtrack_shrink must lie in (0,1)");
  }
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) {
    throw std::domain_error("JkoConfig: armijo_c must lie in (0,1)");
  }
}

double jko_objective(const QuantileMeasure& candidate, const QuantileMeasure& prev,
                     double tau, const EnergyParams& p) {
  if (candidate.n() != prev.n()) {
    throw std::invalid_argument("jko_objective: resolution mismatch");
  }
  if (!(tau > 0.0)) throw std::domain_error("jko_objective: tau must be > 0");
  const double e = free_energy(candidate, p);
  if (is_saturated(e)) return saturated_energy();
  return wasserstein2_squared(prev, candidate) / (2.0 * tau) + e;
}

convergence_failure::convergence_failure(std::string msg, std::vector<double> best,
                                         double pg_norm, int iterations)
    : std::runtime_error(std::move(msg)),
      best_(std::move(best)),
      pg_norm_(pg_norm),
      iterations_(iterations) {}

flow_failure::flow_failure(std::string msg, FlowTrajectory partial)
    : std::runtime_error(std::move(msg)), partial_(std::move(partial)) {}

namespace detail {

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

// Projected point for one trial step; identity projection in barrier mode.
std::vector<double> trial_point(const std::vector<double>& x,
                                const std::vector<double>& g, double s,
                                bool project) {
  std::vector<double> y(x.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] - s * g[i];
  if (project) y = isotonic_project(std::move(y));
  return y;
}

}  // namespace

InnerResult minimize_monotone(const InnerProblem& prob, std::vector<double> x0,
                              const JkoConfig& cfg) {
  InnerResult res;
  res.x = std::move(x0);
  const size_t n = res.x.size();

  std::vector<double> g(n), g_prev(n), x_prev(n);
  double f = prob.value(res.x);
  if (is_saturated(f) || !prob.grad(res.x, g)) {
    throw convergence_failure("inner solver started outside the energy domain",
                              res.x, std::numeric_limits<double>::quiet_NaN(), 0);
  }

  auto pg_norm_at = [&](const std::vector<double>& x,
                        const std::vector<double>& grad) {
    if (!prob.use_isotonic_projection) return norm2(grad);
    std::vector<double> y = trial_point(x, grad, 1.0, true);
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double d = x[i] - y[i];
      s += d * d;
    }
    return std::sqrt(s);
  };

  double step = prob.initial_step;
  double pg = pg_norm_at(res.x, g);
  int unproductive = 0;   // iterations improving neither objective nor gradient
  int no_move_count = 0;  // consecutive iterations with no representable move
  double best_pg = pg;
  int it = 0;
  for (; it < cfg.max_inner_iters && pg > cfg.grad_tol; ++it) {
    // Armijo backtracking from the current step proposal. Decreases below
    // the floating-point resolution of the objective are accepted as
    // neutral; the gradient stays accurate there and keeps contracting.
    const double fp_slack = 64.0 * std::numeric_limits<double>::epsilon() *
                            (1.0 + std::abs(f));
    bool accepted = false;
    std::vector<double> y;
    double fy = 0.0;
    for (int bt = 0; bt < 80; ++bt) {
      y = trial_point(res.x, g, step, prob.use_isotonic_projection);
      fy = prob.value(y);
      if (!is_saturated(fy)) {
        double dist2 = 0.0;
        for (size_t i = 0; i < n; ++i) {
          const double d = y[i] - res.x[i];
          dist2 += d * d;
        }
        if (dist2 == 0.0) break;  // projection fixed point
        if (fy <= f - cfg.armijo_c / step * dist2 + fp_slack) {
          accepted = true;
          break;
        }
      }
      step *= cfg.backtrack_shrink;
    }
    if (!accepted) break;  // step underflow; report whatever accuracy we have

    double move2 = 0.0;
    double xnorm2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double d = y[i] - res.x[i];
      move2 += d * d;
      xnorm2 += res.x[i] * res.x[i];
    }
    x_prev = res.x;
    g_prev = g;
    res.x = std::move(y);
    const double f_new = fy;
    if (!prob.grad(res.x, g)) {
      throw convergence_failure("inner solver produced an infeasible iterate",
                                res.x, pg, it + 1);
    }
    const double eps_move = 64.0 * std::numeric_limits<double>::epsilon() *
                            (1.0 + std::sqrt(xnorm2));
    if (move2 <= eps_move * eps_move) {
      if (++no_move_count >= 3) { ++it; break; }  // at the representable floor
    } else {
      no_move_count = 0;
    }

    // Barzilai-Borwein step proposal for the next iteration, safeguarded by
    // the Armijo loop above.
    double sy = 0.0, ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double dx = res.x[i] - x_prev[i];
      const double dg = g[i] - g_prev[i];
      sy += dx * dg;
      ss += dx * dx;
    }
    if (sy > 0.0 && ss > 0.0) {
      step = ss / sy;
    } else {
      step *= 2.0;
    }

    const double decrease = f - f_new;
    f = f_new;
    pg = pg_norm_at(res.x, g);
    const bool improved_pg = pg < best_pg;
    if (improved_pg) best_pg = pg;
    if (improved_pg || decrease > cfg.obj_tol * (1.0 + std::abs(f))) {
      unproductive = 0;
    } else if (++unproductive >= 400) {
      ++it;  // neither objective nor gradient moving; stop where we are
      break;
    }
  }

  res.value = f;
  res.pg_norm = pg;
  res.iterations = it;
  res.converged = pg <= 10.0 * cfg.grad_tol;
  return res;
}

std::vector<double> tie_break(const std::vector<double>& x, double* magnitude) {
  std::vector<double> y = x;
  const size_t n = y.size();
  double span = y.back() - y.front();
  double scale = std::max({1.0, std::abs(y.front()), std::abs(y.back()), span});
  double applied = 0.0;

  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && y[j + 1] == y[i]) ++j;
    if (j > i) {
      const double left_gap = (i == 0) ? scale : y[i] - y[i - 1];
      const double right_gap = (j + 1 == n) ? scale : y[j + 1] - y[j];
      double half = std::min({1e-8 * scale, left_gap / 4.0, right_gap / 4.0});
      if (half <= 0.0) half = 1e-8 * scale;
      const double c = y[i];
      const size_t k = j - i + 1;
      for (size_t t = 0; t < k; ++t) {
        const double u = (2.0 * static_cast<double>(t) - static_cast<double>(k - 1)) /
                         static_cast<double>(k - 1);
        y[i + t] = c + half * u;
      }
      applied = std::max(applied, half);
    }
    i = j + 1;
  }
  if (magnitude) *magnitude = applied;
  return y;
}

}  // namespace detail

QuantileMeasure jko_step(const QuantileMeasure& prev, const JkoConfig& cfg,
                         const EnergyParams& p, JkoStepStats* stats) {
  cfg.validate();
  p.validate();
  const int n = prev.n();
  const auto& px = prev.values();

  const bool needs_strict = p.kappa > 0.0 || p.kernel.lambda_w > 0.0;
  double jitter = 0.0;
  std::vector<double> x0 = px;
  if (needs_strict && !prev.strictly_increasing()) {
    x0 = detail::tie_break(px, &jitter);
  }

  detail::InnerProblem prob;
  prob.use_isotonic_projection = (p.kappa == 0.0);
  prob.initial_step = n * cfg.tau / (1.0 + p.alpha * cfg.tau);
  const double inv_2tau_n = 1.0 / (2.0 * cfg.tau * n);
  prob.value = [&, inv_2tau_n](const std::vector<double>& x) {
    double metric = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - px[i];
      metric += d * d;
    }
    const double e = detail::free_energy_raw(x, p);
    if (is_saturated(e)) return saturated_energy();
    return inv_2tau_n * metric + e;
  };
  prob.grad = [&](const std::vector<double>& x, std::vector<double>& g) {
    if (!detail::energy_gradient_raw(x, p, g)) return false;
    const double c = 1.0 / (cfg.tau * n);
    for (size_t i = 0; i < x.size(); ++i) g[i] += c * (x[i] - px[i]);
    return true;
  };

  detail::InnerResult r = detail::minimize_monotone(prob, std::move(x0), cfg);
  if (stats) {
    stats->iterations = r.iterations;
    stats->pg_norm = r.pg_norm;
    stats->objective = r.value;
    stats->tie_break_magnitude = jitter;
  }
  if (!r.converged) {
    throw convergence_failure("jko_step: inner solver hit the iteration cap",
                              r.x, r.pg_norm, r.iterations);
  }
  // The solver keeps iterates in the monotone cone (by projection or by the
  // barrier), so this constructor cannot fail on ordering.
  return QuantileMeasure(std::move(r.x));
}

FlowTrajectory run_flow(const QuantileMeasure& initial, int steps,
                        const JkoConfig& cfg, const EnergyParams& p) {
  if (steps < 1) throw std::invalid_argument("run_flow: steps must be >= 1");
  cfg.validate();
  p.validate();

  FlowTrajectory t;
  t.tau = cfg.tau;
  t.times.push_back(0.0);
  t.states.push_back(initial);
  t.energies.push_back(free_energy(initial, p));
  t.step_distances.push_back(0.0);
  t.dissipation_sums.push_back(0.0);

  for (int k = 1; k <= steps; ++k) {
    JkoStepStats stats;
    QuantileMeasure next = [&] {
      try {
        return jko_step(t.states.back(), cfg, p, &stats);
      } catch (const convergence_failure& e) {
        throw flow_failure(std::string("run_flow: step failed: ") + e.what(), t);
      }
    }();
    const double d = wasserstein2(t.states.back(), next);
    t.times.push_back(k * cfg.tau);
    t.energies.push_back(free_energy(next, p));
    t.states.push_back(std::move(next));
    t.step_distances.push_back(d);
    t.dissipation_sums.push_back(t.dissipation_sums.back() +
                                 d * d / (2.0 * cfg.tau));
    t.total_inner_iterations += stats.iterations;
    t.max_step_iterations = std::max(t.max_step_iterations, stats.iterations);
    t.tie_break_magnitude = std::max(t.tie_break_magnitude, stats.tie_break_magnitude);
  }
  return t;
}

DissipationReport dissipation_report(const FlowTrajectory& t) {
  if (t.states.size() < 2) {
    throw std::invalid_argument("dissipation_report: need at least 2 states");
  }
  DissipationReport r;
  r.energy_drop = t.energies.front() - t.energies.back();
  double s = 0.0;
  for (size_t k = 1; k < t.step_distances.size(); ++k) {
    s += t.step_distances[k] * t.step_distances[k];
  }
  r.dissipation_sum = s / t.tau;
  if (r.energy_drop != 0.0) {
    r.ratio = r.dissipation_sum / r.energy_drop;
  } else {
    r.ratio = (r.dissipation_sum == 0.0) ? 1.0 : saturated_energy();
  }
  return r;
}

}  // namespace wgflow
