#include "wgflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wgflow {

QuantileMeasure semicircle_quantiles(int n, double gamma) {
  if (n < 2) throw std::invalid_argument("semicircle_quantiles: n must be >= 2");
  if (!(gamma > 0.0)) throw std::invalid_argument("semicircle_quantiles: gamma must be > 0");
  const double r = std::sqrt(2.0 * gamma);
  const double pi = std::numbers::pi;

  auto cdf = [&](double x) {
    // F(x) = 1/2 + [x sqrt(2g - x^2) + 2g asin(x/sqrt(2g))] / (2 pi g)
    const double s = std::max(0.0, 2.0 * gamma - x * x);
    return 0.5 + (x * std::sqrt(s) + 2.0 * gamma * std::asin(std::clamp(x / r, -1.0, 1.0))) /
                     (2.0 * pi * gamma);
  };

  std::vector<double> x(static_cast<size_t>(n), 0.0);
  // Invert on the left half and mirror; the array comes out exactly
  // antisymmetric and the middle atom of an odd n is exactly 0.
  for (int i = 0; 2 * i < n - 1; ++i) {
    const double s = (i + 0.5) / n;
    double lo = -r, hi = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * r; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (cdf(mid) < s) lo = mid; else hi = mid;
    }
    const double v = 0.5 * (lo + hi);
    x[static_cast<size_t>(i)] = v;
    x[static_cast<size_t>(n - 1 - i)] = -v;
  }
  return QuantileMeasure(std::move(x));
}

EquilibriumSpec semicircle_equilibrium(const EnergyParams& p, int n) {
  p.validate();
  if (p.kappa != 0.0 || p.kernel.kind != KernelKind::Log ||
      !(p.kernel.lambda_w > 0.0) || !(p.alpha > 0.0)) {
    throw std::domain_error(
        "semicircle_equilibrium: closed form exists only for kappa == 0 with "
        "an active log kernel and alpha > 0");
  }
  QuantileMeasure state =
      semicircle_quantiles(n, p.kernel.effective_log_strength() / p.alpha);
  const double theta = free_energy(state, p);
  std::vector<double> g(static_cast<size_t>(n));
  detail::energy_gradient_raw(state.values(), p, g);
  double norm = 0.0;
  for (double v : g) norm += v * v;
  return {EquilibriumKind::SemicircleClosedForm, p, theta, std::move(state),
          std::sqrt(norm), 0.0, 0};
}

EquilibriumSpec minimize_energy(const EnergyParams& p, int n, const JkoConfig& cfg) {
  p.validate();
  cfg.validate();
  if (!(p.alpha > 0.0)) {
    throw std::domain_error("minimize_energy: requires alpha > 0 (coercivity)");
  }
  if (n < 2) throw std::invalid_argument("minimize_energy: n must be >= 2");

  // Three deliberately different starting measures.
  std::vector<QuantileMeasure> inits;
  inits.push_back(uniform_quantiles(n, -1.0, 1.0));
  inits.push_back(gaussian_quantiles(n, 0.5, 1.2));
  inits.push_back(uniform_quantiles(n, 0.25, 2.25));

  // Relax by JKO for ~6/alpha time units, then polish on E directly.
  JkoConfig warm = cfg;
  warm.tau = std::max(cfg.tau, 1e-2);
  const int warm_steps = static_cast<int>(std::ceil(6.0 / (p.alpha * warm.tau)));

  detail::InnerProblem prob;
  prob.use_isotonic_projection = (p.kappa == 0.0);
  prob.initial_step = static_cast<double>(n) / std::max(p.alpha, 1.0);
  prob.value = [&](const std::vector<double>& x) {
    return detail::free_energy_raw(x, p);
  };
  prob.grad = [&](const std::vector<double>& x, std::vector<double>& g) {
    return detail::energy_gradient_raw(x, p, g);
  };

  std::vector<detail::InnerResult> results;
  long iterations = 0;
  for (const auto& init : inits) {
    FlowTrajectory t = run_flow(init, warm_steps, warm, p);
    iterations += t.total_inner_iterations;
    detail::InnerResult r =
        detail::minimize_monotone(prob, t.states.back().values(), cfg);
    iterations += r.iterations;
    if (!r.converged) {
      throw convergence_failure("minimize_energy: polish stage did not converge",
                                r.x, r.pg_norm, r.iterations);
    }
    results.push_back(std::move(r));
  }

  size_t best = 0;
  for (size_t i = 1; i < results.size(); ++i) {
    if (results[i].value < results[best].value) best = i;
  }
  double spread = 0.0;
  for (size_t i = 0; i < results.size(); ++i) {
    for (size_t j = i + 1; j < results.size(); ++j) {
      spread = std::max(spread, wasserstein2(QuantileMeasure(results[i].x),
                                             QuantileMeasure(results[j].x)));
    }
  }

  EquilibriumSpec spec{EquilibriumKind::NumericalMinimizer,
                       p,
                       results[best].value,
                       QuantileMeasure(results[best].x),
                       results[best].pg_norm,
                       spread,
                       iterations};
  return spec;
}

namespace {

// Logarithmic potential int log|x - y| drho(y) of the atom representation,
// with the self-cell (when x is atom i) integrated in closed form:
// (1/n) (log(h/2) - 1) for a cell of width h centered at x.
double log_potential(const QuantileMeasure& q, double x, int self_index) {
  const auto& a = q.values();
  const int n = q.n();
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == self_index) continue;
    s += std::log(std::abs(x - a[static_cast<size_t>(j)]));
  }
  if (self_index >= 0) {
    double h;
    if (self_index == 0) {
      h = a[1] - a[0];
    } else if (self_index == n - 1) {
      h = a[static_cast<size_t>(n) - 1] - a[static_cast<size_t>(n) - 2];
    } else {
      h = 0.5 * (a[static_cast<size_t>(self_index) + 1] -
                 a[static_cast<size_t>(self_index) - 1]);
    }
    s += std::log(0.5 * h) - 1.0;
  }
  return s / n;
}

}  // namespace

CharacterizationResidual characterization_residual(const QuantileMeasure& rho_bar,
                                                   double gamma) {
  if (!rho_bar.strictly_increasing()) {
    throw std::domain_error("characterization_residual: measure must be strictly increasing");
  }
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("characterization_residual: gamma must be > 0");
  }
  const int n = rho_bar.n();

  double lo = saturated_energy(), hi = -saturated_energy(), sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rho_bar[i];
    const double phi = 0.5 * x * x - gamma * log_potential(rho_bar, x, i);
    lo = std::min(lo, phi);
    hi = std::max(hi, phi);
    sum += phi;
  }

  CharacterizationResidual r;
  r.support_spread = hi - lo;
  r.support_value = sum / n;

  const double radius = std::sqrt(2.0 * gamma);
  double min_gap = saturated_energy();
  for (double f : {0.25, 0.5, 1.0}) {
    for (double x : {rho_bar.back() + f * radius, rho_bar.front() - f * radius}) {
      const double phi = 0.5 * x * x - gamma * log_potential(rho_bar, x, -1);
      min_gap = std::min(min_gap, phi - r.support_value);
    }
  }
  r.off_support_min_gap = min_gap;

  const double theta = confinement(rho_bar) +
                       interaction(rho_bar, InteractionKernel::log_kernel(gamma));
  r.c_energy_formula = 2.0 * theta - confinement(rho_bar);
  return r;
}

RateFit fit_decay_rate(const std::vector<double>& times,
                       const std::vector<double>& values, double floor) {
  if (times.size() != values.size()) {
    throw std::invalid_argument("fit_decay_rate: times/values size mismatch");
  }
  const size_t m = times.size();
  for (size_t i = 1; i < m; ++i) {
    if (!(times[i] > times[i - 1])) {
      throw std::invalid_argument("fit_decay_rate: times must be strictly increasing");
    }
  }
  // Trim the transient head (20%) and the floor-noise tail (5%).
  const size_t first = static_cast<size_t>(std::floor(0.2 * static_cast<double>(m)));
  const size_t last = std::min(m, static_cast<size_t>(std::ceil(0.95 * static_cast<double>(m))));

  std::vector<double> ts, ys;
  size_t used_first = m, used_last = 0;
  for (size_t i = first; i < last; ++i) {
    if (values[i] > floor) {
      ts.push_back(times[i]);
      ys.push_back(std::log(values[i] - floor));
      used_first = std::min(used_first, i);
      used_last = std::max(used_last, i);
    }
  }
  if (ts.size() < 3) {
    throw std::invalid_argument("fit_decay_rate: fewer than 3 usable samples in the fit window");
  }

  const double k = static_cast<double>(ts.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += ys[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * ys[i];
  }
  const double denom = k * stt - st * st;
  if (denom == 0.0) throw std::invalid_argument("fit_decay_rate: degenerate time window");
  const double slope = (k * sty - st * sy) / denom;
  const double intercept = (sy - slope * st) / k;

  double rss = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    const double e = ys[i] - (intercept + slope * ts[i]);
    rss += e * e;
  }

  RateFit fit;
  fit.rate = -slope;
  fit.intercept = intercept;
  fit.residual = std::sqrt(rss / k);
  fit.window_first = static_cast<int>(used_first);
  fit.window_last = static_cast<int>(used_last);
  return fit;
}

std::vector<SweepRow> inviscid_sweep(const QuantileMeasure& initial,
                                     const std::vector<double>& kappas,
                                     double t_final, const JkoConfig& cfg,
                                     const EnergyParams& p_base) {
  if (!initial.strictly_increasing()) {
    throw std::domain_error("inviscid_sweep: initial datum must be strictly increasing");
  }
  if (kappas.empty()) throw std::invalid_argument("inviscid_sweep: empty kappa list");
  for (size_t i = 0; i < kappas.size(); ++i) {
    if (!(kappas[i] > 0.0)) {
      throw std::invalid_argument("inviscid_sweep: kappas must be > 0");
    }
    if (i > 0 && !(kappas[i] < kappas[i - 1])) {
      throw std::invalid_argument("inviscid_sweep: kappas must be sorted descending");
    }
  }
  const int steps = std::max(1, static_cast<int>(std::llround(t_final / cfg.tau)));

  EnergyParams inviscid = p_base;
  inviscid.kappa = 0.0;
  FlowTrajectory ref = run_flow(initial, steps, cfg, inviscid);

  std::vector<SweepRow> table;
  for (double kappa : kappas) {
    EnergyParams viscous = p_base;
    viscous.kappa = kappa;
    FlowTrajectory t = run_flow(initial, steps, cfg, viscous);
    double sup = 0.0;
    for (size_t k = 0; k < t.states.size(); ++k) {
      sup = std::max(sup, wasserstein2(t.states[k], ref.states[k]));
    }
    table.push_back({kappa, sup});
  }
  return table;
}

double BumpFunction::value(double x) const {
  const double u = (x - center) / width;
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

double BumpFunction::d1(double x) const {
  const double u = (x - center) / width;
  if (std::abs(u) >= 1.0) return 0.0;
  const double s = 1.0 - u * u;
  return std::exp(-1.0 / s) * (-2.0 * u / (s * s)) / width;
}

double BumpFunction::d2(double x) const {
  const double u = (x - center) / width;
  if (std::abs(u) >= 1.0) return 0.0;
  const double s = 1.0 - u * u;
  const double b = std::exp(-1.0 / s);
  const double inner = 4.0 * u * u / (s * s * s * s) - 2.0 / (s * s) - 8.0 * u * u / (s * s * s);
  return b * inner / (width * width);
}

std::vector<BumpFunction> default_bump_family(const FlowTrajectory& t) {
  double lo = t.states.front().front(), hi = t.states.front().back();
  for (const auto& s : t.states) {
    lo = std::min(lo, s.front());
    hi = std::max(hi, s.back());
  }
  const double pad = 0.25 * (hi - lo) + 1e-6;
  lo -= pad;
  hi += pad;
  std::vector<BumpFunction> fam;
  const int count = 5;
  const double width = (hi - lo) / 2.5;
  for (int k = 0; k < count; ++k) {
    const double c = lo + (hi - lo) * (k + 0.5) / count;
    fam.push_back({c, width});
  }
  return fam;
}

WeakResidualReport weak_residual(const FlowTrajectory& t, const EnergyParams& p,
                                 const std::vector<BumpFunction>& test_fns) {
  if (t.states.size() < 3) {
    throw std::invalid_argument("weak_residual: need at least 3 states for centered differencing");
  }
  p.validate();
  const int n = t.states.front().n();
  const size_t m = t.states.size();

  WeakResidualReport rep;
  for (const BumpFunction& phi : test_fns) {
    // Moments (1/n) sum phi(x_i) along the trajectory.
    std::vector<double> moment(m, 0.0);
    for (size_t k = 0; k < m; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += phi.value(t.states[k][i]);
      moment[k] = s / n;
    }

    double worst = 0.0;
    double scale = 0.0;
    for (size_t k = 1; k + 1 < m; ++k) {
      const auto& x = t.states[k].values();
      double term_u = 0.0, term_v = 0.0, term_w = 0.0;
      for (int i = 0; i < n; ++i) {
        const double xi = x[static_cast<size_t>(i)];
        term_u += phi.d2(xi);
        term_v += phi.d1(xi) * xi;
      }
      term_u *= p.kappa / n;
      term_v *= p.alpha / n;

      if (p.kernel.lambda_w > 0.0) {
        const double n2 = static_cast<double>(n) * n;
        double s = 0.0;
        if (p.kernel.kind == KernelKind::Log) {
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              const double d = x[static_cast<size_t>(i)] - x[static_cast<size_t>(j)];
              s += (i == j) ? phi.d2(x[static_cast<size_t>(i)])
                            : (phi.d1(x[static_cast<size_t>(i)]) -
                               phi.d1(x[static_cast<size_t>(j)])) / d;
            }
          }
          term_w = 0.5 * p.kernel.lambda_w * p.kernel.gamma * s / n2;
        } else {
          const double b = p.kernel.beta;
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              if (i == j) {
                // Self-cell average of |d|^{-beta} over the cell pair.
                double h;
                if (i == 0) {
                  h = x[1] - x[0];
                } else if (i == n - 1) {
                  h = x[static_cast<size_t>(n) - 1] - x[static_cast<size_t>(n) - 2];
                } else {
                  h = 0.5 * (x[static_cast<size_t>(i) + 1] - x[static_cast<size_t>(i) - 1]);
                }
                s += phi.d2(x[static_cast<size_t>(i)]) * std::pow(h, -b) * 2.0 /
                     ((1.0 - b) * (2.0 - b));
              } else {
                const double d = x[static_cast<size_t>(i)] - x[static_cast<size_t>(j)];
                s += std::pow(std::abs(d), -b) *
                     (phi.d1(x[static_cast<size_t>(i)]) -
                      phi.d1(x[static_cast<size_t>(j)])) / d;
              }
            }
          }
          term_w = 0.5 * p.kernel.lambda_w * b * s / n2;
        }
      }

      const double lhs = (moment[k + 1] - moment[k - 1]) /
                         (t.times[k + 1] - t.times[k - 1]);
      const double rhs = term_u - term_v + term_w;
      worst = std::max(worst, std::abs(lhs - rhs));
      scale = std::max(scale, std::abs(term_u) + std::abs(term_v) + std::abs(term_w));
    }
    rep.per_function.push_back(worst / std::max(scale, 1e-12));
  }
  rep.max_normalized = *std::max_element(rep.per_function.begin(), rep.per_function.end());
  return rep;
}

}  // namespace wgflow
