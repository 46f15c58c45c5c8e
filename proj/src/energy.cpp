#include "wgflow/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace wgflow {

double saturated_energy() { return std::numeric_limits<double>::infinity(); }

bool is_saturated(double e) { return std::isinf(e) && e > 0.0; }

InteractionKernel InteractionKernel::log_kernel(double gamma, double lambda_w) {
  InteractionKernel k;
  k.kind = KernelKind::Log;
  k.gamma = gamma;
  k.lambda_w = lambda_w;
  k.validate();
  return k;
}

InteractionKernel InteractionKernel::power_law(double beta, double lambda_w) {
  InteractionKernel k;
  k.kind = KernelKind::PowerLaw;
  k.beta = beta;
  k.lambda_w = lambda_w;
  k.validate();
  return k;
}

void InteractionKernel::validate() const {
  if (!(lambda_w >= 0.0) || !std::isfinite(lambda_w)) {
    throw std::domain_error("InteractionKernel: lambda_w must be >= 0");
  }
  if (kind == KernelKind::Log) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw std::domain_error("InteractionKernel: gamma must be > 0 for the log kernel");
    }
  } else {
    if (!(beta > 0.0 && beta < 1.0)) {
      throw std::domain_error(
          "InteractionKernel: beta must lie in (0,1); for beta >= 1 the "
          "power-law interaction energy is finite only on the zero measure");
    }
  }
}

double InteractionKernel::effective_log_strength() const {
  return kind == KernelKind::Log ? lambda_w * gamma : 0.0;
}

void EnergyParams::validate() const {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw std::domain_error("EnergyParams: kappa must be >= 0");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::domain_error("EnergyParams: alpha must be >= 0");
  }
  kernel.validate();
}

namespace {

// Quadrature weight of span i (of n-1 spans): 1/n inside, with the extreme
// half-cells folded into the first and last spans.
inline double span_weight(int i, int n) {
  double c = 1.0 / n;
  if (i == 0) c += 0.5 / n;
  if (i == n - 2) c += 0.5 / n;
  return c;
}

// Cell width around atom i under the piecewise-uniform convention (extreme
// cells extend half a span outward, so they are a full span wide).
inline double cell_width(std::span<const double> x, int i) {
  const int n = static_cast<int>(x.size());
  if (i == 0) return x[1] - x[0];
  if (i == n - 1) return x[static_cast<size_t>(n) - 1] - x[static_cast<size_t>(n) - 2];
  return 0.5 * (x[static_cast<size_t>(i) + 1] - x[static_cast<size_t>(i) - 1]);
}

bool strictly_sorted(std::span<const double> x) {
  for (size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) return false;
  }
  return true;
}

double entropy_raw(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  if (n < 2) return saturated_energy();
  double u = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double span = x[static_cast<size_t>(i) + 1] - x[static_cast<size_t>(i)];
    if (!(span > 0.0)) return saturated_energy();
    u -= span_weight(i, n) * std::log(n * span);
  }
  return u;
}

double confinement_raw(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return 0.5 * s / static_cast<double>(x.size());
}

double interaction_raw(std::span<const double> x, const InteractionKernel& k) {
  if (k.lambda_w == 0.0) return 0.0;
  const int n = static_cast<int>(x.size());
  if (n < 2 || !strictly_sorted(x)) return saturated_energy();
  const double n2 = static_cast<double>(n) * n;

  double off = 0.0;
  double diag = 0.0;
  if (k.kind == KernelKind::Log) {
    double sum_log = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        sum_log += std::log(x[static_cast<size_t>(j)] - x[static_cast<size_t>(i)]);
      }
    }
    off = -k.lambda_w * k.gamma / n2 * sum_log;
    double diag_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      diag_sum += 1.5 - std::log(cell_width(x, i));
    }
    diag = k.lambda_w * k.gamma / (2.0 * n2) * diag_sum;
  } else {
    const double b = k.beta;
    double sum_pow = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        sum_pow += std::pow(x[static_cast<size_t>(j)] - x[static_cast<size_t>(i)], -b);
      }
    }
    off = k.lambda_w / n2 * sum_pow;
    double diag_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      diag_sum += std::pow(cell_width(x, i), -b);
    }
    diag = k.lambda_w / n2 * diag_sum / ((1.0 - b) * (2.0 - b));
  }
  return off + diag;
}

}  // namespace

double entropy(const QuantileMeasure& q) { return entropy_raw(q.values()); }

double confinement(const QuantileMeasure& q) { return confinement_raw(q.values()); }

double interaction(const QuantileMeasure& q, const InteractionKernel& k) {
  k.validate();
  return interaction_raw(q.values(), k);
}

double free_energy(const QuantileMeasure& q, const EnergyParams& p) {
  p.validate();
  return detail::free_energy_raw(q.values(), p);
}

namespace detail {

double free_energy_raw(std::span<const double> x, const EnergyParams& p) {
  double e = 0.0;
  if (p.kappa > 0.0) {
    const double u = entropy_raw(x);
    if (is_saturated(u)) return saturated_energy();
    e += p.kappa * u;
  }
  if (p.alpha > 0.0) e += p.alpha * confinement_raw(x);
  if (p.kernel.lambda_w > 0.0) {
    const double w = interaction_raw(x, p.kernel);
    if (is_saturated(w)) return saturated_energy();
    e += w;
  }
  return e;
}

bool energy_gradient_raw(std::span<const double> x, const EnergyParams& p,
                         std::span<double> g) {
  const int n = static_cast<int>(x.size());
  std::fill(g.begin(), g.end(), 0.0);

  const bool needs_strict = p.kappa > 0.0 || p.kernel.lambda_w > 0.0;
  if (needs_strict && (n < 2 || !strictly_sorted(x))) return false;

  if (p.alpha > 0.0) {
    for (int i = 0; i < n; ++i) {
      g[static_cast<size_t>(i)] += p.alpha * x[static_cast<size_t>(i)] / n;
    }
  }

  if (p.kappa > 0.0) {
    for (int i = 0; i + 1 < n; ++i) {
      const double span = x[static_cast<size_t>(i) + 1] - x[static_cast<size_t>(i)];
      const double t = p.kappa * span_weight(i, n) / span;
      g[static_cast<size_t>(i)] += t;
      g[static_cast<size_t>(i) + 1] -= t;
    }
  }

  const InteractionKernel& k = p.kernel;
  if (k.lambda_w > 0.0) {
    const double n2 = static_cast<double>(n) * n;
    if (k.kind == KernelKind::Log) {
      const double c = k.lambda_w * k.gamma / n2;
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          s += 1.0 / (x[static_cast<size_t>(i)] - x[static_cast<size_t>(j)]);
        }
        g[static_cast<size_t>(i)] -= c * s;
      }
      // Self-cell terms: d/dx of (lambda_w gamma/(2 n^2)) (3/2 - log h_i).
      const double cd = k.lambda_w * k.gamma / (2.0 * n2);
      for (int i = 0; i < n; ++i) {
        const double h = cell_width(x, i);
        const double t = cd / h;
        if (i == 0) {
          g[1] -= t;
          g[0] += t;
        } else if (i == n - 1) {
          g[static_cast<size_t>(n) - 1] -= t;
          g[static_cast<size_t>(n) - 2] += t;
        } else {
          g[static_cast<size_t>(i) + 1] -= 0.5 * t;
          g[static_cast<size_t>(i) - 1] += 0.5 * t;
        }
      }
    } else {
      const double b = k.beta;
      const double c = k.lambda_w / n2;
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          const double d = x[static_cast<size_t>(i)] - x[static_cast<size_t>(j)];
          s += -b * ((d > 0.0) ? 1.0 : -1.0) * std::pow(std::abs(d), -b - 1.0);
        }
        g[static_cast<size_t>(i)] += c * s;
      }
      const double cd = k.lambda_w / n2 / ((1.0 - b) * (2.0 - b));
      for (int i = 0; i < n; ++i) {
        const double h = cell_width(x, i);
        const double t = cd * b * std::pow(h, -b - 1.0);
        if (i == 0) {
          g[1] -= t;
          g[0] += t;
        } else if (i == n - 1) {
          g[static_cast<size_t>(n) - 1] -= t;
          g[static_cast<size_t>(n) - 2] += t;
        } else {
          g[static_cast<size_t>(i) + 1] -= 0.5 * t;
          g[static_cast<size_t>(i) - 1] += 0.5 * t;
        }
      }
    }
  }
  return true;
}

}  // namespace detail

std::vector<double> energy_gradient(const QuantileMeasure& q,
                                    const EnergyParams& p) {
  p.validate();
  std::vector<double> g(static_cast<size_t>(q.n()));
  if (!detail::energy_gradient_raw(q.values(), p, g)) {
    throw saturation_error(
        "energy_gradient: energy saturates at this measure (degenerate spans)");
  }
  return g;
}

double LowerBounds::positivity_value() const {
  if (!positivity) throw std::domain_error("positivity bound not valid for these parameters");
  return *positivity;
}
double LowerBounds::unif_baixo_value() const {
  if (!unif_baixo) throw std::domain_error("confined-interaction bound requires alpha > 0");
  return *unif_baixo;
}
double LowerBounds::jensen_value() const {
  if (!jensen) throw std::domain_error("entropy-confinement bound requires kappa > 0 and alpha > 0");
  return *jensen;
}
double LowerBounds::gaussian_value() const {
  if (!gaussian) throw std::domain_error("Gaussian bound requires kappa > 0 and alpha > 0");
  return *gaussian;
}

LowerBounds lower_bounds(const EnergyParams& p) {
  p.validate();
  LowerBounds lb;
  const double geff = p.kernel.effective_log_strength();
  const double e = std::numbers::e;
  const double pi = std::numbers::pi;

  if (p.alpha > 0.0) {
    lb.unif_baixo = -0.5 * std::log(4.0 / (p.alpha * e));
  }
  if (p.kappa > 0.0 && p.alpha > 0.0) {
    // Relative entropy against the Gaussian with variance 2 kappa / alpha;
    // both routes give -(kappa/2) log(4 pi kappa / alpha).
    lb.jensen = 0.5 * p.kappa *
                (std::log(p.alpha / (2.0 * p.kappa)) - std::log(2.0 * pi));
    lb.gaussian = -0.5 * p.kappa * std::log(4.0 * pi * p.kappa / p.alpha);
  }
  if (p.kappa == 0.0 && p.alpha >= 1.0 && p.kernel.kind == KernelKind::Log &&
      geff >= 1.0 / pi - 1e-12 && geff <= 2.0 * std::sqrt(e)) {
    lb.positivity = 0.5 * std::log(e / 2.0);
  }

  // Strongest bound on the full energy that is valid for these parameters.
  const bool has_interaction = p.kernel.lambda_w > 0.0;
  std::optional<double> floor;
  if (!has_interaction || p.kernel.kind == KernelKind::PowerLaw) {
    // Power-law interaction is pointwise positive, so it only helps.
    if (p.kappa == 0.0) {
      floor = 0.0;
    } else if (p.alpha > 0.0) {
      floor = -0.5 * p.kappa * std::log(2.0 * pi * p.kappa / p.alpha);
    }
  } else if (p.alpha > 0.0) {
    // Split E = [(alpha/2)V + W] + [kappa U + (alpha/2)V]; each half has a
    // closed-form lower bound.
    double w_half = -0.25 * geff * std::log(4.0 * geff / (p.alpha * e));
    double uv_half =
        (p.kappa > 0.0) ? -0.5 * p.kappa * std::log(4.0 * pi * p.kappa / p.alpha)
                        : 0.0;
    floor = w_half + uv_half;
    if (lb.positivity && *lb.positivity > *floor) floor = lb.positivity;
  }
  lb.floor = floor;
  return lb;
}

}  // namespace wgflow
