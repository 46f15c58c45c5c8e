#include "wgflow/selfsimilar.hpp"

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "test_support.hpp"
#include "wgflow/diagnostics.hpp"

using namespace wgflow;

TEST_CASE("transform closed forms") {
  wgtest::Rng rng(81);
  auto q = rng.monotone_measure(64);

  auto [same, tau0] = to_selfsimilar(q, 0.0);
  CHECK(tau0 == 0.0);
  CHECK(wgtest::max_abs_diff(same.values(), q.values()) == 0.0);

  // t = 1.5: scale (1+2t)^(-1/2) = 1/2 and tau = log 2.
  auto [half, tau] = to_selfsimilar(q, 1.5);
  CHECK(tau == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  for (int i = 0; i < q.n(); ++i) {
    CHECK(half[i] == doctest::Approx(0.5 * q[i]).epsilon(1e-15));
  }

  auto [doubled, t_back] = from_selfsimilar(q, std::log(2.0));
  CHECK(t_back == doctest::Approx(1.5).epsilon(1e-14));
  for (int i = 0; i < q.n(); ++i) {
    CHECK(doubled[i] == doctest::Approx(2.0 * q[i]).epsilon(1e-15));
  }

  CHECK_THROWS_AS(to_selfsimilar(q, -0.1), std::domain_error);
  CHECK_THROWS_AS(from_selfsimilar(q, -0.1), std::domain_error);
}

TEST_CASE("transform preserves structure") {
  wgtest::Rng rng(83);
  auto a = rng.monotone_measure(48), b = rng.monotone_measure(48);
  const double t = 2.7;

  auto [sa, tau_a] = to_selfsimilar(a, t);
  auto [sb, tau_b] = to_selfsimilar(b, t);
  CHECK(tau_a == tau_b);
  CHECK(sa.n() == a.n());

  // Common dilation scales d2 linearly.
  const double scale = 1.0 / std::sqrt(1.0 + 2.0 * t);
  CHECK(wasserstein2(sa, sb) == doctest::Approx(scale * wasserstein2(a, b)).epsilon(1e-13));

  // Second moments transform by 1/(1+2t).
  CHECK(sa.second_moment() ==
        doctest::Approx(a.second_moment() / (1.0 + 2.0 * t)).epsilon(1e-13));

  // Round trip to rounding.
  auto [back, t2] = from_selfsimilar(sa, tau_a);
  CHECK(wgtest::max_abs_diff(back.values(), a.values()) < 1e-12);
  CHECK(t2 == doctest::Approx(t).epsilon(1e-13));
}

TEST_CASE("original frame flow spreads the semicircle self-similarly") {
  // The rescaled flow holds the equilibrium fixed, so the original-frame
  // solution is the profile dilated by (1+2t)^(1/2).
  EnergyParams p;
  p.alpha = 0.0;
  p.kernel = InteractionKernel::log_kernel(1.0);
  JkoConfig cfg;
  cfg.tau = 1e-2;
  const int n = 128;
  auto eq = semicircle_quantiles(n, 1.0);

  auto traj = original_frame_flow(eq, 1.0, cfg, p);
  REQUIRE(traj.steps() > 10);
  for (int k : {5, traj.steps() / 2, traj.steps()}) {
    const double t = traj.times[static_cast<size_t>(k)];
    const double dilation = std::sqrt(1.0 + 2.0 * t);
    std::vector<double> want(eq.values());
    for (double& v : want) v *= dilation;
    CHECK(wasserstein2(traj.states[static_cast<size_t>(k)], QuantileMeasure(want)) < 5e-3);
  }

  // Times follow t_k = (e^{2 k tau} - 1)/2.
  CHECK(traj.times[1] == doctest::Approx(0.5 * std::expm1(2.0 * cfg.tau)).epsilon(1e-13));

  auto single = original_frame_flow(eq, 0.0, cfg, p);
  CHECK(single.steps() == 0);

  EnergyParams bad = p;
  bad.alpha = 1.0;
  CHECK_THROWS_AS(original_frame_flow(eq, 1.0, cfg, bad), std::invalid_argument);
}

TEST_CASE("mapped rescaled flow matches the direct alpha=0 flow") {
  EnergyParams p;
  p.alpha = 0.0;
  p.kernel = InteractionKernel::log_kernel(1.0 / std::numbers::pi);
  JkoConfig cfg;
  cfg.tau = 1e-2;
  const int n = 128;
  auto init = uniform_quantiles(n, -1.0, 1.0);

  auto mapped = original_frame_flow(init, 0.5, cfg, p);
  auto direct = run_flow(init, 50, cfg, p);
  double worst = 0.0;
  for (size_t k = 0; k < mapped.states.size(); ++k) {
    const double t = mapped.times[k];
    const int j = static_cast<int>(std::llround(t / cfg.tau));
    if (t > 0.5 + 1e-9 || j > direct.steps()) break;
    worst = std::max(worst, wasserstein2(mapped.states[k], direct.states[static_cast<size_t>(j)]));
  }
  CHECK(worst < 3e-2);
}
