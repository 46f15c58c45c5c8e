"""Smoke tests for the python bindings: a few closed forms and invariants."""
import math
import sys

import _wgflow as wg


def approx(a, b, tol=1e-12):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    # Exact W2 between translated uniforms.
    a = wg.uniform_quantiles(64, 0.0, 1.0)
    b = wg.uniform_quantiles(64, 1.0, 2.0)
    approx(wg.wasserstein2(a, b), 1.0)

    # Isotonic projection: closed form and idempotence.
    assert wg.isotonic_project([3.0, 1.0, 2.0]) == [2.0, 2.0, 2.0]
    p = wg.isotonic_project([0.3, -1.0, 2.0, 1.5])
    assert wg.isotonic_project(p) == p

    # Pure-confinement JKO step matches x / (1 + alpha tau).
    params = wg.EnergyParams()
    params.alpha = 1.0
    params.kernel.lambda_w = 0.0
    cfg = wg.JkoConfig()
    cfg.tau = 1e-2
    g = wg.gaussian_quantiles(32, 0.0, 1.0)
    stepped = wg.jko_step(g, cfg, params)
    for i in range(len(g)):
        approx(stepped[i], g[i] / (1.0 + cfg.tau), 1e-8)

    # Short interacting flow: energies never increase.
    params2 = wg.EnergyParams()
    params2.alpha = 1.0
    params2.kernel = wg.InteractionKernel.log_kernel(1.0)
    traj = wg.run_flow(wg.uniform_quantiles(48, -1.0, 1.0), 20, cfg, params2)
    for e0, e1 in zip(traj.energies, traj.energies[1:]):
        assert e1 <= e0 + 1e-9

    # Semicircle profile: antisymmetric, correct support.
    sc = wg.semicircle_quantiles(65, 1.0)
    assert sc[32] == 0.0
    assert abs(sc[64] + sc[0]) == 0.0
    assert sc[64] < math.sqrt(2.0)

    # Positivity bound value.
    lb = wg.lower_bounds(params2)
    approx(lb.positivity, 0.5 * math.log(math.e / 2.0), 1e-14)

    # Self-similar round trip.
    resc, tau = wg.to_selfsimilar(g, 1.5)
    approx(tau, math.log(2.0), 1e-14)
    back, t = wg.from_selfsimilar(resc, tau)
    approx(t, 1.5, 1e-13)
    for i in range(len(g)):
        approx(back[i], g[i], 1e-13)

    # Decay-rate fit on a planted exponential.
    times = [0.01 * k for k in range(200)]
    values = [math.exp(-2.0 * t) for t in times]
    fit = wg.fit_decay_rate(times, values, 0.0)
    approx(fit.rate, 2.0, 1e-9)

    print("python smoke: all checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
