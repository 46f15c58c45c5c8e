// Acceptance suite: one quantitative criterion per case, each printed as a
// single PASS/FAIL line with the measured quantities. Exit status is nonzero
// when any criterion fails. An optional argv[1] names a scratch directory
// for the execution-determinism checks.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "wgflow/diagnostics.hpp"
#include "wgflow/energy.hpp"
#include "wgflow/experiment.hpp"
#include "wgflow/jko.hpp"
#include "wgflow/measure.hpp"
#include "wgflow/selfsimilar.hpp"

using namespace wgflow;
namespace fs = std::filesystem;

namespace {

constexpr double kInvPi = 0.3183098861837907;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "FAILED: " + what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

EnergyParams log_params(double kappa, double alpha, double gamma, double lambda = 1.0) {
  EnergyParams p;
  p.kappa = kappa;
  p.alpha = alpha;
  p.kernel = InteractionKernel::log_kernel(gamma, lambda);
  return p;
}

// Shared artifacts between criteria 7, 9 and 10.
struct SemicircleRun {
  FlowTrajectory traj;
  double theta = 0.0;
  double init_spread = 0.0;
};

// ---------------------------------------------------------------------------

// 1. wasserstein2 equals the brute-force permutation optimum, n <= 8, 1e-12.
void c01_ot_exactness(Outcome& out) {
  wgtest::Rng rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.uniform_int(2, 8);
    auto a = rng.raw(n, 2.0), b = rng.raw(n, 2.0);

    std::vector<size_t> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = saturated_energy();
    do {
      double c = 0.0;
      for (size_t i = 0; i < perm.size(); ++i) {
        const double d = a[i] - b[perm[i]];
        c += d * d;
      }
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double oracle = std::sqrt(best / n);

    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double got = wasserstein2(QuantileMeasure(a), QuantileMeasure(b));
    worst = std::max(worst, std::abs(got - oracle));
  }
  out.note("max |d2 - permutation optimum| = " + fmt(worst));
  out.require(worst <= 1e-12, "agreement within 1e-12");
}

// 2. Analytic lower bounds on 500 random strictly increasing measures.
void c02_lower_bounds(Outcome& out) {
  wgtest::Rng rng(1002);
  const double positivity = 0.5 * std::log(std::numbers::e / 2.0);
  auto p01 = log_params(0.0, 1.0, kInvPi);

  double min_margin = saturated_energy();
  for (int trial = 0; trial < 500; ++trial) {
    auto q = rng.monotone_measure(64, rng.uniform(0.15, 3.0));
    min_margin = std::min(min_margin, free_energy(q, p01) - positivity);
  }
  out.note("min E_{0,1} margin over positivity = " + fmt(min_margin));
  out.require(min_margin >= 0.0, "E_{0,1}(gamma=1/pi) >= (1/2)log(e/2)");

  // kappa, alpha > 0: printed composite (unifBaixo + Gaussian/Jensen) and the
  // kernel-corrected floor.
  double min_printed = saturated_energy(), min_floor = saturated_energy();
  for (int trial = 0; trial < 200; ++trial) {
    auto p = log_params(rng.uniform(0.02, 1.5), rng.uniform(0.3, 1.4), kInvPi);
    auto lb = lower_bounds(p);
    const double composite = lb.unif_baixo_value() + lb.gaussian_value();
    auto q = rng.monotone_measure(64, rng.uniform(0.15, 3.0));
    const double e = free_energy(q, p);
    min_printed = std::min(min_printed, e - composite);
    min_floor = std::min(min_floor, e - *lb.floor);
  }
  out.note("min margin over printed composite = " + fmt(min_printed) +
           ", over floor = " + fmt(min_floor));
  out.require(min_printed >= 0.0, "E >= unifBaixo + Gaussian composite");
  out.require(min_floor >= 0.0, "E >= analytic floor");
}

// 3. alpha-convexity along 200 random quantile interpolations.
void c03_displacement_convexity(Outcome& out) {
  wgtest::Rng rng(1003);
  const std::vector<std::pair<double, double>> ka = {{0.0, 0.0}, {0.0, 1.0}, {0.1, 1.0}};
  double worst = -saturated_energy();
  for (const auto& [kappa, alpha] : ka) {
    auto p = log_params(kappa, alpha, kInvPi);
    for (int trial = 0; trial < 200; ++trial) {
      auto a = rng.monotone_measure(128), b = rng.monotone_measure(128);
      const double ea = free_energy(a, p), eb = free_energy(b, p);
      const double d2 = wasserstein2_squared(a, b);
      for (double t : {0.25, 0.5, 0.75}) {
        const double et = free_energy(displacement_interpolate(a, b, t), p);
        const double excess =
            et - ((1.0 - t) * ea + t * eb - 0.5 * alpha * t * (1.0 - t) * d2);
        worst = std::max(worst, excess);
      }
    }
  }
  out.note("max convexity excess = " + fmt(worst));
  out.require(worst <= 1e-9, "alpha-convexity with slack 1e-9");
}

// 4. Gradient vs central finite differences, n = 64, all kernel kinds.
void c04_gradient_correctness(Outcome& out) {
  wgtest::Rng rng(1004);
  std::vector<EnergyParams> cases = {log_params(0.0, 1.0, kInvPi),
                                     log_params(0.1, 1.0, kInvPi),
                                     log_params(0.5, 0.7, 1.0)};
  EnergyParams pw;
  pw.kappa = 0.1;
  pw.alpha = 1.0;
  pw.kernel = InteractionKernel::power_law(0.5);
  cases.push_back(pw);

  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto& p = cases[static_cast<size_t>(trial) % cases.size()];
    auto x = rng.monotone(64);
    auto g = energy_gradient(QuantileMeasure(x), p);
    for (int i = 0; i < 64; ++i) {
      std::vector<double> xp = x, xm = x;
      xp[static_cast<size_t>(i)] += h;
      xm[static_cast<size_t>(i)] -= h;
      const double fd =
          (detail::free_energy_raw(xp, p) - detail::free_energy_raw(xm, p)) / (2.0 * h);
      worst = std::max(worst, std::abs(g[static_cast<size_t>(i)] - fd) /
                                  (1.0 + std::abs(g[static_cast<size_t>(i)])));
    }
  }
  out.note("max relative gradient error = " + fmt(worst));
  out.require(worst < 1e-6, "finite-difference agreement at 1e-6");
}

// 5. Closed-form JKO steps.
void c05_closed_form_steps(Outcome& out) {
  wgtest::Rng rng(1005);
  JkoConfig cfg;
  cfg.tau = 1e-2;

  EnergyParams conf = log_params(0.0, 1.0, 1.0, 0.0);
  auto prev = rng.monotone_measure(256);
  auto next = jko_step(prev, cfg, conf);
  double worst = 0.0;
  for (int i = 0; i < prev.n(); ++i) {
    worst = std::max(worst, std::abs(next[i] - prev[i] / (1.0 + cfg.tau)));
  }
  out.note("pure confinement max |step - x/(1+alpha tau)| = " + fmt(worst));
  out.require(worst <= 1e-8, "confinement step within 1e-8");

  EnergyParams metric = log_params(0.0, 0.0, 1.0, 0.0);
  auto fixed = jko_step(prev, cfg, metric);
  double drift = 0.0;
  for (int i = 0; i < prev.n(); ++i) drift = std::max(drift, std::abs(fixed[i] - prev[i]));
  out.note("pure metric drift = " + fmt(drift));
  out.require(drift <= 1e-12, "pure metric step is the identity");
}

// 6. Ornstein-Uhlenbeck oracle: convergence and trajectory match.
void c06_ou_oracle(Outcome& out, FlowTrajectory& ou_fine) {
  EnergyParams ou;
  ou.kappa = 1.0;
  ou.alpha = 1.0;
  ou.kernel.lambda_w = 0.0;
  JkoConfig cfg;
  cfg.tau = 1e-3;
  const int n = 256;

  ou_fine = run_flow(gaussian_quantiles(n, 0.0, 2.0), 3000, cfg, ou);

  const double d_eq = wasserstein2(ou_fine.states.back(), gaussian_quantiles(n, 0.0, 1.0));
  out.note("d2(final, N(0,1)) = " + fmt(d_eq));
  out.require(d_eq <= 2e-2, "convergence to the unit Gaussian within 2e-2");

  double sup = 0.0;
  for (int k = 0; k <= 2000; k += 25) {
    const double t = k * cfg.tau;
    const double sigma = std::sqrt(1.0 + 3.0 * std::exp(-2.0 * t));
    sup = std::max(sup, wasserstein2(ou_fine.states[static_cast<size_t>(k)],
                                     gaussian_quantiles(n, 0.0, sigma)));
  }
  out.note("sup_{t<=2} d2(vs analytic sigma(t)) = " + fmt(sup));
  out.require(sup <= 3e-2, "trajectory match within 3e-2");
}

// 7. Semicircle equilibrium of the inviscid confined energy.
void c07_semicircle(Outcome& out, SemicircleRun& run) {
  auto p = log_params(0.0, 1.0, 1.0);
  JkoConfig cfg;
  cfg.tau = 1e-2;
  const int n = 256;

  run.traj = run_flow(uniform_quantiles(n, -1.0, 1.0), 1000, cfg, p);
  auto closed = semicircle_quantiles(n, 1.0);
  const double d_final = wasserstein2(run.traj.states.back(), closed);
  out.note("d2(final, semicircle) = " + fmt(d_final));
  out.require(d_final <= 2e-2, "reaches the semicircle within 2e-2 by t=10");

  bool monotone = true;
  for (size_t k = 1; k < run.traj.energies.size(); ++k) {
    monotone = monotone && run.traj.energies[k] <= run.traj.energies[k - 1] + 1e-12;
  }
  out.require(monotone, "energies nonincreasing at every step");

  auto eq = minimize_energy(p, n, cfg);
  run.theta = eq.theta;
  run.init_spread = eq.init_spread;
  out.note("theta = " + fmt(eq.theta) + ", init spread = " + fmt(eq.init_spread));
  out.require(eq.init_spread <= 3e-2, "3 initializations agree within 3e-2");
  out.require(wasserstein2(eq.state, closed) <= 2e-2, "minimizer matches the closed form");
}

// 8. alpha-contraction of two flows up to t = 3.
void c08_contraction(Outcome& out) {
  auto p = log_params(0.0, 1.0, kInvPi);
  JkoConfig cfg;
  cfg.tau = 1e-2;
  const int n = 256;
  const int steps = 300;

  auto rho0 = uniform_quantiles(n, -1.5, 0.5);
  auto mu0 = gaussian_quantiles(n, 0.4, 0.6);
  auto tr = run_flow(rho0, steps, cfg, p);
  auto tm = run_flow(mu0, steps, cfg, p);

  const double d0 = wasserstein2(rho0, mu0);
  double worst_ratio = 0.0;
  for (int m = 1; m <= steps; ++m) {
    const double dm = wasserstein2(tr.states[static_cast<size_t>(m)],
                                   tm.states[static_cast<size_t>(m)]);
    const double bound = std::pow(1.0 + cfg.tau, -m) * d0 * 1.05;
    worst_ratio = std::max(worst_ratio, dm / bound);
  }
  out.note("max d2_m / ((1+tau)^-m d0 * 1.05) = " + fmt(worst_ratio));
  out.require(worst_ratio <= 1.0, "contraction bound at every step");
}

// 9. Energy decay rate on the semicircle run.
void c09_decay_rate(Outcome& out, const SemicircleRun& run) {
  auto fit = fit_decay_rate(run.traj.times, run.traj.energies, run.theta);
  out.note("fitted rate = " + fmt(fit.rate) + " (window [" +
           std::to_string(fit.window_first) + "," + std::to_string(fit.window_last) + "])");
  out.require(fit.rate >= 2.0 * 0.95, "rate >= 2 alpha * 0.95");
}

// 10. Dissipation ledger: per-step inequality and the tau-refinement of the
// dissipation/energy-drop ratio on the OU oracle.
void c10_dissipation(Outcome& out, const SemicircleRun& sc, const FlowTrajectory& ou_fine) {
  auto check_per_step = [&](const FlowTrajectory& t, const char* name) {
    double worst = -saturated_energy();
    for (size_t k = 1; k < t.states.size(); ++k) {
      const double lhs = t.step_distances[k] * t.step_distances[k] / (2.0 * t.tau);
      worst = std::max(worst, lhs - (t.energies[k - 1] - t.energies[k]));
    }
    out.require(worst <= 1e-9, std::string(name) + " per-step inequality");
  };
  check_per_step(sc.traj, "semicircle run");
  check_per_step(ou_fine, "OU run");

  EnergyParams ou;
  ou.kappa = 1.0;
  ou.alpha = 1.0;
  ou.kernel.lambda_w = 0.0;
  JkoConfig coarse;
  coarse.tau = 1e-2;
  auto traj_coarse = run_flow(gaussian_quantiles(256, 0.0, 2.0), 300, coarse, ou);
  const double r_coarse = dissipation_report(traj_coarse).ratio;
  const double r_fine = dissipation_report(ou_fine).ratio;
  out.note("ratio tau=1e-2: " + fmt(r_coarse) + ", tau=1e-3: " + fmt(r_fine));
  out.require(std::abs(r_coarse - 1.0) <= 0.10, "ratio within 10% at tau=1e-2");
  out.require(std::abs(r_fine - 1.0) <= 0.02, "ratio within 2% at tau=1e-3");
}

// 11. Inviscid limit sweep.
void c11_inviscid(Outcome& out) {
  auto p = log_params(0.0, 1.0, kInvPi);
  JkoConfig cfg;
  cfg.tau = 1e-2;
  auto rows = inviscid_sweep(uniform_quantiles(256, -1.0, 1.0),
                             {0.2, 0.1, 0.05, 0.025}, 1.0, cfg, p);
  std::string seq;
  bool monotone = true;
  for (size_t i = 0; i < rows.size(); ++i) {
    seq += (i ? ", " : "") + fmt(rows[i].sup_distance);
    if (i > 0) monotone = monotone && rows[i].sup_distance <= rows[i - 1].sup_distance * 1.10;
  }
  out.note("sup distances [" + seq + "]");
  out.require(monotone, "nonincreasing in kappa within 10% slack");
  out.require(rows.front().sup_distance >= 2.0 * rows.back().sup_distance,
              "shrinks at least 2x from largest to smallest kappa");
}

// 12. Self-similar change of variables.
void c12_selfsimilar(Outcome& out) {
  auto p = log_params(0.0, 0.0, kInvPi);
  JkoConfig cfg;
  cfg.tau = 1e-2;
  const int n = 256;
  auto init = uniform_quantiles(n, -1.0, 1.0);

  auto mapped = original_frame_flow(init, 1.0, cfg, p);
  auto direct = run_flow(init, 100, cfg, p);
  double sup = 0.0;
  for (size_t k = 0; k < mapped.states.size(); ++k) {
    const double t = mapped.times[k];
    const int j = static_cast<int>(std::llround(t / cfg.tau));
    if (t > 1.0 + 1e-9 || j > direct.steps()) break;
    sup = std::max(sup, wasserstein2(mapped.states[k], direct.states[static_cast<size_t>(j)]));
  }
  out.note("sup d2(mapped alpha=1 flow, direct alpha=0 flow) = " + fmt(sup));
  out.require(sup <= 3e-2, "route agreement within 3e-2 for t <= 1");

  wgtest::Rng rng(1012);
  double rt = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto q = rng.monotone_measure(64, rng.uniform(0.3, 2.0));
    const double t = rng.uniform(0.0, 4.0);
    auto [resc, tau] = to_selfsimilar(q, t);
    auto [back, t2] = from_selfsimilar(resc, tau);
    rt = std::max(rt, wgtest::max_abs_diff(back.values(), q.values()));
    rt = std::max(rt, std::abs(t2 - t));
  }
  out.note("round-trip max error = " + fmt(rt));
  out.require(rt <= 1e-12, "round trip exact to 1e-12");
}

// 13. Weak-form residual on equilibrium and OU trajectories.
void c13_weak_residual(Outcome& out) {
  JkoConfig cfg;
  cfg.tau = 1e-3;
  const int n = 256;

  auto p = log_params(0.0, 1.0, 1.0);
  auto eq = minimize_energy(p, n, cfg);
  auto traj_eq = run_flow(eq.state, 6, cfg, p);
  const double r_eq = weak_residual(traj_eq, p, default_bump_family(traj_eq)).max_normalized;

  EnergyParams ou;
  ou.kappa = 1.0;
  ou.alpha = 1.0;
  ou.kernel.lambda_w = 0.0;
  auto traj_ou = run_flow(gaussian_quantiles(n, 0.0, 1.5), 50, cfg, ou);
  const double r_ou = weak_residual(traj_ou, ou, default_bump_family(traj_ou)).max_normalized;

  out.note("equilibrium residual = " + fmt(r_eq) + ", OU residual = " + fmt(r_ou));
  out.require(r_eq < 5e-2, "equilibrium residual < 5e-2");
  out.require(r_ou < 5e-2, "OU residual < 5e-2");
}

// 14. Power-law kernel flows and the parse-time rejection of beta >= 1.
void c14_power_law(Outcome& out) {
  EnergyParams p;
  p.alpha = 1.0;
  p.kernel = InteractionKernel::power_law(0.5);
  JkoConfig cfg;
  cfg.tau = 1e-2;
  const int n = 256;

  auto traj = run_flow(uniform_quantiles(n, -2.0, 2.0), 300, cfg, p);
  bool monotone = true;
  for (size_t k = 1; k < traj.energies.size(); ++k) {
    monotone = monotone && traj.energies[k] <= traj.energies[k - 1] + 1e-12;
  }
  out.require(monotone, "energies nonincreasing");

  auto eq = minimize_energy(p, n, cfg);
  const double d_eq = wasserstein2(traj.states.back(), eq.state);
  out.note("init spread = " + fmt(eq.init_spread) + ", d2(flow end, minimizer) = " + fmt(d_eq));
  out.require(eq.init_spread <= 3e-2, "initialization-independent equilibrium");
  out.require(d_eq <= 3e-2, "flow reaches the minimizer");

  bool rejected = false;
  std::string message;
  try {
    parse_config(R"({"command":"flow","initial":{"preset":"uniform"},
                     "energy":{"kernel":{"kind":"power_law","beta":1.2}}})");
  } catch (const config_error& e) {
    rejected = true;
    message = e.what();
  }
  out.require(rejected && message.find("(0,1)") != std::string::npos,
              "beta = 1.2 rejected at parse time naming the (0,1) range");
}

// 15. Byte-identical outputs for identical config + seed.
void c15_determinism(Outcome& out, const fs::path& scratch) {
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  std::vector<std::string> blobs;
  for (const char* sub : {"run_a", "run_b"}) {
    std::ostringstream cfg_json;
    cfg_json << R"({"command":"flow","initial":{"preset":"uniform","a":-1,"b":1},
        "energy":{"kappa":0.05,"alpha":1,"kernel":{"kind":"log","gamma":1.0}},
        "n":96,"steps":40,"seed":42,"emit_states":true,
        "out_dir":")" << (scratch / sub).generic_string() << R"("})";
    auto rep = execute(parse_config(cfg_json.str()));
    out.require(rep.ok, std::string("run in ") + sub + " completed cleanly");
    std::string all;
    for (const char* name :
         {"config.json", "trajectory.csv", "states.csv", "report.json", "manifest.json"}) {
      std::ifstream in(scratch / sub / name, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      all += ss.str();
    }
    blobs.push_back(all);
  }
  out.require(!blobs[0].empty() && blobs[0] == blobs[1],
              "byte-identical CSV/JSON outputs across reruns");
  if (!blobs[0].empty() && blobs[0] == blobs[1]) out.note("outputs identical across reruns");
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path scratch = (argc > 1) ? fs::path(argv[1]) : fs::path("acceptance_scratch");

  FlowTrajectory ou_fine;
  SemicircleRun sc;

  std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"01 1D OT exactness", c01_ot_exactness},
      {"02 energy lower bounds", c02_lower_bounds},
      {"03 displacement convexity", c03_displacement_convexity},
      {"04 gradient correctness", c04_gradient_correctness},
      {"05 closed-form JKO steps", c05_closed_form_steps},
      {"06 OU oracle", [&](Outcome& o) { c06_ou_oracle(o, ou_fine); }},
      {"07 semicircle equilibrium", [&](Outcome& o) { c07_semicircle(o, sc); }},
      {"08 contraction", c08_contraction},
      {"09 energy decay rate", [&](Outcome& o) { c09_decay_rate(o, sc); }},
      {"10 dissipation ledger", [&](Outcome& o) { c10_dissipation(o, sc, ou_fine); }},
      {"11 inviscid limit", c11_inviscid},
      {"12 self-similar equivalence", c12_selfsimilar},
      {"13 weak-form residual", c13_weak_residual},
      {"14 power-law flows", c14_power_law},
      {"15 determinism", [&](Outcome& o) { c15_determinism(o, scratch); }},
  };

  int failures = 0;
  for (auto& [name, fn] : criteria) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      fn(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail += std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %s (%.1fs) %s\n", out.pass ? "PASS" : "FAIL", name.c_str(), secs,
                out.detail.c_str());
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
  }
  std::printf("%d/15 criteria passed\n", 15 - failures);
  return failures == 0 ? 0 : 1;
}
