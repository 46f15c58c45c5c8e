#include "wgflow/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"
#include "wgflow/selfsimilar.hpp"
#include "wgflow/sha256.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace wgflow {

std::string command_name(Command c) {
  switch (c) {
    case Command::Flow: return "flow";
    case Command::Minimize: return "minimize";
    case Command::InviscidSweep: return "sweep-kappa";
    case Command::CompareEquilibrium: return "compare-equilibrium";
    case Command::WeakResidual: return "weak-residual";
  }
  return "flow";
}

Command command_from_name(const std::string& name) {
  if (name == "flow") return Command::Flow;
  if (name == "minimize") return Command::Minimize;
  if (name == "sweep-kappa") return Command::InviscidSweep;
  if (name == "compare-equilibrium") return Command::CompareEquilibrium;
  if (name == "weak-residual") return Command::WeakResidual;
  throw config_error("unknown command '" + name +
                     "' (expected flow | minimize | sweep-kappa | "
                     "compare-equilibrium | weak-residual)");
}

namespace {

// ---- deterministic serialization helpers --------------------------------

std::string fmt17(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string jstr(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += "\"";
  return out;
}

std::string jbool(bool b) { return b ? "true" : "false"; }

std::string jint(long long v) { return std::to_string(v); }

std::string jobject(const std::vector<std::pair<std::string, std::string>>& kvs) {
  std::string out = "{";
  for (size_t i = 0; i < kvs.size(); ++i) {
    if (i) out += ",";
    out += jstr(kvs[i].first) + ":" + kvs[i].second;
  }
  out += "}";
  return out;
}

std::string jarray(const std::vector<std::string>& items) {
  std::string out = "[";
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  out += "]";
  return out;
}

std::string jarray_num(const std::vector<double>& v) {
  std::vector<std::string> items;
  items.reserve(v.size());
  for (double e : v) items.push_back(fmt17(e));
  return jarray(items);
}

// ---- config parsing ------------------------------------------------------

void check_keys(const json& obj, const std::string& where,
                const std::vector<std::string>& allowed) {
  std::vector<std::string> unknown;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      unknown.push_back(it.key());
    }
  }
  if (!unknown.empty()) {
    std::sort(unknown.begin(), unknown.end());
    std::string msg = "unknown key(s) in " + where + ":";
    for (const auto& k : unknown) msg += " '" + k + "'";
    throw config_error(msg);
  }
}

double get_num(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw config_error("'" + key + "' must be a number");
  return obj[key].get<double>();
}

void parse_kernel(const json& j, InteractionKernel& k) {
  check_keys(j, "energy.kernel", {"kind", "gamma", "beta", "lambda_w"});
  if (j.contains("kind")) {
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "log") {
      k.kind = KernelKind::Log;
    } else if (kind == "power_law") {
      k.kind = KernelKind::PowerLaw;
    } else {
      throw config_error("energy.kernel.kind must be 'log' or 'power_law'");
    }
  }
  k.gamma = get_num(j, "gamma", k.gamma);
  k.beta = get_num(j, "beta", k.beta);
  k.lambda_w = get_num(j, "lambda_w", k.lambda_w);
  if (k.kind == KernelKind::PowerLaw && !(k.beta > 0.0 && k.beta < 1.0)) {
    throw config_error(
        "energy.kernel.beta must lie in the open interval (0,1): the "
        "power-law interaction energy is finite only on the zero measure for "
        "beta >= 1 and loses integrability for beta <= 0");
  }
  if (k.kind == KernelKind::Log && !(k.gamma > 0.0)) {
    throw config_error("energy.kernel.gamma must be > 0");
  }
  if (!(k.lambda_w >= 0.0)) {
    throw config_error("energy.kernel.lambda_w must be >= 0");
  }
}

void parse_initial(const json& j, InitialSpec& init) {
  check_keys(j, "initial",
             {"preset", "file", "mean", "sigma", "a", "b", "gamma", "points"});
  const bool has_preset = j.contains("preset");
  const bool has_file = j.contains("file");
  if (has_preset == has_file) {
    throw config_error("initial must name exactly one datum source: 'preset' or 'file'");
  }
  if (has_file) {
    init.file = j["file"].get<std::string>();
    if (!fs::exists(init.file)) {
      throw config_error("initial.file does not exist: " + init.file);
    }
    return;
  }
  init.preset = j["preset"].get<std::string>();
  if (init.preset == "gaussian") {
    init.mean = get_num(j, "mean", 0.0);
    init.sigma = get_num(j, "sigma", 1.0);
    if (!(init.sigma > 0.0)) throw config_error("initial.sigma must be > 0");
  } else if (init.preset == "uniform") {
    init.a = get_num(j, "a", -1.0);
    init.b = get_num(j, "b", 1.0);
    if (!(init.a < init.b)) throw config_error("initial requires a < b");
  } else if (init.preset == "semicircle") {
    init.gamma = get_num(j, "gamma", 1.0);
    if (!(init.gamma > 0.0)) throw config_error("initial.gamma must be > 0");
  } else if (init.preset == "atoms") {
    if (!j.contains("points") || !j["points"].is_array() || j["points"].empty()) {
      throw config_error("initial preset 'atoms' requires a nonempty 'points' array");
    }
    for (const auto& p : j["points"]) init.atoms.push_back(p.get<double>());
  } else {
    throw config_error("initial.preset must be one of gaussian | uniform | semicircle | atoms");
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw config_error("config root must be a JSON object");

  check_keys(j, "config",
             {"command", "energy", "jko", "n", "initial", "steps", "t_final",
              "kappas", "out_dir", "seed", "emit_states"});

  ExperimentConfig cfg;
  cfg.energy.kernel.gamma = 1.0 / std::numbers::pi;  // default strength
  cfg.energy.alpha = 1.0;

  if (!j.contains("command")) throw config_error("config requires 'command'");
  cfg.command = command_from_name(j["command"].get<std::string>());

  if (j.contains("energy")) {
    const json& e = j["energy"];
    check_keys(e, "energy", {"kappa", "alpha", "kernel"});
    cfg.energy.kappa = get_num(e, "kappa", cfg.energy.kappa);
    cfg.energy.alpha = get_num(e, "alpha", cfg.energy.alpha);
    if (!(cfg.energy.kappa >= 0.0)) throw config_error("energy.kappa must be >= 0");
    if (!(cfg.energy.alpha >= 0.0)) throw config_error("energy.alpha must be >= 0");
    if (e.contains("kernel")) parse_kernel(e["kernel"], cfg.energy.kernel);
  }

  if (j.contains("jko")) {
    const json& k = j["jko"];
    check_keys(k, "jko",
               {"tau", "max_inner_iters", "grad_tol", "obj_tol",
                "backtrack_shrink", "armijo_c"});
    cfg.jko.tau = get_num(k, "tau", cfg.jko.tau);
    cfg.jko.grad_tol = get_num(k, "grad_tol", cfg.jko.grad_tol);
    cfg.jko.obj_tol = get_num(k, "obj_tol", cfg.jko.obj_tol);
    cfg.jko.backtrack_shrink = get_num(k, "backtrack_shrink", cfg.jko.backtrack_shrink);
    cfg.jko.armijo_c = get_num(k, "armijo_c", cfg.jko.armijo_c);
    if (k.contains("max_inner_iters")) {
      cfg.jko.max_inner_iters = k["max_inner_iters"].get<int>();
    }
    try {
      cfg.jko.validate();
    } catch (const std::exception& e2) {
      throw config_error(e2.what());
    }
  }

  if (j.contains("n")) {
    if (!j["n"].is_number_integer()) throw config_error("'n' must be an integer");
    cfg.n = j["n"].get<int>();
  }
  if (cfg.n < 2) throw config_error("'n' must be >= 2");

  if (!j.contains("initial")) throw config_error("config requires 'initial'");
  parse_initial(j["initial"], cfg.initial);

  if (j.contains("steps") && j.contains("t_final")) {
    throw config_error("give either 'steps' or 't_final', not both");
  }
  if (j.contains("steps")) {
    cfg.steps = j["steps"].get<int>();
    if (*cfg.steps < 1) throw config_error("'steps' must be >= 1");
  }
  if (j.contains("t_final")) {
    cfg.t_final = j["t_final"].get<double>();
    if (!(*cfg.t_final > 0.0)) throw config_error("'t_final' must be > 0");
  }

  if (j.contains("kappas")) {
    for (const auto& v : j["kappas"]) cfg.kappas.push_back(v.get<double>());
  }
  if (cfg.command == Command::InviscidSweep) {
    if (cfg.kappas.empty()) throw config_error("sweep-kappa requires a 'kappas' array");
    for (size_t i = 0; i < cfg.kappas.size(); ++i) {
      if (!(cfg.kappas[i] > 0.0)) throw config_error("kappas must all be > 0");
      if (i > 0 && !(cfg.kappas[i] < cfg.kappas[i - 1])) {
        throw config_error("kappas must be sorted descending");
      }
    }
  } else if (!cfg.kappas.empty()) {
    throw config_error("'kappas' is only meaningful for the sweep-kappa command");
  }

  if (cfg.command == Command::CompareEquilibrium) {
    if (cfg.energy.kappa != 0.0 || cfg.energy.kernel.kind != KernelKind::Log ||
        cfg.energy.alpha != 1.0 || !(cfg.energy.kernel.lambda_w > 0.0)) {
      throw config_error(
          "compare-equilibrium requires kappa == 0, alpha == 1 and an active "
          "log kernel (the closed-form semicircle minimizer exists only there)");
    }
  }

  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("emit_states")) cfg.emit_states = j["emit_states"].get<bool>();
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

QuantileMeasure build_initial(const InitialSpec& spec, int n) {
  if (!spec.file.empty()) {
    std::ifstream in(spec.file);
    if (!in) throw config_error("cannot open initial datum file: " + spec.file);
    json j = json::parse(in);
    if (!j.is_array() || j.empty()) {
      throw config_error("initial datum file must hold a nonempty JSON array of positions");
    }
    std::vector<double> pts;
    for (const auto& v : j) pts.push_back(v.get<double>());
    return atoms_to_quantile(EmpiricalAtoms(std::move(pts)), n);
  }
  if (spec.preset == "gaussian") return gaussian_quantiles(n, spec.mean, spec.sigma);
  if (spec.preset == "uniform") return uniform_quantiles(n, spec.a, spec.b);
  if (spec.preset == "semicircle") return semicircle_quantiles(n, spec.gamma);
  if (spec.preset == "atoms") {
    return atoms_to_quantile(EmpiricalAtoms(spec.atoms), n);
  }
  throw config_error("unrecognized initial spec");
}

namespace {

std::string render_config(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> kernel = {
      {"kind", jstr(cfg.energy.kernel.kind == KernelKind::Log ? "log" : "power_law")}};
  if (cfg.energy.kernel.kind == KernelKind::Log) {
    kernel.push_back({"gamma", fmt17(cfg.energy.kernel.gamma)});
  } else {
    kernel.push_back({"beta", fmt17(cfg.energy.kernel.beta)});
  }
  kernel.push_back({"lambda_w", fmt17(cfg.energy.kernel.lambda_w)});

  std::vector<std::pair<std::string, std::string>> initial;
  if (!cfg.initial.file.empty()) {
    initial.push_back({"file", jstr(cfg.initial.file)});
  } else {
    initial.push_back({"preset", jstr(cfg.initial.preset)});
    if (cfg.initial.preset == "gaussian") {
      initial.push_back({"mean", fmt17(cfg.initial.mean)});
      initial.push_back({"sigma", fmt17(cfg.initial.sigma)});
    } else if (cfg.initial.preset == "uniform") {
      initial.push_back({"a", fmt17(cfg.initial.a)});
      initial.push_back({"b", fmt17(cfg.initial.b)});
    } else if (cfg.initial.preset == "semicircle") {
      initial.push_back({"gamma", fmt17(cfg.initial.gamma)});
    } else if (cfg.initial.preset == "atoms") {
      initial.push_back({"points", jarray_num(cfg.initial.atoms)});
    }
  }

  std::vector<std::pair<std::string, std::string>> top = {
      {"command", jstr(command_name(cfg.command))},
      {"energy", jobject({{"kappa", fmt17(cfg.energy.kappa)},
                          {"alpha", fmt17(cfg.energy.alpha)},
                          {"kernel", jobject(kernel)}})},
      {"jko", jobject({{"tau", fmt17(cfg.jko.tau)},
                       {"max_inner_iters", jint(cfg.jko.max_inner_iters)},
                       {"grad_tol", fmt17(cfg.jko.grad_tol)},
                       {"obj_tol", fmt17(cfg.jko.obj_tol)},
                       {"backtrack_shrink", fmt17(cfg.jko.backtrack_shrink)},
                       {"armijo_c", fmt17(cfg.jko.armijo_c)}})},
      {"n", jint(cfg.n)},
      {"initial", jobject(initial)}};
  if (cfg.steps) top.push_back({"steps", jint(*cfg.steps)});
  if (cfg.t_final) top.push_back({"t_final", fmt17(*cfg.t_final)});
  if (!cfg.kappas.empty()) top.push_back({"kappas", jarray_num(cfg.kappas)});
  top.push_back({"seed", jint(static_cast<long long>(cfg.seed))});
  top.push_back({"emit_states", jbool(cfg.emit_states)});
  return jobject(top) + "\n";
}

struct Emitter {
  fs::path dir;
  std::vector<std::pair<std::string, std::string>> files;  // name -> content

  void add(const std::string& name, const std::string& content) {
    files.emplace_back(name, content);
  }

  std::vector<std::string> flush(bool partial) {
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::string> names;
    std::vector<std::string> entries;
    for (const auto& [name, content] : files) {
      std::ofstream out(dir / name, std::ios::binary);
      out << content;
      names.push_back(name);
      entries.push_back(jobject({{"name", jstr(name)},
                                 {"sha256", jstr(sha256_hex(content))},
                                 {"bytes", jint(static_cast<long long>(content.size()))}}));
    }
    const std::string manifest =
        jobject({{"partial", jbool(partial)}, {"files", jarray(entries)}}) + "\n";
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    out << manifest;
    names.push_back("manifest.json");
    return names;
  }
};

std::string trajectory_csv(const FlowTrajectory& t, const QuantileMeasure* reference) {
  std::string csv = "step,time,energy,step_distance,d2_to_reference\n";
  for (size_t k = 0; k < t.states.size(); ++k) {
    char line[256];
    const double dref = reference ? wasserstein2(t.states[k], *reference) : 0.0;
    std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g,%.17g\n", k,
                  t.times[k], t.energies[k], t.step_distances[k], dref);
    csv += line;
  }
  return csv;
}

std::string states_csv(const FlowTrajectory& t) {
  std::string csv = "step,index,x\n";
  for (size_t k = 0; k < t.states.size(); ++k) {
    for (int i = 0; i < t.states[k].n(); ++i) {
      char line[128];
      std::snprintf(line, sizeof(line), "%zu,%d,%.17g\n", k, i, t.states[k][i]);
      csv += line;
    }
  }
  return csv;
}

// Reference profile for the d2_to_reference column, when a closed form applies.
struct Reference {
  std::string name = "initial";
  std::optional<QuantileMeasure> measure;
};

Reference pick_reference(const ExperimentConfig& cfg, const QuantileMeasure& initial) {
  const EnergyParams& p = cfg.energy;
  if (p.alpha > 0.0 && p.kernel.lambda_w == 0.0 && p.kappa > 0.0) {
    return {"gaussian", gaussian_quantiles(cfg.n, 0.0, std::sqrt(p.kappa / p.alpha))};
  }
  if (p.alpha > 0.0 && p.kappa == 0.0 && p.kernel.kind == KernelKind::Log &&
      p.kernel.lambda_w > 0.0) {
    return {"semicircle",
            semicircle_quantiles(cfg.n, p.kernel.effective_log_strength() / p.alpha)};
  }
  return {"initial", initial};
}

void check_trajectory_invariants(const FlowTrajectory& t,
                                 const std::optional<double>& floor,
                                 std::vector<std::string>& violations) {
  for (size_t k = 1; k < t.energies.size(); ++k) {
    if (t.energies[k] > t.energies[k - 1] + 1e-9) {
      violations.push_back("energy increased at step " + std::to_string(k));
    }
    const double lhs = t.step_distances[k] * t.step_distances[k] / (2.0 * t.tau);
    if (lhs > t.energies[k - 1] - t.energies[k] + 1e-9) {
      violations.push_back("one-step minimality inequality violated at step " +
                           std::to_string(k));
    }
  }
  if (floor) {
    for (size_t k = 0; k < t.energies.size(); ++k) {
      if (t.energies[k] < *floor - 1e-9) {
        violations.push_back("energy below analytic lower bound at step " +
                             std::to_string(k));
      }
    }
  }
}

// Randomized metric spot-checks over trajectory states, driven by the seed.
void seeded_metric_checks(const FlowTrajectory& t, std::uint64_t seed,
                          std::vector<std::string>& violations) {
  if (t.states.size() < 3) return;
  std::mt19937_64 rng(seed);
  auto pick = [&] {
    return static_cast<size_t>(rng() % t.states.size());
  };
  for (int trial = 0; trial < 16; ++trial) {
    const size_t a = pick(), b = pick(), c = pick();
    const double ab = wasserstein2(t.states[a], t.states[b]);
    const double ba = wasserstein2(t.states[b], t.states[a]);
    const double ac = wasserstein2(t.states[a], t.states[c]);
    const double cb = wasserstein2(t.states[c], t.states[b]);
    if (ab != ba) violations.push_back("metric symmetry violated");
    if (ab > ac + cb + 1e-12) violations.push_back("metric triangle inequality violated");
  }
}

std::string bounds_json(const LowerBounds& lb) {
  std::vector<std::pair<std::string, std::string>> kv;
  if (lb.positivity) kv.push_back({"positivity", fmt17(*lb.positivity)});
  if (lb.unif_baixo) kv.push_back({"unif_baixo", fmt17(*lb.unif_baixo)});
  if (lb.jensen) kv.push_back({"jensen", fmt17(*lb.jensen)});
  if (lb.gaussian) kv.push_back({"gaussian", fmt17(*lb.gaussian)});
  if (lb.floor) kv.push_back({"floor", fmt17(*lb.floor)});
  return jobject(kv);
}

}  // namespace

RunReport execute(const ExperimentConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  RunReport rep;
  fs::create_directories(cfg.out_dir);
  Emitter emit{cfg.out_dir, {}};
  emit.add("config.json", render_config(cfg));

  const QuantileMeasure initial = build_initial(cfg.initial, cfg.n);
  const LowerBounds lb = lower_bounds(cfg.energy);
  rep.bound_floor = lb.floor;

  std::string config_echo = render_config(cfg);
  config_echo.pop_back();  // strip the trailing newline for embedding
  std::vector<std::pair<std::string, std::string>> report_kv = {
      {"command", jstr(command_name(cfg.command))},
      {"config", config_echo},
      {"n", jint(cfg.n)},
      {"seed", jint(static_cast<long long>(cfg.seed))},
      {"lower_bounds", bounds_json(lb)}};

  const int default_steps = 100;
  auto flow_steps = [&] {
    if (cfg.steps) return *cfg.steps;
    if (cfg.t_final) {
      return std::max(1, static_cast<int>(std::llround(*cfg.t_final / cfg.jko.tau)));
    }
    return default_steps;
  };

  try {
    switch (cfg.command) {
      case Command::Flow:
      case Command::WeakResidual: {
        FlowTrajectory t = run_flow(initial, flow_steps(), cfg.jko, cfg.energy);
        Reference ref = pick_reference(cfg, initial);
        check_trajectory_invariants(t, lb.floor, rep.invariant_violations);
        seeded_metric_checks(t, cfg.seed, rep.invariant_violations);

        emit.add("trajectory.csv",
                 trajectory_csv(t, ref.measure ? &*ref.measure : nullptr));
        if (cfg.emit_states) emit.add("states.csv", states_csv(t));

        rep.reference = ref.name;
        rep.energy_initial = t.energies.front();
        rep.energy_final = t.energies.back();
        rep.min_energy_observed =
            *std::min_element(t.energies.begin(), t.energies.end());
        rep.total_inner_iterations = t.total_inner_iterations;

        DissipationReport dis = dissipation_report(t);
        report_kv.push_back({"reference", jstr(ref.name)});
        report_kv.push_back({"steps", jint(t.steps())});
        report_kv.push_back({"tau", fmt17(t.tau)});
        report_kv.push_back({"energy_initial", fmt17(rep.energy_initial)});
        report_kv.push_back({"energy_final", fmt17(rep.energy_final)});
        report_kv.push_back(
            {"d2_initial_to_final", fmt17(wasserstein2(t.states.front(), t.states.back()))});
        report_kv.push_back(
            {"dissipation", jobject({{"energy_drop", fmt17(dis.energy_drop)},
                                     {"dissipation_sum", fmt17(dis.dissipation_sum)},
                                     {"ratio", fmt17(dis.ratio)}})});
        report_kv.push_back(
            {"solver", jobject({{"total_inner_iterations", jint(t.total_inner_iterations)},
                                {"max_step_iterations", jint(t.max_step_iterations)},
                                {"tie_break_magnitude", fmt17(t.tie_break_magnitude)}})});

        if (cfg.energy.alpha > 0.0 && t.steps() >= 10) {
          try {
            RateFit fit = fit_decay_rate(t.times, t.energies, t.energies.back());
            report_kv.push_back(
                {"energy_decay_fit", jobject({{"rate", fmt17(fit.rate)},
                                              {"residual", fmt17(fit.residual)},
                                              {"window_first", jint(fit.window_first)},
                                              {"window_last", jint(fit.window_last)}})});
          } catch (const std::invalid_argument&) {
            // Flat trajectories have no usable decay window.
          }
        }

        if (cfg.command == Command::WeakResidual) {
          const auto fam = default_bump_family(t);
          WeakResidualReport wr = weak_residual(t, cfg.energy, fam);
          report_kv.push_back(
              {"weak_residual", jobject({{"per_function", jarray_num(wr.per_function)},
                                         {"max_normalized", fmt17(wr.max_normalized)}})});
        }
        break;
      }

      case Command::Minimize: {
        EquilibriumSpec eq = minimize_energy(cfg.energy, cfg.n, cfg.jko);
        rep.reference = "none";
        rep.energy_initial = eq.theta;
        rep.energy_final = eq.theta;
        rep.min_energy_observed = eq.theta;
        rep.total_inner_iterations = eq.iterations;
        if (lb.floor && eq.theta < *lb.floor - 1e-9) {
          rep.invariant_violations.push_back("theta below analytic lower bound");
        }
        if (eq.init_spread > 3e-2) {
          rep.invariant_violations.push_back(
              "minimizers from distinct initializations disagree beyond 3e-2");
        }
        report_kv.push_back({"theta", fmt17(eq.theta)});
        report_kv.push_back({"grad_norm", fmt17(eq.grad_norm)});
        report_kv.push_back({"init_spread", fmt17(eq.init_spread)});
        report_kv.push_back({"iterations", jint(eq.iterations)});
        if (cfg.emit_states) {
          std::string csv = "index,x\n";
          for (int i = 0; i < eq.state.n(); ++i) {
            char line[64];
            std::snprintf(line, sizeof(line), "%d,%.17g\n", i, eq.state[i]);
            csv += line;
          }
          emit.add("equilibrium.csv", csv);
        }
        break;
      }

      case Command::InviscidSweep: {
        const double t_final = cfg.t_final ? *cfg.t_final : 1.0;
        auto table = inviscid_sweep(initial, cfg.kappas, t_final, cfg.jko, cfg.energy);
        rep.reference = "initial";
        std::string csv = "kappa,sup_distance\n";
        std::vector<std::string> rows;
        for (const auto& row : table) {
          char line[96];
          std::snprintf(line, sizeof(line), "%.17g,%.17g\n", row.kappa, row.sup_distance);
          csv += line;
          rows.push_back(jobject({{"kappa", fmt17(row.kappa)},
                                  {"sup_distance", fmt17(row.sup_distance)}}));
        }
        emit.add("sweep.csv", csv);
        report_kv.push_back({"t_final", fmt17(t_final)});
        report_kv.push_back({"sweep", jarray(rows)});
        for (size_t i = 1; i < table.size(); ++i) {
          if (table[i].sup_distance > table[i - 1].sup_distance * 1.10) {
            rep.invariant_violations.push_back(
                "sup-distance failed to decrease with kappa beyond the 10% slack");
          }
        }
        break;
      }

      case Command::CompareEquilibrium: {
        EquilibriumSpec eq = minimize_energy(cfg.energy, cfg.n, cfg.jko);
        const double geff = cfg.energy.kernel.effective_log_strength();
        EquilibriumSpec closed_eq = semicircle_equilibrium(cfg.energy, cfg.n);
        const QuantileMeasure& closed = closed_eq.state;
        const double d2 = wasserstein2(eq.state, closed);
        const double theta_closed = closed_eq.theta;
        CharacterizationResidual chr = characterization_residual(eq.state, geff);

        rep.reference = "semicircle";
        rep.energy_initial = eq.theta;
        rep.energy_final = eq.theta;
        rep.min_energy_observed = std::min(eq.theta, theta_closed);
        rep.total_inner_iterations = eq.iterations;
        if (lb.floor && eq.theta < *lb.floor - 1e-9) {
          rep.invariant_violations.push_back("theta below analytic lower bound");
        }
        report_kv.push_back({"theta", fmt17(eq.theta)});
        report_kv.push_back({"theta_closed_form", fmt17(theta_closed)});
        report_kv.push_back({"d2_to_semicircle", fmt17(d2)});
        report_kv.push_back({"init_spread", fmt17(eq.init_spread)});
        report_kv.push_back(
            {"characterization",
             jobject({{"support_spread", fmt17(chr.support_spread)},
                      {"support_value", fmt17(chr.support_value)},
                      {"off_support_min_gap", fmt17(chr.off_support_min_gap)},
                      {"c_energy_formula", fmt17(chr.c_energy_formula)}})});
        if (cfg.emit_states) {
          std::string csv = "index,x,x_closed_form\n";
          for (int i = 0; i < eq.state.n(); ++i) {
            char line[96];
            std::snprintf(line, sizeof(line), "%d,%.17g,%.17g\n", i, eq.state[i], closed[i]);
            csv += line;
          }
          emit.add("equilibrium.csv", csv);
        }
        break;
      }
    }
  } catch (const flow_failure& e) {
    rep.partial = true;
    rep.invariant_violations.push_back(std::string("jko_flow: ") + e.what());
    emit.add("trajectory.csv", trajectory_csv(e.partial(), nullptr));
  } catch (const convergence_failure& e) {
    rep.partial = true;
    rep.invariant_violations.push_back(std::string("inner solver: ") + e.what());
  }

  rep.ok = rep.invariant_violations.empty() && !rep.partial;

  std::vector<std::string> violations;
  for (const auto& v : rep.invariant_violations) violations.push_back(jstr(v));
  report_kv.push_back({"invariant_violations", jarray(violations)});
  report_kv.push_back({"partial", jbool(rep.partial)});
  report_kv.push_back({"ok", jbool(rep.ok)});
  emit.add("report.json", jobject(report_kv) + "\n");

  rep.emitted_files = emit.flush(rep.partial);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

}  // namespace wgflow
