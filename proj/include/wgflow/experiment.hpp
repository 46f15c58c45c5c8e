// Experiment orchestration: JSON config parsing with strict key checking,
// command dispatch (flow / minimize / sweep-kappa / compare-equilibrium /
// weak-residual), and bit-stable CSV/JSON emission for regression baselines.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wgflow/diagnostics.hpp"
#include "wgflow/energy.hpp"
#include "wgflow/jko.hpp"
#include "wgflow/measure.hpp"

namespace wgflow {

enum class Command { Flow, Minimize, InviscidSweep, CompareEquilibrium, WeakResidual };

std::string command_name(Command c);
Command command_from_name(const std::string& name);

/// Initial datum: exactly one of a named preset or a file of atom positions.
struct InitialSpec {
  std::string preset;  // "gaussian" | "uniform" | "semicircle" | "atoms"
  std::string file;    // JSON array of sample positions
  double mean = 0.0, sigma = 1.0;     // gaussian
  double a = -1.0, b = 1.0;           // uniform
  double gamma = 1.0;                 // semicircle
  std::vector<double> atoms;          // atoms preset
};

struct ExperimentConfig {
  Command command = Command::Flow;
  EnergyParams energy;
  JkoConfig jko;
  int n = 256;
  InitialSpec initial;
  std::optional<int> steps;
  std::optional<double> t_final;
  std::vector<double> kappas;  // sweep-kappa
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool emit_states = false;
};

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses and validates a JSON config document, filling defaults
/// (tau = 1e-2, n = 256, gamma = 1/pi, solver tolerances). Unknown keys are
/// an error listing them; out-of-range values name the violated invariant.
ExperimentConfig parse_config(const std::string& text);

/// Convenience: parse_config on the contents of a file.
ExperimentConfig parse_config_file(const std::string& path);

struct RunReport {
  bool ok = true;
  std::vector<std::string> invariant_violations;
  bool partial = false;
  std::string reference;  // "gaussian" | "semicircle" | "initial" | "none"
  double energy_initial = 0.0;
  double energy_final = 0.0;
  double min_energy_observed = 0.0;
  std::optional<double> bound_floor;
  long total_inner_iterations = 0;
  double wall_seconds = 0.0;  // printed to stdout only, never serialized
  std::vector<std::string> emitted_files;
};

/// Executes the experiment, writing config.json, report.json, manifest.json
/// and command-specific CSV files under cfg.out_dir. Every float is printed
/// with 17 significant digits; identical config + seed produces identical
/// bytes. Returns the report; ok == false (and a nonzero CLI exit) when a
/// declared invariant or tolerance is violated.
RunReport execute(const ExperimentConfig& cfg);

/// The measure described by an InitialSpec at resolution n.
QuantileMeasure build_initial(const InitialSpec& spec, int n);

}  // namespace wgflow
