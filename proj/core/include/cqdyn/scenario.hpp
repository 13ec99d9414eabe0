#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cqdyn/evolution.hpp"

namespace cqdyn::scenario {

// ---------------------------------------------------------------------------
// configuration (see docs/config-schema.md for the JSON layout)
// ---------------------------------------------------------------------------

struct SystemConfig {
  std::string preset;            // "qubit_z", "free_level", or "" for explicit
  double omega = 0.0;            // qubit_z: H_S = omega * sigma_z
  std::vector<double> energies;  // free_level: H_S = diag(energies)
  Matrix matrix;                 // explicit Hermitian matrix
};

struct FunctionConfig {
  std::string preset;  // "constant", "linear", "sinusoid", or "" for samples
  double value = 0.0;                             // constant: f = value
  double offset = 0.0, slope = 0.0;               // linear: f = offset + slope*t
  double amplitude = 0.0, frequency = 0.0, phase = 0.0;  // sinusoid
  std::vector<double> samples;                    // literal grid samples

  std::vector<double> sample(const ClockSpec& clock) const;
  bool refinable() const { return !preset.empty(); }
};

struct CouplingConfig {
  std::string pauli;  // "x", "y", "z", or "" for explicit
  Matrix matrix;

  Matrix materialize() const;
};

struct SeparableTermConfig {
  FunctionConfig f;
  CouplingConfig s;
};

// seeded smooth refinable kernel family: Gbar(t,t') = sum_a phi_a(t) A_a phi_a(t')*
// with phi_a low-order Fourier polynomials and A_a random Hermitian; sampled
// blocks carry a dt weight so the memory term has a continuum limit
struct KernelPresetConfig {
  std::uint64_t seed = 1;
  int terms = 2;
  int max_mode = 2;
};

struct InteractionConfig {
  std::string kind = "none";
  double lambda = 0.0;
  std::vector<SeparableTermConfig> terms;           // separable
  Matrix matrix;                                    // generic, explicit
  std::optional<KernelPresetConfig> kernel_preset;  // generic, refinable
};

struct RunConfig {
  std::vector<std::string> engines{"exact"};  // exact | series | picard | timedep
  int series_order = 1;
  double picard_tol = 1e-12;
  int picard_max_iter = 200;
  int k0 = 0;
  Vector psi0;  // size 0 = absent (derived from the exact engine)
  bool auto_shift = false;
  double tol = 0.0;  // constraint tolerance, 0 -> 1e-10 * ||H||_F
  int state_index = 0;
};

struct OutputConfig {
  std::string path = "out";
  std::string format = "csv";
};

struct SweepConfig {
  std::string parameter;  // lambda | dt | d
  std::vector<double> values;
};

struct ScenarioConfig {
  std::string name;
  ClockSpec clock;
  SystemConfig system;
  InteractionConfig interaction;
  RunConfig run;
  OutputConfig output;
  std::optional<SweepConfig> sweep;
};

ScenarioConfig parse_config_text(const std::string& json_text);
ScenarioConfig load_config_file(const std::string& path);

// canonical form: fixed key order, defaults filled in, normalized psi0;
// parse(serialize(parse(x))) == parse(x)
std::string serialize_config(const ScenarioConfig& config);

Matrix system_hamiltonian(const SystemConfig& system);
InteractionSpec build_interaction(const InteractionConfig& inter, const ClockSpec& clock,
                                  int system_dim);

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

struct EngineRun {
  std::string engine;
  Trajectory trajectory;
  std::vector<double> isometry;  // per-k propagator defects (series/timedep)
  double residual_cyclic = 0.0;
  double residual_interior = 0.0;
  int picard_iterations = 0;
  double conditional_norm_drift = 0.0;  // exact engine
  double constraint_residual = 0.0;     // exact engine
};

struct RunReport {
  ScenarioConfig config;
  double shift = 0.0;
  std::vector<EngineRun> engines;
  struct CrossDiff {
    std::string a, b;
    double max_diff = 0.0;
  };
  std::vector<CrossDiff> cross;
  double elapsed_ms = 0.0;
};

RunReport run_scenario(const ScenarioConfig& config);

std::string trajectory_to_csv(const Trajectory& traj);
std::string report_to_json(const RunReport& report);

// writes trajectory_<engine>.csv per engine plus report.json under out_dir
void write_run_outputs(const RunReport& report, const std::string& out_dir);

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  std::string status;  // "pass" | "fail" | "skip"
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::string scenario;
  std::vector<CheckResult> checks;
  double elapsed_ms = 0.0;

  bool all_passed() const;
};

// runs the invariant suite (clock algebra, kernel Hermiticity, conditioned
// residual, scaling laws, norm functional, cross-engine agreement) on one
// configured scenario
VerifyReport verify_scenario(const ScenarioConfig& config);

std::string verify_to_json(const VerifyReport& report);

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepTable {
  std::string parameter;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// one row per value: scale diagnostics plus fitted log-log slopes between
// consecutive rows; dt and d sweeps hold the base period d*dt fixed
SweepTable sweep_scenario(const ScenarioConfig& config, const SweepConfig& sweep);

std::string sweep_to_csv(const SweepTable& table);

// ---------------------------------------------------------------------------
// shipped presets
// ---------------------------------------------------------------------------

std::vector<std::string> preset_names();
std::string preset_description(const std::string& name);
ScenarioConfig preset(const std::string& name);

}  // namespace cqdyn::scenario
