#include "cqdyn/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "scenario_internal.hpp"

namespace cqdyn::scenario {

namespace detail {

ordered_json complex_to_json(const Complex& z) {
  return ordered_json::array({z.real(), z.imag()});
}

Complex json_to_complex(const ordered_json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(where, "expected a complex entry as [re, im]");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

ordered_json vector_to_json(const Vector& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

Vector json_to_vector(const ordered_json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where, "expected a non-empty array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) =
        json_to_complex(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

ordered_json matrix_to_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix json_to_matrix(const ordered_json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty())
    throw ConfigError(where + "[0]", "expected a non-empty row");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string row_path = where + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != cols)
      throw ConfigError(row_path, "ragged matrix row");
    for (std::size_t k = 0; k < cols; ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          json_to_complex(j[i][k], row_path + "[" + std::to_string(k) + "]");
  }
  return m;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double operator_norm(const Matrix& m) { return m.operatorNorm(); }

}  // namespace detail

using detail::ordered_json;

namespace {

constexpr double kParseHermitianTol = 1e-10;

void expect_keys(const ordered_json& obj, const std::string& where,
                 std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known) throw ConfigError(where + "." + item.key(), "unknown field");
  }
}

double get_number(const ordered_json& obj, const std::string& where, const char* key,
                  double fallback, bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw ConfigError(where + "." + key, "missing required field");
    return fallback;
  }
  if (!obj[key].is_number()) throw ConfigError(where + "." + key, "expected a number");
  return obj[key].get<double>();
}

int get_int(const ordered_json& obj, const std::string& where, const char* key,
            int fallback, bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw ConfigError(where + "." + key, "missing required field");
    return fallback;
  }
  if (!obj[key].is_number_integer()) throw ConfigError(where + "." + key, "expected an integer");
  return obj[key].get<int>();
}

std::string get_string(const ordered_json& obj, const std::string& where, const char* key,
                       const std::string& fallback, bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw ConfigError(where + "." + key, "missing required field");
    return fallback;
  }
  if (!obj[key].is_string()) throw ConfigError(where + "." + key, "expected a string");
  return obj[key].get<std::string>();
}

// validated Hermitian at parse tolerance, then symmetrized so the tighter
// library contracts hold downstream
Matrix parse_hermitian(const ordered_json& j, const std::string& where) {
  Matrix m = detail::json_to_matrix(j, where);
  if (m.rows() != m.cols()) throw ConfigError(where, "expected a square matrix");
  if (hermiticity_defect(m) > kParseHermitianTol)
    throw ConfigError(where, "matrix is not Hermitian within 1e-10 (defect " +
                                 std::to_string(hermiticity_defect(m)) + ")");
  return (m + m.adjoint()).eval() / 2.0;
}

SystemConfig parse_system(const ordered_json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  expect_keys(j, where, {"preset", "omega", "energies", "matrix"});
  SystemConfig sys;
  sys.preset = get_string(j, where, "preset", "");
  if (sys.preset == "qubit_z") {
    sys.omega = get_number(j, where, "omega", 0.0, true);
  } else if (sys.preset == "free_level") {
    if (!j.contains("energies") || !j["energies"].is_array() || j["energies"].empty())
      throw ConfigError(where + ".energies", "free_level requires a non-empty energy list");
    for (const auto& e : j["energies"]) {
      if (!e.is_number()) throw ConfigError(where + ".energies", "expected numbers");
      sys.energies.push_back(e.get<double>());
    }
  } else if (sys.preset.empty()) {
    if (!j.contains("matrix"))
      throw ConfigError(where, "expected a preset or an explicit matrix");
    sys.matrix = parse_hermitian(j["matrix"], where + ".matrix");
  } else {
    throw ConfigError(where + ".preset", "unknown system preset '" + sys.preset + "'");
  }
  return sys;
}

FunctionConfig parse_function(const ordered_json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  expect_keys(j, where,
              {"preset", "value", "offset", "slope", "amplitude", "frequency", "phase",
               "samples"});
  FunctionConfig f;
  f.preset = get_string(j, where, "preset", "");
  if (f.preset == "constant") {
    f.value = get_number(j, where, "value", 0.0, true);
  } else if (f.preset == "linear") {
    f.offset = get_number(j, where, "offset", 0.0);
    f.slope = get_number(j, where, "slope", 0.0);
  } else if (f.preset == "sinusoid") {
    f.amplitude = get_number(j, where, "amplitude", 1.0);
    f.frequency = get_number(j, where, "frequency", 0.0, true);
    f.phase = get_number(j, where, "phase", 0.0);
  } else if (f.preset.empty()) {
    if (!j.contains("samples") || !j["samples"].is_array() || j["samples"].empty())
      throw ConfigError(where + ".samples", "expected a preset or a sample array");
    for (const auto& s : j["samples"]) {
      if (!s.is_number()) throw ConfigError(where + ".samples", "expected numbers");
      f.samples.push_back(s.get<double>());
    }
  } else {
    throw ConfigError(where + ".preset", "unknown function preset '" + f.preset + "'");
  }
  return f;
}

CouplingConfig parse_coupling(const ordered_json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  expect_keys(j, where, {"pauli", "matrix"});
  CouplingConfig s;
  s.pauli = get_string(j, where, "pauli", "");
  if (!s.pauli.empty()) {
    if (s.pauli != "x" && s.pauli != "y" && s.pauli != "z")
      throw ConfigError(where + ".pauli", "expected one of x, y, z");
  } else if (j.contains("matrix")) {
    s.matrix = parse_hermitian(j["matrix"], where + ".matrix");
  } else {
    throw ConfigError(where, "expected a pauli label or an explicit matrix");
  }
  return s;
}

InteractionConfig parse_interaction(const ordered_json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  expect_keys(j, where, {"kind", "lambda", "terms", "matrix", "kernel_preset"});
  InteractionConfig inter;
  inter.kind = get_string(j, where, "kind", "none");
  inter.lambda = get_number(j, where, "lambda", 0.0);
  if (inter.kind == "none") {
    return inter;
  }
  if (inter.kind == "separable") {
    if (!j.contains("terms") || !j["terms"].is_array() || j["terms"].empty())
      throw ConfigError(where + ".terms", "separable interactions need at least one term");
    std::size_t idx = 0;
    for (const auto& t : j["terms"]) {
      const std::string tpath = where + ".terms[" + std::to_string(idx++) + "]";
      if (!t.is_object()) throw ConfigError(tpath, "expected an object");
      expect_keys(t, tpath, {"f", "s"});
      if (!t.contains("f") || !t.contains("s"))
        throw ConfigError(tpath, "each term needs 'f' and 's'");
      SeparableTermConfig term;
      term.f = parse_function(t["f"], tpath + ".f");
      term.s = parse_coupling(t["s"], tpath + ".s");
      inter.terms.push_back(std::move(term));
    }
    return inter;
  }
  if (inter.kind == "generic") {
    const bool has_matrix = j.contains("matrix");
    const bool has_preset = j.contains("kernel_preset");
    if (has_matrix == has_preset)
      throw ConfigError(where, "generic interactions need exactly one of matrix / kernel_preset");
    if (has_matrix) {
      inter.matrix = parse_hermitian(j["matrix"], where + ".matrix");
    } else {
      const auto& kp = j["kernel_preset"];
      const std::string kpath = where + ".kernel_preset";
      if (!kp.is_object()) throw ConfigError(kpath, "expected an object");
      expect_keys(kp, kpath, {"seed", "terms", "max_mode"});
      KernelPresetConfig preset;
      if (kp.contains("seed")) {
        if (!kp["seed"].is_number_unsigned() && !kp["seed"].is_number_integer())
          throw ConfigError(kpath + ".seed", "expected an integer");
        preset.seed = kp["seed"].get<std::uint64_t>();
      }
      preset.terms = get_int(kp, kpath, "terms", 2);
      preset.max_mode = get_int(kp, kpath, "max_mode", 2);
      if (preset.terms < 1) throw ConfigError(kpath + ".terms", "must be >= 1");
      if (preset.max_mode < 0) throw ConfigError(kpath + ".max_mode", "must be >= 0");
      inter.kernel_preset = preset;
    }
    return inter;
  }
  throw ConfigError(where + ".kind", "expected one of none, separable, generic");
}

const std::set<std::string> kEngines{"exact", "series", "picard", "timedep"};

RunConfig parse_run(const ordered_json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  expect_keys(j, where,
              {"engines", "series_order", "picard_tol", "picard_max_iter", "k0", "psi0",
               "auto_shift", "tol", "state_index"});
  RunConfig run;
  if (j.contains("engines")) {
    if (!j["engines"].is_array() || j["engines"].empty())
      throw ConfigError(where + ".engines", "expected a non-empty array");
    run.engines.clear();
    for (const auto& e : j["engines"]) {
      if (!e.is_string() || !kEngines.count(e.get<std::string>()))
        throw ConfigError(where + ".engines", "expected exact, series, picard or timedep");
      run.engines.push_back(e.get<std::string>());
    }
  }
  run.series_order = get_int(j, where, "series_order", 1);
  if (run.series_order < 0) throw ConfigError(where + ".series_order", "must be >= 0");
  run.picard_tol = get_number(j, where, "picard_tol", 1e-12);
  if (!(run.picard_tol > 0)) throw ConfigError(where + ".picard_tol", "must be positive");
  run.picard_max_iter = get_int(j, where, "picard_max_iter", 200);
  if (run.picard_max_iter < 1) throw ConfigError(where + ".picard_max_iter", "must be >= 1");
  run.k0 = get_int(j, where, "k0", 0);
  if (j.contains("psi0")) {
    run.psi0 = detail::json_to_vector(j["psi0"], where + ".psi0");
    const double norm = run.psi0.norm();
    if (norm <= 0.0) throw ConfigError(where + ".psi0", "must be a nonzero vector");
    run.psi0 /= norm;
  }
  if (j.contains("auto_shift")) {
    if (!j["auto_shift"].is_boolean()) throw ConfigError(where + ".auto_shift", "expected a bool");
    run.auto_shift = j["auto_shift"].get<bool>();
  }
  run.tol = get_number(j, where, "tol", 0.0);
  if (run.tol < 0.0) throw ConfigError(where + ".tol", "must be >= 0");
  run.state_index = get_int(j, where, "state_index", 0);
  if (run.state_index < 0) throw ConfigError(where + ".state_index", "must be >= 0");
  return run;
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("$", e.what());
  }
  if (!j.is_object()) throw ConfigError("$", "expected a JSON object");
  expect_keys(j, "$", {"name", "clock", "system", "interaction", "run", "output", "sweep"});

  ScenarioConfig config;
  config.name = get_string(j, "$", "name", "scenario");

  if (!j.contains("clock")) throw ConfigError("$.clock", "missing required field");
  const auto& jc = j["clock"];
  if (!jc.is_object()) throw ConfigError("$.clock", "expected an object");
  expect_keys(jc, "$.clock", {"d", "t0", "dt"});
  config.clock.dim = get_int(jc, "$.clock", "d", 0, true);
  config.clock.t0 = get_number(jc, "$.clock", "t0", 0.0);
  config.clock.dt = get_number(jc, "$.clock", "dt", 0.0, true);
  if (config.clock.dim < 2) throw ConfigError("$.clock.d", "must be >= 2");
  if (!(config.clock.dt > 0)) throw ConfigError("$.clock.dt", "must be positive");

  if (!j.contains("system")) throw ConfigError("$.system", "missing required field");
  config.system = parse_system(j["system"], "$.system");

  if (j.contains("interaction"))
    config.interaction = parse_interaction(j["interaction"], "$.interaction");
  if (j.contains("run")) config.run = parse_run(j["run"], "$.run");
  if (j.contains("output")) {
    const auto& jo = j["output"];
    if (!jo.is_object()) throw ConfigError("$.output", "expected an object");
    expect_keys(jo, "$.output", {"path", "format"});
    config.output.path = get_string(jo, "$.output", "path", "out");
    config.output.format = get_string(jo, "$.output", "format", "csv");
    if (config.output.format != "csv")
      throw ConfigError("$.output.format", "only 'csv' is supported");
  }
  if (j.contains("sweep")) {
    const auto& js = j["sweep"];
    if (!js.is_object()) throw ConfigError("$.sweep", "expected an object");
    expect_keys(js, "$.sweep", {"parameter", "values"});
    SweepConfig sweep;
    sweep.parameter = get_string(js, "$.sweep", "parameter", "", true);
    if (sweep.parameter != "lambda" && sweep.parameter != "dt" && sweep.parameter != "d")
      throw ConfigError("$.sweep.parameter", "expected lambda, dt or d");
    if (!js.contains("values") || !js["values"].is_array() || js["values"].size() < 2)
      throw ConfigError("$.sweep.values", "expected at least two values");
    for (const auto& v : js["values"]) {
      if (!v.is_number()) throw ConfigError("$.sweep.values", "expected numbers");
      sweep.values.push_back(v.get<double>());
    }
    bool ascending = true, descending = true;
    for (std::size_t i = 0; i < sweep.values.size(); ++i) {
      if (!(sweep.values[i] > 0)) throw ConfigError("$.sweep.values", "must be positive");
      if (i > 0) {
        ascending = ascending && sweep.values[i] > sweep.values[i - 1];
        descending = descending && sweep.values[i] < sweep.values[i - 1];
      }
    }
    if (!ascending && !descending)
      throw ConfigError("$.sweep.values", "must be strictly sorted");
    config.sweep = std::move(sweep);
  }

  // cross-field validation
  const int d = config.clock.dim;
  if (config.run.k0 < 0 || config.run.k0 >= d)
    throw ConfigError("$.run.k0", "must lie in [0, d)");
  for (const auto& engine : config.run.engines) {
    if ((engine == "series" || engine == "timedep") && config.run.k0 != 0)
      throw ConfigError("$.run.k0",
                        "the " + engine + " engine is forward-only and requires k0 = 0");
    if (engine == "timedep" && config.interaction.kind != "separable")
      throw ConfigError("$.run.engines", "timedep requires a separable interaction");
  }
  for (std::size_t i = 0; i < config.interaction.terms.size(); ++i) {
    const auto& f = config.interaction.terms[i].f;
    if (!f.refinable() && static_cast<int>(f.samples.size()) != d)
      throw ConfigError("$.interaction.terms[" + std::to_string(i) + "].f.samples",
                        "sample count " + std::to_string(f.samples.size()) +
                            " does not match clock dimension " + std::to_string(d));
  }
  const Matrix h_s = system_hamiltonian(config.system);
  if (config.interaction.kind == "generic" && config.interaction.matrix.size() > 0) {
    const Eigen::Index want = static_cast<Eigen::Index>(d) * h_s.rows();
    if (config.interaction.matrix.rows() != want)
      throw ConfigError("$.interaction.matrix",
                        "expected dimension " + std::to_string(want) + " (d*n), got " +
                            std::to_string(config.interaction.matrix.rows()));
  }
  if (config.run.psi0.size() > 0 && config.run.psi0.size() != h_s.rows())
    throw ConfigError("$.run.psi0", "dimension does not match the system");
  return config;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("$", "cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

namespace detail {

ordered_json config_to_json(const ScenarioConfig& config) {
  ordered_json j;
  j["name"] = config.name;
  j["clock"] = {{"d", config.clock.dim}, {"t0", config.clock.t0}, {"dt", config.clock.dt}};

  ordered_json sys;
  if (config.system.preset == "qubit_z") {
    sys["preset"] = "qubit_z";
    sys["omega"] = config.system.omega;
  } else if (config.system.preset == "free_level") {
    sys["preset"] = "free_level";
    sys["energies"] = config.system.energies;
  } else {
    sys["matrix"] = matrix_to_json(config.system.matrix);
  }
  j["system"] = std::move(sys);

  ordered_json inter;
  inter["kind"] = config.interaction.kind;
  inter["lambda"] = config.interaction.lambda;
  if (config.interaction.kind == "separable") {
    ordered_json terms = ordered_json::array();
    for (const auto& term : config.interaction.terms) {
      ordered_json f;
      if (term.f.preset == "constant") {
        f = {{"preset", "constant"}, {"value", term.f.value}};
      } else if (term.f.preset == "linear") {
        f = {{"preset", "linear"}, {"offset", term.f.offset}, {"slope", term.f.slope}};
      } else if (term.f.preset == "sinusoid") {
        f = {{"preset", "sinusoid"},
             {"amplitude", term.f.amplitude},
             {"frequency", term.f.frequency},
             {"phase", term.f.phase}};
      } else {
        f = {{"samples", term.f.samples}};
      }
      ordered_json s;
      if (!term.s.pauli.empty())
        s = {{"pauli", term.s.pauli}};
      else
        s = {{"matrix", matrix_to_json(term.s.matrix)}};
      terms.push_back({{"f", std::move(f)}, {"s", std::move(s)}});
    }
    inter["terms"] = std::move(terms);
  } else if (config.interaction.kind == "generic") {
    if (config.interaction.kernel_preset) {
      inter["kernel_preset"] = {{"seed", config.interaction.kernel_preset->seed},
                                {"terms", config.interaction.kernel_preset->terms},
                                {"max_mode", config.interaction.kernel_preset->max_mode}};
    } else {
      inter["matrix"] = matrix_to_json(config.interaction.matrix);
    }
  }
  j["interaction"] = std::move(inter);

  ordered_json run;
  run["engines"] = config.run.engines;
  run["series_order"] = config.run.series_order;
  run["picard_tol"] = config.run.picard_tol;
  run["picard_max_iter"] = config.run.picard_max_iter;
  run["k0"] = config.run.k0;
  if (config.run.psi0.size() > 0) run["psi0"] = vector_to_json(config.run.psi0);
  run["auto_shift"] = config.run.auto_shift;
  run["tol"] = config.run.tol;
  run["state_index"] = config.run.state_index;
  j["run"] = std::move(run);

  j["output"] = {{"path", config.output.path}, {"format", config.output.format}};
  if (config.sweep)
    j["sweep"] = {{"parameter", config.sweep->parameter}, {"values", config.sweep->values}};
  return j;
}

}  // namespace detail

std::string serialize_config(const ScenarioConfig& config) {
  return detail::config_to_json(config).dump(2) + "\n";
}

Matrix system_hamiltonian(const SystemConfig& system) {
  if (system.preset == "qubit_z") {
    Matrix h(2, 2);
    h << system.omega, 0.0, 0.0, -system.omega;
    return h;
  }
  if (system.preset == "free_level") {
    const int n = static_cast<int>(system.energies.size());
    Matrix h = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) h(i, i) = system.energies[i];
    return h;
  }
  return system.matrix;
}

std::vector<double> FunctionConfig::sample(const ClockSpec& clock) const {
  std::vector<double> out(clock.dim);
  for (int k = 0; k < clock.dim; ++k) {
    const double t = clock.t0 + k * clock.dt;
    if (preset == "constant")
      out[k] = value;
    else if (preset == "linear")
      out[k] = offset + slope * t;
    else if (preset == "sinusoid")
      out[k] = amplitude * std::sin(2.0 * std::numbers::pi * frequency * t + phase);
    else
      out[k] = samples.at(k);
  }
  return out;
}

Matrix CouplingConfig::materialize() const {
  if (pauli == "x") {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
  }
  if (pauli == "y") {
    Matrix m(2, 2);
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return m;
  }
  if (pauli == "z") {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
  }
  return matrix;
}

namespace {

// portable uniforms from the standardized mt19937_64 stream
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double symmetric() { return 2.0 * uniform() - 1.0; }

 private:
  std::mt19937_64 gen_;
};

// smooth seeded kernel family, sampled with a dt weight so the memory term is
// stable under grid refinement at fixed period
Matrix kernel_preset_hbar(const KernelPresetConfig& preset, const ClockSpec& clock, int n) {
  const int d = clock.dim;
  const double period = clock.period();
  SeededRng rng(preset.seed);
  Matrix hbar = Matrix::Zero(static_cast<Eigen::Index>(d) * n,
                             static_cast<Eigen::Index>(d) * n);
  for (int a = 0; a < preset.terms; ++a) {
    const int modes = 2 * preset.max_mode + 1;
    std::vector<Complex> coeff(modes);
    double abs_sum = 0.0;
    for (int m = 0; m < modes; ++m) {
      coeff[m] = Complex(rng.symmetric(), rng.symmetric());
      abs_sum += std::abs(coeff[m]);
    }
    for (auto& c : coeff) c /= abs_sum;  // sup_t |phi| <= 1 independent of d

    Matrix coupling(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) coupling(i, j) = Complex(rng.symmetric(), rng.symmetric());
    coupling = ((coupling + coupling.adjoint()) / 2.0).eval();
    coupling /= coupling.norm();

    Vector phi(d);
    for (int k = 0; k < d; ++k) {
      const double t = clock.t0 + k * clock.dt;
      Complex acc = 0.0;
      for (int m = 0; m < modes; ++m) {
        const double nu = 2.0 * std::numbers::pi * (m - preset.max_mode) / period;
        acc += coeff[m] * std::polar(1.0, nu * t);
      }
      phi(k) = acc;
    }
    hbar += clock.dt * tensor_product(phi * phi.adjoint(), coupling);
  }
  return hbar;
}

}  // namespace

InteractionSpec build_interaction(const InteractionConfig& inter, const ClockSpec& clock,
                                  int system_dim) {
  if (inter.kind == "none") return InteractionSpec::make_none(inter.lambda);
  if (inter.kind == "separable") {
    std::vector<SeparableTerm> terms;
    for (const auto& term : inter.terms) {
      SeparableTerm out;
      out.samples = term.f.sample(clock);
      out.coupling = term.s.materialize();
      if (out.coupling.rows() != system_dim)
        throw ConfigError("$.interaction.terms",
                          "coupling dimension does not match the system");
      terms.push_back(std::move(out));
    }
    return InteractionSpec::make_separable(inter.lambda, std::move(terms));
  }
  if (inter.kernel_preset)
    return InteractionSpec::make_generic(
        inter.lambda, kernel_preset_hbar(*inter.kernel_preset, clock, system_dim));
  return InteractionSpec::make_generic(inter.lambda, inter.matrix);
}

namespace detail {

Assembled assemble_scenario(const ScenarioConfig& config) {
  Assembled a;
  a.clock = build_clock(config.clock);
  a.h_s = system_hamiltonian(config.system);
  require_hermitian(a.h_s, "system Hamiltonian", kParseHermitianTol);
  a.n = static_cast<int>(a.h_s.rows());
  a.inter = build_interaction(config.interaction, config.clock, a.n);
  a.total = assemble_total(a.clock, a.h_s, a.inter);
  a.kernel = build_kernel(a.inter, a.clock, a.n);
  return a;
}

ExactRun run_exact(const Assembled& a, const RunConfig& run, bool force_auto_shift) {
  const PhysicalSector sector =
      physical_states(a.total, run.tol, run.auto_shift || force_auto_shift);
  if (run.state_index >= static_cast<int>(sector.states.size()))
    throw Error("state_index " + std::to_string(run.state_index) + " out of range: only " +
                std::to_string(sector.states.size()) + " physical states found");
  const PhysicalState normalized =
      normalize_physical(sector.states[run.state_index], a.clock, run.k0);
  ExactRun out;
  out.trajectory = full_trajectory(normalized, a.clock);
  out.h_eff = sector.total.system;
  out.shift = sector.total.shift;
  out.residual = normalized.residual;
  out.drift = normalized.conditional_norm_drift;
  return out;
}

void composition_indices(int d, int& k1, int& k2, int& k3) {
  k1 = d / 8;
  k2 = std::max(k1 + 1, d / 3);
  k3 = std::max(k2 + 1, (3 * d) / 4);
  if (k3 >= d) {
    k3 = d - 1;
    k2 = std::min(k2, k3 - 1);
    k1 = std::min(k1, k2 - 1);
  }
  if (k1 < 0) throw Error("composition check needs a clock with d >= 3");
}

}  // namespace detail

std::vector<std::string> preset_names() {
  return {"p1_qubit_free", "p2_separable_drive", "p3_generic_kernel"};
}

std::string preset_description(const std::string& name) {
  if (name == "p1_qubit_free")
    return "qubit in free evolution, clock-commensurate level splitting, no interaction; "
           "the conditioned trajectory reproduces ordinary Schrodinger evolution";
  if (name == "p2_separable_drive")
    return "qubit with a separable sinusoidal drive f(t) sigma_x; the kernel is diagonal "
           "in time and the dynamics reduce to a time-dependent Hamiltonian";
  if (name == "p3_generic_kernel")
    return "two-level system coupled through a seeded smooth time-nonlocal kernel; the "
           "dynamics follow the memory-term equation with no local reduction";
  throw ConfigError("$", "unknown preset '" + name + "'");
}

ScenarioConfig preset(const std::string& name) {
  ScenarioConfig config;
  config.name = name;
  if (name == "p1_qubit_free") {
    config.clock = {64, 0.0, 0.1};
    config.system.preset = "qubit_z";
    config.system.omega = 2.0 * std::numbers::pi / config.clock.period();
    config.interaction.kind = "none";
    config.run.engines = {"exact"};
    config.run.psi0 = Vector(2);
    config.run.psi0 << Complex(1.0 / std::numbers::sqrt2, 0.0),
        Complex(1.0 / std::numbers::sqrt2, 0.0);
    config.output.path = "out/p1";
    return config;
  }
  if (name == "p2_separable_drive") {
    config.clock = {64, 0.0, 0.1};
    config.system.preset = "qubit_z";
    config.system.omega = 0.6;
    config.interaction.kind = "separable";
    config.interaction.lambda = 0.1;
    SeparableTermConfig term;
    term.f.preset = "sinusoid";
    term.f.amplitude = 1.0;
    term.f.frequency = 1.0 / config.clock.period();  // one cycle per period
    term.f.phase = 0.3;
    term.s.pauli = "x";
    config.interaction.terms.push_back(std::move(term));
    config.run.engines = {"picard", "timedep"};
    config.run.psi0 = Vector(2);
    config.run.psi0 << Complex(1.0, 0.0), Complex(0.0, 0.0);
    config.output.path = "out/p2";
    return config;
  }
  if (name == "p3_generic_kernel") {
    config.clock = {32, 0.0, 0.125};
    config.system.preset = "free_level";
    // first level sits exactly on a clock frequency, second is incommensurate
    config.system.energies = {2.0 * std::numbers::pi / config.clock.period(), 0.61};
    config.interaction.kind = "generic";
    config.interaction.lambda = 0.02;
    config.interaction.kernel_preset = KernelPresetConfig{11, 2, 2};
    config.run.engines = {"exact", "picard"};
    config.run.auto_shift = true;
    config.output.path = "out/p3";
    return config;
  }
  throw ConfigError("$", "unknown preset '" + name + "'");
}

}  // namespace cqdyn::scenario
