#pragma once

// internals shared by the scenario config / run / verify translation units

#include <json.hpp>

#include <cstdio>
#include <string>

#include "cqdyn/scenario.hpp"

namespace cqdyn::scenario::detail {

using ordered_json = nlohmann::ordered_json;

ordered_json complex_to_json(const Complex& z);
Complex json_to_complex(const ordered_json& j, const std::string& where);
ordered_json vector_to_json(const Vector& v);
Vector json_to_vector(const ordered_json& j, const std::string& where);
ordered_json matrix_to_json(const Matrix& m);
Matrix json_to_matrix(const ordered_json& j, const std::string& where);

ordered_json config_to_json(const ScenarioConfig& config);

// "%.17g" formatting for byte-stable CSV bodies
std::string fmt17(double x);

// one scenario, assembled once
struct Assembled {
  Clock clock;
  Matrix h_s;
  InteractionSpec inter;
  TotalHamiltonian total;
  KernelOperator kernel;
  int n = 0;
};

Assembled assemble_scenario(const ScenarioConfig& config);

struct ExactRun {
  Trajectory trajectory;
  Matrix h_eff;       // system Hamiltonian including any gauge shift
  double shift = 0.0;
  double residual = 0.0;
  double drift = 0.0;
};

ExactRun run_exact(const Assembled& a, const RunConfig& run, bool force_auto_shift);

// k1 < k2 < k3 well inside the grid, for composition checks
void composition_indices(int d, int& k1, int& k2, int& k3);

double operator_norm(const Matrix& m);

}  // namespace cqdyn::scenario::detail
