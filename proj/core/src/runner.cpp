#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>

#include "scenario_internal.hpp"

namespace cqdyn::scenario {

using detail::ordered_json;

namespace {

double max_state_diff(const Trajectory& a, const Trajectory& b) {
  double diff = 0.0;
  for (int k = 0; k < a.size(); ++k)
    diff = std::max(diff, (a.states[k] - b.states[k]).norm());
  return diff;
}

Trajectory propagate(const std::vector<Propagator>& props, const Vector& psi0,
                     const ClockSpec& spec) {
  std::vector<Vector> states;
  states.reserve(props.size());
  for (const Propagator& p : props) states.push_back(p.v * psi0);
  return make_trajectory(spec, std::move(states));
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();
  const detail::Assembled a = detail::assemble_scenario(config);
  const RunConfig& run = config.run;

  RunReport report;
  report.config = config;

  // the exact engine runs first: it fixes the gauge shift and, when psi0 is
  // not configured, seeds the propagator engines with its conditioned state
  Matrix h_eff = a.h_s;
  Vector psi0 = run.psi0;
  std::vector<std::string> engines = run.engines;
  const bool wants_exact =
      std::find(engines.begin(), engines.end(), "exact") != engines.end();
  engines.erase(std::remove(engines.begin(), engines.end(), "exact"), engines.end());

  if (wants_exact) {
    detail::ExactRun exact = detail::run_exact(a, run, false);
    h_eff = exact.h_eff;
    report.shift = exact.shift;
    if (psi0.size() == 0) psi0 = exact.trajectory.states[run.k0];
    EngineRun er;
    er.engine = "exact";
    er.trajectory = std::move(exact.trajectory);
    er.conditional_norm_drift = exact.drift;
    er.constraint_residual = exact.residual;
    report.engines.push_back(std::move(er));
  }

  for (const std::string& engine : engines) {
    if (psi0.size() == 0)
      throw ConfigError("$.run.psi0",
                        "required when the exact engine is not requested");
    EngineRun er;
    er.engine = engine;
    if (engine == "series") {
      const auto props =
          series_propagators(h_eff, a.kernel, run.series_order, run.k0, a.clock);
      er.trajectory = propagate(props, psi0, config.clock);
      for (const Propagator& p : props) er.isometry.push_back(p.isometry_defect);
    } else if (engine == "picard") {
      PicardResult pr = picard_solve_detailed(h_eff, a.kernel, psi0, run.k0, a.clock,
                                              run.picard_max_iter, run.picard_tol);
      er.trajectory = std::move(pr.trajectory);
      er.picard_iterations = pr.iterations;
    } else if (engine == "timedep") {
      const auto props = time_ordered_propagators(h_eff, a.inter, run.k0, a.clock);
      er.trajectory = propagate(props, psi0, config.clock);
      for (const Propagator& p : props) er.isometry.push_back(p.isometry_defect);
    } else {
      continue;  // duplicate "exact" already handled
    }
    report.engines.push_back(std::move(er));
  }

  for (EngineRun& er : report.engines) {
    er.residual_cyclic = residual_modified_se(a.kernel, h_eff, er.trajectory);
    er.residual_interior = residual_modified_se_interior(a.kernel, h_eff, er.trajectory);
  }
  for (std::size_t i = 0; i < report.engines.size(); ++i)
    for (std::size_t j = i + 1; j < report.engines.size(); ++j)
      report.cross.push_back({report.engines[i].engine, report.engines[j].engine,
                              max_state_diff(report.engines[i].trajectory,
                                             report.engines[j].trajectory)});

  report.elapsed_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t_start)
                          .count();
  return report;
}

std::string trajectory_to_csv(const Trajectory& traj) {
  const int n = traj.system_dim();
  std::string out = "t";
  for (int i = 0; i < n; ++i)
    out += ",re_" + std::to_string(i) + ",im_" + std::to_string(i);
  out += ",norm\n";
  for (int k = 0; k < traj.size(); ++k) {
    out += detail::fmt17(traj.clock.t0 + k * traj.clock.dt);
    for (int i = 0; i < n; ++i) {
      out += "," + detail::fmt17(traj.states[k](i).real());
      out += "," + detail::fmt17(traj.states[k](i).imag());
    }
    out += "," + detail::fmt17(traj.norms[k]) + "\n";
  }
  return out;
}

namespace {

ordered_json engine_to_json(const EngineRun& er) {
  ordered_json j;
  j["engine"] = er.engine;
  j["residual_modified_se"] = er.residual_cyclic;
  j["residual_modified_se_interior"] = er.residual_interior;
  if (er.engine == "picard") j["picard_iterations"] = er.picard_iterations;
  if (er.engine == "exact") {
    j["constraint_residual"] = er.constraint_residual;
    j["conditional_norm_drift"] = er.conditional_norm_drift;
  }
  if (!er.isometry.empty()) j["isometry_defect_per_k"] = er.isometry;
  j["norms"] = er.trajectory.norms;
  return j;
}

}  // namespace

std::string report_to_json(const RunReport& report) {
  ordered_json j;
  j["config"] = detail::config_to_json(report.config);
  j["shift"] = report.shift;
  ordered_json engines = ordered_json::array();
  for (const EngineRun& er : report.engines) engines.push_back(engine_to_json(er));
  j["engines"] = std::move(engines);
  ordered_json cross = ordered_json::array();
  for (const auto& c : report.cross)
    cross.push_back({{"a", c.a}, {"b", c.b}, {"max_diff", c.max_diff}});
  j["cross_engine"] = std::move(cross);
  j["elapsed_ms"] = report.elapsed_ms;
  return j.dump(2) + "\n";
}

void write_run_outputs(const RunReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const EngineRun& er : report.engines) {
    std::ofstream csv(out_dir + "/trajectory_" + er.engine + ".csv");
    if (!csv) throw Error("cannot write to '" + out_dir + "'");
    csv << trajectory_to_csv(er.trajectory);
  }
  std::ofstream json(out_dir + "/report.json");
  if (!json) throw Error("cannot write to '" + out_dir + "'");
  json << report_to_json(report);
}

}  // namespace cqdyn::scenario
