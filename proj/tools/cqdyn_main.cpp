// command-line front end: scenario runs, the invariant suite, scaling sweeps
// and the shipped presets. exit codes: 0 success, 1 verification failure,
// 2 usage/parse error, 3 engine failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "cqdyn/scenario.hpp"

namespace {

constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitEngine = 3;

struct Options {
  std::string config_path;
  std::string out_dir;
  double tol = -1.0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string param;
  std::vector<double> values;
};

cqdyn::scenario::ScenarioConfig load(const Options& opt) {
  auto config = cqdyn::scenario::load_config_file(opt.config_path);
  if (opt.tol >= 0.0) config.run.tol = opt.tol;
  if (opt.seed_set) {
    if (!config.interaction.kernel_preset)
      throw cqdyn::ConfigError("$.interaction",
                               "--seed only applies to kernel_preset interactions");
    config.interaction.kernel_preset->seed = opt.seed;
  }
  if (!opt.out_dir.empty()) config.output.path = opt.out_dir;
  return config;
}

int cmd_run(const Options& opt) {
  const auto config = load(opt);
  const auto report = cqdyn::scenario::run_scenario(config);
  cqdyn::scenario::write_run_outputs(report, config.output.path);
  for (const auto& er : report.engines) {
    std::printf("engine %-8s residual_modified_se=%.3e interior=%.3e", er.engine.c_str(),
                er.residual_cyclic, er.residual_interior);
    if (er.engine == "picard") std::printf(" iterations=%d", er.picard_iterations);
    if (er.engine == "exact")
      std::printf(" constraint_residual=%.3e drift=%.3e", er.constraint_residual,
                  er.conditional_norm_drift);
    std::printf("\n");
  }
  for (const auto& c : report.cross)
    std::printf("cross %s vs %s: max_diff=%.3e\n", c.a.c_str(), c.b.c_str(), c.max_diff);
  if (report.shift != 0.0) std::printf("gauge shift applied: %.17g\n", report.shift);
  std::printf("outputs written to %s (%.1f ms)\n", config.output.path.c_str(),
              report.elapsed_ms);
  return 0;
}

int cmd_verify(const Options& opt) {
  const auto config = load(opt);
  const auto report = cqdyn::scenario::verify_scenario(config);
  for (const auto& c : report.checks) {
    std::printf("%-26s %-4s value=%.3e tol=%.3e%s%s\n", c.name.c_str(), c.status.c_str(),
                c.value, c.tolerance, c.detail.empty() ? "" : "  ",
                c.detail.c_str());
  }
  if (!config.output.path.empty()) {
    std::filesystem::create_directories(config.output.path);
    std::ofstream out(config.output.path + "/verify.json");
    out << cqdyn::scenario::verify_to_json(report);
  }
  std::printf("%s (%0.1f ms)\n", report.all_passed() ? "all checks passed" : "FAILED",
              report.elapsed_ms);
  return report.all_passed() ? 0 : kExitVerifyFailed;
}

int cmd_sweep(const Options& opt) {
  auto config = load(opt);
  cqdyn::scenario::SweepConfig sweep;
  if (!opt.param.empty()) {
    sweep.parameter = opt.param;
    sweep.values = opt.values;
    if (sweep.values.size() < 2)
      throw cqdyn::ConfigError("--values", "needs at least two values");
  } else if (config.sweep) {
    sweep = *config.sweep;
  } else {
    throw cqdyn::ConfigError("$.sweep",
                             "config has no sweep block; pass --param and --values");
  }
  const auto table = cqdyn::scenario::sweep_scenario(config, sweep);
  const std::string csv = cqdyn::scenario::sweep_to_csv(table);
  std::filesystem::create_directories(config.output.path);
  std::ofstream out(config.output.path + "/sweep.csv");
  out << csv;
  std::fputs(csv.c_str(), stdout);
  return 0;
}

int cmd_presets(const std::string& out_dir) {
  for (const auto& name : cqdyn::scenario::preset_names()) {
    std::printf("%-20s %s\n", name.c_str(),
                cqdyn::scenario::preset_description(name).c_str());
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      std::ofstream out(out_dir + "/" + name + ".json");
      out << cqdyn::scenario::serialize_config(cqdyn::scenario::preset(name));
    }
  }
  if (!out_dir.empty()) std::printf("preset configs written to %s\n", out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clock-conditioned quantum dynamics"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "scenario config (JSON)")->required();
    sub->add_option("--out", opt.out_dir, "output directory (overrides the config)");
    sub->add_option("--tol", opt.tol, "constraint tolerance (overrides the config)");
    sub->add_option("--seed", opt.seed, "kernel preset seed (overrides the config)")
        ->each([&opt](const std::string&) { opt.seed_set = true; });
  };

  CLI::App* run = app.add_subcommand("run", "run the configured engines");
  add_common(run);
  CLI::App* verify = app.add_subcommand("verify", "run the invariant suite");
  add_common(verify);
  CLI::App* sweep = app.add_subcommand("sweep", "sweep lambda, dt or d");
  add_common(sweep);
  sweep->add_option("--param", opt.param, "sweep parameter: lambda, dt or d");
  sweep->add_option("--values", opt.values, "sweep values")->delimiter(',');
  CLI::App* presets = app.add_subcommand("presets", "list the shipped presets");
  std::string presets_out;
  presets->add_option("--out", presets_out, "write preset configs to this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(opt);
    if (verify->parsed()) return cmd_verify(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
    return cmd_presets(presets_out);
  } catch (const cqdyn::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const cqdyn::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitEngine;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitEngine;
  }
}
