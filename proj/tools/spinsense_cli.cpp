#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinsense/common.hpp"
#include "spinsense/io.hpp"
#include "spinsense/pipeline.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitNumericalFailure = 3;

struct CliOptions {
  std::string config;
  std::vector<std::string> problems;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
  double delta_max = 0.0;
  int delta_steps = 0;
};

spinsense::PipelineConfig resolve(const CliOptions& opt) {
  spinsense::PipelineConfig cfg;
  if (!opt.config.empty()) cfg = spinsense::PipelineConfig::from_json_file(opt.config);
  if (!opt.problems.empty()) {
    cfg.problems.clear();
    for (const auto& p : opt.problems) {
      auto specs = spinsense::parse_problem_spec(p);
      cfg.problems.insert(cfg.problems.end(), specs.begin(), specs.end());
    }
  }
  if (!opt.out.empty()) cfg.out_dir = opt.out;
  if (opt.seed_set) {
    cfg.synth_seed = opt.seed;
    cfg.dephasing_seed = spinsense::derive_stream_seed(opt.seed, 1);
  }
  if (opt.jobs > 0) cfg.jobs = opt.jobs;
  if (opt.delta_max > 0.0) cfg.delta_max = opt.delta_max;
  if (opt.delta_steps > 0) cfg.delta_steps = opt.delta_steps;
  if (cfg.problems.empty())
    throw spinsense::ConfigError("no problems given; use --problems or a config file");
  return cfg;
}

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--config", opt.config, "JSON pipeline configuration file");
  cmd->add_option("--problems", opt.problems,
                  "problem specs like chain-5-out3-A (overrides config)");
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_option("--seed", opt.seed, "master seed (overrides config seeds)")
      ->each([&opt](const std::string&) { opt.seed_set = true; });
  cmd->add_option("--jobs", opt.jobs, "worker threads");
  cmd->add_option("--delta-max", opt.delta_max, "largest dephasing strength");
  cmd->add_option("--delta-steps", opt.delta_steps, "strength grid resolution");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bias-field controller synthesis and dephasing robustness analysis"};
  app.require_subcommand(1);

  CliOptions opt;
  CLI::App* synth = app.add_subcommand("synth", "synthesize controller sets");
  CLI::App* evaluate = app.add_subcommand("evaluate", "error grids, RIM and sensitivities");
  CLI::App* analyze = app.add_subcommand("analyze", "rank-correlation hypothesis suites");
  CLI::App* report = app.add_subcommand("report", "human-readable pipeline summary");
  for (CLI::App* cmd : {synth, evaluate, analyze, report}) add_common_flags(cmd, opt);

  CLI11_PARSE(app, argc, argv);

  try {
    spinsense::PipelineConfig cfg = resolve(opt);
    if (synth->parsed()) {
      spinsense::cmd_synth(cfg);
    } else if (evaluate->parsed()) {
      spinsense::cmd_evaluate(cfg);
    } else if (analyze->parsed()) {
      spinsense::cmd_analyze(cfg);
    } else {
      spinsense::cmd_report(cfg, std::cout);
    }
  } catch (const spinsense::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const spinsense::NumericalIntegrityError& e) {
    std::cerr << "numerical integrity failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
