#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spinsense/optimizer.hpp"

namespace spinsense {

struct ProblemSpec {
  int n = 0;
  Topology topology = Topology::Chain;
  int output_spin = 0;
  Algorithm algorithm = Algorithm::A;

  std::string id() const;  // e.g. "chain-5-out3-A"
};

// Parses "chain-5-out3-A" / "ring-6-out2-B"; out or algorithm may be omitted
// ("chain-5" expands to all transfer targets with algorithm A).
std::vector<ProblemSpec> parse_problem_spec(const std::string& text);

struct PipelineConfig {
  std::vector<ProblemSpec> problems;
  std::uint64_t synth_seed = 1;
  std::uint64_t dephasing_seed = 2;
  int dephasing_count = 1000;
  int delta_steps = 1000;
  double delta_max = 0.1;
  double representative_delta = 0.05;  // delta used for RIM1 rankings
  int restarts = 800;  // enough margin for 100 distinct optima on every stock problem
  int keep = 100;
  std::filesystem::path out_dir = "out";
  int jobs = 1;

  static PipelineConfig from_json_file(const std::filesystem::path& path);
};

// Pipeline stages; each returns the number of problems processed and writes
// its artifacts under out_dir. All stages are deterministic in the config
// seeds and resumable (existing per-controller outputs are reused).
int cmd_synth(const PipelineConfig& config);
int cmd_evaluate(const PipelineConfig& config);
int cmd_analyze(const PipelineConfig& config);
int cmd_report(const PipelineConfig& config, std::ostream& out);

}  // namespace spinsense
