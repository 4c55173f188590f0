#include "spinsense/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "spinsense/common.hpp"
#include "spinsense/io.hpp"
#include "spinsense/rim.hpp"
#include "spinsense/stats.hpp"

namespace spinsense {

using nlohmann::json;

std::string ProblemSpec::id() const {
  std::ostringstream s;
  s << (topology == Topology::Chain ? "chain" : "ring") << "-" << n << "-out" << output_spin
    << "-" << algorithm_name(algorithm);
  return s.str();
}

std::vector<ProblemSpec> parse_problem_spec(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, '-')) parts.push_back(tok);
  if (parts.size() < 2) throw ConfigError("malformed problem spec: " + text);

  ProblemSpec base;
  if (parts[0] == "chain")
    base.topology = Topology::Chain;
  else if (parts[0] == "ring")
    base.topology = Topology::Ring;
  else
    throw ConfigError("unknown topology in problem spec: " + text);
  base.n = std::stoi(parts[1]);
  if (base.n < 2) throw ConfigError("network size must be >= 2: " + text);

  int out = 0;
  for (std::size_t i = 2; i < parts.size(); ++i) {
    if (parts[i].rfind("out", 0) == 0)
      out = std::stoi(parts[i].substr(3));
    else
      base.algorithm = algorithm_from_name(parts[i]);
  }

  std::vector<ProblemSpec> specs;
  if (out > 0) {
    base.output_spin = out;
    specs.push_back(base);
  } else {
    SpinNetwork net{base.n, base.topology, 1.0, 0.0};
    for (int target : transfer_targets(net)) {
      ProblemSpec p = base;
      p.output_spin = target;
      specs.push_back(p);
    }
  }
  return specs;
}

PipelineConfig PipelineConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("bad config file " + path.string() + ": " + e.what());
  }

  PipelineConfig cfg;
  for (const auto& p : j.value("problems", std::vector<std::string>{})) {
    auto specs = parse_problem_spec(p);
    cfg.problems.insert(cfg.problems.end(), specs.begin(), specs.end());
  }
  cfg.synth_seed = j.value("synth_seed", cfg.synth_seed);
  cfg.dephasing_seed = j.value("dephasing_seed", cfg.dephasing_seed);
  cfg.dephasing_count = j.value("dephasing_count", cfg.dephasing_count);
  cfg.delta_steps = j.value("delta_steps", cfg.delta_steps);
  cfg.delta_max = j.value("delta_max", cfg.delta_max);
  cfg.representative_delta = j.value("representative_delta", cfg.representative_delta);
  cfg.restarts = j.value("restarts", cfg.restarts);
  cfg.keep = j.value("keep", cfg.keep);
  cfg.out_dir = j.value("out_dir", cfg.out_dir.string());
  cfg.jobs = j.value("jobs", cfg.jobs);
  return cfg;
}

namespace {

std::filesystem::path controllers_path(const PipelineConfig& cfg, const ProblemSpec& p) {
  return cfg.out_dir / "controllers" / (p.id() + ".json");
}

std::filesystem::path eval_dir(const PipelineConfig& cfg, const ProblemSpec& p) {
  return cfg.out_dir / "eval" / p.id();
}

std::string ctrl_tag(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "ctrl_%03d", i);
  return buf;
}

struct ControllerRecord {
  SensitivityRecord sens;
  Theorem1Result theorem1;
  double rim1_rep = 0.0;
  double rim1_adj_rep = 0.0;
};

json record_to_json(const ControllerRecord& r) {
  return json{{"controller_id", r.sens.controller_id},
              {"e_T", r.sens.e_T},
              {"s_a", r.sens.s_a},
              {"s_k", r.sens.s_k},
              {"zeta_a", r.sens.zeta_a},
              {"zeta_k", r.sens.zeta_k},
              {"degenerate", r.sens.degenerate},
              {"fd_crosscheck_ok", r.sens.fd_crosscheck_ok},
              {"theorem1_relative_error", r.theorem1.relative_error},
              {"theorem1_absolute_fallback", r.theorem1.absolute_fallback},
              {"rim1_representative", r.rim1_rep},
              {"rim1_adjusted_representative", r.rim1_adj_rep}};
}

ControllerRecord record_from_json(const json& j) {
  ControllerRecord r;
  r.sens.controller_id = j.at("controller_id");
  r.sens.e_T = j.at("e_T");
  r.sens.s_a = j.at("s_a");
  r.sens.s_k = j.at("s_k");
  r.sens.zeta_a = j.at("zeta_a");
  r.sens.zeta_k = j.at("zeta_k");
  r.sens.degenerate = j.at("degenerate");
  r.sens.fd_crosscheck_ok = j.at("fd_crosscheck_ok");
  r.theorem1.relative_error = j.at("theorem1_relative_error");
  r.theorem1.absolute_fallback = j.at("theorem1_absolute_fallback");
  r.theorem1.zeta_a = r.sens.zeta_a;
  r.rim1_rep = j.at("rim1_representative");
  r.rim1_adj_rep = j.at("rim1_adjusted_representative");
  return r;
}

}  // namespace

int cmd_synth(const PipelineConfig& cfg) {
  if (cfg.problems.empty()) throw ConfigError("no problems configured");
  int done = 0;
  for (const ProblemSpec& p : cfg.problems) {
    auto path = controllers_path(cfg, p);
    if (std::filesystem::exists(path)) {
      std::cerr << "synth: " << p.id() << " exists, skipping\n";
      ++done;
      continue;
    }
    SpinNetwork net{p.n, p.topology, 1.0, 0.0};
    OptimizationConfig oc;
    oc.algorithm = p.algorithm;
    oc.restarts = cfg.restarts;
    oc.keep = cfg.keep;
    oc.seed = derive_stream_seed(cfg.synth_seed, fnv1a(p.id().data(), p.id().size()));
    ControllerSet set = synthesize_set(net, p.output_spin, oc, cfg.jobs);
    write_controller_set(path, set);
    std::cerr << "synth: " << p.id() << " best e(T) = " << set.controllers.front().nominal_error
              << "\n";
    ++done;
  }
  return done;
}

int cmd_evaluate(const PipelineConfig& cfg) {
  if (cfg.problems.empty()) throw ConfigError("no problems configured");
  StrengthGrid grid{cfg.delta_steps, cfg.delta_max};
  int done = 0;

  for (const ProblemSpec& p : cfg.problems) {
    auto cpath = controllers_path(cfg, p);
    if (!std::filesystem::exists(cpath))
      throw ConfigError("missing controller set " + cpath.string() + "; run synth first");
    ControllerSet set = read_controller_set(cpath);
    auto dir = eval_dir(cfg, p);
    std::filesystem::create_directories(dir);

    HermitianBasis basis(set.net.size);
    std::vector<ControllerRecord> records(set.controllers.size());
    std::vector<RimCurve> curves(set.controllers.size());

    for (std::size_t i = 0; i < set.controllers.size(); ++i) {
      const Controller& ctrl = set.controllers[i];
      auto record_path = dir / (ctrl_tag(static_cast<int>(i)) + ".json");
      auto rim_path = dir / (ctrl_tag(static_cast<int>(i)) + "_rim.csv");

      // Checkpointed per controller: a parseable record means this
      // controller is already done.
      if (std::filesystem::exists(record_path) && std::filesystem::exists(rim_path)) {
        std::ifstream in(record_path);
        json j;
        if (in >> j) {
          records[i] = record_from_json(j);
          curves[i] = read_rim_curve_csv(rim_path);
          curves[i].controller_id = static_cast<int>(i);
          continue;
        }
      }

      HamiltonianSS h = build_hamiltonian(set.net, ctrl);
      auto deph_path = dir / (ctrl_tag(static_cast<int>(i)) + "_dephasing.json");
      DephasingSet deph;
      if (std::filesystem::exists(deph_path)) {
        deph = read_dephasing_set(deph_path, h, basis);  // aborts on hash mismatch
      } else {
        deph = generate_set(h, basis, cfg.dephasing_count, cfg.dephasing_seed);
        write_dephasing_set(deph_path, deph);
      }

      ErrorEvaluator eval(h, ctrl.input_spin, ctrl.output_spin);
      ErrorGrid egrid = compute_error_grid(eval, ctrl.readout_time, deph, grid,
                                           static_cast<int>(i), cfg.jobs);
      write_error_grid(dir / (ctrl_tag(static_cast<int>(i)) + ".grid"), egrid,
                       set.net.size, cfg.dephasing_seed);

      curves[i] = rim1_curve(egrid);
      write_rim_curve_csv(rim_path, curves[i]);

      ControllerRecord rec;
      rec.sens = compute_sensitivity_record(eval, ctrl.readout_time, deph, egrid,
                                            static_cast<int>(i));
      rec.theorem1 = theorem1_check(rec.sens, curves[i]);
      rec.rim1_rep = curves[i].at_delta(cfg.representative_delta);
      rec.rim1_adj_rep = curves[i].adjusted_at_delta(cfg.representative_delta);
      records[i] = rec;

      std::ofstream out(record_path);
      out << record_to_json(rec).dump(2) << "\n";
    }

    std::vector<SensitivityRecord> sens;
    sens.reserve(records.size());
    double max_theorem1 = 0.0;
    for (const auto& r : records) {
      sens.push_back(r.sens);
      max_theorem1 = std::max(max_theorem1, r.theorem1.relative_error);
    }
    write_sensitivity_csv(dir / "sensitivity.csv", sens);

    json summary;
    summary["problem"] = p.id();
    summary["dephasing_seed"] = cfg.dephasing_seed;
    summary["dephasing_count"] = cfg.dephasing_count;
    summary["delta_steps"] = cfg.delta_steps;
    summary["delta_max"] = cfg.delta_max;
    summary["representative_delta"] = cfg.representative_delta;
    summary["max_theorem1_relative_error"] = max_theorem1;
    json jrecords = json::array();
    for (const auto& r : records) jrecords.push_back(record_to_json(r));
    summary["controllers"] = std::move(jrecords);
    std::ofstream out(dir / "summary.json");
    out << summary.dump(2) << "\n";

    std::cerr << "evaluate: " << p.id() << " max theorem-1 relative error = " << max_theorem1
              << "\n";
    ++done;
  }
  return done;
}

namespace {

std::vector<ControllerRecord> load_records(const std::filesystem::path& summary_path) {
  std::ifstream in(summary_path);
  json j;
  in >> j;
  std::vector<ControllerRecord> records;
  for (const json& r : j.at("controllers")) records.push_back(record_from_json(r));
  return records;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

int cmd_analyze(const PipelineConfig& cfg) {
  if (cfg.problems.empty()) throw ConfigError("no problems configured");
  auto analysis = cfg.out_dir / "analysis";
  std::filesystem::create_directories(analysis);

  // List every missing input before aborting.
  std::vector<std::string> missing;
  for (const ProblemSpec& p : cfg.problems) {
    auto dir = eval_dir(cfg, p);
    if (!std::filesystem::exists(dir / "summary.json"))
      missing.push_back((dir / "summary.json").string());
  }
  if (!missing.empty()) {
    std::string msg = "missing evaluation outputs:";
    for (const auto& m : missing) msg += "\n  " + m;
    throw ConfigError(msg);
  }

  std::vector<MeasureTable> tables;
  for (const ProblemSpec& p : cfg.problems) {
    auto dir = eval_dir(cfg, p);
    std::vector<ControllerRecord> records = load_records(dir / "summary.json");

    MeasureTable table;
    std::ostringstream pid;
    pid << (p.topology == Topology::Chain ? "chain" : "ring") << "-" << p.n << "-out"
        << p.output_spin;
    table.problem = pid.str();
    table.algorithm = algorithm_name(p.algorithm);
    for (const auto& r : records) {
      if (r.sens.degenerate) continue;  // reported separately, excluded from stats
      table.rows.push_back({r.sens.e_T, r.sens.s_a, r.sens.s_k, r.rim1_rep, r.sens.zeta_a,
                            r.sens.zeta_k, r.rim1_adj_rep});
    }
    tables.push_back(std::move(table));

    // Per-problem curves for the heat map and the figure-style exports.
    std::vector<RimCurve> curves;
    for (std::size_t i = 0; i < records.size(); ++i) {
      curves.push_back(read_rim_curve_csv(dir / (ctrl_tag(static_cast<int>(i)) + "_rim.csv")));
      curves.back().controller_id = static_cast<int>(i);
    }
    write_heatmap_csv(analysis / (p.id() + "_tau_heatmap.csv"), rim_delta_selection(curves));

    // RIM1 vs controller index (controllers already sorted by e(T)).
    {
      std::ostringstream out;
      out << "controller";
      for (int n = 0; n < curves.front().grid.size(); ++n)
        out << "," << fmt(curves.front().grid.delta(n));
      out << "\n";
      for (std::size_t i = 0; i < curves.size(); ++i) {
        out << i;
        for (Eigen::Index n = 0; n < curves[i].values.size(); ++n)
          out << "," << fmt(curves[i].values(n));
        out << "\n";
      }
      std::ofstream f(analysis / (p.id() + "_rim_by_controller.csv"));
      f << out.str();
    }

    // Measures vs controller index.
    {
      std::ostringstream out;
      out << "controller,e_T,s_a,s_k,rim1,zeta_a,zeta_k,rim1_adj\n";
      for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        out << i << "," << fmt(r.sens.e_T) << "," << fmt(r.sens.s_a) << "," << fmt(r.sens.s_k)
            << "," << fmt(r.rim1_rep) << "," << fmt(r.sens.zeta_a) << "," << fmt(r.sens.zeta_k)
            << "," << fmt(r.rim1_adj_rep) << "\n";
      }
      std::ofstream f(analysis / (p.id() + "_measures_by_index.csv"));
      f << out.str();
    }

    // Adjusted RIM1 as a function of delta, rows ordered by ascending zeta_a.
    {
      std::vector<std::size_t> order(records.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return records[a].sens.zeta_a < records[b].sens.zeta_a;
      });
      std::ostringstream out;
      out << "zeta_a";
      for (int n = 0; n < curves.front().grid.size(); ++n)
        out << "," << fmt(curves.front().grid.delta(n));
      out << "\n";
      for (std::size_t i : order) {
        out << fmt(records[i].sens.zeta_a);
        for (Eigen::Index n = 0; n < curves[i].adjusted.size(); ++n)
          out << "," << fmt(curves[i].adjusted(n));
        out << "\n";
      }
      std::ofstream f(analysis / (p.id() + "_adjusted_rim_by_zeta.csv"));
      f << out.str();
    }
  }

  write_suite_csv(analysis / "concordance.csv", concordance_suite(tables));
  write_suite_csv(analysis / "tradeoff.csv", tradeoff_suite(tables));
  return static_cast<int>(cfg.problems.size());
}

int cmd_report(const PipelineConfig& cfg, std::ostream& out) {
  out << "spinsense pipeline report\n";
  out << "=========================\n";
  for (const ProblemSpec& p : cfg.problems) {
    auto dir = eval_dir(cfg, p);
    if (!std::filesystem::exists(dir / "summary.json")) {
      out << p.id() << ": not evaluated\n";
      continue;
    }
    std::ifstream in(dir / "summary.json");
    json j;
    in >> j;
    double best = 1.0;
    for (const json& r : j.at("controllers")) best = std::min(best, r.at("e_T").get<double>());
    out << p.id() << ": controllers=" << j.at("controllers").size() << " best e(T)=" << best
        << " max theorem-1 rel err=" << j.at("max_theorem1_relative_error").get<double>()
        << "\n";
  }

  auto print_suite = [&](const std::filesystem::path& path, const std::string& name) {
    if (!std::filesystem::exists(path)) {
      out << name << ": not analyzed\n";
      return;
    }
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    int total = 0, rejected = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ++total;
      if (line.find(",reject") != std::string::npos) ++rejected;
    }
    out << name << ": " << rejected << "/" << total << " test cases reject H0\n";
  };
  print_suite(cfg.out_dir / "analysis" / "concordance.csv", "concordance suite");
  print_suite(cfg.out_dir / "analysis" / "tradeoff.csv", "tradeoff suite");
  return 0;
}

}  // namespace spinsense
