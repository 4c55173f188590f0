#include "spinsense/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace spinsense {

using nlohmann::json;

namespace {

std::string topology_name(Topology t) { return t == Topology::Chain ? "chain" : "ring"; }

Topology topology_from_name(const std::string& s) {
  if (s == "chain") return Topology::Chain;
  if (s == "ring") return Topology::Ring;
  throw ConfigError("unknown topology: " + s);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

std::uint64_t from_hex64(const std::string& s) {
  return std::stoull(s, nullptr, 16);
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = arr[static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

std::string controller_set_to_json(const ControllerSet& set) {
  json j;
  j["N"] = set.net.size;
  j["topology"] = topology_name(set.net.topology);
  j["out"] = set.output_spin;
  j["config"] = {
      {"algorithm", algorithm_name(set.config.algorithm)},
      {"restarts", set.config.restarts},
      {"delta_bound", set.config.delta_bound},
      {"t_min", set.config.t_min},
      {"t_max", set.config.t_max},
      {"seed", set.config.seed},
      {"keep", set.config.keep},
  };
  json ctrls = json::array();
  for (std::size_t i = 0; i < set.controllers.size(); ++i) {
    const Controller& c = set.controllers[i];
    json jc;
    jc["delta"] = vector_to_json(c.biases);
    jc["T"] = c.readout_time;
    jc["nominal_error"] = c.nominal_error;
    if (i < set.info.size()) {
      jc["converged"] = set.info[i].converged;
      jc["iterations"] = set.info[i].iterations;
      jc["grad_norm"] = set.info[i].grad_norm;
    }
    ctrls.push_back(std::move(jc));
  }
  j["controllers"] = std::move(ctrls);
  return j.dump(2) + "\n";
}

ControllerSet controller_set_from_json(const std::string& text) {
  json j = json::parse(text);
  ControllerSet set;
  set.net.size = j.at("N");
  set.net.topology = topology_from_name(j.at("topology"));
  set.output_spin = j.at("out");
  if (j.contains("config")) {
    const json& c = j["config"];
    set.config.algorithm = algorithm_from_name(c.value("algorithm", "A"));
    set.config.restarts = c.value("restarts", 0);
    set.config.delta_bound = c.value("delta_bound", 10.0);
    set.config.t_min = c.value("t_min", 1e-2);
    set.config.t_max = c.value("t_max", 0.0);
    set.config.seed = c.value("seed", std::uint64_t{0});
    set.config.keep = c.value("keep", 100);
  }
  for (const json& jc : j.at("controllers")) {
    Controller c;
    c.biases = vector_from_json(jc.at("delta"));
    c.readout_time = jc.at("T");
    c.nominal_error = jc.value("nominal_error", -1.0);
    c.input_spin = 1;
    c.output_spin = set.output_spin;
    set.controllers.push_back(std::move(c));
    ConvergenceInfo info;
    info.converged = jc.value("converged", false);
    info.iterations = jc.value("iterations", 0);
    info.grad_norm = jc.value("grad_norm", 0.0);
    set.info.push_back(info);
  }
  return set;
}

void write_controller_set(const std::filesystem::path& path, const ControllerSet& set) {
  write_file(path, controller_set_to_json(set));
}

ControllerSet read_controller_set(const std::filesystem::path& path) {
  return controller_set_from_json(read_file(path));
}

std::string dephasing_set_to_json(const DephasingSet& set) {
  json j;
  j["seed"] = set.seed;
  j["N"] = set.dim;
  j["hamiltonian_hash"] = hex64(set.hamiltonian_hash);
  json ops = json::array();
  for (const DephasingOp& op : set.ops) ops.push_back({{"c", vector_to_json(op.c)}});
  j["ops"] = std::move(ops);
  return j.dump() + "\n";
}

void write_dephasing_set(const std::filesystem::path& path, const DephasingSet& set) {
  write_file(path, dephasing_set_to_json(set));
}

DephasingSet read_dephasing_set(const std::filesystem::path& path,
                                const HamiltonianSS& h, const HermitianBasis& basis) {
  json j = json::parse(read_file(path));
  DephasingSet set;
  set.seed = j.at("seed");
  set.dim = j.at("N");
  set.hamiltonian_hash = from_hex64(j.at("hamiltonian_hash"));
  if (set.hamiltonian_hash != hamiltonian_hash(h.matrix))
    throw ConfigError("dephasing set does not match this Hamiltonian (hash mismatch)");
  for (const json& jo : j.at("ops")) {
    // S matrices are never stored; rebuild from the eigenvalue list. The
    // stored coefficients are already normalized, so no rescaling here.
    DephasingOp op;
    op.c = vector_from_json(jo.at("c"));
    if (op.c.size() != h.num_groups())
      throw ConfigError("dephasing eigenvalue count does not match the Hamiltonian");
    op.V = Eigen::MatrixXd::Zero(h.dim(), h.dim());
    for (int g = 0; g < h.num_groups(); ++g) op.V += op.c(g) * h.projector(g);
    const int k = h.num_groups();
    op.rates = Eigen::MatrixXd::Zero(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        op.rates(a, b) = 0.5 * (op.c(a) - op.c(b)) * (op.c(a) - op.c(b));
    op.S = dephasing_superop(op.V.cast<std::complex<double>>(), basis);
    set.ops.push_back(std::move(op));
  }
  return set;
}

namespace {

constexpr char kGridMagic[8] = {'S', 'S', 'G', 'R', 'I', 'D', '0', '1'};

struct GridHeader {
  char magic[8];
  std::uint32_t n = 0;
  std::uint32_t controller_id = 0;
  std::uint64_t seed = 0;
  std::uint32_t delta_steps = 0;
  std::uint32_t num_ops = 0;
  double delta_max = 0.0;
};
static_assert(sizeof(GridHeader) == 40);

}  // namespace

void write_error_grid(const std::filesystem::path& path, const ErrorGrid& grid,
                      int n, std::uint64_t seed) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  GridHeader hdr;
  std::copy(std::begin(kGridMagic), std::end(kGridMagic), hdr.magic);
  hdr.n = static_cast<std::uint32_t>(n);
  hdr.controller_id = static_cast<std::uint32_t>(grid.controller_id);
  hdr.seed = seed;
  hdr.delta_steps = static_cast<std::uint32_t>(grid.grid.steps);
  hdr.num_ops = static_cast<std::uint32_t>(grid.values.cols());
  hdr.delta_max = grid.grid.max_delta;
  out.write(reinterpret_cast<const char*>(&hdr), sizeof(hdr));
  // row-major little-endian float64 body
  for (Eigen::Index r = 0; r < grid.values.rows(); ++r) {
    Eigen::VectorXd row = grid.values.row(r);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(sizeof(double)) * row.size());
  }
  if (!out) throw ConfigError("short write to " + path.string());
}

ErrorGrid read_error_grid(const std::filesystem::path& path, int* n_out,
                          std::uint64_t* seed_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  GridHeader hdr;
  in.read(reinterpret_cast<char*>(&hdr), sizeof(hdr));
  if (!in || !std::equal(std::begin(kGridMagic), std::end(kGridMagic), hdr.magic))
    throw ConfigError("not an error-grid file: " + path.string());

  ErrorGrid grid;
  grid.controller_id = static_cast<int>(hdr.controller_id);
  grid.grid.steps = static_cast<int>(hdr.delta_steps);
  grid.grid.max_delta = hdr.delta_max;
  grid.values.resize(grid.grid.size(), static_cast<Eigen::Index>(hdr.num_ops));
  Eigen::VectorXd row(grid.values.cols());
  for (Eigen::Index r = 0; r < grid.values.rows(); ++r) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(sizeof(double)) * row.size());
    grid.values.row(r) = row;
  }
  if (!in) throw ConfigError("truncated error-grid file: " + path.string());
  if (n_out) *n_out = static_cast<int>(hdr.n);
  if (seed_out) *seed_out = hdr.seed;
  return grid;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_error_grid_csv(const std::filesystem::path& path, const ErrorGrid& grid) {
  std::ostringstream out;
  out << "delta";
  for (Eigen::Index c = 0; c < grid.values.cols(); ++c) out << ",op" << c;
  out << "\n";
  for (Eigen::Index r = 0; r < grid.values.rows(); ++r) {
    out << fmt(grid.grid.delta(static_cast<int>(r)));
    for (Eigen::Index c = 0; c < grid.values.cols(); ++c) out << "," << fmt(grid.values(r, c));
    out << "\n";
  }
  write_file(path, out.str());
}

void write_rim_curve_csv(const std::filesystem::path& path, const RimCurve& curve) {
  std::ostringstream out;
  out << "delta,rim1,adjusted\n";
  for (int n = 0; n < curve.grid.size(); ++n)
    out << fmt(curve.grid.delta(n)) << "," << fmt(curve.values(n)) << ","
        << fmt(curve.adjusted(n)) << "\n";
  write_file(path, out.str());
}

RimCurve read_rim_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> deltas, values, adjusted;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double d, v, a;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &d, &v, &a) != 3)
      throw ConfigError("malformed RIM curve row in " + path.string());
    deltas.push_back(d);
    values.push_back(v);
    adjusted.push_back(a);
  }
  RimCurve curve;
  curve.grid.steps = static_cast<int>(deltas.size()) - 1;
  curve.grid.max_delta = deltas.empty() ? 0.0 : deltas.back();
  curve.values = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  curve.adjusted =
      Eigen::Map<Eigen::VectorXd>(adjusted.data(), static_cast<Eigen::Index>(adjusted.size()));
  return curve;
}

void write_sensitivity_csv(const std::filesystem::path& path,
                           const std::vector<SensitivityRecord>& records) {
  std::ostringstream out;
  out << "controller_id,e_T,s_a,s_k,zeta_a,zeta_k,degenerate\n";
  for (const auto& r : records)
    out << r.controller_id << "," << fmt(r.e_T) << "," << fmt(r.s_a) << "," << fmt(r.s_k)
        << "," << fmt(r.zeta_a) << "," << fmt(r.zeta_k) << "," << (r.degenerate ? 1 : 0)
        << "\n";
  write_file(path, out.str());
}

std::vector<SensitivityRecord> read_sensitivity_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<SensitivityRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    SensitivityRecord r;
    int degenerate = 0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf,%d", &r.controller_id, &r.e_T,
                    &r.s_a, &r.s_k, &r.zeta_a, &r.zeta_k, &degenerate) != 7)
      throw ConfigError("malformed sensitivity row in " + path.string());
    r.degenerate = degenerate != 0;
    records.push_back(std::move(r));
  }
  return records;
}

void write_heatmap_csv(const std::filesystem::path& path, const TauHeatMap& map) {
  std::ostringstream out;
  out << "delta1\\delta2";
  for (Eigen::Index j = 0; j < map.deltas.size(); ++j) out << "," << fmt(map.deltas(j));
  out << "\n";
  for (Eigen::Index i = 0; i < map.deltas.size(); ++i) {
    out << fmt(map.deltas(i));
    for (Eigen::Index j = 0; j < map.deltas.size(); ++j) out << "," << fmt(map.tau(i, j));
    out << "\n";
  }
  write_file(path, out.str());
}

void write_suite_csv(const std::filesystem::path& path, const HypothesisSuite& suite) {
  std::ostringstream out;
  out << "problem,algorithm,measure_pair,tau,p,decision\n";
  for (const auto& row : suite.rows) {
    out << row.problem << "," << row.algorithm << "," << row.measure_pair << ","
        << fmt(row.result.tau) << "," << fmt(row.result.p) << ","
        << (row.result.decision == Decision::RejectH0 ? "reject" : "fail_to_reject") << "\n";
  }
  write_file(path, out.str());
}

}  // namespace spinsense
