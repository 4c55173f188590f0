#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spinsense/dephasing.hpp"
#include "spinsense/dynamics.hpp"
#include "spinsense/optimizer.hpp"
#include "spinsense/rim.hpp"
#include "spinsense/sensitivity.hpp"
#include "spinsense/stats.hpp"

namespace spinsense {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Controller sets: {"N", "topology", "out", "config", "controllers":
// [{"delta", "T", "nominal_error", ...convergence metadata}]}
std::string controller_set_to_json(const ControllerSet& set);
ControllerSet controller_set_from_json(const std::string& text);
void write_controller_set(const std::filesystem::path& path, const ControllerSet& set);
ControllerSet read_controller_set(const std::filesystem::path& path);

// Dephasing sets: {"seed", "N", "hamiltonian_hash", "ops": [{"c": [...]}]}.
// S matrices are recomputed on load, never stored.
std::string dephasing_set_to_json(const DephasingSet& set);
void write_dephasing_set(const std::filesystem::path& path, const DephasingSet& set);
DephasingSet read_dephasing_set(const std::filesystem::path& path,
                                const HamiltonianSS& h, const HermitianBasis& basis);

// Error grids: flat binary, little-endian float64 row-major body behind a
// fixed header (magic, N, controller id, seed, grid spec).
void write_error_grid(const std::filesystem::path& path, const ErrorGrid& grid,
                      int n, std::uint64_t seed);
ErrorGrid read_error_grid(const std::filesystem::path& path,
                          int* n_out = nullptr, std::uint64_t* seed_out = nullptr);
void write_error_grid_csv(const std::filesystem::path& path, const ErrorGrid& grid);

void write_rim_curve_csv(const std::filesystem::path& path, const RimCurve& curve);
RimCurve read_rim_curve_csv(const std::filesystem::path& path);

// controller_id, e_T, s_a, s_k, zeta_a, zeta_k
void write_sensitivity_csv(const std::filesystem::path& path,
                           const std::vector<SensitivityRecord>& records);
std::vector<SensitivityRecord> read_sensitivity_csv(const std::filesystem::path& path);

void write_heatmap_csv(const std::filesystem::path& path, const TauHeatMap& map);

// problem, algorithm, measure_pair, tau, p, decision
void write_suite_csv(const std::filesystem::path& path, const HypothesisSuite& suite);

}  // namespace spinsense
