#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hestonlab/discretization.hpp"
#include "hestonlab/lcp.hpp"
#include "hestonlab/scenario.hpp"

namespace hestonlab {

/// One verdict. Hard checks decide the exit status; soft ones are recorded.
struct Check {
    std::string name;
    bool pass = false;
    bool hard = true;
    double value = 0.0;
    /// Threshold `value` was compared against.
    double tolerance = 0.0;
    std::string detail;
    nlohmann::json to_json() const;
};

struct ExperimentReport {
    std::string type;
    std::size_t index = 0;
    nlohmann::json body;
    std::vector<Check> checks;
    bool passed() const;
    nlohmann::json to_json() const;
};

/// Solution of the scenario on its base grid.
struct BaseSolution {
    GridPtr grid;
    ObstaclePtr psi;
    ObstaclePtr f;
    ObstaclePtr g;
    DiscreteSystem system;
    GridFunction psi_values;
    LCPSolution solution;
    RegionMap regions;
};

BaseSolution solve_base(const Scenario& scenario);

struct RunOptions {
    std::filesystem::path out_dir = "runs";
    /// 0 keeps the OpenMP default.
    int threads = 0;
    /// Replaces the seed of every mc-check experiment.
    std::optional<std::uint64_t> seed;
    /// Runs the experiments of one scenario concurrently.
    bool parallel_experiments = false;
};

/// `artifacts` receives extra files (name -> contents) such as mc.csv.
ExperimentReport run_experiment(const Scenario& scenario, const BaseSolution& base, const Experiment& experiment,
                                const RunOptions& options, std::vector<std::pair<std::string, std::string>>& artifacts);

struct RunResult {
    std::filesystem::path directory;
    std::vector<ExperimentReport> reports;
    /// 0 when every hard check passes, 1 otherwise.
    int exit_code = 0;
};

/// Solves, runs every experiment and writes a fresh run directory
/// <out_dir>/<name>-<UTC timestamp>[-N] holding manifest.json, solution.csv,
/// regions.csv, freeboundary.csv and NN-<type>.json per experiment. Only the
/// manifest carries timestamps and timings. Every file is written to a
/// temporary name and renamed into place.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options);

/// New directory under `parent`; never reuses an existing path.
std::filesystem::path create_run_directory(const std::filesystem::path& parent, const std::string& name);

void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Tool version recorded in manifests.
const char* tool_version();

}  // namespace hestonlab
