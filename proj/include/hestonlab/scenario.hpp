#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hestonlab/discretization.hpp"
#include "hestonlab/lcp.hpp"
#include "hestonlab/montecarlo.hpp"
#include "hestonlab/norms.hpp"
#include "hestonlab/obstacle.hpp"
#include "hestonlab/operator.hpp"

namespace hestonlab {

/// One problem found in a configuration; `field` is a dotted path such as
/// "experiments[2].n_paths" (or "line 4, column 7" for syntax errors).
struct Finding {
    std::string field;
    std::string message;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<Finding> findings);
    const std::vector<Finding>& findings() const { return findings_; }

private:
    std::vector<Finding> findings_;
};

struct GridSpec {
    double x_min = -4.0;
    double x_max = 1.0;
    double y_max = 1.0;
    std::size_t nx = 129;
    std::size_t ny = 65;
    double grading = 1.0;

    double hx() const { return (x_max - x_min) / static_cast<double>(nx - 1); }
    GridPtr build() const { return build(nx, ny); }
    GridPtr build(std::size_t nx_, std::size_t ny_) const;
};

/// Analytic function of (x, y): "zero", "constant", "polynomial", "put", and
/// for g only "obstacle" (g = psi on the Dirichlet boundary).
struct FunctionSpec {
    std::string type = "zero";
    double value = 0.0;
    std::array<double, 10> coefficients{};
    double strike = 1.0;
    /// Absolute smoothing width of the put cap (resolved from smoothing_cells).
    double width = 0.0;

    nlohmann::json to_json() const;
};

ObstaclePtr build_function(const FunctionSpec& spec);

/// Window given as {"shape": "rectangle", "bounds": [x_lo, x_hi, y_lo, y_hi]}
/// or {"shape": "ball" | "half_ball", "center": [x, y], "radius": r}.
DomainWindow window_from_json(const nlohmann::json& j);
nlohmann::json window_to_json(const DomainWindow& w);

struct SolveExperiment {
    std::optional<LcpMethod> compare_with;
    double agreement_tol = 1e-9;
};

struct NormsExperiment {
    std::vector<DomainWindow> windows;
    double alpha = 0.5;
};

struct GrowthExperiment {
    std::vector<double> interior_heights;
    std::vector<double> boundary_heights;
    std::size_t levels = 5;
    double ratio = 0.5;
    std::size_t nx = 97;
    double patch_factor = 1.5;
    double min_slope = 1.8;
};

struct AuxExperiment {
    std::vector<double> interior_heights;
    std::vector<double> boundary_heights;
    /// rho = rho_fraction * rho0
    double rho_fraction = 0.5;
    std::vector<std::size_t> ladder{17, 33, 65};
};

struct CertificateExperiment {
    std::vector<std::array<std::size_t, 2>> ladder{{65, 33}, {129, 65}, {257, 129}};
    /// Centre of the outer half-ball; defaults to the lowest free-boundary point.
    std::optional<Point> center;
    double outer_radius = 0.5;
    double alpha = 0.5;
    double axis_band = 0.05;
    double bound_factor = 1.5;
};

struct McExperiment {
    std::vector<Point> probes;
    McOptions mc;
    TailMode tail = TailMode::truncate;
    /// Also run without antithetics and check SE_anti <= 0.8 SE_plain.
    bool compare_plain = false;
};

using ExperimentOptions = std::variant<SolveExperiment, NormsExperiment, GrowthExperiment, AuxExperiment,
                                       CertificateExperiment, McExperiment>;

struct Experiment {
    std::string type;
    ExperimentOptions options;
};

/// Names accepted in "experiments[].type".
const std::vector<std::string>& experiment_types();

struct Scenario {
    std::string name;
    std::string description;
    HestonParams params{1.0, 0.0, 0.0, 0.0, 1.0, 1.0};
    GridSpec grid;
    FunctionSpec obstacle;
    FunctionSpec f;
    FunctionSpec g;
    LcpOptions solver;
    /// Negative picks the default 1e-7 max(1, |psi|).
    double tol_region = -1.0;
    SchemeOptions scheme;
    std::vector<Experiment> experiments;
    /// The configuration with every default filled in.
    nlohmann::json resolved;
};

/// Parses JSON text; syntax errors become a ConfigError naming line and column.
nlohmann::json parse_json_text(const std::string& text);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Full schema check. Throws ConfigError carrying every finding.
Scenario parse_scenario(const nlohmann::json& config);

/// Schema check plus static consistency (psi <= g on the Dirichlet
/// boundary) without solving; empty when the configuration is usable.
std::vector<Finding> validate_scenario(const nlohmann::json& config);

/// Nodes where psi exceeds g on the Dirichlet boundary of the base grid.
std::vector<Finding> check_obstacle_compatibility(const Scenario& scenario);

}  // namespace hestonlab
