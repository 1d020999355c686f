#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "hestonlab/grid.hpp"
#include "hestonlab/kernels.hpp"
#include "hestonlab/lcp.hpp"
#include "hestonlab/obstacle.hpp"
#include "hestonlab/operator.hpp"

namespace hestonlab {

/// Diffusion read off the generator (matching u_xx, u_yy, u_xy, u_x, u_y and
/// the zeroth-order term in turn):
///   dX = (r - q - Y/2) dt + sqrt(Y) dW1
///   dY = kappa (theta - Y) dt + sigma sqrt(Y) dW2,   d<W1, W2> = rho dt
/// with killing at rate r, i.e. discounting by e^{-r t}.
///
/// Full-truncation Euler: drift and diffusion use max(Y, 0) while the stored
/// Y may dip below zero. Paths come in antithetic pairs (Z, -Z) when enabled.
/// Pair p draws from mt19937_64 seeded by a splitmix64 hash of (seed, p) with
/// ziggurat normals, so results do not depend on the worker count.
struct McOptions {
    double dt = 1e-3;
    /// 0 picks ln(100)/r (requires r > 0).
    double horizon = 0.0;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 20240601;
    bool antithetic = true;
    kernels::Exec exec = kernels::Exec::parallel;
};

double default_horizon(const HestonParams& params);

/// Recorded trajectories: state k of path p at x[p * (steps + 1) + k].
struct PathBatch {
    Point start;
    double dt = 0.0;
    std::size_t steps = 0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    bool antithetic = true;
    double r = 0.0;
    std::vector<double> x;
    std::vector<double> y;

    double discount(std::size_t step) const;
    Point state(std::size_t path, std::size_t step) const;
};

/// Stores every state; meant for small batches and tests.
PathBatch simulate_paths(const HestonParams& params, Point start, const McOptions& options);

/// First-entry rule on the PDE mesh: the nearest node decides. Exercise
/// nodes pay psi at the current state, Dirichlet nodes (including any state
/// outside the mesh) pay the PDE value interpolated at the clamped state.
class StoppingRule {
public:
    StoppingRule(GridFunction pde_value, std::vector<Region> labels, ObstaclePtr psi);

    /// True when the path stops at (x, y); payoff receives the undiscounted value.
    bool stops(double x, double y, double& payoff) const;
    const GridFunction& pde_value() const { return u_; }
    bool has_exercise() const { return has_exercise_; }
    double sup_pde() const { return sup_u_; }

private:
    std::size_t nearest_node(double x, double y) const;

    GridFunction u_;
    std::vector<Region> labels_;
    // Nearest-node lookup: x is uniform; y goes through a bucket table that
    // stores the nearest row at each bucket start.
    double inv_hx_ = 0.0;
    double inv_bucket_ = 0.0;
    std::vector<std::size_t> bucket_row_;
    ObstaclePtr psi_;
    bool has_exercise_ = false;
    double sup_u_ = 0.0;
};

enum class TailMode { truncate, pde_proxy };

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double fraction_stopped = 0.0;
    /// e^{-rT} sup|u| for truncation; 0 for the PDE proxy (flagged instead).
    double tail_bias_bound = 0.0;
    bool tail_proxy = false;
    bool horizon_dominated = false;
    std::size_t n_paths = 0;
};

/// Stopped value over recorded trajectories.
McEstimate stopped_value(const PathBatch& batch, const StoppingRule& rule, TailMode tail = TailMode::truncate);

/// Same estimate without storing paths; bit-identical to simulate_paths
/// followed by stopped_value for equal inputs.
McEstimate stopped_value_streaming(const HestonParams& params, Point start, const McOptions& options,
                                   const StoppingRule& rule, TailMode tail = TailMode::truncate);

struct McProbe {
    Point point;
    double pde_value = 0.0;
    McEstimate estimate;
    /// |pde - mc| <= 3 se + tail bias
    bool agrees = false;
    /// pde >= mc - 3 se - tail bias
    bool dominates = false;
};

McProbe cross_validate(const HestonParams& params, Point probe, const McOptions& options, const StoppingRule& rule,
                       TailMode tail = TailMode::truncate);

/// probe_x,probe_y,pde_value,mc_mean,mc_se,fraction_stopped,tail_bias_bound
void write_mc_csv(std::ostream& out, std::span<const McProbe> probes);
nlohmann::json to_json(const McProbe& probe);

}  // namespace hestonlab
