#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hestonlab/discretization.hpp"
#include "hestonlab/grid.hpp"
#include "hestonlab/kernels.hpp"
#include "hestonlab/sparse.hpp"

namespace hestonlab {

/// Iterative failure; carries the best residual reached.
class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, double best_residual, std::size_t iterations)
        : std::runtime_error(what), best_residual_(best_residual), iterations_(iterations) {}
    double best_residual() const { return best_residual_; }
    std::size_t iterations() const { return iterations_; }

private:
    double best_residual_;
    std::size_t iterations_;
};

constexpr double kDefaultTol = 1e-10;

/// Sparse LU with iterative refinement (at most max_iter steps, stopping once
/// the residual no longer halves). Throws SolveError unless
/// ||b - A x||_inf <= max(tol (1 + ||b||_inf), 64 eps (||A||_inf ||x||_inf + ||b||_inf)).
std::vector<double> solve_linear(const CsrMatrix& a, std::span<const double> b, double tol = kDefaultTol,
                                 std::size_t max_iter = 20);

/// Solves M u = f on equation rows with u = g on Dirichlet rows.
GridFunction solve_dirichlet(const DiscreteSystem& system, double tol = kDefaultTol, std::size_t max_iter = 20);

enum class LcpMethod { psor, policy_iteration };
std::string to_string(LcpMethod method);
LcpMethod lcp_method_from_string(const std::string& name);

enum class Region : unsigned char { exercise, continuation, dirichlet };
std::string to_string(Region region);

struct LcpOptions {
    LcpMethod method = LcpMethod::policy_iteration;
    double tol = kDefaultTol;
    /// PSOR sweeps or outer policies; 0 picks the method default
    /// (200000 sweeps, 50 policies).
    std::size_t max_iter = 0;
    double omega = 1.5;
    kernels::Exec exec = kernels::Exec::parallel;
    /// Optional starting iterate (one value per row). PSOR starts from it
    /// (lifted to psi) instead of psi; policy iteration takes its contact set
    /// as the first policy instead of solving the unconstrained system.
    std::vector<double> initial_guess;
};

/// Result on raw vectors. Residuals are taken over equation rows:
///   residual_lin  = max(0, max_i (f - M u)_i)
///   residual_comp = max_i |min((M u - f)_i, (u - psi)_i)|
struct RawLcpResult {
    std::vector<double> u;
    double residual_lin = 0.0;
    double residual_comp = 0.0;
    std::size_t iterations = 0;
    double omega = 0.0;
};

/// min{M u - f, u - psi} = 0 on rows not marked Dirichlet, u = rhs there.
/// Throws std::invalid_argument when psi exceeds the Dirichlet data and
/// SolveError on non-convergence.
RawLcpResult solve_lcp(const CsrMatrix& m, std::span<const double> rhs, std::span<const NodeKind> kind,
                       std::span<const double> psi, const LcpOptions& options = {});

struct LCPSolution {
    GridFunction u;
    double residual_lin = 0.0;
    double residual_comp = 0.0;
    std::vector<Region> active_mask;
    std::size_t iterations = 0;
    double wall_time = 0.0;
    LcpMethod method = LcpMethod::policy_iteration;
    double tol = kDefaultTol;
    double tol_region = 0.0;
    double omega = 0.0;
};

/// 1e-7 * max(1, max |psi|)
double default_tol_region(const GridFunction& psi);

LCPSolution solve_obstacle(const DiscreteSystem& system, const GridFunction& psi, const LcpOptions& options = {},
                           double tol_region = -1.0);

/// f -> 0 reduction: v solves M v = f with v = 0 on Dirichlet rows, and the
/// reduced problem has zero source, obstacle psi - v and the original g.
struct Reduction {
    DiscreteSystem system;
    GridFunction psi;
    GridFunction v;
    GridFunction recover(const GridFunction& reduced_u) const;
};

Reduction reduce_to_homogeneous(const DiscreteSystem& system, const GridFunction& psi, double tol = kDefaultTol);

struct RegionMap {
    std::vector<Region> labels;
    /// Contour u - psi = tol_region as ordered polylines.
    std::vector<std::vector<Point>> free_boundary;
    double tol_region = 0.0;
    std::size_t exercise = 0;
    std::size_t continuation = 0;
};

/// exercise = {u - psi <= tol_region} among equation rows. The contour is
/// traced by marching squares over cells with no Dirichlet corner.
RegionMap classify_regions(const LCPSolution& sol, const GridFunction& psi, double tol_region);
RegionMap classify_regions(const GridFunction& u, const GridFunction& psi, std::span<const NodeKind> kind,
                           double tol_region);

/// x,y,u,psi,region per node.
void write_solution_csv(std::ostream& out, const GridFunction& u, const GridFunction& psi,
                        std::span<const Region> labels);
/// curve,index,x,y per free-boundary point.
void write_free_boundary_csv(std::ostream& out, const RegionMap& regions);
/// Parameters, grid, method, tolerances, residuals and iteration counts.
nlohmann::json solution_manifest(const DiscreteSystem& system, const LCPSolution& sol);

}  // namespace hestonlab
