#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hestonlab/grid.hpp"
#include "hestonlab/obstacle.hpp"
#include "hestonlab/operator.hpp"
#include "hestonlab/sparse.hpp"

namespace hestonlab {

/// Role of a node in the discrete problem.
///   interior:  equation row, second-order stencil
///   axis:      equation row on y = 0, first-order transport stencil
///   dirichlet: identity row, value prescribed
enum class NodeKind : unsigned char { interior, axis, dirichlet };

std::string to_string(NodeKind kind);

/// Mixed-derivative stencil.
///   directional: seven points along the diagonal picked by the sign of the
///                cross coefficient; monotone when |rho| sigma hx <= hy <= sigma hx / |rho|
///   four_point:  standard centred cross difference; never monotone for rho != 0
enum class CrossStencil { directional, four_point };

std::string to_string(CrossStencil stencil);

struct SchemeOptions {
    CrossStencil cross = CrossStencil::directional;
    /// Centred first-order differences where they keep every neighbour
    /// weight nonnegative, upwind where upwinding does. Where neither does
    /// (a mesh outside the monotone band), centred. When false, always upwind.
    bool hybrid_drift = true;
};

struct MMatrixViolation {
    std::size_t row = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    std::string reason;
};

/// Sign pattern (positive diagonal, nonpositive off-diagonals) and weak
/// diagonal dominance of every row.
struct MMatrixReport {
    std::size_t rows_checked = 0;
    std::size_t sign_violations = 0;
    std::size_t dominance_violations = 0;
    /// First violations in row order (at most 50 kept).
    std::vector<MMatrixViolation> examples;

    bool ok() const { return sign_violations == 0 && dominance_violations == 0; }
    nlohmann::json to_json() const;
};

/// Matrix of -L with identity rows on Dirichlet nodes, so the obstacle
/// problem reads min{M u - f, u - psi} = 0 on equation rows and u = g on
/// Dirichlet rows.
struct DiscreteSystem {
    GridPtr grid;
    HestonParams params;
    SchemeOptions scheme;
    CsrMatrix matrix;
    /// f on equation rows, g on Dirichlet rows.
    std::vector<double> rhs;
    std::vector<NodeKind> kind;
    MMatrixReport m_matrix;

    std::size_t size() const { return rhs.size(); }
    bool is_dirichlet(std::size_t k) const { return kind[k] == NodeKind::dirichlet; }
    std::vector<std::size_t> equation_rows() const;
};

/// Assembles -L on the grid. Nodes on x = x_min, x = x_max and y = y_max (and
/// on y = y_min when the mesh does not touch the axis) are Dirichlet, as is
/// every node flagged in `extra_dirichlet` (same length as the grid, or
/// empty). The y = 0 row carries (r - q) u_x + kappa theta u_y - r u with an
/// upwind u_x and forward u_y.
///
/// Violations of the M-matrix pattern are recorded in `m_matrix`; assembly
/// still succeeds.
DiscreteSystem build_system(const HestonParams& params, GridPtr grid, const GridFunction& g,
                            const GridFunction& f, const SchemeOptions& scheme = {},
                            std::span<const char> extra_dirichlet = {});

/// Convenience overload with analytic g and f.
DiscreteSystem build_system(const HestonParams& params, GridPtr grid, const Obstacle& g, const Obstacle& f,
                            const SchemeOptions& scheme = {}, std::span<const char> extra_dirichlet = {});

MMatrixReport check_m_matrix(const CsrMatrix& matrix, std::span<const NodeKind> kind, const Grid* grid = nullptr);
MMatrixReport check_m_matrix(const DiscreteSystem& system);

/// M u - f on equation rows and g - u on Dirichlet rows.
GridFunction discrete_apply(const DiscreteSystem& system, const GridFunction& u);

/// Plain product M u over all rows.
std::vector<double> multiply(const CsrMatrix& matrix, std::span<const double> u);

/// Coordinate list "row col value" with one entry per line, 0-based.
void write_coo(const DiscreteSystem& system, std::ostream& out);
/// Grid, parameters, scheme and node masks.
nlohmann::json system_header(const DiscreteSystem& system);

}  // namespace hestonlab
