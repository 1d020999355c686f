#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hestonlab/grid.hpp"
#include "hestonlab/kernels.hpp"
#include "hestonlab/obstacle.hpp"
#include "hestonlab/operator.hpp"

namespace hestonlab {

/// Subregion of the closed half-plane. Balls are always clipped to y >= 0,
/// so a ball and a half-ball with the same data cover the same points; the
/// label only records intent.
class DomainWindow {
public:
    enum class Shape { rectangle, ball, half_ball };

    static DomainWindow rectangle(double x_lo, double x_hi, double y_lo, double y_hi);
    static DomainWindow ball(Point center, double radius);
    static DomainWindow half_ball(Point center, double radius);

    Shape shape() const { return shape_; }
    Point center() const { return center_; }
    double radius() const { return radius_; }
    double x_lo() const { return x_lo_; }
    double x_hi() const { return x_hi_; }
    double y_lo() const { return y_lo_; }
    double y_hi() const { return y_hi_; }

    bool contains(Point p) const;
    /// True when the axis-aligned box meets the window.
    bool meets_box(double x_lo, double x_hi, double y_lo, double y_hi) const;
    /// Concentric copy with every length multiplied by `factor`.
    DomainWindow scaled(double factor) const;

    /// Grid nodes inside the window, in index order.
    std::vector<std::size_t> nodes(const Grid& grid) const;
    /// Grid nodes whose dual cells meet the window.
    std::vector<std::size_t> covering_nodes(const Grid& grid) const;

    std::string describe() const;
    nlohmann::json to_json() const;

private:
    DomainWindow() = default;

    Shape shape_ = Shape::rectangle;
    Point center_{};
    double radius_ = 0.0;
    double x_lo_ = 0.0, x_hi_ = 0.0, y_lo_ = 0.0, y_hi_ = 0.0;
};

std::string to_string(DomainWindow::Shape shape);

/// s(z1, z2) = (|x1 - x2| + |y1 - y2|) / (sqrt y1 + sqrt y2 + sqrt(|x1 - x2| + |y1 - y2|)).
/// Throws std::invalid_argument for negative heights.
double cycloidal_distance(Point z1, Point z2);

/// Nodal first and second differences. Interior nodes use centred
/// three-point formulas (non-uniform in y); edges use one-sided three-point
/// formulas, except u_y on the y = 0 row, which is the first-order forward
/// difference. u_xy is the y-difference of the u_x field.
struct DerivativeFields {
    std::vector<double> ux, uy, uxx, uxy, uyy;
    /// Node has a full centred stencil in x and a y-stencil that does not
    /// leave the mesh (the y = 0 row counts when the mesh touches the axis).
    std::vector<char> interior;
};

DerivativeFields derivatives(const GridFunction& u);

struct HolderResult {
    double value = 0.0;
    bool subsampled = false;
    std::size_t pairs = 0;
};

constexpr std::size_t kDefaultPairBudget = 2'000'000;

/// sup |f(z1) - f(z2)| / s(z1, z2)^alpha over window nodes. Exhaustive when the
/// pair count fits the budget; otherwise all pairs among an evenly strided
/// node subset plus every pair of grid neighbours up to two cells apart, a
/// lower bound flagged by `subsampled`.
HolderResult holder_s_seminorm(const GridFunction& f, const DomainWindow& window, double alpha,
                               std::size_t pair_budget = kDefaultPairBudget,
                               kernels::Exec exec = kernels::Exec::parallel);

/// Record of one norm evaluation.
struct NormReport {
    std::string name;
    nlohmann::json window;
    double value = 0.0;
    std::map<std::string, double> parts;
    bool subsampled = false;
    /// Tolerance companion for the value (round-off scale of the inputs).
    double slack = 0.0;

    nlohmann::json to_json() const;
};

/// ||y D^2 u||_inf + ||Du||_inf + ||u||_inf over window nodes, with the
/// Frobenius norm of D^2 u and the Euclidean norm of Du. Parts: yD2_sup,
/// grad_sup, sup. Throws when the window is empty or reaches a mesh edge
/// other than y = 0.
NormReport c11s_norm(const GridFunction& u, const DomainWindow& window);

/// Sum of sup + [.]_alpha over u, u_x, u_y, y u_xx, y u_xy, y u_yy.
NormReport c2alpha_s_norm(const GridFunction& u, const DomainWindow& window, double alpha,
                          std::size_t pair_budget = kDefaultPairBudget);

/// C^alpha_s norm of a single field: sup + [.]_alpha.
NormReport calpha_s_norm(const GridFunction& u, const DomainWindow& window, double alpha,
                         std::size_t pair_budget = kDefaultPairBudget);

/// sqrt of the midpoint rule for y^2|D^2u|^2 + (1+y)^2|Du|^2 + (1+y)u^2 times
/// the weight, over cells whose centres lie in the window. Cell values are
/// averages of the four corner nodes.
NormReport h2_weighted_norm(const GridFunction& u, const HestonParams& params, const DomainWindow& window);

/// Unweighted sup|u| + sup|Du| + sup|D^2u| from nodal differences.
NormReport c11_norm(const GridFunction& u, const DomainWindow& window);

/// Same norm from exact jets on an n x n lattice over the window's bounding
/// box (points outside the window skipped).
double c11_norm(const Obstacle& psi, const DomainWindow& window, std::size_t n = 201);

}  // namespace hestonlab
