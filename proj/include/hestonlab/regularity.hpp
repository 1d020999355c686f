#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hestonlab/discretization.hpp"
#include "hestonlab/grid.hpp"
#include "hestonlab/lcp.hpp"
#include "hestonlab/norms.hpp"
#include "hestonlab/obstacle.hpp"
#include "hestonlab/operator.hpp"

namespace hestonlab {

/// l(x, y) = value + gx (x - x0) + gy (y - y0).
struct AffineFunction {
    Point p0;
    double value = 0.0;
    double gx = 0.0;
    double gy = 0.0;

    double operator()(Point p) const { return value + gx * (p.x - p0.x) + gy * (p.y - p0.y); }
    Jet2 jet(Point p) const { return {(*this)(p), gx, gy, 0, 0, 0}; }
};

/// First-order Taylor polynomial of psi at p0.
AffineFunction linear_approx(const Obstacle& psi, Point p0);

struct TaylorCheck {
    double max_residual = 0.0;
    double bound = 0.0;
    std::size_t samples = 0;
    bool ok = false;
};

/// max |psi - l| over an n x n lattice of B_{rho y0}(p0) against
/// 2 y0^2 rho^2 c11 with c11 the unweighted C^{1,1} norm of psi.
TaylorCheck taylor_check(const Obstacle& psi, Point p0, double rho, double c11, std::size_t n = 41);

/// Largest admissible radius parameter for the interior (zeta) regime:
/// min{1, barrier_rho0, 1/sqrt(r), R0/5}.
double interior_rho0(const HestonParams& params, double R0);
/// Boundary (xi) regime: min{1, theta/4, kappa theta/(9 r), R0/5}.
double boundary_rho0(const HestonParams& params, double R0);

/// K, K' and the derived M = K ||psi||, N = K' ||psi|| on one window.
///   K  = sup |L l| / ||psi||, with l the linear approximation at the window
///        centre; L l is affine so its sup is taken in closed form
///   K' = sup |L psi| / (kappa theta ||psi||) on an n x n lattice
/// Both are raised to just above 2. A zero obstacle short-circuits to zeros.
struct Constants {
    double K = 0.0;
    double K_prime = 0.0;
    double K_raw = 0.0;
    double K_prime_raw = 0.0;
    double psi_c11 = 0.0;
    double M = 0.0;
    double N = 0.0;
    bool zero_obstacle = false;

    nlohmann::json to_json() const;
};

Constants measure_constants(const Obstacle& psi, const DomainWindow& window, const HestonParams& params,
                            std::size_t n = 201);

/// Exact sup of |a + bx x + by y| over a window (extreme points of a
/// rectangle, disk or clipped disk).
double affine_sup(double a, double bx, double by, const DomainWindow& window);

/// One sub-grid level of an auxiliary solve.
struct SubgridLevel {
    std::size_t nx = 0;
    std::size_t ny = 0;
    double hx = 0.0;
    double hy = 0.0;
    double min = 0.0;
    double max = 0.0;
    /// Manufactured-solution sup error on the same sub-grid.
    double slack = 0.0;
    bool lower_ok = false;
    bool upper_ok = false;
    std::size_t m_matrix_violations = 0;
};

struct AuxiliarySolve {
    std::string kind;  // "zeta" or "xi"
    Point p0;
    double rho = 0.0;
    double radius = 0.0;
    double scale = 0.0;  // M or N
    double boundary_value = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    std::vector<SubgridLevel> levels;
    /// Finest-level solution and its ball mask.
    GridFunction solution;
    std::vector<char> in_ball;

    /// Bounds hold at the finest level within its slack, and that slack is
    /// at most 5% of the lower bound.
    bool pass() const;
    nlohmann::json to_json() const;
};

struct AuxOptions {
    /// Node counts across the ball diameter in x, coarse to fine.
    std::vector<std::size_t> ladder{17, 33, 65};
    SchemeOptions scheme{};
    double tol = kDefaultTol;
};

/// L zeta = L l on B_{rho y0}(p0), zeta = 10 M y0 rho^2 outside; checks
/// M y0 rho^2 <= zeta <= 14 M y0 rho^2. Requires 0 < y0 < 1 and 0 < rho < 1.
AuxiliarySolve solve_zeta(const HestonParams& params, const Obstacle& psi, Point p0, double rho, double M,
                          const AuxOptions& options = {});

/// L xi = L psi on B+_rho(p0), xi = 10 N rho on the arc, no condition on y = 0;
/// checks N rho <= xi <= 20 N rho. Requires 0 <= y0 < theta/4 and rho > 0.
AuxiliarySolve solve_xi(const HestonParams& params, const Obstacle& psi, Point p0, double rho, double N,
                        const AuxOptions& options = {});

/// Uniform patch around a ball with hy = |sigma| hx (the geometric middle of
/// the monotone band of the directional stencil), clipped to y >= 0.
Grid ball_patch(const HestonParams& params, Point centre, double radius, std::size_t nx);

enum class Regime { interior, boundary };
std::string to_string(Regime regime);

struct GrowthReport {
    Point anchor;
    Regime regime = Regime::interior;
    std::vector<double> radii;
    /// sup (u - psi) over the probe ball of each radius.
    std::vector<double> sup_gap;
    /// sup (u - psi(anchor)); boundary regime only.
    std::vector<double> sup_level;
    std::vector<double> normalizer;
    /// Empirical constants: sup_gap / normalizer (interior) or
    /// sup_level / normalizer (boundary).
    std::vector<double> ratio;
    std::vector<std::size_t> nodes;
    double slope = 0.0;
    double max_ratio = 0.0;
    bool degenerate = false;
    /// Ratios over the three smallest radii do not increase as the radius shrinks.
    bool tail_nonincreasing = false;
    /// Centre of each probe (the anchor itself unless re-anchored) and the
    /// x-spacing of the mesh it was measured on.
    std::vector<Point> local_anchors;
    std::vector<double> spacing;

    nlohmann::json to_json() const;
};

/// Interior regime: sup of (u - psi) over B_{rho y0 / 2}(anchor), normaliser
/// y0 rho^2 ||psi||. Boundary regime: sups over B+_{rho / 2}(anchor),
/// normaliser rho ||psi||. Suprema run over nodes whose dual cells meet the
/// ball. Radii must be strictly decreasing, at least three, and every ball
/// must fit inside the mesh rectangle.
GrowthReport growth_profile(const GridFunction& u, const GridFunction& psi, Point anchor, Regime regime,
                            std::span<const double> radii, double psi_c11);

/// Closest point of the free-boundary contour at height target.y; NaN
/// coordinates when the contour never reaches that height.
Point nearest_contour_crossing(const RegionMap& regions, Point target);

struct ZoomOptions {
    std::size_t nx = 97;
    /// Patch half-width over probe radius.
    double patch_factor = 1.5;
    /// Size of the first lead-in patch in coarse cells.
    double lead_in = 8.0;
    SchemeOptions scheme{};
    LcpOptions lcp{};
};

/// Growth profile on nested local solves: radius k is measured on a patch of
/// half-width patch_factor times the probe radius with `nx` nodes across,
/// whose boundary data come from the previous (coarser) level, and the probe
/// is re-centred on that patch's own free boundary at the anchor height.
/// Lead-in levels (not probed) halve the patch from about `lead_in` coarse
/// cells down to the first probe. Boundary-regime patches always extend
/// down to y = 0.
GrowthReport zoom_growth_profile(const HestonParams& params, const Obstacle& psi, const GridFunction& coarse_u,
                                 Point anchor, Regime regime, std::span<const double> radii, double psi_c11,
                                 const ZoomOptions& options = {});

/// Least-squares slope of log(values) against log(radii) over positive values;
/// NaN when fewer than two are positive.
double loglog_slope(std::span<const double> radii, std::span<const double> values);

/// Points where the free-boundary contour crosses each height (the lowest
/// contour point for height 0). Heights with no crossing are skipped.
std::vector<Point> anchors_on_free_boundary(const RegionMap& regions, std::span<const double> heights);

/// Obstacle problem on a uniform patch with Dirichlet data interpolated from
/// a coarser solution (lifted to psi) and zero source; used to resolve small
/// probe balls. hy sits near the top of the monotone band of the cross
/// stencil. Policy iteration starts from the interpolated data unless the
/// options carry their own initial guess. Regions use the contact threshold
/// 1e-12 max(1, |psi|).
struct LocalSolve {
    DiscreteSystem system;
    GridFunction psi;
    LCPSolution solution;
    RegionMap regions;
};

LocalSolve local_obstacle_solve(const HestonParams& params, const Obstacle& psi, const GridFunction& coarse_u,
                                double x_lo, double x_hi, double y_lo, double y_hi, std::size_t nx,
                                const SchemeOptions& scheme = {}, const LcpOptions& lcp = {});

struct HarmonicSplit {
    GridFunction w1;
    GridFunction w2;
    bool hypothesis_ok = false;  // w >= 0 on Dirichlet nodes
    bool lower_ok = false;       // w1 >= -tol
    bool upper_ok = false;       // w1 <= w + tol
    double w2_boundary_max = 0.0;
};

/// w1 solves M w1 = 0 on equation rows with w1 = w on Dirichlet rows; w2 = w - w1.
HarmonicSplit harmonic_split(const GridFunction& w, const DiscreteSystem& system, double tol = 1e-9);

struct HarnackResult {
    double sup = 0.0;
    double inf = 0.0;
    double ratio = 0.0;
    bool floored = false;
    std::size_t nodes = 0;
};

/// sup / inf of v over the concentric half-radius window; inf floored at tol.
HarnackResult harnack_quotient(const GridFunction& v, const DomainWindow& window, double tol = 1e-12);

struct CertificateLevel {
    std::size_t nx = 0;
    std::size_t ny = 0;
    double u_c11s_inner = 0.0;
    double u_sup_outer = 0.0;
    double f_calpha_outer = 0.0;
    double psi_c11_outer = 0.0;
    double ratio = 0.0;
    /// Unweighted sup |D^2 u| over inner-window nodes with y <= axis_band.
    double d2_sup_near_axis = 0.0;
    bool subsampled = false;
};

CertificateLevel certificate_level(const GridFunction& u, const GridFunction& psi, const GridFunction& f,
                                   const DomainWindow& inner, const DomainWindow& outer, double alpha = 0.5,
                                   double axis_band = 0.05);

struct CertificateReport {
    std::vector<CertificateLevel> levels;
    double median = 0.0;
    double max = 0.0;
    /// max <= 1.5 median
    bool bounded = false;
    nlohmann::json to_json() const;
};

/// Requires at least three levels.
CertificateReport c11s_certificate(std::vector<CertificateLevel> levels);

struct StrongMaxProbe {
    double max_value = 0.0;
    std::size_t argmax = 0;
    bool attained_at_equation_node = false;
    std::size_t component_size = 0;
    double spread = 0.0;
    bool constant = false;
};

/// Locates the max of v; when it is attained (within tol) at an equation
/// node, measures max - min of v over the connected equation-node component
/// containing it.
StrongMaxProbe strong_max_probe(const DiscreteSystem& system, const GridFunction& v, double tol = 1e-9);

}  // namespace hestonlab
