#include "hestonlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hestonlab {

namespace {

constexpr double kReferenceCells = 10.0;

std::vector<double> uniform(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) v[k] = lo + h * static_cast<double>(k);
    v.back() = hi;
    return v;
}

std::vector<double> stretched(double y_max, std::size_t n, double grading) {
    if (grading == 1.0) return uniform(0.0, y_max, n);
    const double l = kReferenceCells * std::log(1.0 / grading);
    const double denom = std::expm1(l);
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = static_cast<double>(k) / static_cast<double>(n - 1);
        v[k] = y_max * std::expm1(l * s) / denom;
    }
    v.front() = 0.0;
    v.back() = y_max;
    return v;
}

std::size_t nearest(std::span<const double> v, double t) {
    auto it = std::lower_bound(v.begin(), v.end(), t);
    if (it == v.begin()) return 0;
    if (it == v.end()) return v.size() - 1;
    const auto hi = static_cast<std::size_t>(it - v.begin());
    return (t - v[hi - 1] <= v[hi] - t) ? hi - 1 : hi;
}

}  // namespace

Grid::Grid(double x_min, double x_max, double y_max, std::size_t nx, std::size_t ny,
           double grading)
    : nx_(nx), ny_(ny), grading_(grading) {
    if (nx < 3 || ny < 3) throw std::invalid_argument("Grid: need nx, ny >= 3");
    if (!(x_max > x_min)) throw std::invalid_argument("Grid: need x_max > x_min");
    if (!(y_max > 0.0)) throw std::invalid_argument("Grid: need y_max > 0");
    if (!(grading > 0.0 && grading <= 1.0)) throw std::invalid_argument("Grid: grading must be in (0, 1]");
    xs_ = uniform(x_min, x_max, nx);
    ys_ = stretched(y_max, ny, grading);
    validate();
}

Grid Grid::patch(double x_min, double x_max, double y_min, double y_max, std::size_t nx,
                 std::size_t ny) {
    if (nx < 3 || ny < 3) throw std::invalid_argument("Grid::patch: need nx, ny >= 3");
    if (!(x_max > x_min) || !(y_max > y_min)) throw std::invalid_argument("Grid::patch: empty rectangle");
    if (!(y_min >= 0.0)) throw std::invalid_argument("Grid::patch: y_min must be >= 0");
    Grid g;
    g.nx_ = nx;
    g.ny_ = ny;
    g.xs_ = uniform(x_min, x_max, nx);
    g.ys_ = uniform(y_min, y_max, ny);
    g.validate();
    return g;
}

void Grid::validate() const {
    for (std::size_t k = 1; k < xs_.size(); ++k)
        if (!(xs_[k] > xs_[k - 1])) throw std::invalid_argument("Grid: x nodes not increasing");
    for (std::size_t k = 1; k < ys_.size(); ++k)
        if (!(ys_[k] > ys_[k - 1]))
            throw std::invalid_argument("Grid: y nodes not increasing at row " + std::to_string(k));
}

std::size_t Grid::nearest_i(double x) const { return nearest(xs_, x); }
std::size_t Grid::nearest_j(double y) const { return nearest(ys_, y); }

double Grid::cell_x_lo(std::size_t i) const { return i == 0 ? xs_[0] : 0.5 * (xs_[i - 1] + xs_[i]); }
double Grid::cell_x_hi(std::size_t i) const {
    return i + 1 == nx_ ? xs_[i] : 0.5 * (xs_[i] + xs_[i + 1]);
}
double Grid::cell_y_lo(std::size_t j) const { return j == 0 ? ys_[0] : 0.5 * (ys_[j - 1] + ys_[j]); }
double Grid::cell_y_hi(std::size_t j) const {
    return j + 1 == ny_ ? ys_[j] : 0.5 * (ys_[j] + ys_[j + 1]);
}

Grid Grid::refined() const {
    Grid g;
    g.nx_ = 2 * nx_ - 1;
    g.ny_ = 2 * ny_ - 1;
    g.grading_ = grading_;
    if (grading_ != 1.0 && touches_axis()) {
        g.xs_ = uniform(x_min(), x_max(), g.nx_);
        g.ys_ = stretched(y_max(), g.ny_, grading_);
    } else {
        auto halve = [](std::span<const double> v) {
            std::vector<double> out;
            out.reserve(2 * v.size() - 1);
            for (std::size_t k = 0; k + 1 < v.size(); ++k) {
                out.push_back(v[k]);
                out.push_back(0.5 * (v[k] + v[k + 1]));
            }
            out.push_back(v.back());
            return out;
        };
        g.xs_ = halve(xs_);
        g.ys_ = halve(ys_);
    }
    g.validate();
    return g;
}

GridFunction::GridFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw std::invalid_argument("GridFunction: null grid");
    if (values_.size() != grid_->size())
        throw std::invalid_argument("GridFunction: value count does not match node count");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("GridFunction: non-finite value");
}

GridFunction::GridFunction(GridPtr grid, double fill) : grid_(std::move(grid)) {
    if (!grid_) throw std::invalid_argument("GridFunction: null grid");
    values_.assign(grid_->size(), fill);
}

GridFunction GridFunction::sample(GridPtr grid, const std::function<double(Point)>& f) {
    std::vector<double> v(grid->size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(grid->node(k));
    return GridFunction(std::move(grid), std::move(v));
}

double GridFunction::interpolate(Point p) const {
    const Grid& g = *grid_;
    auto bracket = [](std::span<const double> v, double t, std::size_t& lo, double& w) {
        t = std::clamp(t, v.front(), v.back());
        auto it = std::upper_bound(v.begin(), v.end(), t);
        std::size_t hi = static_cast<std::size_t>(it - v.begin());
        if (hi >= v.size()) hi = v.size() - 1;
        if (hi == 0) hi = 1;
        lo = hi - 1;
        w = (t - v[lo]) / (v[hi] - v[lo]);
    };
    std::size_t i = 0, j = 0;
    double wx = 0.0, wy = 0.0;
    bracket(g.xs(), p.x, i, wx);
    bracket(g.ys(), p.y, j, wy);
    const double v00 = (*this)(i, j), v10 = (*this)(i + 1, j);
    const double v01 = (*this)(i, j + 1), v11 = (*this)(i + 1, j + 1);
    return (1 - wy) * ((1 - wx) * v00 + wx * v10) + wy * ((1 - wx) * v01 + wx * v11);
}

}  // namespace hestonlab
