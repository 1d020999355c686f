#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "hestonlab/operator.hpp"

namespace hestonlab {

/// Tensor-product mesh on [x_min, x_max] x [y_min, y_max] with y_min >= 0.
/// x is uniform; y is either uniform or geometrically graded toward y_min.
///
/// Nodes are numbered row-major: index = j * nx + i.
class Grid {
public:
    /// Half-plane rectangle [x_min, x_max] x [0, y_max].
    ///
    /// `grading` in (0, 1] is the ratio of consecutive y-spacings on a
    /// reference mesh of ten cells; finer meshes sample the same smooth
    /// stretching y(s) = y_max (e^{l s} - 1)/(e^l - 1), l = 10 ln(1/grading),
    /// so refinement studies see a fixed mapping. grading = 1 is uniform.
    Grid(double x_min, double x_max, double y_max, std::size_t nx, std::size_t ny,
         double grading = 1.0);

    /// Uniform patch [x_min, x_max] x [y_min, y_max]; y_min may be positive.
    static Grid patch(double x_min, double x_max, double y_min, double y_max, std::size_t nx,
                      std::size_t ny);

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t size() const { return nx_ * ny_; }
    double grading() const { return grading_; }

    double x(std::size_t i) const { return xs_[i]; }
    double y(std::size_t j) const { return ys_[j]; }
    std::span<const double> xs() const { return xs_; }
    std::span<const double> ys() const { return ys_; }
    double hx() const { return xs_[1] - xs_[0]; }

    double x_min() const { return xs_.front(); }
    double x_max() const { return xs_.back(); }
    double y_min() const { return ys_.front(); }
    double y_max() const { return ys_.back(); }

    std::size_t index(std::size_t i, std::size_t j) const { return j * nx_ + i; }
    std::size_t col(std::size_t k) const { return k % nx_; }
    std::size_t row(std::size_t k) const { return k / nx_; }
    Point node(std::size_t k) const { return {xs_[k % nx_], ys_[k / nx_]}; }

    /// True when the bottom row lies on the degenerate line y = 0.
    bool touches_axis() const { return ys_.front() == 0.0; }

    /// Index of the nearest node coordinate (clamped to the mesh).
    std::size_t nearest_i(double x) const;
    std::size_t nearest_j(double y) const;
    std::size_t nearest_node(Point p) const { return index(nearest_i(p.x), nearest_j(p.y)); }

    /// Extent of the dual (median) cell of node (i, j).
    double cell_x_lo(std::size_t i) const;
    double cell_x_hi(std::size_t i) const;
    double cell_y_lo(std::size_t j) const;
    double cell_y_hi(std::size_t j) const;

    /// Same rectangle, every spacing halved (2n - 1 nodes per direction).
    Grid refined() const;

private:
    Grid() = default;
    void validate() const;

    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
    double grading_ = 1.0;
    std::vector<double> xs_;
    std::vector<double> ys_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// One real value per node of a shared grid.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(GridPtr grid, std::vector<double> values);
    GridFunction(GridPtr grid, double fill);

    static GridFunction sample(GridPtr grid, const std::function<double(Point)>& f);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    std::size_t size() const { return values_.size(); }

    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[grid_->index(i, j)]; }

    /// Bilinear interpolation, clamped to the mesh rectangle.
    double interpolate(Point p) const;

private:
    GridPtr grid_;
    std::vector<double> values_;
};

}  // namespace hestonlab
