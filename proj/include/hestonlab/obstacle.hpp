#pragma once

#include <array>
#include <memory>
#include <string>

#include "hestonlab/grid.hpp"
#include "hestonlab/operator.hpp"

namespace hestonlab {

/// Analytic obstacle (or source / boundary datum) with exact derivatives.
class Obstacle {
public:
    virtual ~Obstacle() = default;
    virtual Jet2 jet(Point p) const = 0;
    virtual std::string describe() const = 0;
    double value(Point p) const { return jet(p).u; }
};

using ObstaclePtr = std::shared_ptr<const Obstacle>;

class ConstantObstacle final : public Obstacle {
public:
    explicit ConstantObstacle(double c) : c_(c) {}
    Jet2 jet(Point) const override { return {c_, 0, 0, 0, 0, 0}; }
    std::string describe() const override;

private:
    double c_;
};

/// Full cubic polynomial in (x, y), coefficients ordered
/// 1, x, y, x^2, xy, y^2, x^3, x^2 y, x y^2, y^3.
class PolynomialObstacle final : public Obstacle {
public:
    explicit PolynomialObstacle(const std::array<double, 10>& coefficients) : c_(coefficients) {}
    Jet2 jet(Point p) const override;
    std::string describe() const override;
    const std::array<double, 10>& coefficients() const { return c_; }

private:
    std::array<double, 10> c_;
};

/// Put payoff max(E - e^x, 0) with the kink replaced by the quadratic cap
/// (z + w)^2 / (4w) for |z| <= w, where z = E - e^x and w = E * width.
/// The cap spans roughly `width` in x around ln E and leaves a C^{1,1}
/// function that equals the payoff outside the cap.
class SmoothedPutObstacle final : public Obstacle {
public:
    SmoothedPutObstacle(double strike, double width);
    Jet2 jet(Point p) const override;
    std::string describe() const override;
    double strike() const { return strike_; }
    double width() const { return width_; }

private:
    double strike_;
    double width_;
};

/// Nodal samples of an obstacle.
GridFunction sample(const Obstacle& obstacle, GridPtr grid);

}  // namespace hestonlab
