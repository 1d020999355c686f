#include "hestonlab/obstacle.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hestonlab {

std::string ConstantObstacle::describe() const {
    std::ostringstream os;
    os << "constant(" << c_ << ")";
    return os.str();
}

Jet2 PolynomialObstacle::jet(Point p) const {
    const auto& c = c_;
    const double x = p.x, y = p.y;
    Jet2 j;
    j.u = c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y +
          c[6] * x * x * x + c[7] * x * x * y + c[8] * x * y * y + c[9] * y * y * y;
    j.ux = c[1] + 2 * c[3] * x + c[4] * y + 3 * c[6] * x * x + 2 * c[7] * x * y + c[8] * y * y;
    j.uy = c[2] + c[4] * x + 2 * c[5] * y + c[7] * x * x + 2 * c[8] * x * y + 3 * c[9] * y * y;
    j.uxx = 2 * c[3] + 6 * c[6] * x + 2 * c[7] * y;
    j.uxy = c[4] + 2 * c[7] * x + 2 * c[8] * y;
    j.uyy = 2 * c[5] + 2 * c[8] * x + 6 * c[9] * y;
    return j;
}

std::string PolynomialObstacle::describe() const {
    std::ostringstream os;
    os << "polynomial(";
    for (std::size_t k = 0; k < c_.size(); ++k) os << (k ? "," : "") << c_[k];
    os << ")";
    return os.str();
}

SmoothedPutObstacle::SmoothedPutObstacle(double strike, double width)
    : strike_(strike), width_(width) {
    if (!(strike > 0.0)) throw std::invalid_argument("SmoothedPutObstacle: strike must be > 0");
    if (!(width >= 0.0)) throw std::invalid_argument("SmoothedPutObstacle: width must be >= 0");
}

Jet2 SmoothedPutObstacle::jet(Point p) const {
    const double ex = std::exp(p.x);
    const double z = strike_ - ex;
    const double w = strike_ * width_;
    // phi(z), phi'(z), phi''(z)
    double phi = 0.0, d1 = 0.0, d2 = 0.0;
    if (w > 0.0 && std::abs(z) <= w) {
        phi = (z + w) * (z + w) / (4.0 * w);
        d1 = (z + w) / (2.0 * w);
        d2 = 1.0 / (2.0 * w);
    } else if (z > 0.0) {
        phi = z;
        d1 = 1.0;
    }
    Jet2 j;
    j.u = phi;
    j.ux = -d1 * ex;
    j.uxx = d2 * ex * ex - d1 * ex;
    return j;
}

std::string SmoothedPutObstacle::describe() const {
    std::ostringstream os;
    os << "put(strike=" << strike_ << ",width=" << width_ << ")";
    return os.str();
}

GridFunction sample(const Obstacle& obstacle, GridPtr grid) {
    return GridFunction::sample(std::move(grid), [&](Point p) { return obstacle.value(p); });
}

}  // namespace hestonlab
