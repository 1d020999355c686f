#include "hestonlab/operator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hestonlab {

HestonParams::HestonParams(double sigma, double rho_corr, double r, double q, double kappa,
                           double theta, double gamma_weight)
    : sigma_(sigma),
      rho_corr_(rho_corr),
      r_(r),
      q_(q),
      kappa_(kappa),
      theta_(theta),
      gamma_weight_(gamma_weight) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("HestonParams: ") + what);
    };
    require(std::isfinite(sigma) && sigma != 0.0, "sigma must be finite and nonzero");
    require(rho_corr > -1.0 && rho_corr < 1.0, "correlation must lie in (-1, 1)");
    require(std::isfinite(r) && r >= 0.0, "r must be >= 0");
    require(std::isfinite(q) && q >= 0.0, "q must be >= 0");
    require(std::isfinite(kappa) && kappa > 0.0, "kappa must be > 0");
    require(std::isfinite(theta) && theta > 0.0, "theta must be > 0");
    require(std::isfinite(gamma_weight) && gamma_weight > 0.0, "gamma must be > 0");
}

std::string HestonParams::describe() const {
    std::ostringstream os;
    os << "sigma=" << sigma_ << " rho=" << rho_corr_ << " r=" << r_ << " q=" << q_
       << " kappa=" << kappa_ << " theta=" << theta_ << " gamma=" << gamma_weight_;
    return os.str();
}

bool Jet2::finite() const {
    return std::isfinite(u) && std::isfinite(ux) && std::isfinite(uy) && std::isfinite(uxx) &&
           std::isfinite(uxy) && std::isfinite(uyy);
}

Jet2 Jet2::operator+(const Jet2& o) const {
    return {u + o.u, ux + o.ux, uy + o.uy, uxx + o.uxx, uxy + o.uxy, uyy + o.uyy};
}

Jet2 Jet2::operator*(double s) const {
    return {u * s, ux * s, uy * s, uxx * s, uxy * s, uyy * s};
}

OperatorCoefficients heston_coefficients(const HestonParams& p, double y) {
    const double half_y = 0.5 * y;
    return {half_y,
            p.rho_corr() * p.sigma() * half_y,
            p.sigma() * p.sigma() * half_y,
            p.r() - p.q() - half_y,
            p.kappa() * (p.theta() - y),
            -p.r()};
}

double apply_L(const HestonParams& params, const Jet2& jet, Point p) {
    if (!(p.y >= 0.0)) throw std::invalid_argument("apply_L: y must be >= 0");
    if (!std::isfinite(p.x)) throw std::invalid_argument("apply_L: x must be finite");
    if (!jet.finite()) throw std::invalid_argument("apply_L: non-finite jet");
    return heston_coefficients(params, p.y).apply(jet);
}

double weight(const HestonParams& params, Point p) {
    if (!(p.y > 0.0)) throw std::invalid_argument("weight: y must be > 0");
    return std::pow(p.y, params.beta() - 1.0) *
           std::exp(-params.gamma_weight() * std::abs(p.x) - params.mu() * p.y);
}

std::string to_string(RescalingKind kind) {
    switch (kind) {
        case RescalingKind::y0: return "y0";
        case RescalingKind::rho: return "rho";
        case RescalingKind::d: return "d";
    }
    return "?";
}

double RescaledCoefficients::degeneracy_y() const {
    switch (kind_) {
        case RescalingKind::y0: return -1.0;
        case RescalingKind::rho: return -y0_ / rho_;
        case RescalingKind::d: return -1.0 / d_;
    }
    return 0.0;
}

OperatorCoefficients RescaledCoefficients::at(Point p) const {
    const HestonParams& hp = params_;
    const double rs = hp.rho_corr() * hp.sigma();
    const double s2 = hp.sigma() * hp.sigma();
    // `height` is the original variance coordinate at p; `diffusion` is the
    // common factor of the rescaled second-order part.
    double height = 0.0;
    double diffusion = 0.0;
    double c = 0.0;
    switch (kind_) {
        case RescalingKind::y0:
            height = y0_ * (1.0 + p.y);
            diffusion = 0.5 * (1.0 + p.y);
            c = -hp.r() * y0_;
            break;
        case RescalingKind::rho:
            height = y0_ + rho_ * p.y;
            diffusion = height / (2.0 * rho_);
            c = -hp.r() * rho_;
            break;
        case RescalingKind::d: {
            const double y_d = 1.0 / d_ + p.y;
            height = d_ * y0_ * y_d;
            diffusion = 0.5 * y_d;
            c = -hp.r() * d_ * y0_;
            break;
        }
    }
    return {diffusion,
            rs * diffusion,
            s2 * diffusion,
            hp.r() - hp.q() - 0.5 * height,
            hp.kappa() * (hp.theta() - height),
            c};
}

RescaledCoefficients rescale_y0(const HestonParams& params, double y0) {
    if (!(y0 > 0.0 && y0 <= 1.0)) throw std::invalid_argument("rescale_y0: need 0 < y0 <= 1");
    return RescaledCoefficients(RescalingKind::y0, params, y0, 0.0, 0.0);
}

RescaledCoefficients rescale_rho(const HestonParams& params, double y0, double rho) {
    if (!(y0 >= 0.0) || !std::isfinite(y0)) throw std::invalid_argument("rescale_rho: need y0 >= 0");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("rescale_rho: need rho > 0");
    return RescaledCoefficients(RescalingKind::rho, params, y0, rho, 0.0);
}

RescaledCoefficients rescale_d(const HestonParams& params, double y0, double d) {
    if (!(y0 > 0.0) || !std::isfinite(y0)) throw std::invalid_argument("rescale_d: need y0 > 0");
    if (!(d > 1.0) || !std::isfinite(d)) throw std::invalid_argument("rescale_d: need d > 1");
    return RescaledCoefficients(RescalingKind::d, params, y0, 0.0, d);
}

BarrierValue barrier_theta(double a, Point p, const RescaledCoefficients& l_y0) {
    if (l_y0.kind() != RescalingKind::y0)
        throw std::invalid_argument("barrier_theta: closed form is for the y0 rescaling");
    const HestonParams& hp = l_y0.params();
    const double y0 = l_y0.y0();
    const double x = p.x;
    const double bracket = (1.0 + p.y) + 2.0 * (hp.r() - hp.q() - 0.5 * y0 * (1.0 + p.y)) * x -
                           hp.r() * y0 * x * x;
    return {a * x * x, a * bracket};
}

double barrier_rho0(const HestonParams& params) {
    // Lower bound of the bracket on B_rho: 1 - (2 + 2|r-q|) rho - (1 + r) rho^2 > 1/4.
    const double qa = 1.0 + params.r();
    const double qb = 2.0 + 2.0 * std::abs(params.r() - params.q());
    const double qc = -0.75;
    const double root = (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
    return std::min(root, 0.5);
}

}  // namespace hestonlab
