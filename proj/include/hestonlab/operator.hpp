#pragma once

#include <string>

namespace hestonlab {

/// Point of the closed upper half-plane (x = log-price, y = variance).
struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Constant coefficients of the elliptic Heston operator plus the decay
/// rate of the weight function.
///
/// The constructor enforces sigma != 0, -1 < rho < 1, r >= 0, q >= 0,
/// kappa > 0, theta > 0 and gamma > 0, and throws std::invalid_argument
/// otherwise.
class HestonParams {
public:
    HestonParams(double sigma, double rho_corr, double r, double q,
                 double kappa, double theta, double gamma_weight = 1.0);

    double sigma() const { return sigma_; }
    double rho_corr() const { return rho_corr_; }
    double r() const { return r_; }
    double q() const { return q_; }
    double kappa() const { return kappa_; }
    double theta() const { return theta_; }
    double gamma_weight() const { return gamma_weight_; }

    /// beta = 2 kappa theta / sigma^2
    double beta() const { return 2.0 * kappa_ * theta_ / (sigma_ * sigma_); }
    /// mu = 2 kappa / sigma^2
    double mu() const { return 2.0 * kappa_ / (sigma_ * sigma_); }

    std::string describe() const;

private:
    double sigma_;
    double rho_corr_;
    double r_;
    double q_;
    double kappa_;
    double theta_;
    double gamma_weight_;
};

/// Value, gradient and Hessian of a function at one point. The mixed
/// derivative is stored once.
struct Jet2 {
    double u = 0.0;
    double ux = 0.0;
    double uy = 0.0;
    double uxx = 0.0;
    double uxy = 0.0;
    double uyy = 0.0;

    bool finite() const;
    Jet2 operator+(const Jet2& o) const;
    Jet2 operator*(double s) const;
};

/// Coefficients of a_{11} u_xx + 2 a_{12} u_xy + a_{22} u_yy + b_1 u_x + b_2 u_y + c u
/// frozen at one point.
struct OperatorCoefficients {
    double a11 = 0.0;
    double a12 = 0.0;
    double a22 = 0.0;
    double b1 = 0.0;
    double b2 = 0.0;
    double c = 0.0;

    double apply(const Jet2& jet) const {
        return a11 * jet.uxx + 2.0 * a12 * jet.uxy + a22 * jet.uyy + b1 * jet.ux + b2 * jet.uy +
               c * jet.u;
    }
};

/// Coefficients of L = -A at height y.
OperatorCoefficients heston_coefficients(const HestonParams& params, double y);

/// L u = (y/2)(u_xx + 2 rho sigma u_xy + sigma^2 u_yy) + (r - q - y/2) u_x
///       + kappa (theta - y) u_y - r u.
/// Throws std::invalid_argument for y < 0 or a non-finite jet.
double apply_L(const HestonParams& params, const Jet2& jet, Point p);

/// y^{beta-1} exp(-gamma |x| - mu y); requires y > 0.
double weight(const HestonParams& params, Point p);

enum class RescalingKind { y0, rho, d };

std::string to_string(RescalingKind kind);

/// One of the three blow-ups of L around a base point (x0, y0), evaluated
/// in the rescaled coordinates. The domain-height normalizer is fixed to 1.
///
///   y0:  v(x,y) = u(x0 + y0 x, y0 + y0 y),        y0 (Lu) = L_{y0} v
///   rho: v(x,y) = u(x0 + rho x, y0 + rho y),       rho (Lu) = L_rho v
///   d:   v(x,y) = u(x0 + d y0 x, y0 + d y0 y) / (d y0),   Lu = L_d v
class RescaledCoefficients {
public:
    RescalingKind kind() const { return kind_; }
    const HestonParams& params() const { return params_; }
    double y0() const { return y0_; }
    double rho() const { return rho_; }
    double d() const { return d_; }

    /// Height at which the second-order part vanishes, in rescaled coordinates.
    double degeneracy_y() const;

    OperatorCoefficients at(Point p) const;
    double apply(const Jet2& jet, Point p) const { return at(p).apply(jet); }

private:
    friend RescaledCoefficients rescale_y0(const HestonParams&, double);
    friend RescaledCoefficients rescale_rho(const HestonParams&, double, double);
    friend RescaledCoefficients rescale_d(const HestonParams&, double, double);

    RescaledCoefficients(RescalingKind kind, const HestonParams& params, double y0, double rho,
                         double d)
        : kind_(kind), params_(params), y0_(y0), rho_(rho), d_(d) {}

    RescalingKind kind_;
    HestonParams params_;
    double y0_;
    double rho_;
    double d_;
};

/// Requires 0 < y0 <= 1.
RescaledCoefficients rescale_y0(const HestonParams& params, double y0);
/// Requires y0 >= 0 and rho > 0.
RescaledCoefficients rescale_rho(const HestonParams& params, double y0, double rho);
/// Requires y0 > 0 and d > 1.
RescaledCoefficients rescale_d(const HestonParams& params, double y0, double d);

struct BarrierValue {
    double value = 0.0;
    double image = 0.0;
};

/// theta(x,y) = a x^2 and its image under L_{y0}, from the closed form
/// a[(1+y) + 2(r - q - y0(1+y)/2) x - r y0 x^2].
BarrierValue barrier_theta(double a, Point p, const RescaledCoefficients& l_y0);

/// Largest radius (capped at 1/2) for which the bracket of the barrier image
/// stays above 1/4 on B_rho for every 0 < y0 <= 1. Below it L_{y0} theta < a/4
/// for a < 0 and L_{y0} theta > a/4 for a > 0.
double barrier_rho0(const HestonParams& params);

}  // namespace hestonlab
