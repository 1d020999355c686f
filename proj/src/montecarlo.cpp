#include "hestonlab/montecarlo.hpp"

#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

namespace hestonlab {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Drives one pair of antithetic paths (or a single path) step by step.
class PairStepper {
public:
    PairStepper(const HestonParams& p, Point start, double dt, std::uint64_t seed, std::size_t pair, bool antithetic)
        : engine_(splitmix64(seed ^ splitmix64(pair))),
          mu_(p.r() - p.q()),
          kappa_(p.kappa()),
          theta_(p.theta()),
          sigma_(p.sigma()),
          rho_(p.rho_corr()),
          rho_bar_(std::sqrt(1.0 - p.rho_corr() * p.rho_corr())),
          dt_(dt),
          sdt_(std::sqrt(dt)),
          lanes_(antithetic ? 2 : 1) {
        for (int l = 0; l < lanes_; ++l) {
            x_[l] = start.x;
            y_[l] = start.y;
        }
    }

    int lanes() const { return lanes_; }
    double x(int l) const { return x_[l]; }
    double y(int l) const { return y_[l]; }

    void step() {
        const double z1 = normal_(engine_), z2 = normal_(engine_);
        const double w1 = z1, w2 = rho_ * z1 + rho_bar_ * z2;
        for (int l = 0; l < lanes_; ++l) {
            const double s = l == 0 ? 1.0 : -1.0;
            const double yp = std::max(y_[l], 0.0);
            const double vol = std::sqrt(yp) * sdt_;
            x_[l] += (mu_ - 0.5 * yp) * dt_ + vol * s * w1;
            y_[l] += kappa_ * (theta_ - yp) * dt_ + sigma_ * vol * s * w2;
        }
    }

private:
    std::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_;
    double mu_, kappa_, theta_, sigma_, rho_, rho_bar_, dt_, sdt_;
    int lanes_;
    double x_[2]{}, y_[2]{};
};

struct PathOutcome {
    double value = 0.0;
    bool stopped = false;
};

void validate(const HestonParams& params, Point start, const McOptions& o) {
    if (!(o.dt > 0.0)) throw std::invalid_argument("monte carlo: dt must be > 0");
    if (!(start.y >= 0.0)) throw std::invalid_argument("monte carlo: start must have y >= 0");
    if (o.n_paths < 1) throw std::invalid_argument("monte carlo: need at least one path");
    if (o.antithetic && o.n_paths % 2) throw std::invalid_argument("monte carlo: antithetic runs need an even path count");
    if (o.horizon == 0.0 && !(params.r() > 0.0))
        throw std::invalid_argument("monte carlo: default horizon needs r > 0; set one explicitly");
    if (o.horizon < 0.0) throw std::invalid_argument("monte carlo: horizon must be >= 0");
}

std::size_t step_count(const HestonParams& params, const McOptions& o) {
    const double T = o.horizon > 0.0 ? o.horizon : default_horizon(params);
    return static_cast<std::size_t>(std::ceil(T / o.dt - 1e-9));
}

double tail_value(const StoppingRule& rule, TailMode tail, double x, double y) {
    if (tail == TailMode::truncate) return 0.0;
    const Grid& g = rule.pde_value().grid();
    return rule.pde_value().interpolate({std::clamp(x, g.x_min(), g.x_max()), std::clamp(std::max(y, 0.0), g.y_min(), g.y_max())});
}

McEstimate aggregate(const std::vector<PathOutcome>& out, bool antithetic, double r, std::size_t steps, double dt,
                     const StoppingRule& rule, TailMode tail) {
    // Fixed-order serial reduction over pair (or path) means.
    const std::size_t group = antithetic ? 2 : 1;
    const std::size_t groups = out.size() / group;
    double sum = 0.0, sum2 = 0.0;
    std::size_t stopped = 0;
    for (std::size_t g = 0; g < groups; ++g) {
        double m = 0.0;
        for (std::size_t l = 0; l < group; ++l) {
            m += out[g * group + l].value;
            stopped += out[g * group + l].stopped;
        }
        m /= static_cast<double>(group);
        sum += m;
        sum2 += m * m;
    }
    McEstimate e;
    const double n = static_cast<double>(groups);
    e.mean = sum / n;
    e.std_error = groups > 1 ? std::sqrt(std::max(0.0, (sum2 - n * e.mean * e.mean) / (n - 1.0)) / n) : 0.0;
    e.n_paths = out.size();
    e.fraction_stopped = static_cast<double>(stopped) / static_cast<double>(out.size());
    e.tail_proxy = tail == TailMode::pde_proxy;
    const double tail_discount = std::exp(-r * static_cast<double>(steps) * dt);
    e.tail_bias_bound = e.tail_proxy ? 0.0 : tail_discount * rule.sup_pde();
    e.horizon_dominated = !rule.has_exercise();
    return e;
}

}  // namespace

double default_horizon(const HestonParams& params) {
    if (!(params.r() > 0.0)) throw std::invalid_argument("default_horizon: needs r > 0");
    return std::log(100.0) / params.r();
}

double PathBatch::discount(std::size_t step) const { return std::exp(-r * static_cast<double>(step) * dt); }

Point PathBatch::state(std::size_t path, std::size_t step) const {
    const std::size_t k = path * (steps + 1) + step;
    return {x[k], y[k]};
}

PathBatch simulate_paths(const HestonParams& params, Point start, const McOptions& options) {
    validate(params, start, options);
    PathBatch b;
    b.start = start;
    b.dt = options.dt;
    b.steps = step_count(params, options);
    b.n_paths = options.n_paths;
    b.seed = options.seed;
    b.antithetic = options.antithetic;
    b.r = params.r();
    const std::size_t stride = b.steps + 1;
    b.x.resize(b.n_paths * stride);
    b.y.resize(b.n_paths * stride);
    const std::size_t lanes = options.antithetic ? 2 : 1;
    const std::size_t groups = b.n_paths / lanes;
    kernels::for_each_index(
        groups,
        [&](std::size_t g) {
            PairStepper s(params, start, b.dt, b.seed, g, options.antithetic);
            for (std::size_t k = 0; k <= b.steps; ++k) {
                if (k) s.step();
                for (int l = 0; l < s.lanes(); ++l) {
                    const std::size_t path = g * lanes + static_cast<std::size_t>(l);
                    b.x[path * stride + k] = s.x(l);
                    b.y[path * stride + k] = s.y(l);
                }
            }
        },
        options.exec);
    return b;
}

StoppingRule::StoppingRule(GridFunction pde_value, std::vector<Region> labels, ObstaclePtr psi)
    : u_(std::move(pde_value)), labels_(std::move(labels)), psi_(std::move(psi)) {
    if (labels_.size() != u_.size()) throw std::invalid_argument("StoppingRule: region map does not match the grid");
    if (!psi_) throw std::invalid_argument("StoppingRule: null obstacle");
    for (auto l : labels_) has_exercise_ = has_exercise_ || l == Region::exercise;
    const Grid& g = u_.grid();
    inv_hx_ = static_cast<double>(g.nx() - 1) / (g.x_max() - g.x_min());
    const std::size_t buckets = 16 * g.ny();
    inv_bucket_ = static_cast<double>(buckets) / (g.y_max() - g.y_min());
    bucket_row_.resize(buckets + 1);
    for (std::size_t b = 0; b <= buckets; ++b)
        bucket_row_[b] = g.nearest_j(g.y_min() + static_cast<double>(b) / inv_bucket_);
    for (double v : u_.values()) sup_u_ = std::max(sup_u_, std::abs(v));
}

std::size_t StoppingRule::nearest_node(double x, double y) const {
    const Grid& g = u_.grid();
    const auto i = static_cast<std::size_t>(std::lround((x - g.x_min()) * inv_hx_));
    auto b = static_cast<std::size_t>((y - g.y_min()) * inv_bucket_);
    b = std::min(b, bucket_row_.size() - 1);
    std::size_t j = bucket_row_[b];
    const auto ys = g.ys();
    while (j + 1 < ys.size() && y - ys[j] > ys[j + 1] - y) ++j;
    return g.index(i, j);
}

bool StoppingRule::stops(double x, double y, double& payoff) const {
    const Grid& g = u_.grid();
    const double ye = std::max(y, 0.0);
    const bool outside = x < g.x_min() || x > g.x_max() || ye > g.y_max() || ye < g.y_min();
    const Region reg = outside ? Region::dirichlet : labels_[nearest_node(x, ye)];
    if (reg == Region::continuation) return false;
    if (reg == Region::exercise)
        payoff = psi_->value({x, ye});
    else
        payoff = u_.interpolate({std::clamp(x, g.x_min(), g.x_max()), std::clamp(ye, g.y_min(), g.y_max())});
    return true;
}

McEstimate stopped_value(const PathBatch& batch, const StoppingRule& rule, TailMode tail) {
    std::vector<PathOutcome> out(batch.n_paths);
    for (std::size_t p = 0; p < batch.n_paths; ++p) {
        for (std::size_t k = 0; k <= batch.steps; ++k) {
            const Point s = batch.state(p, k);
            double pay = 0.0;
            if (rule.stops(s.x, s.y, pay)) {
                out[p] = {batch.discount(k) * pay, true};
                break;
            }
            if (k == batch.steps) out[p] = {batch.discount(k) * tail_value(rule, tail, s.x, s.y), false};
        }
    }
    return aggregate(out, batch.antithetic, batch.r, batch.steps, batch.dt, rule, tail);
}

McEstimate stopped_value_streaming(const HestonParams& params, Point start, const McOptions& options,
                                   const StoppingRule& rule, TailMode tail) {
    validate(params, start, options);
    const std::size_t steps = step_count(params, options);
    const std::size_t lanes = options.antithetic ? 2 : 1;
    const std::size_t groups = options.n_paths / lanes;
    const double r = params.r(), dt = options.dt;
    std::vector<PathOutcome> out(options.n_paths);
    kernels::for_each_index(
        groups,
        [&](std::size_t g) {
            PairStepper s(params, start, dt, options.seed, g, options.antithetic);
            bool done[2] = {false, false};
            int open = s.lanes();
            for (std::size_t k = 0; k <= steps && open > 0; ++k) {
                if (k) s.step();
                for (int l = 0; l < s.lanes(); ++l) {
                    if (done[l]) continue;
                    const std::size_t path = g * lanes + static_cast<std::size_t>(l);
                    double pay = 0.0;
                    if (rule.stops(s.x(l), s.y(l), pay)) {
                        out[path] = {std::exp(-r * static_cast<double>(k) * dt) * pay, true};
                        done[l] = true;
                        --open;
                    } else if (k == steps) {
                        out[path] = {std::exp(-r * static_cast<double>(k) * dt) * tail_value(rule, tail, s.x(l), s.y(l)),
                                     false};
                        done[l] = true;
                        --open;
                    }
                }
            }
        },
        options.exec);
    return aggregate(out, options.antithetic, r, steps, dt, rule, tail);
}

McProbe cross_validate(const HestonParams& params, Point probe, const McOptions& options, const StoppingRule& rule,
                       TailMode tail) {
    McProbe p;
    p.point = probe;
    p.pde_value = rule.pde_value().interpolate(probe);
    p.estimate = stopped_value_streaming(params, probe, options, rule, tail);
    const double band = 3.0 * p.estimate.std_error + p.estimate.tail_bias_bound;
    p.agrees = std::abs(p.pde_value - p.estimate.mean) <= band;
    p.dominates = p.pde_value >= p.estimate.mean - band;
    return p;
}

void write_mc_csv(std::ostream& out, std::span<const McProbe> probes) {
    out.precision(17);
    out << "probe_x,probe_y,pde_value,mc_mean,mc_se,fraction_stopped,tail_bias_bound\n";
    for (const auto& p : probes)
        out << p.point.x << ',' << p.point.y << ',' << p.pde_value << ',' << p.estimate.mean << ','
            << p.estimate.std_error << ',' << p.estimate.fraction_stopped << ',' << p.estimate.tail_bias_bound << '\n';
}

nlohmann::json to_json(const McProbe& p) {
    return {{"probe", {p.point.x, p.point.y}},
            {"pde_value", p.pde_value},
            {"mc_mean", p.estimate.mean},
            {"mc_se", p.estimate.std_error},
            {"fraction_stopped", p.estimate.fraction_stopped},
            {"tail_bias_bound", p.estimate.tail_bias_bound},
            {"tail_proxy", p.estimate.tail_proxy},
            {"horizon_dominated", p.estimate.horizon_dominated},
            {"n_paths", p.estimate.n_paths},
            {"agrees", p.agrees},
            {"dominates", p.dominates},
            {"tolerance", 3.0 * p.estimate.std_error + p.estimate.tail_bias_bound}};
}

}  // namespace hestonlab
