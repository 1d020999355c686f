#include "hestonlab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hestonlab {

using nlohmann::json;

namespace {

std::string join_findings(const std::vector<Finding>& findings) {
    std::ostringstream os;
    os << findings.size() << " problem(s) in configuration";
    for (const auto& f : findings) os << "\n  " << f.field << ": " << f.message;
    return os.str();
}

// Typed access to one JSON object. Every problem is appended to `out` with
// the dotted path of the offending field; keys never read are reported as
// unknown by finish().
class Reader {
public:
    Reader(const json* j, std::string path, std::vector<Finding>& out) : j_(j), path_(std::move(path)), out_(out) {
        if (j_ && !j_->is_object()) {
            fail("", "expected an object");
            j_ = nullptr;
        }
    }

    bool ok() const { return j_ != nullptr; }
    bool has(const std::string& key) const { return j_ && j_->contains(key); }
    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void fail(const std::string& key, const std::string& message) {
        out_.push_back({key.empty() ? (path_.empty() ? "<root>" : path_) : field(key), message});
    }

    const json* get(const std::string& key) {
        used_.insert(key);
        if (!j_) return nullptr;
        auto it = j_->find(key);
        return it == j_->end() ? nullptr : &*it;
    }

    double number(const std::string& key, double fallback, bool required = false) {
        const json* v = get(key);
        if (!v) {
            if (required) fail(key, "required number is missing");
            return fallback;
        }
        if (!v->is_number()) {
            fail(key, "expected a number");
            return fallback;
        }
        const double d = v->get<double>();
        if (!std::isfinite(d)) fail(key, "must be finite");
        return d;
    }

    std::size_t count(const std::string& key, std::size_t fallback, std::size_t min_value) {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_number_integer() || v->get<long long>() < static_cast<long long>(min_value)) {
            fail(key, "expected an integer >= " + std::to_string(min_value));
            return fallback;
        }
        return v->get<std::size_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_boolean()) {
            fail(key, "expected true or false");
            return fallback;
        }
        return v->get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed = {}) {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_string()) {
            fail(key, "expected a string");
            return fallback;
        }
        auto s = v->get<std::string>();
        if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            fail(key, "'" + s + "' is not one of: " + list);
            return fallback;
        }
        return s;
    }

    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_array()) {
            fail(key, "expected an array of numbers");
            return fallback;
        }
        std::vector<double> out;
        for (std::size_t k = 0; k < v->size(); ++k) {
            if (!(*v)[k].is_number() || !std::isfinite((*v)[k].get<double>())) {
                out_.push_back({field(key) + "[" + std::to_string(k) + "]", "expected a finite number"});
                return fallback;
            }
            out.push_back((*v)[k].get<double>());
        }
        return out;
    }

    std::optional<Point> point(const std::string& key) {
        const json* v = get(key);
        if (!v) return std::nullopt;
        if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
            fail(key, "expected [x, y]");
            return std::nullopt;
        }
        return Point{(*v)[0].get<double>(), (*v)[1].get<double>()};
    }

    void finish() {
        if (!j_) return;
        for (auto it = j_->begin(); it != j_->end(); ++it)
            if (!used_.count(it.key())) fail(it.key(), "unknown field");
    }

private:
    const json* j_;
    std::string path_;
    std::vector<Finding>& out_;
    std::set<std::string> used_;
};

FunctionSpec read_function(Reader& parent, const std::string& key, const std::string& fallback_type, bool allow_obstacle,
                           double base_hx, std::vector<Finding>& out) {
    FunctionSpec spec;
    spec.type = fallback_type;
    const json* j = parent.get(key);
    if (!j) return spec;
    Reader r(j, parent.field(key), out);
    if (!r.ok()) return spec;
    std::vector<std::string> types{"zero", "constant", "polynomial", "put"};
    if (allow_obstacle) types.push_back("obstacle");
    spec.type = r.string("type", "", types);
    if (!r.has("type")) r.fail("type", "required");
    if (spec.type == "constant") {
        spec.value = r.number("value", 0.0, true);
    } else if (spec.type == "polynomial") {
        const auto c = r.numbers("coefficients", {});
        if (c.size() != 10)
            r.fail("coefficients", "expected 10 coefficients (1, x, y, x^2, xy, y^2, x^3, x^2 y, x y^2, y^3)");
        else
            std::copy(c.begin(), c.end(), spec.coefficients.begin());
    } else if (spec.type == "put") {
        spec.strike = r.number("strike", 1.0);
        if (!(spec.strike > 0.0)) r.fail("strike", "must be > 0");
        if (r.has("smoothing_width") && r.has("smoothing_cells"))
            r.fail("smoothing_width", "give either smoothing_width or smoothing_cells, not both");
        if (r.has("smoothing_width")) {
            spec.width = r.number("smoothing_width", 0.0);
        } else {
            const double cells = r.number("smoothing_cells", 2.0);
            r.get("smoothing_width");
            spec.width = cells * base_hx;
        }
        if (!(spec.width >= 0.0)) r.fail("smoothing_width", "must be >= 0");
    }
    r.finish();
    return spec;
}

std::vector<double> heights(Reader& r, const std::string& key, const std::vector<double>& fallback, double lo,
                            double hi, bool include_lo) {
    auto h = r.numbers(key, fallback);
    for (double v : h)
        if (!(include_lo ? v >= lo : v > lo) || !(v < hi)) {
            std::ostringstream os;
            os << "heights must lie in " << (include_lo ? "[" : "(") << lo << ", " << hi << ")";
            r.fail(key, os.str());
            break;
        }
    return h;
}

Experiment read_experiment(const json& j, const std::string& path, const HestonParams& params, std::vector<Finding>& out) {
    Reader r(&j, path, out);
    Experiment e;
    e.type = r.string("type", "", experiment_types());
    if (!r.has("type")) r.fail("type", "required");
    const double theta = params.theta();
    if (e.type == "solve") {
        SolveExperiment s;
        if (r.has("compare_with")) s.compare_with = lcp_method_from_string(r.string("compare_with", "psor", {"psor", "policy_iteration"}));
        s.agreement_tol = r.number("agreement_tol", s.agreement_tol);
        if (!(s.agreement_tol > 0.0)) r.fail("agreement_tol", "must be > 0");
        e.options = s;
    } else if (e.type == "norms") {
        NormsExperiment s;
        s.alpha = r.number("alpha", s.alpha);
        if (!(s.alpha > 0.0 && s.alpha < 1.0)) r.fail("alpha", "must lie in (0, 1)");
        const json* w = r.get("windows");
        if (!w || !w->is_array() || w->empty()) {
            r.fail("windows", "expected a nonempty array of windows");
        } else {
            for (std::size_t k = 0; k < w->size(); ++k) {
                try {
                    s.windows.push_back(window_from_json((*w)[k]));
                } catch (const std::exception& ex) {
                    out.push_back({r.field("windows") + "[" + std::to_string(k) + "]", ex.what()});
                }
            }
        }
        e.options = s;
    } else if (e.type == "growth") {
        GrowthExperiment s;
        s.interior_heights = heights(r, "interior_heights", {0.3, 0.5, 0.7}, 0.0, 1.0, false);
        s.boundary_heights = heights(r, "boundary_heights", {0.0, theta / 12.0, theta / 6.0}, 0.0, theta / 4.0, true);
        s.levels = r.count("levels", s.levels, 3);
        s.ratio = r.number("ratio", s.ratio);
        if (!(s.ratio > 0.0 && s.ratio < 1.0)) r.fail("ratio", "must lie in (0, 1)");
        s.nx = r.count("nx", s.nx, 9);
        s.patch_factor = r.number("patch_factor", s.patch_factor);
        if (!(s.patch_factor > 1.0)) r.fail("patch_factor", "must be > 1");
        s.min_slope = r.number("min_slope", s.min_slope);
        e.options = s;
    } else if (e.type == "aux-bounds") {
        AuxExperiment s;
        s.interior_heights = heights(r, "interior_heights", {0.3, 0.5, 0.7}, 0.0, 1.0, false);
        s.boundary_heights = heights(r, "boundary_heights", {0.0, theta / 12.0, theta / 6.0}, 0.0, theta / 4.0, true);
        s.rho_fraction = r.number("rho_fraction", s.rho_fraction);
        if (!(s.rho_fraction > 0.0 && s.rho_fraction < 1.0)) r.fail("rho_fraction", "must lie in (0, 1)");
        const auto ladder = r.numbers("ladder", {17, 33, 65});
        s.ladder.clear();
        for (double v : ladder) {
            if (!(v >= 5.0) || v != std::floor(v)) {
                r.fail("ladder", "node counts must be integers >= 5");
                break;
            }
            s.ladder.push_back(static_cast<std::size_t>(v));
        }
        if (s.ladder.empty()) r.fail("ladder", "needs at least one level");
        e.options = s;
    } else if (e.type == "certificate") {
        CertificateExperiment s;
        if (const json* l = r.get("ladder")) {
            s.ladder.clear();
            bool bad = !l->is_array();
            if (!bad)
                for (const auto& lv : *l) {
                    if (!lv.is_array() || lv.size() != 2 || !lv[0].is_number_integer() || !lv[1].is_number_integer() ||
                        lv[0].get<long long>() < 3 || lv[1].get<long long>() < 3) {
                        bad = true;
                        break;
                    }
                    s.ladder.push_back({lv[0].get<std::size_t>(), lv[1].get<std::size_t>()});
                }
            if (bad) r.fail("ladder", "expected an array of [nx, ny] pairs with nx, ny >= 3");
        }
        if (s.ladder.size() < 3) r.fail("ladder", "needs at least three refinement levels");
        s.center = r.point("center");
        s.outer_radius = r.number("outer_radius", s.outer_radius);
        if (!(s.outer_radius > 0.0)) r.fail("outer_radius", "must be > 0");
        s.alpha = r.number("alpha", s.alpha);
        if (!(s.alpha > 0.0 && s.alpha < 1.0)) r.fail("alpha", "must lie in (0, 1)");
        s.axis_band = r.number("axis_band", s.axis_band);
        s.bound_factor = r.number("bound_factor", s.bound_factor);
        e.options = s;
    } else if (e.type == "mc-check") {
        McExperiment s;
        const json* p = r.get("probes");
        if (!p || !p->is_array() || p->empty()) {
            r.fail("probes", "expected a nonempty array of [x, y] points");
        } else {
            for (std::size_t k = 0; k < p->size(); ++k) {
                const auto& q = (*p)[k];
                if (!q.is_array() || q.size() != 2 || !q[0].is_number() || !q[1].is_number() || q[1].get<double>() < 0.0) {
                    out.push_back({r.field("probes") + "[" + std::to_string(k) + "]", "expected [x, y] with y >= 0"});
                    continue;
                }
                s.probes.push_back({q[0].get<double>(), q[1].get<double>()});
            }
        }
        s.mc.n_paths = r.count("n_paths", s.mc.n_paths, 2);
        s.mc.dt = r.number("dt", s.mc.dt);
        if (!(s.mc.dt > 0.0)) r.fail("dt", "must be > 0");
        s.mc.horizon = r.number("horizon", 0.0);
        if (!(s.mc.horizon >= 0.0)) r.fail("horizon", "must be >= 0 (0 picks ln(100)/r)");
        if (s.mc.horizon == 0.0 && !(params.r() > 0.0)) r.fail("horizon", "r = 0 needs an explicit horizon");
        if (const json* seed = r.get("seed")) {
            if (!seed->is_number_unsigned())
                r.fail("seed", "expected a nonnegative integer");
            else
                s.mc.seed = seed->get<std::uint64_t>();
        }
        s.mc.antithetic = r.boolean("antithetic", true);
        if (s.mc.antithetic && s.mc.n_paths % 2) r.fail("n_paths", "antithetic runs need an even path count");
        s.tail = r.string("tail", "truncate", {"truncate", "pde_proxy"}) == "pde_proxy" ? TailMode::pde_proxy
                                                                                        : TailMode::truncate;
        s.compare_plain = r.boolean("compare_plain", false);
        e.options = s;
    }
    r.finish();
    return e;
}

json experiment_to_json(const Experiment& e) {
    json j;
    j["type"] = e.type;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SolveExperiment>) {
                if (s.compare_with) j["compare_with"] = to_string(*s.compare_with);
                j["agreement_tol"] = s.agreement_tol;
            } else if constexpr (std::is_same_v<T, NormsExperiment>) {
                j["alpha"] = s.alpha;
                j["windows"] = json::array();
                for (const auto& w : s.windows) j["windows"].push_back(window_to_json(w));
            } else if constexpr (std::is_same_v<T, GrowthExperiment>) {
                j["interior_heights"] = s.interior_heights;
                j["boundary_heights"] = s.boundary_heights;
                j["levels"] = s.levels;
                j["ratio"] = s.ratio;
                j["nx"] = s.nx;
                j["patch_factor"] = s.patch_factor;
                j["min_slope"] = s.min_slope;
            } else if constexpr (std::is_same_v<T, AuxExperiment>) {
                j["interior_heights"] = s.interior_heights;
                j["boundary_heights"] = s.boundary_heights;
                j["rho_fraction"] = s.rho_fraction;
                j["ladder"] = s.ladder;
            } else if constexpr (std::is_same_v<T, CertificateExperiment>) {
                j["ladder"] = json::array();
                for (const auto& l : s.ladder) j["ladder"].push_back({l[0], l[1]});
                if (s.center) j["center"] = {s.center->x, s.center->y};
                j["outer_radius"] = s.outer_radius;
                j["alpha"] = s.alpha;
                j["axis_band"] = s.axis_band;
                j["bound_factor"] = s.bound_factor;
            } else if constexpr (std::is_same_v<T, McExperiment>) {
                j["probes"] = json::array();
                for (const auto& p : s.probes) j["probes"].push_back({p.x, p.y});
                j["n_paths"] = s.mc.n_paths;
                j["dt"] = s.mc.dt;
                j["horizon"] = s.mc.horizon;
                j["seed"] = s.mc.seed;
                j["antithetic"] = s.mc.antithetic;
                j["tail"] = s.tail == TailMode::pde_proxy ? "pde_proxy" : "truncate";
                j["compare_plain"] = s.compare_plain;
            }
        },
        e.options);
    return j;
}

}  // namespace

ConfigError::ConfigError(std::vector<Finding> findings)
    : std::runtime_error(join_findings(findings)), findings_(std::move(findings)) {}

GridPtr GridSpec::build(std::size_t nx_, std::size_t ny_) const {
    return std::make_shared<const Grid>(x_min, x_max, y_max, nx_, ny_, grading);
}

json FunctionSpec::to_json() const {
    json j{{"type", type}};
    if (type == "constant") j["value"] = value;
    if (type == "polynomial") j["coefficients"] = coefficients;
    if (type == "put") {
        j["strike"] = strike;
        j["smoothing_width"] = width;
    }
    return j;
}

ObstaclePtr build_function(const FunctionSpec& spec) {
    if (spec.type == "zero") return std::make_shared<ConstantObstacle>(0.0);
    if (spec.type == "constant") return std::make_shared<ConstantObstacle>(spec.value);
    if (spec.type == "polynomial") return std::make_shared<PolynomialObstacle>(spec.coefficients);
    if (spec.type == "put") return std::make_shared<SmoothedPutObstacle>(spec.strike, spec.width);
    throw std::invalid_argument("build_function: type '" + spec.type + "' has no standalone form");
}

DomainWindow window_from_json(const json& j) {
    if (!j.is_object() || !j.contains("shape") || !j["shape"].is_string())
        throw std::invalid_argument("window needs a \"shape\" (rectangle, ball or half_ball)");
    const auto shape = j["shape"].get<std::string>();
    auto nums = [&](const char* key, std::size_t n) {
        if (!j.contains(key) || !j[key].is_array() || j[key].size() != n)
            throw std::invalid_argument(std::string("window needs \"") + key + "\" with " + std::to_string(n) + " numbers");
        std::vector<double> v;
        for (const auto& e : j[key]) {
            if (!e.is_number()) throw std::invalid_argument(std::string("window field \"") + key + "\" must hold numbers");
            v.push_back(e.get<double>());
        }
        return v;
    };
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "shape" && it.key() != "bounds" && it.key() != "center" && it.key() != "radius")
            throw std::invalid_argument("unknown window field \"" + it.key() + "\"");
    if (shape == "rectangle") {
        const auto b = nums("bounds", 4);
        return DomainWindow::rectangle(b[0], b[1], b[2], b[3]);
    }
    if (shape == "ball" || shape == "half_ball") {
        const auto c = nums("center", 2);
        if (!j.contains("radius") || !j["radius"].is_number()) throw std::invalid_argument("window needs a numeric \"radius\"");
        const double r = j["radius"].get<double>();
        return shape == "ball" ? DomainWindow::ball({c[0], c[1]}, r) : DomainWindow::half_ball({c[0], c[1]}, r);
    }
    throw std::invalid_argument("unknown window shape '" + shape + "'");
}

json window_to_json(const DomainWindow& w) {
    if (w.shape() == DomainWindow::Shape::rectangle)
        return {{"shape", "rectangle"}, {"bounds", {w.x_lo(), w.x_hi(), w.y_lo(), w.y_hi()}}};
    return {{"shape", to_string(w.shape())}, {"center", {w.center().x, w.center().y}}, {"radius", w.radius()}};
}

const std::vector<std::string>& experiment_types() {
    static const std::vector<std::string> types{"solve", "norms", "growth", "aux-bounds", "certificate", "mc-check"};
    return types;
}

json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line and column
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string msg = e.what();
        if (auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
        throw ConfigError({{"line " + std::to_string(line) + ", column " + std::to_string(col), msg}});
    }
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({{path.string(), "cannot open file"}});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str());
}

Scenario parse_scenario(const json& config) {
    std::vector<Finding> out;
    Reader root(&config, "", out);
    if (!root.ok()) throw ConfigError(out);
    Scenario s;
    s.name = root.string("name", "");
    if (s.name.empty()) root.fail("name", "required nonempty string");
    for (char c : s.name)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
            root.fail("name", "use letters, digits, '_' or '-' only");
            break;
        }
    s.description = root.string("description", "");

    Reader p(root.get("params"), "params", out);
    if (!root.has("params")) root.fail("params", "required");
    const double sigma = p.number("sigma", 0.4, true), rho = p.number("rho", 0.0, true);
    const double r = p.number("r", 0.0, true), q = p.number("q", 0.0);
    const double kappa = p.number("kappa", 1.0, true), theta = p.number("theta", 0.04, true);
    const double gamma = p.number("gamma", 1.0);
    p.finish();
    try {
        s.params = HestonParams(sigma, rho, r, q, kappa, theta, gamma);
    } catch (const std::invalid_argument& e) {
        // Map the constructor's message back to the field it names.
        std::string msg = e.what();
        std::string field = "params";
        for (const char* k : {"sigma", "correlation", "r ", "q ", "kappa", "theta", "gamma"})
            if (msg.find(k) != std::string::npos) {
                std::string key = k;
                if (key == "correlation") key = "rho";
                if (key.back() == ' ') key.pop_back();
                field = "params." + key;
                break;
            }
        out.push_back({field, msg.substr(msg.find(':') + 2)});
    }

    Reader g(root.get("grid"), "grid", out);
    s.grid.x_min = g.number("x_min", s.grid.x_min);
    s.grid.x_max = g.number("x_max", s.grid.x_max);
    s.grid.y_max = g.number("y_max", s.grid.y_max);
    s.grid.nx = g.count("nx", s.grid.nx, 3);
    s.grid.ny = g.count("ny", s.grid.ny, 3);
    s.grid.grading = g.number("grading", s.grid.grading);
    g.finish();
    if (!(s.grid.x_max > s.grid.x_min)) out.push_back({"grid.x_max", "must exceed grid.x_min"});
    if (!(s.grid.y_max > 0.0)) out.push_back({"grid.y_max", "must be > 0"});
    if (!(s.grid.grading > 0.0 && s.grid.grading <= 1.0)) out.push_back({"grid.grading", "must lie in (0, 1]"});

    const double hx = s.grid.x_max > s.grid.x_min ? s.grid.hx() : 0.0;
    s.obstacle = read_function(root, "obstacle", "zero", false, hx, out);
    if (!root.has("obstacle")) root.fail("obstacle", "required");
    s.f = read_function(root, "f", "zero", false, hx, out);
    s.g = read_function(root, "g", "obstacle", true, hx, out);

    Reader sv(root.get("solver"), "solver", out);
    s.solver.method = lcp_method_from_string(sv.string("method", "policy_iteration", {"psor", "policy_iteration"}));
    s.solver.tol = sv.number("tol", kDefaultTol);
    if (!(s.solver.tol > 0.0)) sv.fail("tol", "must be > 0");
    s.solver.omega = sv.number("omega", 1.5);
    if (!(s.solver.omega > 0.0 && s.solver.omega < 2.0)) sv.fail("omega", "must lie in (0, 2)");
    s.solver.max_iter = sv.count("max_iter", 0, 0);
    s.tol_region = sv.number("tol_region", -1.0);
    sv.finish();

    Reader d(root.get("discretization"), "discretization", out);
    s.scheme.cross = d.string("cross", "directional", {"directional", "four_point"}) == "four_point"
                         ? CrossStencil::four_point
                         : CrossStencil::directional;
    s.scheme.hybrid_drift = d.boolean("hybrid_drift", true);
    d.finish();

    const json* ex = root.get("experiments");
    if (ex && !ex->is_array()) {
        root.fail("experiments", "expected an array");
    } else if (ex) {
        for (std::size_t k = 0; k < ex->size(); ++k)
            s.experiments.push_back(read_experiment((*ex)[k], "experiments[" + std::to_string(k) + "]", s.params, out));
    }
    root.finish();
    if (!out.empty()) throw ConfigError(out);

    json& res = s.resolved;
    res["name"] = s.name;
    res["description"] = s.description;
    res["params"] = {{"sigma", s.params.sigma()}, {"rho", s.params.rho_corr()}, {"r", s.params.r()},
                     {"q", s.params.q()},         {"kappa", s.params.kappa()},  {"theta", s.params.theta()},
                     {"gamma", s.params.gamma_weight()}};
    res["grid"] = {{"x_min", s.grid.x_min}, {"x_max", s.grid.x_max}, {"y_max", s.grid.y_max},
                   {"nx", s.grid.nx},       {"ny", s.grid.ny},       {"grading", s.grid.grading}};
    res["obstacle"] = s.obstacle.to_json();
    res["f"] = s.f.to_json();
    res["g"] = s.g.to_json();
    res["solver"] = {{"method", to_string(s.solver.method)}, {"tol", s.solver.tol}, {"omega", s.solver.omega},
                     {"max_iter", s.solver.max_iter}, {"tol_region", s.tol_region}};
    res["discretization"] = {{"cross", to_string(s.scheme.cross)}, {"hybrid_drift", s.scheme.hybrid_drift}};
    res["experiments"] = json::array();
    for (const auto& e : s.experiments) res["experiments"].push_back(experiment_to_json(e));
    return s;
}

std::vector<Finding> check_obstacle_compatibility(const Scenario& s) {
    std::vector<Finding> out;
    if (s.g.type == "obstacle") return out;
    const auto grid = s.grid.build();
    const auto psi = build_function(s.obstacle);
    const auto g = build_function(s.g);
    const double tol = s.solver.tol;
    std::size_t bad = 0;
    Point first{};
    double worst = 0.0;
    for (std::size_t k = 0; k < grid->size(); ++k) {
        const std::size_t i = grid->col(k), j = grid->row(k);
        const bool dirichlet = i == 0 || i + 1 == grid->nx() || j + 1 == grid->ny();
        if (!dirichlet) continue;
        const Point p = grid->node(k);
        const double excess = psi->value(p) - g->value(p);
        if (excess > tol) {
            if (!bad) first = p;
            ++bad;
            worst = std::max(worst, excess);
        }
    }
    if (bad) {
        std::ostringstream os;
        os << "obstacle exceeds g on the Dirichlet boundary at " << bad << " node(s), first at (" << first.x << ", "
           << first.y << "), worst excess " << worst;
        out.push_back({"g", os.str()});
    }
    return out;
}

std::vector<Finding> validate_scenario(const json& config) {
    try {
        const auto s = parse_scenario(config);
        return check_obstacle_compatibility(s);
    } catch (const ConfigError& e) {
        return e.findings();
    }
}

}  // namespace hestonlab
