#include "hestonlab/reports.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <sstream>
#include <system_error>

#include "hestonlab/kernels.hpp"
#include "hestonlab/montecarlo.hpp"
#include "hestonlab/norms.hpp"
#include "hestonlab/regularity.hpp"

namespace hestonlab {

using nlohmann::json;

namespace {

using Artifacts = std::vector<std::pair<std::string, std::string>>;

json point_json(Point p) { return {p.x, p.y}; }

Check make_check(std::string name, bool pass, double value, double tolerance, std::string detail = {},
                 bool hard = true) {
    Check c;
    c.name = std::move(name);
    c.pass = pass;
    c.hard = hard;
    c.value = value;
    c.tolerance = tolerance;
    c.detail = std::move(detail);
    return c;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

double distance_to_dirichlet(const GridSpec& g, Point p) {
    return std::min({p.x - g.x_min, g.x_max - p.x, g.y_max - p.y});
}

/// One anchor per height, NaN when the contour never reaches it.
std::vector<Point> anchors_for(const RegionMap& regions, const std::vector<double>& heights) {
    std::vector<Point> out;
    for (double h : heights) {
        const double one[1] = {h};
        auto a = anchors_on_free_boundary(regions, one);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        out.push_back(a.empty() ? Point{nan, h} : a.front());
    }
    return out;
}

void run_solve(const Scenario& s, const BaseSolution& base, const SolveExperiment& opt, ExperimentReport& rep) {
    const auto& sol = base.solution;
    rep.body["solution"] = solution_manifest(base.system, sol);
    rep.body["m_matrix"] = base.system.m_matrix.to_json();
    rep.body["exercise_nodes"] = base.regions.exercise;
    rep.body["continuation_nodes"] = base.regions.continuation;

    double gap_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sol.u.size(); ++k) gap_min = std::min(gap_min, sol.u[k] - base.psi_values[k]);
    rep.body["min_u_minus_psi"] = gap_min;

    rep.checks.push_back(make_check("complementarity_residual", sol.residual_comp <= s.solver.tol, sol.residual_comp,
                                    s.solver.tol));
    rep.checks.push_back(make_check("u_ge_psi", gap_min >= -s.solver.tol, gap_min, -s.solver.tol));
    rep.checks.push_back(make_check("m_matrix", base.system.m_matrix.ok(),
                                    static_cast<double>(base.system.m_matrix.sign_violations +
                                                        base.system.m_matrix.dominance_violations),
                                    0.0, "sign and dominance violations", false));

    if (opt.compare_with) {
        LcpOptions other = s.solver;
        other.method = *opt.compare_with;
        const auto alt = solve_obstacle(base.system, base.psi_values, other, s.tol_region);
        double diff = 0.0;
        for (std::size_t k = 0; k < alt.u.size(); ++k) diff = std::max(diff, std::abs(alt.u[k] - sol.u[k]));
        rep.body["comparison"] = {{"method", to_string(other.method)},
                                  {"residual_comp", alt.residual_comp},
                                  {"residual_lin", alt.residual_lin},
                                  {"iterations", alt.iterations},
                                  {"max_abs_difference", diff},
                                  {"agreement_tol", opt.agreement_tol}};
        rep.checks.push_back(make_check("method_agreement", diff <= opt.agreement_tol, diff, opt.agreement_tol,
                                        to_string(sol.method) + " vs " + to_string(other.method)));
        rep.checks.push_back(make_check("comparison_complementarity_residual", alt.residual_comp <= s.solver.tol,
                                        alt.residual_comp, s.solver.tol));
    }
}

void run_norms(const BaseSolution& base, const Scenario& s, const NormsExperiment& opt, ExperimentReport& rep) {
    rep.body["windows"] = json::array();
    for (std::size_t w = 0; w < opt.windows.size(); ++w) {
        const auto& win = opt.windows[w];
        json entry{{"window", win.to_json()}};
        try {
            std::vector<NormReport> norms{c11s_norm(base.solution.u, win),
                                          c2alpha_s_norm(base.solution.u, win, opt.alpha),
                                          h2_weighted_norm(base.solution.u, s.params, win),
                                          c11_norm(base.solution.u, win)};
            entry["norms"] = json::array();
            bool finite = true;
            for (const auto& n : norms) {
                entry["norms"].push_back(n.to_json());
                finite = finite && std::isfinite(n.value);
            }
            rep.checks.push_back(make_check("window_" + std::to_string(w) + "_finite", finite, finite ? 1.0 : 0.0, 1.0));
        } catch (const std::exception& e) {
            entry["error"] = e.what();
            rep.checks.push_back(make_check("window_" + std::to_string(w) + "_evaluated", false, 0.0, 1.0, e.what()));
        }
        rep.body["windows"].push_back(entry);
    }
}

void run_growth(const Scenario& s, const BaseSolution& base, const GrowthExperiment& opt, ExperimentReport& rep) {
    ZoomOptions zoom;
    zoom.nx = opt.nx;
    zoom.patch_factor = opt.patch_factor;
    zoom.scheme = s.scheme;
    zoom.lcp = s.solver;
    zoom.lcp.max_iter = std::max<std::size_t>(s.solver.max_iter, 1000);

    rep.body["anchors"] = json::array();
    auto handle = [&](const std::vector<double>& heights, Regime regime) {
        const auto anchors = anchors_for(base.regions, heights);
        for (const Point& a : anchors) {
            const std::string tag = to_string(regime) + "@y=" + fmt(a.y);
            if (!std::isfinite(a.x)) {
                rep.checks.push_back(make_check(tag + ":anchor_found", false, 0.0, 1.0, "free boundary never reaches this height"));
                continue;
            }
            const double R0 = distance_to_dirichlet(s.grid, a);
            const double rho0 = regime == Regime::interior ? interior_rho0(s.params, R0) : boundary_rho0(s.params, R0);
            std::vector<double> radii;
            for (std::size_t k = 0; k < opt.levels; ++k) radii.push_back(rho0 * std::pow(opt.ratio, static_cast<double>(k)));
            const auto window = regime == Regime::interior ? DomainWindow::ball(a, rho0 * a.y) : DomainWindow::half_ball(a, rho0);
            const double c11 = c11_norm(*base.psi, window);
            json entry{{"anchor", point_json(a)}, {"regime", to_string(regime)}, {"R0", R0}, {"rho0", rho0}, {"psi_c11", c11}};
            try {
                const auto g = zoom_growth_profile(s.params, *base.psi, base.solution.u, a, regime, radii, c11, zoom);
                entry["profile"] = g.to_json();
                if (regime == Regime::interior) {
                    rep.checks.push_back(make_check(tag + ":slope", g.slope >= opt.min_slope, g.slope, opt.min_slope,
                                                    "log-log slope of the normalised gap"));
                } else {
                    const auto& r = g.ratio;
                    const double worst = r.size() >= 3 ? std::max(r[r.size() - 2] - r[r.size() - 3], r.back() - r[r.size() - 2])
                                                       : std::numeric_limits<double>::quiet_NaN();
                    rep.checks.push_back(make_check(tag + ":ratio_nonincreasing", g.tail_nonincreasing, worst, 0.0,
                                                    "largest increase of the ratio over the three finest radii"));
                }
            } catch (const std::exception& e) {
                entry["error"] = e.what();
                rep.checks.push_back(make_check(tag + ":profile", false, 0.0, 1.0, e.what()));
            }
            rep.body["anchors"].push_back(entry);
        }
    };
    handle(opt.interior_heights, Regime::interior);
    handle(opt.boundary_heights, Regime::boundary);
}

void run_aux(const Scenario& s, const BaseSolution& base, const AuxExperiment& opt, ExperimentReport& rep) {
    AuxOptions aux;
    aux.ladder = opt.ladder;
    aux.scheme = s.scheme;
    aux.tol = s.solver.tol;
    rep.body["anchors"] = json::array();
    auto handle = [&](const std::vector<double>& heights, bool interior) {
        for (const Point& a : anchors_for(base.regions, heights)) {
            const std::string tag = std::string(interior ? "zeta" : "xi") + "@y=" + fmt(a.y);
            if (!std::isfinite(a.x)) {
                rep.checks.push_back(make_check(tag + ":anchor_found", false, 0.0, 1.0, "free boundary never reaches this height"));
                continue;
            }
            const double R0 = distance_to_dirichlet(s.grid, a);
            const double rho0 = interior ? interior_rho0(s.params, R0) : boundary_rho0(s.params, R0);
            const double rho = opt.rho_fraction * rho0;
            const auto window = interior ? DomainWindow::ball(a, rho0 * a.y) : DomainWindow::half_ball(a, rho0);
            json entry{{"anchor", point_json(a)}, {"rho0", rho0}, {"rho", rho}};
            try {
                const auto c = measure_constants(*base.psi, window, s.params);
                entry["constants"] = c.to_json();
                const auto sol = interior ? solve_zeta(s.params, *base.psi, a, rho, c.M, aux)
                                          : solve_xi(s.params, *base.psi, a, rho, c.N, aux);
                entry["solve"] = sol.to_json();
                const auto& fine = sol.levels.back();
                rep.checks.push_back(make_check(tag + ":bounds", sol.pass(), fine.slack, 0.05 * sol.lower_bound,
                                                "lower " + fmt(sol.lower_bound) + " <= [" + fmt(fine.min) + ", " +
                                                    fmt(fine.max) + "] <= upper " + fmt(sol.upper_bound)));
            } catch (const std::exception& e) {
                entry["error"] = e.what();
                rep.checks.push_back(make_check(tag + ":solve", false, 0.0, 1.0, e.what()));
            }
            rep.body["anchors"].push_back(entry);
        }
    };
    handle(opt.interior_heights, true);
    handle(opt.boundary_heights, false);
}

void run_certificate(const Scenario& s, const BaseSolution& base, const CertificateExperiment& opt,
                     ExperimentReport& rep) {
    Point centre;
    if (opt.center) {
        centre = *opt.center;
    } else {
        const auto a = anchors_for(base.regions, {0.0});
        if (!std::isfinite(a.front().x)) {
            rep.checks.push_back(make_check("centre_found", false, 0.0, 1.0, "no free boundary to centre on"));
            return;
        }
        centre = a.front();
    }
    const auto outer = DomainWindow::half_ball(centre, opt.outer_radius);
    const auto inner = DomainWindow::half_ball(centre, 0.5 * opt.outer_radius);
    rep.body["center"] = point_json(centre);
    rep.body["outer"] = outer.to_json();
    rep.body["inner"] = inner.to_json();

    std::vector<CertificateLevel> levels;
    GridFunction prev;
    for (const auto& [nx, ny] : opt.ladder) {
        const auto grid = s.grid.build(nx, ny);
        const auto system = build_system(s.params, grid, *base.g, *base.f, s.scheme);
        const auto psi = sample(*base.psi, grid);
        const auto f = sample(*base.f, grid);
        LcpOptions lcp = s.solver;
        // warm start from the previous rung
        if (prev.size())
            for (std::size_t k = 0; k < grid->size(); ++k) lcp.initial_guess.push_back(prev.interpolate(grid->node(k)));
        const auto sol = solve_obstacle(system, psi, lcp, s.tol_region);
        levels.push_back(certificate_level(sol.u, psi, f, inner, outer, opt.alpha, opt.axis_band));
        prev = sol.u;
    }
    auto cert = c11s_certificate(levels);
    cert.bounded = cert.max <= opt.bound_factor * cert.median;
    rep.body["certificate"] = cert.to_json();
    rep.body["bound_factor"] = opt.bound_factor;
    rep.checks.push_back(make_check("ratio_bounded", cert.bounded, cert.max, opt.bound_factor * cert.median,
                                    "max ratio against bound_factor x median"));
}

void run_mc(const Scenario& s, const BaseSolution& base, const McExperiment& opt, const RunOptions& run,
            ExperimentReport& rep, Artifacts& artifacts, std::size_t index) {
    const StoppingRule rule(base.solution.u, base.regions.labels, base.psi);
    McOptions mc = opt.mc;
    if (run.seed) mc.seed = *run.seed;
    rep.body["options"] = {{"n_paths", mc.n_paths}, {"dt", mc.dt}, {"horizon", mc.horizon > 0 ? mc.horizon : default_horizon(s.params)},
                           {"seed", mc.seed},       {"antithetic", mc.antithetic},
                           {"tail", opt.tail == TailMode::pde_proxy ? "pde_proxy" : "truncate"}};
    rep.body["lookup"] = "nearest node of the base grid";
    rep.body["probes"] = json::array();
    std::vector<McProbe> probes;
    for (const Point& p : opt.probes) {
        const auto probe = cross_validate(s.params, p, mc, rule, opt.tail);
        probes.push_back(probe);
        json entry = to_json(probe);
        const std::string tag = "(" + fmt(p.x) + "," + fmt(p.y) + ")";
        const double err = std::abs(probe.pde_value - probe.estimate.mean);
        const double band = 3.0 * probe.estimate.std_error + probe.estimate.tail_bias_bound;
        rep.checks.push_back(make_check(tag + ":agreement", probe.agrees, err, band, "|pde - mc| <= 3 se + tail bias"));
        rep.checks.push_back(make_check(tag + ":pde_dominates", probe.dominates, probe.estimate.mean - probe.pde_value,
                                        band, "mc - pde <= 3 se + tail bias"));
        if (opt.compare_plain && mc.antithetic) {
            McOptions plain = mc;
            plain.antithetic = false;
            const auto est = stopped_value_streaming(s.params, p, plain, rule, opt.tail);
            entry["plain_std_error"] = est.std_error;
            const double limit = 0.8 * est.std_error;
            rep.checks.push_back(make_check(tag + ":antithetic_gain", probe.estimate.std_error <= limit,
                                            probe.estimate.std_error, limit, "se_anti <= 0.8 se_plain", false));
        }
        rep.body["probes"].push_back(entry);
    }
    std::ostringstream csv;
    write_mc_csv(csv, probes);
    char name[32];
    std::snprintf(name, sizeof name, "%02zu-mc.csv", index);
    artifacts.emplace_back(name, csv.str());
}

std::string utc_stamp(std::chrono::system_clock::time_point t, const char* format) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[64];
    std::strftime(buf, sizeof buf, format, &tm);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

json Check::to_json() const {
    json j{{"name", name}, {"pass", pass}, {"hard", hard}, {"value", value}, {"tolerance", tolerance}};
    if (!detail.empty()) j["detail"] = detail;
    return j;
}

bool ExperimentReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass || !c.hard; });
}

json ExperimentReport::to_json() const {
    json j{{"type", type}, {"index", index}, {"passed", passed()}, {"checks", json::array()}};
    for (const auto& c : checks) j["checks"].push_back(c.to_json());
    j["results"] = body;
    return j;
}

BaseSolution solve_base(const Scenario& s) {
    auto grid = s.grid.build();
    auto psi = build_function(s.obstacle);
    auto f = build_function(s.f);
    auto g = s.g.type == "obstacle" ? psi : build_function(s.g);
    auto system = build_system(s.params, grid, *g, *f, s.scheme);
    auto psi_values = sample(*psi, grid);
    auto solution = solve_obstacle(system, psi_values, s.solver, s.tol_region);
    auto regions = classify_regions(solution, psi_values, solution.tol_region);
    return {std::move(grid),   std::move(psi),        std::move(f),        std::move(g),
            std::move(system), std::move(psi_values), std::move(solution), std::move(regions)};
}

ExperimentReport run_experiment(const Scenario& s, const BaseSolution& base, const Experiment& e,
                                const RunOptions& run, Artifacts& artifacts) {
    ExperimentReport rep;
    rep.type = e.type;
    rep.body = json::object();
    const auto it = std::find_if(s.experiments.begin(), s.experiments.end(), [&](const Experiment& x) { return &x == &e; });
    rep.index = it == s.experiments.end() ? 0 : static_cast<std::size_t>(it - s.experiments.begin());
    try {
        std::visit(
            [&](const auto& opt) {
                using T = std::decay_t<decltype(opt)>;
                if constexpr (std::is_same_v<T, SolveExperiment>) run_solve(s, base, opt, rep);
                if constexpr (std::is_same_v<T, NormsExperiment>) run_norms(base, s, opt, rep);
                if constexpr (std::is_same_v<T, GrowthExperiment>) run_growth(s, base, opt, rep);
                if constexpr (std::is_same_v<T, AuxExperiment>) run_aux(s, base, opt, rep);
                if constexpr (std::is_same_v<T, CertificateExperiment>) run_certificate(s, base, opt, rep);
                if constexpr (std::is_same_v<T, McExperiment>) run_mc(s, base, opt, run, rep, artifacts, rep.index);
            },
            e.options);
    } catch (const std::exception& ex) {
        rep.body["error"] = ex.what();
        rep.checks.push_back(make_check("completed", false, 0.0, 1.0, ex.what()));
    }
    return rep;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::filesystem::path create_run_directory(const std::filesystem::path& parent, const std::string& name) {
    std::filesystem::create_directories(parent);
    const std::string base = name + "-" + utc_stamp(std::chrono::system_clock::now(), "%Y%m%dT%H%M%SZ");
    for (int n = 0; n < 10000; ++n) {
        auto dir = parent / (n == 0 ? base : base + "-" + std::to_string(n));
        std::error_code ec;
        if (std::filesystem::create_directory(dir, ec)) return dir;
        if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    }
    throw std::runtime_error("no free run directory name under " + parent.string());
}

const char* tool_version() { return "0.1.0"; }

RunResult run_scenario(const Scenario& s, const RunOptions& options) {
    const int threads = kernels::set_threads(options.threads);
    const auto started = std::chrono::system_clock::now();
    RunResult result;
    result.directory = create_run_directory(options.out_dir, s.name);
    const auto& dir = result.directory;

    auto t0 = std::chrono::steady_clock::now();
    const BaseSolution base = solve_base(s);
    const double base_time = seconds_since(t0);

    {
        std::ostringstream os;
        write_solution_csv(os, base.solution.u, base.psi_values, base.regions.labels);
        write_file_atomic(dir / "solution.csv", os.str());
    }
    {
        std::ostringstream os;
        os.precision(17);
        os << "i,j,x,y,region\n";
        const Grid& g = *base.grid;
        for (std::size_t k = 0; k < g.size(); ++k)
            os << g.col(k) << ',' << g.row(k) << ',' << g.node(k).x << ',' << g.node(k).y << ','
               << to_string(base.regions.labels[k]) << '\n';
        write_file_atomic(dir / "regions.csv", os.str());
    }
    {
        std::ostringstream os;
        write_free_boundary_csv(os, base.regions);
        write_file_atomic(dir / "freeboundary.csv", os.str());
    }

    const std::size_t n = s.experiments.size();
    std::vector<ExperimentReport> reports(n);
    std::vector<Artifacts> artifacts(n);
    std::vector<double> timings(n, 0.0);
    auto one = [&](std::size_t k) {
        const auto t = std::chrono::steady_clock::now();
        reports[k] = run_experiment(s, base, s.experiments[k], options, artifacts[k]);
        timings[k] = seconds_since(t);
    };
    if (options.parallel_experiments && n > 1) {
        std::vector<std::future<void>> jobs;
        for (std::size_t k = 0; k < n; ++k) jobs.push_back(std::async(std::launch::async, one, k));
        for (auto& j : jobs) j.get();
    } else {
        for (std::size_t k = 0; k < n; ++k) one(k);
    }

    json files = json::array({"solution.csv", "regions.csv", "freeboundary.csv"});
    json timing = {{"base_solve_seconds", base_time}, {"experiments", json::array()}};
    for (std::size_t k = 0; k < n; ++k) {
        char name[64];
        std::snprintf(name, sizeof name, "%02zu-%s.json", k, reports[k].type.c_str());
        write_file_atomic(dir / name, reports[k].to_json().dump(2) + "\n");
        files.push_back(name);
        for (const auto& [fname, contents] : artifacts[k]) {
            write_file_atomic(dir / fname, contents);
            files.push_back(fname);
        }
        timing["experiments"].push_back({{"index", k}, {"type", reports[k].type}, {"seconds", timings[k]}});
        if (!reports[k].passed()) result.exit_code = 1;
    }

    json failed = json::array();
    for (const auto& r : reports)
        for (const auto& c : r.checks)
            if (c.hard && !c.pass) failed.push_back(r.type + ":" + c.name);

    json manifest{{"tool", "hestonlab"},
                  {"version", tool_version()},
                  {"config", s.resolved},
                  {"threads", threads},
                  {"parallel_experiments", options.parallel_experiments},
                  {"started_utc", utc_stamp(started, "%Y-%m-%dT%H:%M:%SZ")},
                  {"finished_utc", utc_stamp(std::chrono::system_clock::now(), "%Y-%m-%dT%H:%M:%SZ")},
                  {"timings", timing},
                  {"files", files},
                  {"failed_checks", failed},
                  {"exit_code", result.exit_code}};
    if (options.seed) manifest["seed_override"] = *options.seed;
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    result.reports = std::move(reports);
    return result;
}

}  // namespace hestonlab
