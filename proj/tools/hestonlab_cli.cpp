// hestonlab run | validate | list-scenarios
//
// Exit status: 0 all hard checks passed, 1 a hard check failed,
// 2 configuration error, 3 runtime failure.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hestonlab/reports.hpp"
#include "hestonlab/scenario.hpp"

namespace fs = std::filesystem;
using namespace hestonlab;

namespace {

fs::path scenario_dir() {
    if (const char* env = std::getenv("HESTONLAB_SCENARIOS")) return env;
    return HESTONLAB_SCENARIO_DIR;
}

// A bare name such as "perpetual_put" resolves to a shipped scenario.
fs::path resolve_config(const std::string& arg) {
    fs::path p(arg);
    if (fs::exists(p)) return p;
    fs::path shipped = scenario_dir() / (arg + (p.has_extension() ? "" : ".json"));
    if (fs::exists(shipped)) return shipped;
    return p;
}

void print_findings(const std::vector<Finding>& findings) {
    for (const auto& f : findings) std::cerr << "  " << f.field << ": " << f.message << "\n";
}

int cmd_validate(const std::string& config) {
    try {
        const auto path = resolve_config(config);
        const auto findings = validate_scenario(read_json_file(path));
        if (findings.empty()) {
            std::cout << path.string() << ": ok (0 findings)\n";
            return 0;
        }
        std::cerr << path.string() << ": " << findings.size() << " finding(s)\n";
        print_findings(findings);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << config << ": " << e.findings().size() << " finding(s)\n";
        print_findings(e.findings());
        return 2;
    }
}

int cmd_run(const std::string& config, const RunOptions& options) {
    Scenario s;
    try {
        s = parse_scenario(read_json_file(resolve_config(config)));
        const auto findings = check_obstacle_compatibility(s);
        if (!findings.empty()) throw ConfigError(findings);
    } catch (const ConfigError& e) {
        std::cerr << config << ": " << e.findings().size() << " finding(s)\n";
        print_findings(e.findings());
        return 2;
    }
    try {
        const auto result = run_scenario(s, options);
        for (const auto& r : result.reports) {
            std::size_t failed = 0;
            for (const auto& c : r.checks)
                if (c.hard && !c.pass) ++failed;
            std::cout << r.index << " " << r.type << ": " << (r.passed() ? "pass" : "FAIL") << " (" << r.checks.size()
                      << " checks";
            if (failed) std::cout << ", " << failed << " failed";
            std::cout << ")\n";
            for (const auto& c : r.checks)
                if (c.hard && !c.pass)
                    std::cout << "    " << c.name << " value=" << c.value << " tolerance=" << c.tolerance
                              << (c.detail.empty() ? "" : " " + c.detail) << "\n";
        }
        std::cout << "run directory: " << result.directory.string() << "\n";
        return result.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return 3;
    }
}

int cmd_list() {
    std::vector<fs::path> files;
    const auto dir = scenario_dir();
    if (fs::is_directory(dir))
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::string description;
        try {
            const auto j = read_json_file(f);
            description = j.value("description", "");
        } catch (const ConfigError&) {
            description = "(unreadable)";
        }
        std::cout << f.stem().string() << "\t" << description << "\n";
    }
    if (files.empty()) {
        std::cerr << "no scenarios in " << dir.string() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical lab for the degenerate Heston obstacle problem"};
    app.require_subcommand(1);

    std::string config;
    RunOptions options;
    std::string out_dir = "runs";
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "Solve a scenario and run its experiments");
    run->add_option("--config", config, "Scenario JSON file or shipped scenario name")->required();
    run->add_option("--out-dir", out_dir, "Parent directory of the run directory")->capture_default_str();
    run->add_option("--threads", options.threads, "OpenMP threads (0 keeps the default)")->check(CLI::NonNegativeNumber);
    auto* seed_opt = run->add_option("--seed", seed, "Seed for every mc-check experiment");
    run->add_flag("--parallel-experiments", options.parallel_experiments, "Run independent experiments concurrently");

    auto* validate = app.add_subcommand("validate", "Check a scenario without solving");
    validate->add_option("--config", config, "Scenario JSON file or shipped scenario name")->required();

    app.add_subcommand("list-scenarios", "List shipped scenarios");

    CLI11_PARSE(app, argc, argv);

    if (*run) {
        options.out_dir = out_dir;
        if (*seed_opt) options.seed = seed;
        return cmd_run(config, options);
    }
    if (*validate) return cmd_validate(config);
    return cmd_list();
}
