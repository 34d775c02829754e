// Command-line front end: scenario validation, batch execution, and the
// shipped scenario library.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "safeclf/batch.hpp"
#include "safeclf/errors.hpp"
#include "safeclf/scenario.hpp"

namespace fs = std::filesystem;

#ifndef SAFECLF_SCENARIO_DIR
#define SAFECLF_SCENARIO_DIR ""
#endif

namespace {

// Exit codes shared with the scenario expectations contract.
constexpr int kExitOk = 0;
constexpr int kExitExpectationMismatch = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

std::vector<fs::path> scenario_dirs() {
    std::vector<fs::path> dirs;
    if (const char* env = std::getenv("SAFECLF_SCENARIOS")) dirs.emplace_back(env);
    if (std::string(SAFECLF_SCENARIO_DIR).size() > 0) dirs.emplace_back(SAFECLF_SCENARIO_DIR);
    dirs.emplace_back("scenarios");
    return dirs;
}

// Accepts a path as-is, or a shipped scenario name (with or without .json).
std::optional<fs::path> resolve_scenario(const std::string& arg) {
    if (fs::exists(arg)) return fs::path(arg);
    for (const auto& dir : scenario_dirs()) {
        for (const auto& candidate : {dir / arg, dir / (arg + ".json")}) {
            if (fs::exists(candidate)) return candidate;
        }
    }
    return std::nullopt;
}

struct Overrides {
    std::optional<std::string> controller;
    std::optional<double> mu, sigma, dt, tmax;
    std::optional<long long> seed;
    bool zoh = false;
};

void apply_overrides(safeclf::ScenarioConfig& config, const Overrides& o) {
    if (o.controller) {
        // Round-trip through the parser keeps the name validation in one place.
        safeclf::ScenarioConfig probe = config;
        std::string text = safeclf::emit_scenario(probe);
        const std::string key = "\"controller\": \"" + to_string(config.controller) + "\"";
        const auto pos = text.find(key);
        if (pos == std::string::npos) throw safeclf::ConfigError("internal: controller key");
        text.replace(pos, key.size(), "\"controller\": \"" + *o.controller + "\"");
        config = safeclf::parse_scenario(text);
    }
    if (o.mu) config.params.mu = *o.mu;
    if (o.sigma) config.params.sigma = *o.sigma;
    if (o.dt) config.sim.dt = *o.dt;
    if (o.tmax) config.sim.t_max = *o.tmax;
    if (o.seed) {
        if (!config.grid) config.grid = safeclf::GridSpec{};
        config.grid->seed = static_cast<std::uint64_t>(*o.seed);
    }
    if (o.zoh) config.sim.zoh = true;
    safeclf::validate_scenario(config);
}

int cmd_validate(const std::string& scenario_arg) {
    const auto path = resolve_scenario(scenario_arg);
    if (!path) {
        std::cerr << "error: scenario not found: " << scenario_arg << "\n";
        return kExitConfigError;
    }
    const auto config = safeclf::load_scenario(path->string());
    std::cout << "valid: " << config.name << " (" << to_string(config.controller) << ", "
              << to_string(config.dynamics) << ")\n";
    std::cout << safeclf::emit_scenario(config);
    return kExitOk;
}

int cmd_list() {
    bool any = false;
    for (const auto& dir : scenario_dirs()) {
        if (!fs::is_directory(dir)) continue;
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            any = true;
            try {
                const auto config = safeclf::load_scenario(file.string());
                std::cout << config.name << "  [" << to_string(config.controller) << ", "
                          << to_string(config.dynamics) << "]  " << file.string() << "\n";
            } catch (const safeclf::Error& e) {
                std::cout << file.stem().string() << "  [invalid: " << e.what() << "]\n";
            }
        }
        if (any) break;  // first populated directory wins
    }
    if (!any) {
        std::cout << "no scenarios found (set SAFECLF_SCENARIOS or run from the repo root)\n";
    }
    return kExitOk;
}

int cmd_run(const std::string& scenario_arg, const std::string& out_dir, const Overrides& o,
            bool svg) {
    const auto path = resolve_scenario(scenario_arg);
    if (!path) {
        std::cerr << "error: scenario not found: " << scenario_arg << "\n";
        return kExitConfigError;
    }
    safeclf::ScenarioConfig config = safeclf::load_scenario(path->string());
    apply_overrides(config, o);

    safeclf::BatchOptions options;
    options.write_svg = svg;
    const auto summary = safeclf::run_batch(config, out_dir, options);
    std::cout << summary.table();
    std::cout << "outputs: " << summary.out_dir << "\n";
    if (summary.any_error) return kExitRuntimeError;
    if (!summary.all_expectations_met) return kExitExpectationMismatch;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"safeclf: hybrid CLF-CBF safe stabilization scenarios"};
    app.require_subcommand(1);

    std::string scenario_arg;
    std::string out_dir = std::getenv("SAFECLF_OUT") ? std::getenv("SAFECLF_OUT") : "out";
    Overrides overrides;
    bool svg = true;

    auto* run = app.add_subcommand("run", "Run a scenario batch and write CSV/SVG artifacts");
    run->add_option("scenario", scenario_arg, "Scenario file or shipped scenario name")->required();
    run->add_option("--out", out_dir, "Output directory (default $SAFECLF_OUT or ./out)");
    std::string controller_override;
    run->add_option("--controller", controller_override,
                    "Override the controller (hybrid | backstepped_hybrid | qp_ellipsoid | "
                    "qp_smoothmax | hybrid_cbf_only)");
    double mu = 0, sigma = 0, dt = 0, tmax = 0;
    long long seed = 0;
    auto* mu_opt = run->add_option("--mu", mu, "Synergy gap override");
    auto* sigma_opt = run->add_option("--sigma", sigma, "Hysteresis width override");
    auto* dt_opt = run->add_option("--dt", dt, "Integration step override");
    auto* tmax_opt = run->add_option("--tmax", tmax, "Time horizon override");
    auto* seed_opt = run->add_option("--seed", seed, "Initial-state grid seed override");
    run->add_flag("--zoh", overrides.zoh, "Zero-order-hold the controller over each step");
    run->add_flag("--svg,!--no-svg", svg, "Write the SVG overlay (default on)");

    auto* validate = app.add_subcommand("validate", "Validate a scenario file and echo it");
    validate->add_option("scenario", scenario_arg, "Scenario file or shipped scenario name")
        ->required();

    auto* list = app.add_subcommand("list-scenarios", "List the shipped scenario library");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (!controller_override.empty()) overrides.controller = controller_override;
            if (mu_opt->count()) overrides.mu = mu;
            if (sigma_opt->count()) overrides.sigma = sigma;
            if (dt_opt->count()) overrides.dt = dt;
            if (tmax_opt->count()) overrides.tmax = tmax;
            if (seed_opt->count()) overrides.seed = seed;
            return cmd_run(scenario_arg, out_dir, overrides, svg);
        }
        if (validate->parsed()) return cmd_validate(scenario_arg);
        if (list->parsed()) return cmd_list();
    } catch (const safeclf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const safeclf::InvalidScenarioError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const safeclf::Error& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntimeError;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
    return kExitOk;
}
