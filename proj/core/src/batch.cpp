#include "safeclf/batch.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <thread>

#include "safeclf/errors.hpp"
#include "safeclf/trajectory_io.hpp"

namespace safeclf {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string BatchSummary::table() const {
    std::ostringstream out;
    out << "scenario: " << scenario_name << "\n";
    out << std::left << std::setw(6) << "run" << std::setw(11) << "verdict" << std::setw(7)
        << "jumps" << std::setw(15) << "min_clearance" << std::setw(13) << "final_error"
        << std::setw(10) << "wall_s" << std::setw(11) << "expected" << "status\n";
    for (const auto& row : rows) {
        out << std::left << std::setw(6) << row.index;
        if (row.failed) {
            out << std::setw(11) << "ERROR" << row.error_message << "\n";
            continue;
        }
        out << std::setw(11) << to_string(row.verdict) << std::setw(7) << row.jumps
            << std::setw(15) << std::setprecision(6) << row.min_clearance << std::setw(13)
            << row.final_error << std::setw(10) << std::setprecision(3) << row.wall_seconds
            << std::setw(11) << (row.expected.empty() ? "-" : row.expected)
            << (row.matched ? "ok" : "MISMATCH") << "\n";
    }
    return out.str();
}

std::string BatchSummary::csv() const {
    std::ostringstream out;
    out << "run,verdict,jumps,min_clearance,final_error,wall_seconds,expected,matched,error\n";
    for (const auto& row : rows) {
        out << row.index << ',' << (row.failed ? "ERROR" : to_string(row.verdict)) << ','
            << row.jumps << ',' << fmt17(row.min_clearance) << ',' << fmt17(row.final_error)
            << ',' << row.wall_seconds << ',' << row.expected << ','
            << (row.matched ? 1 : 0) << ',' << row.error_message << '\n';
    }
    return out.str();
}

BatchSummary run_batch(const ScenarioConfig& config, const std::string& out_dir,
                       const BatchOptions& options) {
    const Polytope poly = config.build_polytope();
    const std::vector<Eigen::VectorXd> starts = expand_initial_states(config, poly);
    if (starts.empty()) {
        throw InvalidScenarioError("run_batch: no initial states");
    }

    std::filesystem::create_directories(out_dir);
    BatchSummary summary;
    summary.scenario_name = config.name;
    summary.out_dir = out_dir;
    summary.rows.resize(starts.size());

    // Materialized config echo: the reproduction contract for this batch.
    summary.config_echo_path = (std::filesystem::path(out_dir) / (config.name + "_config.json")).string();
    {
        std::ofstream echo(summary.config_echo_path, std::ios::binary);
        if (!echo) throw Error("run_batch: cannot write " + summary.config_echo_path);
        echo << emit_scenario(config);
    }

    std::vector<HybridTrajectory> trajectories(starts.size());
    std::vector<bool> have_traj(starts.size(), false);

    const int workers = options.max_workers > 0
                            ? options.max_workers
                            : std::max(1u, std::thread::hardware_concurrency());
    std::atomic<std::size_t> next_index{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next_index.fetch_add(1);
            if (i >= starts.size()) break;
            RunRow& row = summary.rows[i];
            row.index = static_cast<int>(i);
            const auto t0 = std::chrono::steady_clock::now();
            try {
                trajectories[i] = run_scenario_state(config, starts[i]);
                have_traj[i] = true;
                const HybridTrajectory& traj = trajectories[i];
                row.verdict = traj.verdict;
                row.jumps = static_cast<int>(traj.jump_log.size());
                row.min_clearance = traj.min_clearance;
                row.final_error = traj.final_target_error;
            } catch (const Error& e) {
                row.failed = true;
                row.error_message = e.what();
            }
            row.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    {
        std::vector<std::thread> pool;
        const int spawn = std::min<std::size_t>(workers, starts.size());
        pool.reserve(spawn);
        for (int w = 0; w < spawn; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Expectations: one entry broadcast to all runs, or one per run.
    for (std::size_t i = 0; i < summary.rows.size(); ++i) {
        RunRow& row = summary.rows[i];
        if (!config.expectations.empty()) {
            row.expected = config.expectations.size() == 1 ? config.expectations.front()
                                                           : config.expectations[i];
            row.matched = !row.failed && to_string(row.verdict) == row.expected;
        }
        summary.all_expectations_met = summary.all_expectations_met && row.matched;
        summary.any_error = summary.any_error || row.failed;
    }

    if (options.write_csv) {
        for (std::size_t i = 0; i < starts.size(); ++i) {
            if (!have_traj[i]) continue;
            char suffix[32];
            std::snprintf(suffix, sizeof(suffix), "_run%02zu.csv", i);
            const std::string path =
                (std::filesystem::path(out_dir) / (config.name + suffix)).string();
            write_trajectory_csv(path, trajectories[i]);
        }
    }

    if (options.write_svg && config.top_dim() == 2) {
        std::vector<HybridTrajectory> completed;
        for (std::size_t i = 0; i < starts.size(); ++i) {
            if (have_traj[i]) completed.push_back(trajectories[i]);
        }
        std::optional<Ellipsoid> fit;
        if (config.controller == ControllerKind::QpEllipsoid) {
            std::vector<Eigen::VectorXd> verts;
            for (const auto& v : config.polytope_vertices) verts.push_back(v);
            fit = min_volume_ellipsoid(verts);
        }
        summary.svg_path = (std::filesystem::path(out_dir) / (config.name + ".svg")).string();
        write_svg(summary.svg_path, completed, poly, fit, config.target);
    }

    summary.summary_path =
        (std::filesystem::path(out_dir) / (config.name + "_summary.csv")).string();
    std::ofstream out(summary.summary_path, std::ios::binary);
    if (!out) throw Error("run_batch: cannot write " + summary.summary_path);
    out << summary.csv();
    return summary;
}

}  // namespace safeclf
