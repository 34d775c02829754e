#pragma once

#include <string>
#include <vector>

#include "safeclf/scenario.hpp"
#include "safeclf/sim.hpp"

namespace safeclf {

struct BatchOptions {
    bool write_svg = true;
    bool write_csv = true;
    int max_workers = 0;  // 0 = hardware concurrency
};

struct RunRow {
    int index = 0;
    bool failed = false;
    std::string error_message;
    Verdict verdict = Verdict::TimedOut;
    int jumps = 0;
    double min_clearance = 0.0;
    double final_error = 0.0;
    double wall_seconds = 0.0;
    std::string expected;  // empty when the scenario declares no expectation
    bool matched = true;
};

struct BatchSummary {
    std::string scenario_name;
    std::vector<RunRow> rows;
    bool all_expectations_met = true;
    bool any_error = false;
    std::string out_dir;
    std::string summary_path;
    std::string config_echo_path;
    std::string svg_path;  // empty when not written

    /// Human-readable summary table.
    std::string table() const;
    /// Machine-readable table (wall_seconds varies run to run; every other
    /// column is deterministic for a fixed config and seed).
    std::string csv() const;
};

/// Runs every initial state of the scenario on a bounded worker pool, writes
/// one trajectory CSV per state, one SVG overlay, the materialized config
/// echo, and the summary table. Per-run errors are recorded in their row
/// without aborting the batch.
BatchSummary run_batch(const ScenarioConfig& config, const std::string& out_dir,
                       const BatchOptions& options = {});

}  // namespace safeclf
