#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "safeclf/dynamics.hpp"
#include "safeclf/hybrid.hpp"
#include "safeclf/scenario.hpp"

namespace safeclf {

enum class Verdict { Converged, Deadlock, Unsafe, TimedOut };

std::string to_string(Verdict v);
std::optional<Verdict> verdict_from_string(const std::string& name);

struct JumpRecord {
    double t = 0.0;
    int q_before = 0;
    int q_after = 0;
    Eigen::VectorXd setpoint_before;
    Eigen::VectorXd setpoint_after;
    Eigen::VectorXd x;  // top-level state at the jump instant
};

/// Sampled closed-loop run: decimated flow samples plus every jump instant
/// and the terminal state. `min_clearance` tracks min over all integration
/// steps of max_q h_q on the top-level substate.
struct HybridTrajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::VectorXd> inputs;
    std::vector<AuxiliaryState> aux_history;
    std::vector<std::uint8_t> jump_flags;
    std::vector<JumpRecord> jump_log;
    Verdict verdict = Verdict::TimedOut;
    int top_dim = 0;
    double final_time = 0.0;
    double final_target_error = 0.0;
    double min_clearance = 0.0;

    std::size_t sample_count() const { return times.size(); }
};

/// One classical RK4 step of xdot = f(x) + G(x) k(x). The controller is
/// re-evaluated at every stage state unless `zoh` freezes it at the step's
/// initial state. Throws NumericalBlowupError on a non-finite result.
Eigen::VectorXd integrate_flow_step(const AffineDynamics& dynamics,
                                    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& controller,
                                    const Eigen::VectorXd& x, double dt, bool zoh = false,
                                    double t_for_error = 0.0);

/// Runs the scenario's controller from one initial state (first-order
/// controllers: hybrid, hybrid_cbf_only, qp_ellipsoid, qp_smoothmax).
HybridTrajectory run_hybrid(const ScenarioConfig& config, const Eigen::VectorXd& x0);

/// Runs the backstepped hybrid controller on the strict-feedback system from
/// one initial state (top-level coordinates are padded with zeros at rest).
HybridTrajectory run_backstepped(const ScenarioConfig& config, const Eigen::VectorXd& x0);

/// Dispatches on the scenario's controller kind.
HybridTrajectory run_scenario_state(const ScenarioConfig& config, const Eigen::VectorXd& x0);

/// Terminal-window stagnation test: mean speed over the last 5% of samples
/// at most stall_tol while the final state stays conv_tol away from the
/// target. Throws InsufficientDataError for trajectories of fewer than two
/// samples.
bool detect_deadlock(const HybridTrajectory& traj, const Eigen::VectorXd& target,
                     double stall_tol, double conv_tol);

}  // namespace safeclf
