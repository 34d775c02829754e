#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "safeclf/geometry.hpp"

namespace safeclf {

enum class DynamicsKind { SingleIntegrator, DoubleIntegrator, CustomAffine };
enum class ControllerKind { Hybrid, BacksteppedHybrid, QpEllipsoid, QpSmoothmax, HybridCbfOnly };

std::string to_string(DynamicsKind kind);
std::string to_string(ControllerKind kind);

/// Seeded random batch of initial states: directions drawn from a seeded
/// generator around the polytope centroid, radii uniform in
/// [radius_min, radius_max], rejected unless safely inside the safe set.
struct GridSpec {
    int count = 20;
    std::uint64_t seed = 0;
    double radius_min = 2.0;
    double radius_max = 4.0;
    double margin = 0.05;  // required clearance max_q h_q >= margin
};

/// Controller gains and switching parameters; every field has the documented
/// default so scenario files may omit it.
struct ControllerParams {
    double gamma_bar = 1.0;
    double alpha_bar = 1.0;
    double relaxation_weight = 100.0;  // p for the relaxed baselines
    double mu = 0.2;
    double sigma = 0.1;
    double smoothmax_kappa = 10.0;
    double bump_eps = 0.1;
    double bump_kappa = 1.0;
    double backstep_beta_v = 1.0;
    double backstep_beta_h = 1.0;
    double centroid_sigma = 1.0;
    std::optional<Eigen::VectorXd> epsilon_tiebreak;
    std::optional<int> initial_halfspace;
};

struct SimParams {
    double dt = 1e-3;
    double t_max = 100.0;
    double conv_tol = 1e-2;
    double stall_tol = 1e-4;
    std::optional<double> safety_tol;  // default 1e-6 (1 + max|d_q|)
    int decimation = 10;
    bool zoh = false;
};

/// One reproducible experiment: geometry, dynamics, controller, gains, and
/// simulation settings, with optional per-state verdict expectations.
struct ScenarioConfig {
    int schema_version = 1;
    std::string name;
    bool reconstruction = false;

    DynamicsKind dynamics = DynamicsKind::SingleIntegrator;
    std::optional<Eigen::MatrixXd> A;  // custom_affine: xdot = A x + B u
    std::optional<Eigen::MatrixXd> B;

    std::vector<Eigen::Vector2d> polytope_vertices;  // 2-D vertex-loop form
    std::vector<HalfSpace> polytope_halfspaces;      // n-D half-space form

    Eigen::VectorXd target;
    std::vector<Eigen::VectorXd> initial_states;
    std::optional<GridSpec> grid;

    ControllerKind controller = ControllerKind::Hybrid;
    ControllerParams params;
    SimParams sim;

    /// Expected verdict names ("Converged", ...): empty, one entry applying
    /// to every initial state, or one entry per initial state.
    std::vector<std::string> expectations;

    Polytope build_polytope() const;
    /// Dimension of the top-level substate the polytope lives in.
    int top_dim() const;
    double resolved_safety_tol(const Polytope& p) const;
};

/// Parses and validates a scenario file. Unknown keys are schema errors;
/// every omitted field is materialized with its documented default.
ScenarioConfig load_scenario(const std::string& path);

/// Same, from a JSON string.
ScenarioConfig parse_scenario(const std::string& json_text);

/// Serializes the materialized config; load(emit(c)) == c.
std::string emit_scenario(const ScenarioConfig& config);

/// Structural validation (throws ConfigError / InvalidScenarioError naming
/// the offending field and constraint).
void validate_scenario(const ScenarioConfig& config);

/// Explicit initial states plus, when a grid is configured, the seeded grid
/// samples (top-level substate coordinates).
std::vector<Eigen::VectorXd> expand_initial_states(const ScenarioConfig& config,
                                                   const Polytope& p);

bool operator==(const ScenarioConfig& lhs, const ScenarioConfig& rhs);

}  // namespace safeclf
