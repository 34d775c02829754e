#include "safeclf/sim.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>

#include "safeclf/backstepping.hpp"
#include "safeclf/controllers.hpp"
#include "safeclf/errors.hpp"

namespace safeclf {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Converged: return "Converged";
        case Verdict::Deadlock: return "Deadlock";
        case Verdict::Unsafe: return "Unsafe";
        case Verdict::TimedOut: return "TimedOut";
    }
    return "?";
}

std::optional<Verdict> verdict_from_string(const std::string& name) {
    if (name == "Converged") return Verdict::Converged;
    if (name == "Deadlock") return Verdict::Deadlock;
    if (name == "Unsafe") return Verdict::Unsafe;
    if (name == "TimedOut") return Verdict::TimedOut;
    return std::nullopt;
}

Eigen::VectorXd integrate_flow_step(
    const AffineDynamics& dynamics,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& controller,
    const Eigen::VectorXd& x, double dt, bool zoh, double t_for_error) {
    if (!(dt > 0.0)) {
        throw InvalidScenarioError("integrate_flow_step: dt must be positive");
    }
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> input = controller;
    if (zoh) {
        const Eigen::VectorXd frozen = controller(x);
        input = [frozen](const Eigen::VectorXd&) { return frozen; };
    }
    auto rhs = [&](const Eigen::VectorXd& state) -> Eigen::VectorXd {
        return dynamics.f(state) + dynamics.G(state) * input(state);
    };
    const Eigen::VectorXd k1 = rhs(x);
    const Eigen::VectorXd k2 = rhs(x + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = rhs(x + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = rhs(x + dt * k3);
    Eigen::VectorXd next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite()) {
        throw NumericalBlowupError("integrate_flow_step: non-finite state", t_for_error, x);
    }
    return next;
}

bool detect_deadlock(const HybridTrajectory& traj, const Eigen::VectorXd& target,
                     double stall_tol, double conv_tol) {
    const std::size_t n = traj.sample_count();
    if (n < 2) {
        throw InsufficientDataError("detect_deadlock: trajectory shorter than the analysis window");
    }
    const std::size_t window =
        std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(0.05 * n)));
    const std::size_t begin = n - window;
    const int n0 = traj.top_dim;
    double speed_sum = 0.0;
    int segments = 0;
    for (std::size_t i = begin + 1; i < n; ++i) {
        const double dt = traj.times[i] - traj.times[i - 1];
        if (dt <= 0.0) continue;
        speed_sum += (traj.states[i].head(n0) - traj.states[i - 1].head(n0)).norm() / dt;
        ++segments;
    }
    if (segments == 0) {
        throw InsufficientDataError("detect_deadlock: analysis window has no time extent");
    }
    const double mean_speed = speed_sum / segments;
    const double final_error = (traj.states.back().head(n0) - target).norm();
    return mean_speed <= stall_tol && final_error > conv_tol;
}

namespace {

using ControllerFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Everything the integration loop needs, independent of controller family.
struct EngineSetup {
    AffineDynamics dynamics;
    int top_dim = 0;
    Polytope poly;
    Eigen::VectorXd target;  // top-level coordinates
    SimParams sim;
    double safety_tol = 1e-6;

    // Builds the flow controller for the current auxiliary state.
    std::function<ControllerFn(const AuxiliaryState&)> controller_factory;

    // Switching logic; disabled for the static QP baselines.
    bool switching = false;
    SwitchingParams sw;
    AuxiliaryState aux0;
    std::function<AuxiliaryState(const Eigen::VectorXd&, const AuxiliaryState&)> jump_fn;
};

HybridTrajectory run_engine(const EngineSetup& setup, const Eigen::VectorXd& x0) {
    const int n0 = setup.top_dim;
    HybridTrajectory traj;
    traj.top_dim = n0;

    Eigen::VectorXd x = x0;
    double t = 0.0;
    AuxiliaryState aux = setup.aux0;
    ControllerFn u_fn = setup.controller_factory(aux);

    traj.min_clearance = max_halfspace_index(setup.poly, x.head(n0)).second;

    auto record = [&](bool jumped) {
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.inputs.push_back(u_fn(x));
        traj.aux_history.push_back(aux);
        traj.jump_flags.push_back(jumped ? 1 : 0);
    };

    // Drains the cascade of instantaneous jumps at the current time.
    auto drain_jumps = [&]() -> bool {
        if (!setup.switching) return false;
        bool jumped = false;
        int count = 0;
        while (in_jump_set(setup.poly, x.head(n0), aux, setup.sw)) {
            if (count++ >= setup.poly.face_count()) {
                throw InfeasibleSwitchError("run: jump cascade exceeded the face count");
            }
            JumpRecord rec;
            rec.t = t;
            rec.q_before = aux.active_index;
            rec.setpoint_before = aux.setpoint;
            rec.x = x.head(n0);
            aux = setup.jump_fn(x.head(n0), aux);
            rec.q_after = aux.active_index;
            rec.setpoint_after = aux.setpoint;
            traj.jump_log.push_back(std::move(rec));
            jumped = true;
        }
        if (jumped) u_fn = setup.controller_factory(aux);
        return jumped;
    };

    auto finish = [&](Verdict verdict) {
        traj.verdict = verdict;
        traj.final_time = t;
        traj.final_target_error = (x.head(n0) - setup.target).norm();
        return traj;
    };

    // Jumps may fire immediately at t = 0 (the pre-initial update only places
    // the setpoint; the jump set can already hold).
    record(drain_jumps());
    if ((x.head(n0) - setup.target).norm() <= setup.sim.conv_tol) {
        return finish(Verdict::Converged);
    }

    const long max_steps = static_cast<long>(std::ceil(setup.sim.t_max / setup.sim.dt));
    for (long step = 1; step <= max_steps; ++step) {
        x = integrate_flow_step(setup.dynamics, u_fn, x, setup.sim.dt, setup.sim.zoh, t);
        t = step * setup.sim.dt;

        const double clearance = max_halfspace_index(setup.poly, x.head(n0)).second;
        traj.min_clearance = std::min(traj.min_clearance, clearance);

        const bool jumped = drain_jumps();
        const bool converged = (x.head(n0) - setup.target).norm() <= setup.sim.conv_tol;
        const bool unsafe = clearance < -setup.safety_tol;
        const bool last = step == max_steps;
        if (jumped || converged || unsafe || last || step % setup.sim.decimation == 0) {
            record(jumped);
        }
        if (converged) return finish(Verdict::Converged);
        if (unsafe) return finish(Verdict::Unsafe);
    }
    const bool stalled = detect_deadlock(traj, setup.target, setup.sim.stall_tol, setup.sim.conv_tol);
    return finish(stalled ? Verdict::Deadlock : Verdict::TimedOut);
}

AffineDynamics first_order_dynamics(const ScenarioConfig& config, int n0) {
    switch (config.dynamics) {
        case DynamicsKind::SingleIntegrator: return single_integrator(n0);
        case DynamicsKind::CustomAffine: return linear_dynamics(*config.A, *config.B);
        case DynamicsKind::DoubleIntegrator:
            throw InvalidScenarioError("run_hybrid: double_integrator needs run_backstepped");
    }
    throw InvalidScenarioError("run_hybrid: unknown dynamics kind");
}

TieBreakRule tiebreak_from_config(const ScenarioConfig& config) {
    TieBreakRule rule;
    rule.override_direction = config.params.epsilon_tiebreak;
    return rule;
}

}  // namespace

HybridTrajectory run_hybrid(const ScenarioConfig& config, const Eigen::VectorXd& x0) {
    EngineSetup setup;
    setup.poly = config.build_polytope();
    setup.top_dim = config.top_dim();
    setup.target = config.target;
    setup.sim = config.sim;
    setup.safety_tol = config.resolved_safety_tol(setup.poly);
    setup.dynamics = first_order_dynamics(config, setup.top_dim);
    if (x0.size() != setup.top_dim) {
        throw InvalidScenarioError("run_hybrid: initial state dimension mismatch");
    }

    const LinearClassK rates{config.params.gamma_bar, config.params.alpha_bar};
    const BumpParams bump{config.params.bump_eps, config.params.bump_kappa};
    const Polytope& poly = setup.poly;
    const Eigen::VectorXd target = config.target;
    const AffineDynamics dyn = setup.dynamics;

    switch (config.controller) {
        case ControllerKind::Hybrid: {
            setup.switching = true;
            setup.sw = make_switching_params(poly, target, config.params.mu, config.params.sigma,
                                             tiebreak_from_config(config));
            setup.aux0 =
                initialize_aux(poly, x0, target, setup.sw, config.params.initial_halfspace);
            setup.jump_fn = [poly, target, sw = setup.sw](const Eigen::VectorXd& x,
                                                          const AuxiliaryState& aux) {
                return jump_update(poly, x, target, aux, sw);
            };
            setup.controller_factory = [poly, rates, bump, dyn](const AuxiliaryState& aux) {
                const HalfSpace& hs = poly.halfspaces[aux.active_index];
                if (hs.value(aux.setpoint) < -1e-12) {
                    throw InvalidScenarioError(
                        "run_hybrid: setpoint left its active half-space (h_q(xhat) < 0)");
                }
                QpControllerSpec spec;
                spec.clf = QuadraticCLF{aux.setpoint}.handle();
                spec.cbf = barrier_from_halfspace(hs);
                spec.rates = rates;
                spec.relaxation_weight = kInfiniteWeight;
                spec.bump = bump;
                return [spec, dyn](const Eigen::VectorXd& x) {
                    return qp_closed_form(spec, dyn, x);
                };
            };
            break;
        }
        case ControllerKind::HybridCbfOnly: {
            setup.switching = true;
            setup.sw = make_switching_params(poly, target, config.params.mu, config.params.sigma,
                                             tiebreak_from_config(config));
            // The comparison baseline: the setpoint never moves, so the
            // pre-initial update reduces to the argmax half-space.
            setup.aux0.setpoint = target;
            setup.aux0.active_index = config.params.initial_halfspace
                                          ? *config.params.initial_halfspace
                                          : max_halfspace_index(poly, x0).first;
            if (max_halfspace_index(poly, x0).second < 0.0) {
                throw InvalidScenarioError("run_hybrid: initial state lies in int(P)");
            }
            setup.jump_fn = [poly, target, sw = setup.sw](const Eigen::VectorXd& x,
                                                          const AuxiliaryState& aux) {
                return baseline_cbf_only_update(poly, x, target, aux, sw);
            };
            const double p_weight = config.params.relaxation_weight;
            setup.controller_factory = [poly, rates, dyn, target,
                                        p_weight](const AuxiliaryState& aux) {
                QpControllerSpec spec;
                spec.clf = QuadraticCLF{target}.handle();
                spec.cbf = barrier_from_halfspace(poly.halfspaces[aux.active_index]);
                spec.rates = rates;
                spec.relaxation_weight = p_weight;
                return [spec, dyn](const Eigen::VectorXd& x) {
                    return qp_closed_form(spec, dyn, x);
                };
            };
            break;
        }
        case ControllerKind::QpEllipsoid: {
            std::vector<Eigen::VectorXd> verts;
            for (const auto& v : config.polytope_vertices) verts.push_back(v);
            const Ellipsoid fit = min_volume_ellipsoid(verts);
            const double p_weight = config.params.relaxation_weight;
            setup.aux0.setpoint = target;
            setup.aux0.active_index = max_halfspace_index(poly, x0).first;
            setup.controller_factory = [fit, target, rates, dyn, p_weight](const AuxiliaryState&) {
                return [fit, target, rates, dyn, p_weight](const Eigen::VectorXd& x) {
                    return baseline_qp_ellipsoid(target, fit, rates, p_weight, dyn, x);
                };
            };
            break;
        }
        case ControllerKind::QpSmoothmax: {
            const double kappa = config.params.smoothmax_kappa;
            const double p_weight = config.params.relaxation_weight;
            setup.aux0.setpoint = target;
            setup.aux0.active_index = max_halfspace_index(poly, x0).first;
            setup.controller_factory = [poly, kappa, target, rates, dyn,
                                        p_weight](const AuxiliaryState&) {
                return [poly, kappa, target, rates, dyn, p_weight](const Eigen::VectorXd& x) {
                    return baseline_qp_smoothmax(target, poly, kappa, rates, p_weight, dyn, x);
                };
            };
            break;
        }
        case ControllerKind::BacksteppedHybrid:
            throw InvalidScenarioError("run_hybrid: use run_backstepped for backstepped_hybrid");
    }
    return run_engine(setup, x0);
}

HybridTrajectory run_backstepped(const ScenarioConfig& config, const Eigen::VectorXd& x0_in) {
    if (config.controller != ControllerKind::BacksteppedHybrid ||
        config.dynamics != DynamicsKind::DoubleIntegrator) {
        throw InvalidScenarioError(
            "run_backstepped: needs controller backstepped_hybrid on double_integrator dynamics");
    }
    EngineSetup setup;
    setup.poly = config.build_polytope();
    setup.top_dim = config.top_dim();
    setup.target = config.target;
    setup.sim = config.sim;
    setup.safety_tol = config.resolved_safety_tol(setup.poly);

    const int n0 = setup.top_dim;
    const StrictFeedbackDynamics sfd = double_integrator(n0);
    setup.dynamics = sfd.flatten();

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2 * n0);
    if (x0_in.size() == n0) {
        x0.head(n0) = x0_in;  // starts at rest
    } else if (x0_in.size() == 2 * n0) {
        x0 = x0_in;
    } else {
        throw InvalidScenarioError("run_backstepped: initial state dimension mismatch");
    }

    const LinearClassK rates{config.params.gamma_bar, config.params.alpha_bar};
    const BumpParams bump{config.params.bump_eps, config.params.bump_kappa};
    const std::vector<BackstepLevel> levels =
        default_backstep_levels(sfd.order(), rates, config.params.backstep_beta_v,
                                config.params.backstep_beta_h, config.params.centroid_sigma);

    setup.switching = true;
    setup.sw = make_switching_params(setup.poly, setup.target, config.params.mu,
                                     config.params.sigma, tiebreak_from_config(config));
    setup.aux0 = initialize_aux(setup.poly, x0.head(n0), setup.target, setup.sw,
                                config.params.initial_halfspace);
    const Polytope poly = setup.poly;
    const Eigen::VectorXd target = setup.target;
    setup.jump_fn = [poly, target, sw = setup.sw](const Eigen::VectorXd& z0,
                                                  const AuxiliaryState& aux) {
        return jump_update(poly, z0, target, aux, sw);
    };
    setup.controller_factory = [poly, sfd, rates, bump, levels](const AuxiliaryState& aux) {
        auto design = std::make_shared<BackstepDesign>(sfd, poly.halfspaces[aux.active_index],
                                                       aux.setpoint, rates, bump, levels);
        return [design](const Eigen::VectorXd& x) { return design->control(x); };
    };

    // The backstepped safe set requires h_1(eta(0)) >= 0; report the margin
    // instead of silently clipping.
    {
        BackstepDesign initial_design(sfd, poly.halfspaces[setup.aux0.active_index],
                                      setup.aux0.setpoint, rates, bump, levels);
        const double h1 = initial_design.pair(sfd.order()).cbf.value(x0);
        if (h1 < 0.0) {
            throw InvalidScenarioError(
                "run_backstepped: initial state violates the backstepped safe set: h_1(eta(0)) = " +
                std::to_string(h1) + " < 0 (increase backstep_beta_h or start closer)");
        }
    }
    // Full-row-rank spot check of the level G's at the initial state.
    for (int i = 0; i <= sfd.order(); ++i) {
        const Eigen::MatrixXd G = sfd.levels[i].G(sfd.eta(x0, i));
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
        if (svd.singularValues().minCoeff() <= 1e-9) {
            throw InvalidScenarioError("run_backstepped: G_" + std::to_string(i) +
                                       " loses row rank at the initial state");
        }
    }
    return run_engine(setup, x0);
}

HybridTrajectory run_scenario_state(const ScenarioConfig& config, const Eigen::VectorXd& x0) {
    if (config.controller == ControllerKind::BacksteppedHybrid) {
        return run_backstepped(config, x0);
    }
    return run_hybrid(config, x0);
}

}  // namespace safeclf
