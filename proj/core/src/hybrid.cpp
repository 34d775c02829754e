#include "safeclf/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "safeclf/errors.hpp"

namespace safeclf {

void SwitchingParams::validate() const {
    if (!(mu > 0.0)) {
        throw InvalidScenarioError("SwitchingParams: mu must be positive");
    }
    if (!(sigma > 0.0 && sigma < mu)) {
        throw InvalidScenarioError("SwitchingParams: sigma must satisfy 0 < sigma < mu");
    }
}

std::pair<Eigen::VectorXd, int> reference_direction(const Polytope& p,
                                                    const Eigen::VectorXd& target) {
    const auto [qbar, value] = max_halfspace_index(p, target);
    if (value < 0.0) {
        throw InvalidScenarioError(
            "reference_direction: target lies in int(P); it must satisfy max_q h_q(target) >= 0");
    }
    return {p.halfspaces[qbar].normal, qbar};
}

SwitchingParams make_switching_params(const Polytope& p, const Eigen::VectorXd& target,
                                      double mu, double sigma, TieBreakRule tiebreak) {
    SwitchingParams params;
    params.mu = mu;
    params.sigma = sigma;
    params.tiebreak = std::move(tiebreak);
    auto [v, qbar] = reference_direction(p, target);
    params.reference_direction = std::move(v);
    params.target_index = qbar;
    params.validate();
    return params;
}

std::vector<int> prediction_set(const Polytope& p, const Eigen::VectorXd& v, int q, int qbar) {
    std::vector<int> pred;
    const double align_q = v.dot(p.halfspaces[q].normal);
    for (int qp = 0; qp < p.face_count(); ++qp) {
        if (v.dot(p.halfspaces[qp].normal) - align_q > 0.0) {
            pred.push_back(qp);
        }
    }
    if (std::find(pred.begin(), pred.end(), qbar) == pred.end()) {
        pred.push_back(qbar);
        std::sort(pred.begin(), pred.end());
    }
    return pred;
}

int next_index(const Polytope& p, const AuxiliaryState& aux, const SwitchingParams& params) {
    const auto pred =
        prediction_set(p, params.reference_direction, aux.active_index, params.target_index);
    int best = pred.front();
    double best_value = p.halfspaces[best].value(aux.setpoint);
    for (std::size_t i = 1; i < pred.size(); ++i) {
        const double value = p.halfspaces[pred[i]].value(aux.setpoint);
        if (value > best_value) {
            best = pred[i];
            best_value = value;
        }
    }
    return best;
}

bool in_jump_set(const Polytope& p, const Eigen::VectorXd& x, const AuxiliaryState& aux,
                 const SwitchingParams& params) {
    const int qhat = next_index(p, aux, params);
    const double h_q = p.halfspaces[aux.active_index].value(x);
    const double h_qhat = p.halfspaces[qhat].value(x);
    return h_qhat - h_q >= params.sigma && h_q >= 0.0;
}

std::pair<double, int> scaling_factor(const Polytope& p, const Eigen::VectorXd& x_tilde,
                                      const Eigen::VectorXd& v_dir, const std::vector<int>& pred,
                                      double mu) {
    if (pred.empty()) {
        throw InfeasibleSwitchError("scaling_factor: empty prediction set");
    }
    double tau = std::numeric_limits<double>::infinity();
    int limiting = -1;
    for (const int qp : pred) {
        const double h = p.halfspaces[qp].value(x_tilde);
        double tau_q;
        if (h >= mu) {
            tau_q = 0.0;
        } else {
            const double rate = p.halfspaces[qp].normal.dot(v_dir);
            if (rate > 0.0) {
                tau_q = (mu - h) / rate;
            } else {
                continue;  // infeasible face
            }
        }
        if (tau_q < tau) {
            tau = tau_q;
            limiting = qp;
        }
    }
    if (limiting < 0) {
        throw InfeasibleSwitchError(
            "scaling_factor: no predicted half-space reachable along the assigned direction");
    }
    return {tau, limiting};
}

namespace {

// Shared two-case setpoint placement used by jumps and initialization.
AuxiliaryState place_setpoint(const Polytope& p, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& target, int new_index,
                              const SwitchingParams& params) {
    AuxiliaryState next;
    next.active_index = new_index;
    const HalfSpace& hs = p.halfspaces[new_index];
    if (hs.value(target) >= 0.0) {
        next.setpoint = target;
        return next;
    }
    Eigen::VectorXd x_tilde;
    try {
        x_tilde = segment_hyperplane_intersection(hs, x, target);
    } catch (const DegenerateGeometryError&) {
        // Segment parallel to the hyperplane (measure zero): the orthogonal
        // projection preserves every invariant the placement needs.
        x_tilde = x - hs.normal * hs.value(x);
    }
    const Eigen::VectorXd v_dir =
        project_direction(params.reference_direction, hs.normal, params.tiebreak);
    const auto pred = prediction_set(p, params.reference_direction, new_index, params.target_index);
    const auto [tau, limiting] = scaling_factor(p, x_tilde, v_dir, pred, params.mu);
    (void)limiting;
    next.setpoint = x_tilde + v_dir * tau;
    return next;
}

}  // namespace

AuxiliaryState jump_update(const Polytope& p, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& target, const AuxiliaryState& aux,
                           const SwitchingParams& params) {
    const int qhat = next_index(p, aux, params);
    return place_setpoint(p, x, target, qhat, params);
}

AuxiliaryState initialize_aux(const Polytope& p, const Eigen::VectorXd& x0,
                              const Eigen::VectorXd& target, const SwitchingParams& params,
                              std::optional<int> index_override) {
    const auto [q_max, value] = max_halfspace_index(p, x0);
    if (value < 0.0) {
        throw InvalidScenarioError(
            "initialize_aux: initial state lies in int(P); it must satisfy max_q h_q(x0) >= 0");
    }
    int q0 = q_max;
    if (index_override) {
        const int q_req = *index_override;
        if (q_req < 0 || q_req >= p.face_count()) {
            throw InvalidScenarioError("initialize_aux: half-space override out of range");
        }
        if (p.halfspaces[q_req].value(x0) < value - 1e-9) {
            throw InvalidScenarioError(
                "initialize_aux: half-space override is not a maximizer at the initial state");
        }
        q0 = q_req;
    }
    return place_setpoint(p, x0, target, q0, params);
}

AuxiliaryState baseline_cbf_only_update(const Polytope& p, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& target, const AuxiliaryState& aux,
                                        const SwitchingParams& params) {
    (void)x;
    AuxiliaryState next;
    next.active_index = next_index(p, aux, params);
    next.setpoint = target;
    return next;
}

}  // namespace safeclf
