#pragma once

#include <Eigen/Core>
#include <optional>
#include <utility>
#include <vector>

#include "safeclf/geometry.hpp"

namespace safeclf {

/// Auxiliary state xi = (xhat, q) of the switching automaton: the active
/// setpoint and the index of the active safe half-space. Valid states keep
/// h_q(xhat) >= 0; away from the final target the setpoint additionally lies
/// on the active boundary hyperplane with clearance mu inside the next one.
struct AuxiliaryState {
    Eigen::VectorXd setpoint;
    int active_index = 0;
};

/// Fixed data of the switching logic: the synergy gap mu, the hysteresis
/// width sigma in (0, mu), the reference direction v = n_qbar pointing inward
/// through the target's half-space, and the tie-break rule for epsilon.
struct SwitchingParams {
    double mu = 0.2;
    double sigma = 0.1;
    Eigen::VectorXd reference_direction;
    int target_index = 0;
    TieBreakRule tiebreak;

    void validate() const;
};

/// v = n_qbar with qbar the (smallest) argmax of h_q at the target. The
/// target must not lie in the polytope interior.
std::pair<Eigen::VectorXd, int> reference_direction(const Polytope& p,
                                                    const Eigen::VectorXd& target);

SwitchingParams make_switching_params(const Polytope& p, const Eigen::VectorXd& target,
                                      double mu, double sigma, TieBreakRule tiebreak = {});

/// Candidate next half-spaces from q: faces strictly more aligned with the
/// reference direction, plus the target's face qbar.
std::vector<int> prediction_set(const Polytope& p, const Eigen::VectorXd& v, int q, int qbar);

/// qhat = argmax over the prediction set of h_q'(xhat), smallest index on ties.
int next_index(const Polytope& p, const AuxiliaryState& aux, const SwitchingParams& params);

/// Jump set membership: h_qhat(x) - h_q(x) >= sigma and h_q(x) >= 0 (both
/// closed; the flow set is the complement).
bool in_jump_set(const Polytope& p, const Eigen::VectorXd& x, const AuxiliaryState& aux,
                 const SwitchingParams& params);

/// Smallest travel tau >= 0 along v_dir from x_tilde that reaches clearance
/// mu inside some predicted half-space; also returns the limiting face.
/// Throws InfeasibleSwitchError when no predicted face is reachable.
std::pair<double, int> scaling_factor(const Polytope& p, const Eigen::VectorXd& x_tilde,
                                      const Eigen::VectorXd& v_dir, const std::vector<int>& pred,
                                      double mu);

/// Switching map s(x, xi): activates qhat and places the new setpoint, either
/// at the final target (when its half-space is safe for the target) or on the
/// new boundary hyperplane shifted by the scaling factor.
AuxiliaryState jump_update(const Polytope& p, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& target, const AuxiliaryState& aux,
                           const SwitchingParams& params);

/// Pre-initial update: picks q0 = argmax h_q(x0) (optionally overridden among
/// ties) and places the initial setpoint by the same two-case rule.
AuxiliaryState initialize_aux(const Polytope& p, const Eigen::VectorXd& x0,
                              const Eigen::VectorXd& target, const SwitchingParams& params,
                              std::optional<int> index_override = std::nullopt);

/// Hybrid-CBF-only switching (reconstruction of the comparison baseline):
/// jumps update only the active half-space; the setpoint stays at the target.
AuxiliaryState baseline_cbf_only_update(const Polytope& p, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& target, const AuxiliaryState& aux,
                                        const SwitchingParams& params);

}  // namespace safeclf
