#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace safeclf {

/// Control-affine system xdot = f(x) + G(x) u, with G(x) full row rank.
struct AffineDynamics {
    int state_dim = 0;
    int input_dim = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> G;
};

/// One level of a strict-feedback cascade:
///   zdot_i = f_i(eta_i) + G_i(eta_i) z_{i+1},   eta_i = (z_0, ..., z_i).
struct StrictFeedbackLevel {
    int dim = 0;  // n_i
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f;  // of eta_i
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> G;  // of eta_i, n_i x n_{i+1}
};

struct StrictFeedbackDynamics {
    std::vector<StrictFeedbackLevel> levels;  // i = 0..r
    int input_dim = 0;                        // n_{r+1} = m

    int order() const { return static_cast<int>(levels.size()) - 1; }
    int state_dim() const;
    /// Dimension of eta_i = (z_0, ..., z_i).
    int eta_dim(int level) const;
    /// Views into the stacked state x = (z_0, ..., z_r).
    Eigen::VectorXd eta(const Eigen::VectorXd& x, int level) const;
    Eigen::VectorXd substate(const Eigen::VectorXd& x, int level) const;

    /// The equivalent flat control-affine system over the stacked state.
    AffineDynamics flatten() const;
};

AffineDynamics single_integrator(int n);

/// Double integrator as strict feedback: zdot_0 = z_1, zdot_1 = u.
StrictFeedbackDynamics double_integrator(int n0);

/// Linear system xdot = A x + B u.
AffineDynamics linear_dynamics(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

}  // namespace safeclf
