#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <optional>

#include "safeclf/dynamics.hpp"
#include "safeclf/geometry.hpp"

namespace safeclf {

/// Value/gradient handle for a Lyapunov candidate.
struct LyapunovFunction {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

/// Value/gradient handle for a barrier candidate.
struct BarrierFunction {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

/// V(x) = 1/2 ||x - target||^2, positive definite around the target.
struct QuadraticCLF {
    Eigen::VectorXd target;

    double value(const Eigen::VectorXd& x) const { return 0.5 * (x - target).squaredNorm(); }
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const { return x - target; }
    LyapunovFunction handle() const;
};

/// Linear rate pair: gamma(s) = 2*gamma_bar*s for the CLF decrease and
/// alpha(s) = alpha_bar*s for the CBF decay. Compatibility of the hard
/// subproblem QP on a half-space requires alpha_bar >= gamma_bar.
struct LinearClassK {
    double gamma_bar = 1.0;
    double alpha_bar = 1.0;

    double gamma(double s) const { return 2.0 * gamma_bar * s; }
    double alpha(double s) const { return alpha_bar * s; }
    bool compatible() const { return alpha_bar >= gamma_bar; }
};

/// Compactly supported smooth relaxation of the CLF decrease near the target:
/// psi(s) = kappa * exp(-1/(eps^2 - s^2)) on [0, eps), 0 beyond.
struct BumpParams {
    double eps = 0.1;
    double kappa = 1.0;
};

double bump(double s, const BumpParams& bp);

constexpr double kInfiniteWeight = std::numeric_limits<double>::infinity();

/// Full description of one CLF-CBF quadratic program.
/// relaxation_weight is the penalty p on the CLF slack; p = infinity pins the
/// slack to zero (hard CLF constraint). A bump is only meaningful together
/// with the hard-constraint formulation.
struct QpControllerSpec {
    LyapunovFunction clf;
    BarrierFunction cbf;
    LinearClassK rates;
    double relaxation_weight = 100.0;
    std::optional<BumpParams> bump;
};

/// Closed-form minimizer of the CLF-CBF QP, selected among the four KKT
/// active-set cases. Throws InfeasibleQpError at states where the hard
/// constraints are inconsistent (unreachable when compatibility holds).
Eigen::VectorXd qp_closed_form(const QpControllerSpec& spec, const AffineDynamics& dynamics,
                               const Eigen::VectorXd& x);

/// Min-norm subproblem controller for an active half-space: hard CLF
/// constraint relaxed only by the bump near the target, hard CBF constraint
/// on h_q. Requires alpha_bar >= gamma_bar and h_q(target) >= 0.
Eigen::VectorXd compatible_halfspace_controller(const Eigen::VectorXd& target, const HalfSpace& hs,
                                                const LinearClassK& rates, const BumpParams& bump,
                                                const AffineDynamics& dynamics,
                                                const Eigen::VectorXd& x);

/// Relaxed CLF-CBF-QP baseline against the minimum-volume ellipsoidal fit of
/// the obstacle; reproduces boundary deadlocks for symmetric starts.
Eigen::VectorXd baseline_qp_ellipsoid(const Eigen::VectorXd& target, const Ellipsoid& e,
                                      const LinearClassK& rates, double relaxation_weight,
                                      const AffineDynamics& dynamics, const Eigen::VectorXd& x);

/// Relaxed CLF-CBF-QP baseline against the smooth-max polytopic barrier.
Eigen::VectorXd baseline_qp_smoothmax(const Eigen::VectorXd& target, const Polytope& p,
                                      double kappa, const LinearClassK& rates,
                                      double relaxation_weight, const AffineDynamics& dynamics,
                                      const Eigen::VectorXd& x);

BarrierFunction barrier_from_halfspace(const HalfSpace& hs);
BarrierFunction barrier_from_ellipsoid(const Ellipsoid& e);
BarrierFunction barrier_from_smoothmax(const Polytope& p, double kappa);

}  // namespace safeclf
