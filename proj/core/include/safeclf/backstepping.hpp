#pragma once

#include <Eigen/Core>
#include <vector>

#include "safeclf/controllers.hpp"
#include "safeclf/dynamics.hpp"
#include "safeclf/geometry.hpp"

namespace safeclf {

/// Smooth partition of the unit step: 0 for s <= 0, 1 for s >= 1, and the
/// classic exponential blend in between. Infinitely differentiable.
double smooth_step(double s);

/// Cosine of the angle between the two Lie-derivative rows. Throws
/// UndefinedAlignmentError when either vector is zero.
double gradient_alignment(const Eigen::VectorXd& LgV, const Eigen::VectorXd& Lgh);

/// Centroid of the isotropic Gaussian weight exp(-||u||^2/(2 sigma))
/// restricted to the half-space {u : a'u <= b}, for unit a. Closed form:
/// -a sqrt(sigma) phi(beta)/Phi(beta) with beta = b/sqrt(sigma).
Eigen::VectorXd halfspace_gaussian_centroid(const Eigen::VectorXd& a, double b, double sigma);

/// Centroid of the same Gaussian weight over the intersection of two
/// half-spaces, via bivariate truncated-normal first moments in the span of
/// (a1, a2). Throws EmptyIntersectionError at zero truncated mass.
Eigen::VectorXd intersection_gaussian_centroid(const Eigen::VectorXd& a1, double b1,
                                               const Eigen::VectorXd& a2, double b2,
                                               double sigma);

/// Continuously differentiable feedback with a value and a Jacobian, used as
/// the virtual input k_{i-1} between cascade levels.
struct IntermediateController {
    int output_dim = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
};

/// Per-level backstepping parameters. `rates` are the level-i class-K rates
/// (for linear rates the constructions need gamma_bar_i < gamma_bar_{i-1} and
/// alpha_bar_i >= alpha_bar_{i-1}); `centroid_sigma` is the Gaussian spread
/// of the intermediate controller built between levels i-1 and i.
struct BackstepLevel {
    double beta_v = 1.0;
    double beta_h = 1.0;
    LinearClassK rates;
    double centroid_sigma = 1.0;
};

/// CLF/CBF pair over eta_i plus the quadratic-correction weights that
/// produced it (level 0 carries the base pair with unused weights).
struct BacksteppedPair {
    LyapunovFunction clf;
    BarrierFunction cbf;
    int state_dim = 0;
    double beta_v = 1.0;
    double beta_h = 1.0;
};

/// Smooth blend of Gaussian centroids respecting the psi-relaxed CLF
/// condition and the CBF condition of the given pair under `dynamics`
/// (= (f_bar, G_bar) of the pair's level). The Jacobian is central-difference
/// based with step 1e-6 (1 + ||eta||).
IntermediateController smooth_intermediate_controller(const BacksteppedPair& pair,
                                                      const AffineDynamics& dynamics,
                                                      const LinearClassK& rates,
                                                      const BumpParams& bump,
                                                      double centroid_sigma);

/// Joint CLF-CBF backstep: V_i = V_{i-1} + ||z_i - k_{i-1}||^2/(2 beta_v),
/// h_i = h_{i-1} - ||z_i - k_{i-1}||^2/(2 beta_h). Gradients chain through
/// the controller Jacobian, and L_G h_i = -(beta_v/beta_h) L_G V_i holds by
/// construction.
BacksteppedPair backstep_pair(const BacksteppedPair& prev, const IntermediateController& k_prev,
                              const BackstepLevel& level);

/// Complete backstepped design for one safe-stabilization subproblem
/// (setpoint + active half-space on the top-level substate): builds the
/// cascade of pairs and intermediate controllers and exposes the final
/// min-norm control law.
class BackstepDesign {
public:
    BackstepDesign(const StrictFeedbackDynamics& dynamics, const HalfSpace& active,
                   const Eigen::VectorXd& setpoint, const LinearClassK& base_rates,
                   const BumpParams& bump, std::vector<BackstepLevel> levels);

    int order() const { return static_cast<int>(levels_.size()); }
    const BacksteppedPair& pair(int i) const { return pairs_.at(i); }
    const IntermediateController& intermediate(int i) const { return controllers_.at(i); }

    /// Min-norm input satisfying the level-r CLF and CBF conditions, which
    /// reduce to a single linear inequality through the construction identity.
    Eigen::VectorXd control(const Eigen::VectorXd& x) const;

private:
    StrictFeedbackDynamics dynamics_;
    AffineDynamics flat_;
    LinearClassK base_rates_;
    BumpParams bump_;
    std::vector<BackstepLevel> levels_;
    std::vector<BacksteppedPair> pairs_;            // level 0..r
    std::vector<IntermediateController> controllers_;  // k_0..k_{r-1}
};

/// One-shot form of BackstepDesign::control for a single state.
Eigen::VectorXd backstepped_subproblem_controller(const StrictFeedbackDynamics& dynamics,
                                                  const HalfSpace& active,
                                                  const Eigen::VectorXd& setpoint,
                                                  const LinearClassK& base_rates,
                                                  const BumpParams& bump,
                                                  const std::vector<BackstepLevel>& levels,
                                                  const Eigen::VectorXd& x);

/// Default level ladder: beta_v = beta_h = beta, gamma_bar decays by 0.9 per
/// level, alpha_bar carried over, one entry per backstep.
std::vector<BackstepLevel> default_backstep_levels(int order, const LinearClassK& base_rates,
                                                   double beta_v, double beta_h,
                                                   double centroid_sigma);

}  // namespace safeclf
