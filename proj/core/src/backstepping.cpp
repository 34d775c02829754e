#include "safeclf/backstepping.hpp"

#include <algorithm>
#include <cmath>

#include "safeclf/errors.hpp"
#include "safeclf/gaussians.hpp"

namespace safeclf {

double smooth_step(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    // 1/(1 + e^{1/s} e^{1/(s-1)}), evaluated through the logistic to avoid
    // overflow near the endpoints.
    const double expo = 1.0 / s + 1.0 / (s - 1.0);
    if (expo >= 0.0) {
        const double t = std::exp(-expo);
        return t / (1.0 + t);
    }
    return 1.0 / (1.0 + std::exp(expo));
}

double gradient_alignment(const Eigen::VectorXd& LgV, const Eigen::VectorXd& Lgh) {
    const double nv = LgV.norm();
    const double nh = Lgh.norm();
    if (nv == 0.0 || nh == 0.0) {
        throw UndefinedAlignmentError("gradient_alignment: zero Lie-derivative row");
    }
    return std::clamp(LgV.dot(Lgh) / (nv * nh), -1.0, 1.0);
}

Eigen::VectorXd halfspace_gaussian_centroid(const Eigen::VectorXd& a, double b, double sigma) {
    if (!(sigma > 0.0)) {
        throw InvalidScenarioError("halfspace_gaussian_centroid: sigma must be positive");
    }
    const double sqrt_sigma = std::sqrt(sigma);
    const double beta = b / sqrt_sigma;
    return -a * (sqrt_sigma * normal_pdf_over_cdf(beta));
}

Eigen::VectorXd intersection_gaussian_centroid(const Eigen::VectorXd& a1, double b1,
                                               const Eigen::VectorXd& a2, double b2,
                                               double sigma) {
    if (!(sigma > 0.0)) {
        throw InvalidScenarioError("intersection_gaussian_centroid: sigma must be positive");
    }
    if (a1.size() != a2.size()) {
        throw DimensionError("intersection_gaussian_centroid: dimension mismatch");
    }
    const double sqrt_sigma = std::sqrt(sigma);
    const double beta1 = b1 / sqrt_sigma;
    const double beta2 = b2 / sqrt_sigma;
    const double r = std::clamp(a1.dot(a2), -1.0, 1.0);

    if (r >= 1.0 - 1e-12) {
        // Same normal direction: the tighter bound subsumes the other.
        return b1 <= b2 ? halfspace_gaussian_centroid(a1, b1, sigma)
                        : halfspace_gaussian_centroid(a2, b2, sigma);
    }
    if (r <= -1.0 + 1e-12) {
        // Opposite normals: a slab -b2 <= a1'u <= b1 along a1.
        if (beta1 < -beta2) {
            throw EmptyIntersectionError(
                "intersection_gaussian_centroid: antiparallel half-spaces with empty slab");
        }
        return a1 * (sqrt_sigma * truncated_interval_mean(-beta2, beta1));
    }

    const double mass = bivariate_normal_cdf(beta1, beta2, r);
    if (mass < 1e-300) {
        throw EmptyIntersectionError(
            "intersection_gaussian_centroid: truncated Gaussian mass below 1e-300");
    }
    if (mass < 1e-250) {
        // Laplace regime: the mass concentrates at the projection of the
        // origin onto the wedge.
        Eigen::Vector2d c;
        if (beta1 * r <= beta2) {
            c = {beta1, 0.0};
        } else if (beta2 * r <= beta1) {
            c = {0.0, beta2};
        } else {
            const double det = 1.0 - r * r;
            c = {(beta1 - r * beta2) / det, (beta2 - r * beta1) / det};
        }
        return sqrt_sigma * (c.x() * a1 + c.y() * a2);
    }

    const Eigen::Vector2d moments = truncated_bivariate_mean(beta1, beta2, r);
    // Solve the Gram system for the span coefficients: a1'u = E1, a2'u = E2.
    const double det = 1.0 - r * r;
    const double c1 = (moments.x() - r * moments.y()) / det;
    const double c2 = (moments.y() - r * moments.x()) / det;
    return sqrt_sigma * (c1 * a1 + c2 * a2);
}

namespace {

// Min-norm point of the half-space {u : a'u <= b}, unit a.
Eigen::VectorXd halfspace_min_norm(const Eigen::VectorXd& a, double b) {
    if (b >= 0.0) return Eigen::VectorXd::Zero(a.size());
    return a * b;
}

struct ConstraintRows {
    Eigen::VectorXd LGV;
    Eigen::VectorXd LGh;
    double bV = 0.0;  // K_CLF: LGV u <= bV
    double bh = 0.0;  // K_CBF: LGh u >= -bh
};

ConstraintRows evaluate_rows(const BacksteppedPair& pair, const AffineDynamics& dynamics,
                             const LinearClassK& rates, const BumpParams& bump_params,
                             const Eigen::VectorXd& eta) {
    const double V = pair.clf.value(eta);
    const Eigen::VectorXd gV = pair.clf.gradient(eta);
    const double h = pair.cbf.value(eta);
    const Eigen::VectorXd gh = pair.cbf.gradient(eta);
    const Eigen::VectorXd f = dynamics.f(eta);
    const Eigen::MatrixXd G = dynamics.G(eta);
    ConstraintRows rows;
    rows.LGV = G.transpose() * gV;
    rows.LGh = G.transpose() * gh;
    rows.bV = -rates.gamma(V) + bump(V, bump_params) - gV.dot(f);
    rows.bh = gh.dot(f) + rates.alpha(h);
    return rows;
}

}  // namespace

IntermediateController smooth_intermediate_controller(const BacksteppedPair& pair,
                                                      const AffineDynamics& dynamics,
                                                      const LinearClassK& rates,
                                                      const BumpParams& bump_params,
                                                      double centroid_sigma) {
    IntermediateController k;
    k.output_dim = dynamics.input_dim;
    const double row_tol = 1e-12;
    auto eval = [pair, dynamics, rates, bump_params, centroid_sigma,
                 row_tol](const Eigen::VectorXd& eta) -> Eigen::VectorXd {
        const ConstraintRows rows = evaluate_rows(pair, dynamics, rates, bump_params, eta);
        const double nv = rows.LGV.norm();
        const double nh = rows.LGh.norm();
        if (nv <= row_tol && nh <= row_tol) {
            if (rows.bV < -1e-9 || rows.bh < -1e-9) {
                throw InfeasibleQpError(
                    "smooth_intermediate_controller: both rows zero with inconsistent constants",
                    eta);
            }
            return Eigen::VectorXd::Zero(dynamics.input_dim);
        }
        // A vanished row leaves a vacuous condition; use the min-norm point of
        // the surviving constraint instead of the blend.
        if (nv <= row_tol) {
            return halfspace_min_norm(-rows.LGh / nh, rows.bh / nh);
        }
        if (nh <= row_tol) {
            return halfspace_min_norm(rows.LGV / nv, rows.bV / nv);
        }
        const Eigen::VectorXd a1 = rows.LGV / nv;
        const double b1 = rows.bV / nv;
        const Eigen::VectorXd a2 = -rows.LGh / nh;
        const double b2 = rows.bh / nh;
        const double rho = gradient_alignment(rows.LGV, rows.LGh);
        const double zeta = smooth_step(rho);
        Eigen::VectorXd out = Eigen::VectorXd::Zero(dynamics.input_dim);
        if (zeta > 0.0) {
            out += zeta * (halfspace_gaussian_centroid(a1, b1, centroid_sigma) +
                           halfspace_gaussian_centroid(a2, b2, centroid_sigma));
        }
        if (zeta < 1.0) {
            out += (1.0 - zeta) *
                   intersection_gaussian_centroid(a1, b1, a2, b2, centroid_sigma);
        }
        return out;
    };
    k.value = eval;
    k.jacobian = [eval, out_dim = k.output_dim](const Eigen::VectorXd& eta) {
        const double step = 1e-6 * (1.0 + eta.norm());
        Eigen::MatrixXd J(out_dim, eta.size());
        Eigen::VectorXd probe = eta;
        for (int j = 0; j < eta.size(); ++j) {
            probe(j) = eta(j) + step;
            const Eigen::VectorXd plus = eval(probe);
            probe(j) = eta(j) - step;
            const Eigen::VectorXd minus = eval(probe);
            probe(j) = eta(j);
            J.col(j) = (plus - minus) / (2.0 * step);
        }
        return J;
    };
    return k;
}

BacksteppedPair backstep_pair(const BacksteppedPair& prev, const IntermediateController& k_prev,
                              const BackstepLevel& level) {
    if (!(level.beta_v > 0.0 && level.beta_h > 0.0)) {
        throw InvalidScenarioError("backstep_pair: beta weights must be positive");
    }
    BacksteppedPair next;
    next.state_dim = prev.state_dim + k_prev.output_dim;
    next.beta_v = level.beta_v;
    next.beta_h = level.beta_h;
    const int head_dim = prev.state_dim;
    const int z_dim = k_prev.output_dim;

    next.clf.value = [prev, k_prev, head_dim, z_dim, bv = level.beta_v](const Eigen::VectorXd& eta) {
        const Eigen::VectorXd head = eta.head(head_dim);
        const Eigen::VectorXd err = eta.tail(z_dim) - k_prev.value(head);
        return prev.clf.value(head) + err.squaredNorm() / (2.0 * bv);
    };
    next.clf.gradient = [prev, k_prev, head_dim, z_dim,
                         bv = level.beta_v](const Eigen::VectorXd& eta) {
        const Eigen::VectorXd head = eta.head(head_dim);
        const Eigen::VectorXd err = eta.tail(z_dim) - k_prev.value(head);
        const Eigen::MatrixXd J = k_prev.jacobian(head);
        Eigen::VectorXd grad(eta.size());
        grad.head(head_dim) = prev.clf.gradient(head) - J.transpose() * err / bv;
        grad.tail(z_dim) = err / bv;
        return grad;
    };
    next.cbf.value = [prev, k_prev, head_dim, z_dim, bh = level.beta_h](const Eigen::VectorXd& eta) {
        const Eigen::VectorXd head = eta.head(head_dim);
        const Eigen::VectorXd err = eta.tail(z_dim) - k_prev.value(head);
        return prev.cbf.value(head) - err.squaredNorm() / (2.0 * bh);
    };
    next.cbf.gradient = [prev, k_prev, head_dim, z_dim,
                         bh = level.beta_h](const Eigen::VectorXd& eta) {
        const Eigen::VectorXd head = eta.head(head_dim);
        const Eigen::VectorXd err = eta.tail(z_dim) - k_prev.value(head);
        const Eigen::MatrixXd J = k_prev.jacobian(head);
        Eigen::VectorXd grad(eta.size());
        grad.head(head_dim) = prev.cbf.gradient(head) + J.transpose() * err / bh;
        grad.tail(z_dim) = -err / bh;
        return grad;
    };
    return next;
}

BackstepDesign::BackstepDesign(const StrictFeedbackDynamics& dynamics, const HalfSpace& active,
                               const Eigen::VectorXd& setpoint, const LinearClassK& base_rates,
                               const BumpParams& bump_params, std::vector<BackstepLevel> levels)
    : dynamics_(dynamics),
      flat_(dynamics.flatten()),
      base_rates_(base_rates),
      bump_(bump_params),
      levels_(std::move(levels)) {
    if (static_cast<int>(levels_.size()) != dynamics_.order()) {
        throw InvalidScenarioError("BackstepDesign: need one BackstepLevel per backstep");
    }
    if (!base_rates_.compatible()) {
        throw InvalidScenarioError("BackstepDesign: base rates must satisfy alpha_bar >= gamma_bar");
    }
    if (active.value(setpoint) < -1e-12) {
        throw InvalidScenarioError("BackstepDesign: setpoint must satisfy h_q(setpoint) >= 0");
    }
    LinearClassK prev_rates = base_rates_;
    for (const auto& level : levels_) {
        if (!(level.rates.gamma_bar < prev_rates.gamma_bar)) {
            throw InvalidScenarioError(
                "BackstepDesign: level rates need gamma_bar_i < gamma_bar_{i-1}");
        }
        if (!(level.rates.alpha_bar >= prev_rates.alpha_bar)) {
            throw InvalidScenarioError(
                "BackstepDesign: level rates need alpha_bar_i >= alpha_bar_{i-1}");
        }
        prev_rates = level.rates;
    }

    BacksteppedPair base;
    base.state_dim = dynamics_.levels.front().dim;
    const QuadraticCLF clf{setpoint};
    base.clf = clf.handle();
    base.cbf = barrier_from_halfspace(active);
    pairs_.push_back(base);

    StrictFeedbackDynamics partial;
    partial.levels.push_back(dynamics_.levels.front());
    for (int i = 1; i <= dynamics_.order(); ++i) {
        partial.input_dim = dynamics_.levels[i].dim;
        const LinearClassK rates_prev = (i == 1) ? base_rates_ : levels_[i - 2].rates;
        controllers_.push_back(smooth_intermediate_controller(
            pairs_[i - 1], partial.flatten(), rates_prev, bump_, levels_[i - 1].centroid_sigma));
        pairs_.push_back(backstep_pair(pairs_[i - 1], controllers_[i - 1], levels_[i - 1]));
        partial.levels.push_back(dynamics_.levels[i]);
    }
}

Eigen::VectorXd BackstepDesign::control(const Eigen::VectorXd& x) const {
    const int r = order();
    const BacksteppedPair& top = pairs_[r];
    const LinearClassK rates = (r == 0) ? base_rates_ : levels_[r - 1].rates;

    const double V = top.clf.value(x);
    const Eigen::VectorXd gV = top.clf.gradient(x);
    const double h = top.cbf.value(x);
    const Eigen::VectorXd gh = top.cbf.gradient(x);
    const Eigen::VectorXd f = flat_.f(x);
    const Eigen::MatrixXd G = flat_.G(x);
    const Eigen::VectorXd LGV = G.transpose() * gV;

    // The CLF and CBF conditions reduce to one inequality via
    // L_G h_r = -(beta_v/beta_h) L_G V_r.
    const double c_clf = -(gV.dot(f) + rates.gamma(V) - bump(V, bump_));
    double c = c_clf;
    if (r > 0) {
        const double ratio = top.beta_h / top.beta_v;
        c = std::min(c, ratio * (gh.dot(f) + rates.alpha(h)));
    } else {
        // Degenerate order-0 design: fall back to the plain compatible QP.
        QpControllerSpec spec;
        spec.clf = top.clf;
        spec.cbf = top.cbf;
        spec.rates = rates;
        spec.relaxation_weight = kInfiniteWeight;
        spec.bump = bump_;
        return qp_closed_form(spec, flat_, x);
    }

    const double nv2 = LGV.squaredNorm();
    if (nv2 <= 1e-13) {
        if (c < -1e-9) {
            throw InfeasibleQpError(
                "BackstepDesign: zero input row with positive required decrease", x);
        }
        return Eigen::VectorXd::Zero(flat_.input_dim);
    }
    if (c >= 0.0) return Eigen::VectorXd::Zero(flat_.input_dim);
    return (c / nv2) * LGV;
}

Eigen::VectorXd backstepped_subproblem_controller(const StrictFeedbackDynamics& dynamics,
                                                  const HalfSpace& active,
                                                  const Eigen::VectorXd& setpoint,
                                                  const LinearClassK& base_rates,
                                                  const BumpParams& bump_params,
                                                  const std::vector<BackstepLevel>& levels,
                                                  const Eigen::VectorXd& x) {
    BackstepDesign design(dynamics, active, setpoint, base_rates, bump_params, levels);
    return design.control(x);
}

std::vector<BackstepLevel> default_backstep_levels(int order, const LinearClassK& base_rates,
                                                   double beta_v, double beta_h,
                                                   double centroid_sigma) {
    std::vector<BackstepLevel> levels;
    LinearClassK rates = base_rates;
    for (int i = 0; i < order; ++i) {
        rates.gamma_bar *= 0.9;
        BackstepLevel level;
        level.beta_v = beta_v;
        level.beta_h = beta_h;
        level.rates = rates;
        level.centroid_sigma = centroid_sigma;
        levels.push_back(level);
    }
    return levels;
}

}  // namespace safeclf
