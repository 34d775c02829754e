#include "safeclf/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "safeclf/errors.hpp"

namespace safeclf {

LyapunovFunction QuadraticCLF::handle() const {
    const QuadraticCLF self = *this;
    return {[self](const Eigen::VectorXd& x) { return self.value(x); },
            [self](const Eigen::VectorXd& x) { return self.gradient(x); }};
}

double bump(double s, const BumpParams& bp) {
    if (s < 0.0) {
        throw InvalidScenarioError("bump: argument must be nonnegative");
    }
    if (s >= bp.eps) return 0.0;
    return bp.kappa * std::exp(-1.0 / (bp.eps * bp.eps - s * s));
}

namespace {

// Intermediate quantities of the QP at one state. Constraints read
//   LGV u <= -FV + delta   (CLF),   LGh u >= -Fh   (CBF).
struct QpTerms {
    double FV = 0.0;
    double Fh = 0.0;
    Eigen::VectorXd LGV;
    Eigen::VectorXd LGh;
    double nv2 = 0.0;
    double nh2 = 0.0;
    double L = 0.0;
    double pinv = 0.0;
};

QpTerms evaluate_terms(const QpControllerSpec& spec, const AffineDynamics& dynamics,
                       const Eigen::VectorXd& x) {
    const double V = spec.clf.value(x);
    const Eigen::VectorXd gV = spec.clf.gradient(x);
    const double h = spec.cbf.value(x);
    const Eigen::VectorXd gh = spec.cbf.gradient(x);
    const Eigen::VectorXd f = dynamics.f(x);
    const Eigen::MatrixXd G = dynamics.G(x);

    QpTerms t;
    t.LGV = G.transpose() * gV;
    t.LGh = G.transpose() * gh;
    t.FV = gV.dot(f) + spec.rates.gamma(V);
    if (spec.bump) t.FV -= bump(V, *spec.bump);
    t.Fh = gh.dot(f) + spec.rates.alpha(h);
    t.nv2 = t.LGV.squaredNorm();
    t.nh2 = t.LGh.squaredNorm();
    t.L = t.LGV.dot(t.LGh);
    t.pinv = std::isinf(spec.relaxation_weight) ? 0.0 : 1.0 / spec.relaxation_weight;
    return t;
}

// Hard-constraint case with parallel Lie-derivative rows: both constraints
// bound the same scalar LGh u, so the QP reduces to an interval. The CBF
// bound is the hard one when rounding makes the interval empty.
Eigen::VectorXd solve_collinear(const QpTerms& t, const Eigen::VectorXd& x) {
    const double lb = -t.Fh;
    double ub = std::numeric_limits<double>::infinity();
    double lb_clf = -std::numeric_limits<double>::infinity();
    if (t.L > 0.0) {
        ub = -t.FV * t.nh2 / t.L;
    } else {
        lb_clf = -t.FV * t.nh2 / t.L;
    }
    const double lo = std::max(lb, lb_clf);
    if (lo > ub + 1e-9 * (1.0 + std::abs(lo) + std::abs(ub))) {
        std::ostringstream msg;
        msg << "qp_closed_form: inconsistent parallel constraints at a critical state "
            << "(interval [" << lo << ", " << ub << "])";
        throw InfeasibleQpError(msg.str(), x);
    }
    // Nearest point of the interval to zero; safety bound wins on a
    // razor-thin rounding mismatch.
    const double y = (lo > ub) ? lo : std::clamp(0.0, lo, ub);
    return (y / t.nh2) * t.LGh;
}

Eigen::VectorXd select_case(const QpTerms& t, const Eigen::VectorXd& x, double tol) {
    // Fixed evaluation order resolves the measure-zero boundary overlaps of
    // the four subdomains: both-slack, CLF-active, CBF-active, both-active.
    if (t.FV < tol && t.Fh > -tol) {
        return Eigen::VectorXd::Zero(t.LGV.size());
    }
    const double s1 = (t.pinv + t.nv2) * t.Fh - t.L * t.FV;
    if (t.FV >= -tol && s1 > -tol) {
        return -(t.FV / (t.pinv + t.nv2)) * t.LGV;
    }
    const double s2 = t.nh2 * t.FV - t.L * t.Fh;
    if (t.Fh <= tol && s2 < tol) {
        return -(t.Fh / t.nh2) * t.LGh;
    }
    const double delta = t.L * t.L - (t.pinv + t.nv2) * t.nh2;
    if (delta != 0.0) {
        const double lambda1 = (t.L * t.Fh - t.nh2 * t.FV) / delta;
        const double lambda2 = ((t.pinv + t.nv2) * t.Fh - t.L * t.FV) / delta;
        if (lambda1 >= -tol && lambda2 >= -tol) {
            return -lambda1 * t.LGV + lambda2 * t.LGh;
        }
    }
    throw InfeasibleQpError("qp_closed_form: no KKT case matched", x);
}

}  // namespace

Eigen::VectorXd qp_closed_form(const QpControllerSpec& spec, const AffineDynamics& dynamics,
                               const Eigen::VectorXd& x) {
    if (!(spec.relaxation_weight > 0.0)) {
        throw InvalidScenarioError("qp_closed_form: relaxation weight p must be positive");
    }
    const QpTerms t = evaluate_terms(spec, dynamics, x);
    const double row_tol = 1e-13;

    if (t.nh2 <= row_tol) {
        // CBF row vanished: the safety constraint no longer involves u.
        if (t.Fh < -1e-9) {
            throw InfeasibleQpError("qp_closed_form: CBF row is zero with Fh < 0", x);
        }
        if (t.nv2 <= row_tol) {
            if (t.pinv == 0.0 && t.FV > 1e-9) {
                throw InfeasibleQpError("qp_closed_form: CLF row is zero with FV > 0", x);
            }
            return Eigen::VectorXd::Zero(t.LGV.size());
        }
        if (t.FV >= 0.0) return -(t.FV / (t.pinv + t.nv2)) * t.LGV;
        return Eigen::VectorXd::Zero(t.LGV.size());
    }
    if (t.pinv == 0.0) {
        if (t.nv2 <= row_tol) {
            // Hard CLF constraint without a usable row: feasible only if the
            // constant part already satisfies it (true at the CLF minimum).
            if (t.FV > 1e-9) {
                throw InfeasibleQpError("qp_closed_form: CLF row is zero with FV > 0", x);
            }
            if (t.Fh <= 0.0) return -(t.Fh / t.nh2) * t.LGh;
            return Eigen::VectorXd::Zero(t.LGV.size());
        }
        const double delta = t.L * t.L - t.nv2 * t.nh2;
        if (std::abs(delta) <= 1e-12 * t.nv2 * t.nh2) {
            return solve_collinear(t, x);
        }
    }
    // Exact case split first; a tolerance pass mops up boundary rounding.
    try {
        return select_case(t, x, 0.0);
    } catch (const InfeasibleQpError&) {
        return select_case(t, x, 1e-12 * (1.0 + std::abs(t.FV) + std::abs(t.Fh)));
    }
}

Eigen::VectorXd compatible_halfspace_controller(const Eigen::VectorXd& target, const HalfSpace& hs,
                                                const LinearClassK& rates, const BumpParams& bump_params,
                                                const AffineDynamics& dynamics,
                                                const Eigen::VectorXd& x) {
    if (!rates.compatible()) {
        throw InvalidScenarioError(
            "compatible_halfspace_controller: rates must satisfy alpha_bar >= gamma_bar");
    }
    if (hs.value(target) < -1e-12) {
        throw InvalidScenarioError(
            "compatible_halfspace_controller: target must satisfy h_q(target) >= 0");
    }
    QpControllerSpec spec;
    spec.clf = QuadraticCLF{target}.handle();
    spec.cbf = barrier_from_halfspace(hs);
    spec.rates = rates;
    spec.relaxation_weight = kInfiniteWeight;
    spec.bump = bump_params;
    return qp_closed_form(spec, dynamics, x);
}

Eigen::VectorXd baseline_qp_ellipsoid(const Eigen::VectorXd& target, const Ellipsoid& e,
                                      const LinearClassK& rates, double relaxation_weight,
                                      const AffineDynamics& dynamics, const Eigen::VectorXd& x) {
    QpControllerSpec spec;
    spec.clf = QuadraticCLF{target}.handle();
    spec.cbf = barrier_from_ellipsoid(e);
    spec.rates = rates;
    spec.relaxation_weight = relaxation_weight;
    return qp_closed_form(spec, dynamics, x);
}

Eigen::VectorXd baseline_qp_smoothmax(const Eigen::VectorXd& target, const Polytope& p,
                                      double kappa, const LinearClassK& rates,
                                      double relaxation_weight, const AffineDynamics& dynamics,
                                      const Eigen::VectorXd& x) {
    QpControllerSpec spec;
    spec.clf = QuadraticCLF{target}.handle();
    spec.cbf = barrier_from_smoothmax(p, kappa);
    spec.rates = rates;
    spec.relaxation_weight = relaxation_weight;
    return qp_closed_form(spec, dynamics, x);
}

BarrierFunction barrier_from_halfspace(const HalfSpace& hs) {
    return {[hs](const Eigen::VectorXd& x) { return hs.value(x); },
            [hs](const Eigen::VectorXd&) { return hs.normal; }};
}

BarrierFunction barrier_from_ellipsoid(const Ellipsoid& e) {
    return {[e](const Eigen::VectorXd& x) { return ellipsoid_cbf(e, x).first; },
            [e](const Eigen::VectorXd& x) { return ellipsoid_cbf(e, x).second; }};
}

BarrierFunction barrier_from_smoothmax(const Polytope& p, double kappa) {
    return {[p, kappa](const Eigen::VectorXd& x) { return smoothmax_cbf(p, kappa, x).first; },
            [p, kappa](const Eigen::VectorXd& x) { return smoothmax_cbf(p, kappa, x).second; }};
}

}  // namespace safeclf
