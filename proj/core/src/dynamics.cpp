#include "safeclf/dynamics.hpp"

#include <numeric>

#include "safeclf/errors.hpp"

namespace safeclf {

int StrictFeedbackDynamics::state_dim() const {
    int n = 0;
    for (const auto& level : levels) n += level.dim;
    return n;
}

int StrictFeedbackDynamics::eta_dim(int level) const {
    int n = 0;
    for (int i = 0; i <= level; ++i) n += levels[i].dim;
    return n;
}

Eigen::VectorXd StrictFeedbackDynamics::eta(const Eigen::VectorXd& x, int level) const {
    return x.head(eta_dim(level));
}

Eigen::VectorXd StrictFeedbackDynamics::substate(const Eigen::VectorXd& x, int level) const {
    const int start = level == 0 ? 0 : eta_dim(level - 1);
    return x.segment(start, levels[level].dim);
}

AffineDynamics StrictFeedbackDynamics::flatten() const {
    if (levels.empty()) {
        throw InvalidScenarioError("StrictFeedbackDynamics: no levels");
    }
    AffineDynamics dyn;
    dyn.state_dim = state_dim();
    dyn.input_dim = input_dim;
    const StrictFeedbackDynamics self = *this;
    dyn.f = [self](const Eigen::VectorXd& x) {
        Eigen::VectorXd out(self.state_dim());
        int offset = 0;
        const int r = self.order();
        for (int i = 0; i <= r; ++i) {
            const Eigen::VectorXd eta_i = self.eta(x, i);
            Eigen::VectorXd zdot = self.levels[i].f(eta_i);
            if (i < r) {
                zdot += self.levels[i].G(eta_i) * self.substate(x, i + 1);
            }
            out.segment(offset, self.levels[i].dim) = zdot;
            offset += self.levels[i].dim;
        }
        return out;
    };
    dyn.G = [self](const Eigen::VectorXd& x) {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(self.state_dim(), self.input_dim);
        const int r = self.order();
        out.bottomRows(self.levels[r].dim) = self.levels[r].G(self.eta(x, r));
        return out;
    };
    return dyn;
}

AffineDynamics single_integrator(int n) {
    AffineDynamics dyn;
    dyn.state_dim = n;
    dyn.input_dim = n;
    dyn.f = [n](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(n).eval(); };
    dyn.G = [n](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(n, n).eval(); };
    return dyn;
}

StrictFeedbackDynamics double_integrator(int n0) {
    StrictFeedbackDynamics sfd;
    sfd.input_dim = n0;
    StrictFeedbackLevel top;
    top.dim = n0;
    top.f = [n0](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(n0).eval(); };
    top.G = [n0](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(n0, n0).eval(); };
    sfd.levels.push_back(top);
    sfd.levels.push_back(top);  // zdot_1 = u has the same shape
    return sfd;
}

AffineDynamics linear_dynamics(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.rows() != A.cols() || A.rows() != B.rows()) {
        throw DimensionError("linear_dynamics: A must be square and match B's rows");
    }
    AffineDynamics dyn;
    dyn.state_dim = static_cast<int>(A.rows());
    dyn.input_dim = static_cast<int>(B.cols());
    dyn.f = [A](const Eigen::VectorXd& x) { return (A * x).eval(); };
    dyn.G = [B](const Eigen::VectorXd&) { return B; };
    return dyn;
}

}  // namespace safeclf
