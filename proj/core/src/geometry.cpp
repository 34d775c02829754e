#include "safeclf/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "safeclf/errors.hpp"

namespace safeclf {

namespace {

void check_same_dim(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const char* where) {
    if (a.size() != b.size()) {
        throw DimensionError(std::string(where) + ": dimension mismatch (" +
                             std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
}

}  // namespace

double HalfSpace::value(const Eigen::VectorXd& x) const {
    check_same_dim(normal, x, "HalfSpace::value");
    return normal.dot(x) - offset;
}

double halfspace_value(const HalfSpace& hs, const Eigen::VectorXd& x) { return hs.value(x); }

Polytope Polytope::from_vertices_2d(const std::vector<Eigen::Vector2d>& verts) {
    const int n = static_cast<int>(verts.size());
    if (n < 3) {
        throw InvalidScenarioError("Polytope::from_vertices_2d: need at least 3 vertices");
    }
    // Signed area decides orientation; normals come from the CCW loop.
    double area2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto& a = verts[i];
        const auto& b = verts[(i + 1) % n];
        area2 += a.x() * b.y() - b.x() * a.y();
    }
    if (std::abs(area2) < 1e-12) {
        throw InvalidScenarioError("Polytope::from_vertices_2d: degenerate (zero-area) polygon");
    }
    std::vector<Eigen::Vector2d> loop = verts;
    if (area2 < 0.0) std::reverse(loop.begin(), loop.end());

    Polytope p;
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d a = loop[i];
        const Eigen::Vector2d b = loop[(i + 1) % n];
        const Eigen::Vector2d edge = b - a;
        const double len = edge.norm();
        if (len < 1e-12) {
            throw InvalidScenarioError("Polytope::from_vertices_2d: repeated vertex");
        }
        // Outward normal for a CCW loop: edge rotated by -90 degrees.
        Eigen::Vector2d nrm(edge.y() / len, -edge.x() / len);
        HalfSpace hs;
        hs.normal = nrm;
        hs.offset = nrm.dot(a);
        p.halfspaces.push_back(std::move(hs));
        p.vertices.push_back(a);
    }
    p.validate();
    return p;
}

Polytope Polytope::from_halfspaces(std::vector<HalfSpace> hs) {
    Polytope p;
    p.halfspaces = std::move(hs);
    p.validate();
    return p;
}

void Polytope::validate() const {
    if (halfspaces.empty()) {
        throw InvalidScenarioError("Polytope: no half-spaces");
    }
    const int n = static_cast<int>(halfspaces.front().normal.size());
    if (n < 2) {
        throw InvalidScenarioError("Polytope: state dimension must be >= 2");
    }
    const int q_count = face_count();
    if (q_count < n + 1) {
        throw InvalidScenarioError("Polytope: need Q >= n+1 nonredundant half-spaces (Q=" +
                                   std::to_string(q_count) + ", n=" + std::to_string(n) + ")");
    }
    for (const auto& hs : halfspaces) {
        if (hs.normal.size() != n) {
            throw DimensionError("Polytope: inconsistent normal dimensions");
        }
        if (std::abs(hs.normal.norm() - 1.0) > 1e-12) {
            throw InvalidScenarioError("Polytope: half-space normal is not a unit vector");
        }
    }
    for (int i = 0; i < q_count; ++i) {
        for (int j = i + 1; j < q_count; ++j) {
            if ((halfspaces[i].normal - halfspaces[j].normal).norm() <= 1e-9) {
                throw InvalidScenarioError("Polytope: duplicate face normals (faces " +
                                           std::to_string(i) + ", " + std::to_string(j) + ")");
            }
        }
    }
    // Boundedness: exact angular-coverage test in 2-D, necessary condition in
    // higher dimensions (every coordinate direction must be cut).
    if (n == 2) {
        std::vector<double> angles;
        angles.reserve(q_count);
        for (const auto& hs : halfspaces) {
            angles.push_back(std::atan2(hs.normal.y(), hs.normal.x()));
        }
        std::sort(angles.begin(), angles.end());
        double max_gap = angles.front() + 2.0 * M_PI - angles.back();
        for (std::size_t i = 1; i < angles.size(); ++i) {
            max_gap = std::max(max_gap, angles[i] - angles[i - 1]);
        }
        if (max_gap >= M_PI - 1e-12) {
            throw InvalidScenarioError("Polytope: unbounded (normal angles leave a half-plane gap)");
        }
    } else {
        for (int d = 0; d < n; ++d) {
            for (const double sign : {1.0, -1.0}) {
                bool cut = false;
                for (const auto& hs : halfspaces) {
                    if (sign * hs.normal(d) > 1e-12) {
                        cut = true;
                        break;
                    }
                }
                if (!cut) {
                    throw InvalidScenarioError(
                        "Polytope: unbounded along a coordinate direction");
                }
            }
        }
    }
}

void Ellipsoid::validate() const {
    if (shape.rows() != shape.cols() || shape.rows() != center.size()) {
        throw DimensionError("Ellipsoid: shape/center dimension mismatch");
    }
    if ((shape - shape.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw InvalidScenarioError("Ellipsoid: shape matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(shape);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw InvalidScenarioError("Ellipsoid: shape matrix is not positive definite");
    }
    if (!(radius > 0.0)) {
        throw InvalidScenarioError("Ellipsoid: radius must be positive");
    }
}

bool polytope_contains(const Polytope& p, const Eigen::VectorXd& x) {
    for (const auto& hs : p.halfspaces) {
        if (hs.value(x) > 0.0) return false;
    }
    return true;
}

std::pair<int, double> max_halfspace_index(const Polytope& p, const Eigen::VectorXd& x) {
    int best = 0;
    double best_value = p.halfspaces.front().value(x);
    for (int q = 1; q < p.face_count(); ++q) {
        const double v = p.halfspaces[q].value(x);
        if (v > best_value) {
            best = q;
            best_value = v;
        }
    }
    return {best, best_value};
}

std::pair<double, Eigen::VectorXd> ellipsoid_cbf(const Ellipsoid& e, const Eigen::VectorXd& x) {
    check_same_dim(e.center, x, "ellipsoid_cbf");
    const Eigen::VectorXd d = x - e.center;
    const Eigen::VectorXd grad = e.shape * d;
    const double value = 0.5 * d.dot(grad) - 0.5 * e.radius * e.radius;
    return {value, grad};
}

std::pair<double, Eigen::VectorXd> smoothmax_cbf(const Polytope& p, double kappa,
                                                 const Eigen::VectorXd& x) {
    if (!(kappa > 0.0)) {
        throw InvalidScenarioError("smoothmax_cbf: kappa must be positive");
    }
    const int q_count = p.face_count();
    double h_max = -std::numeric_limits<double>::infinity();
    std::vector<double> h(q_count);
    for (int q = 0; q < q_count; ++q) {
        h[q] = p.halfspaces[q].value(x);
        h_max = std::max(h_max, h[q]);
    }
    double w_sum = 0.0;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(x.size());
    for (int q = 0; q < q_count; ++q) {
        const double w = std::exp(kappa * (h[q] - h_max));
        w_sum += w;
        grad += w * p.halfspaces[q].normal;
    }
    const double value = h_max + (std::log(w_sum) - std::log(static_cast<double>(q_count))) / kappa;
    grad /= w_sum;
    return {value, grad};
}

Eigen::VectorXd segment_hyperplane_intersection(const HalfSpace& hs, const Eigen::VectorXd& a,
                                                const Eigen::VectorXd& b) {
    const double ha = hs.value(a);
    const double hb = hs.value(b);
    if (ha == 0.0) return a;
    if (hb == 0.0) return b;
    if (ha == hb) {
        throw DegenerateGeometryError(
            "segment_hyperplane_intersection: segment parallel to hyperplane");
    }
    if (ha * hb > 0.0) {
        throw DegenerateGeometryError(
            "segment_hyperplane_intersection: segment does not cross the hyperplane");
    }
    return a - (b - a) * (ha / (hb - ha));
}

Eigen::VectorXd TieBreakRule::resolve(const Eigen::VectorXd& v) const {
    if (v.size() < 2) {
        throw DimensionError("TieBreakRule: needs dimension >= 2");
    }
    if (override_direction) {
        check_same_dim(*override_direction, v, "TieBreakRule");
        Eigen::VectorXd eps = *override_direction - v * v.dot(*override_direction);
        const double len = eps.norm();
        if (len <= 1e-9) {
            throw InvalidScenarioError("TieBreakRule: override direction is parallel to v");
        }
        return eps / len;
    }
    for (int k = 0; k < v.size(); ++k) {
        Eigen::VectorXd eps = -v * v(k);
        eps(k) += 1.0;
        const double len = eps.norm();
        if (len > 1e-9) return eps / len;
    }
    throw DegenerateGeometryError("TieBreakRule: no basis direction independent of v");
}

Eigen::VectorXd project_direction(const Eigen::VectorXd& v, const Eigen::VectorXd& normal,
                                  const TieBreakRule& rule) {
    check_same_dim(v, normal, "project_direction");
    Eigen::VectorXd w = v - normal * normal.dot(v);
    const double len = w.norm();
    if (len <= 1e-12) {
        return rule.resolve(v);
    }
    return w / len;
}

Ellipsoid min_volume_ellipsoid(const std::vector<Eigen::VectorXd>& vertices, double tol) {
    if (vertices.empty()) {
        throw DegenerateGeometryError("min_volume_ellipsoid: empty vertex set");
    }
    const int n = static_cast<int>(vertices.front().size());
    const int count = static_cast<int>(vertices.size());
    if (count < n + 1) {
        throw DegenerateGeometryError("min_volume_ellipsoid: need at least n+1 vertices");
    }
    Eigen::MatrixXd pts(n, count);
    for (int j = 0; j < count; ++j) {
        if (vertices[j].size() != n) {
            throw DimensionError("min_volume_ellipsoid: inconsistent vertex dimensions");
        }
        pts.col(j) = vertices[j];
    }
    // Full affine dimension is required; rank-check the centered point matrix.
    {
        Eigen::MatrixXd centered = pts.colwise() - pts.rowwise().mean();
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(centered);
        qr.setThreshold(1e-10);
        if (qr.rank() < n) {
            throw DegenerateGeometryError(
                "min_volume_ellipsoid: vertices are affinely dependent");
        }
    }

    // Khachiyan's barycentric ascent on the lifted points q_j = (p_j, 1).
    Eigen::MatrixXd lifted(n + 1, count);
    lifted.topRows(n) = pts;
    lifted.row(n).setOnes();
    Eigen::VectorXd u = Eigen::VectorXd::Constant(count, 1.0 / count);

    const int max_iter = 500000;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        const Eigen::MatrixXd X = lifted * u.asDiagonal() * lifted.transpose();
        const Eigen::MatrixXd Xinv = X.ldlt().solve(Eigen::MatrixXd::Identity(n + 1, n + 1));
        int j_max = 0;
        double m_max = -1.0;
        for (int j = 0; j < count; ++j) {
            const double m = lifted.col(j).dot(Xinv * lifted.col(j));
            if (m > m_max) {
                m_max = m;
                j_max = j;
            }
        }
        if (m_max <= (n + 1) * (1.0 + tol)) break;
        const double step = (m_max - (n + 1)) / ((n + 1) * (m_max - 1.0));
        u *= (1.0 - step);
        u(j_max) += step;
    }
    if (iter == max_iter) {
        throw DegenerateGeometryError("min_volume_ellipsoid: iteration failed to converge");
    }

    Ellipsoid e;
    e.center = pts * u;
    Eigen::MatrixXd second = pts * u.asDiagonal() * pts.transpose() - e.center * e.center.transpose();
    e.shape = second.ldlt().solve(Eigen::MatrixXd::Identity(n, n)) / n;
    e.shape = 0.5 * (e.shape + e.shape.transpose().eval());
    // Inflate the radius so containment holds exactly, not just within the
    // duality gap.
    double max_q = 1.0;
    for (int j = 0; j < count; ++j) {
        const Eigen::VectorXd d = pts.col(j) - e.center;
        max_q = std::max(max_q, d.dot(e.shape * d));
    }
    e.radius = std::sqrt(max_q);
    e.validate();
    return e;
}

}  // namespace safeclf
