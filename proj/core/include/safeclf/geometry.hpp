#pragma once

#include <Eigen/Core>
#include <optional>
#include <utility>
#include <vector>

namespace safeclf {

/// One facet of the avoidance polytope: {x : n'x - d <= 0}, with `normal`
/// the unit vector pointing outward from the polytope.
struct HalfSpace {
    Eigen::VectorXd normal;
    double offset = 0.0;

    /// n'x - d. Gradient is the constant `normal`.
    double value(const Eigen::VectorXd& x) const;
};

/// Bounded convex avoidance polytope, intersection of Q >= n+1 nonredundant
/// half-spaces. The safe set is the closure of its complement: states where
/// max_q h_q(x) >= 0. For 2-D polytopes built from vertices, face q is the
/// edge from vertex q to vertex q+1 (counter-clockwise).
struct Polytope {
    std::vector<HalfSpace> halfspaces;
    std::vector<Eigen::VectorXd> vertices;  // optional; kept for plotting/MVE

    int face_count() const { return static_cast<int>(halfspaces.size()); }
    int dim() const { return halfspaces.empty() ? 0 : static_cast<int>(halfspaces.front().normal.size()); }

    /// Outward normals from a CCW-ordered 2-D vertex loop (CW input is
    /// reversed first). Throws InvalidScenarioError on degenerate input.
    static Polytope from_vertices_2d(const std::vector<Eigen::Vector2d>& verts);
    static Polytope from_halfspaces(std::vector<HalfSpace> hs);

    /// Checks unit normals, Q >= n+1, pairwise-distinct normals, and (2-D
    /// exactly, n-D necessary condition only) boundedness.
    void validate() const;
};

/// {x : (x-c)'A(x-c) <= r^2} with A symmetric positive definite.
struct Ellipsoid {
    Eigen::VectorXd center;
    Eigen::MatrixXd shape;
    double radius = 1.0;

    void validate() const;
};

/// Deterministic rule producing the decisiveness direction epsilon used when
/// the reference direction projects to zero (n = +/- v): the canonical rule
/// orthonormalizes the first basis vector not parallel to v; a scenario may
/// override it with a fixed direction instead.
struct TieBreakRule {
    std::optional<Eigen::VectorXd> override_direction;

    /// A unit vector orthogonal to v. Always succeeds for dim >= 2.
    Eigen::VectorXd resolve(const Eigen::VectorXd& v) const;
};

double halfspace_value(const HalfSpace& hs, const Eigen::VectorXd& x);

/// True iff x lies in the polytope (boundary included).
bool polytope_contains(const Polytope& p, const Eigen::VectorXd& x);

/// Smallest index attaining max_q h_q(x), plus that value.
std::pair<int, double> max_halfspace_index(const Polytope& p, const Eigen::VectorXd& x);

/// Quadratic barrier h(x) = 1/2 (x-c)'A(x-c) - 1/2 r^2 and its gradient A(x-c).
std::pair<double, Eigen::VectorXd> ellipsoid_cbf(const Ellipsoid& e, const Eigen::VectorXd& x);

/// Log-sum-exp barrier h(x) = (1/kappa) ln((1/Q) sum_q exp(kappa h_q(x))),
/// computed with a max shift so large kappa stays finite. The gradient is the
/// softmax-weighted combination of the face normals.
std::pair<double, Eigen::VectorXd> smoothmax_cbf(const Polytope& p, double kappa,
                                                 const Eigen::VectorXd& x);

/// Unique point of segment [a, b] on the hyperplane {h = 0}. Requires h(a)
/// and h(b) of opposite sign or an endpoint on the plane; throws
/// DegenerateGeometryError otherwise.
Eigen::VectorXd segment_hyperplane_intersection(const HalfSpace& hs, const Eigen::VectorXd& a,
                                                const Eigen::VectorXd& b);

/// Projects the unit reference vector v onto the hyperplane orthogonal to
/// `normal` and renormalizes; falls back to the tie-break direction when the
/// projection vanishes (normal = +/- v).
Eigen::VectorXd project_direction(const Eigen::VectorXd& v, const Eigen::VectorXd& normal,
                                  const TieBreakRule& rule);

/// Minimum-volume enclosing ellipsoid of a full-dimensional point set
/// (Khachiyan iteration, stopped at duality gap `tol`). The returned radius
/// is inflated so every input vertex satisfies (x-c)'A(x-c) <= r^2 exactly.
Ellipsoid min_volume_ellipsoid(const std::vector<Eigen::VectorXd>& vertices, double tol = 1e-7);

}  // namespace safeclf
