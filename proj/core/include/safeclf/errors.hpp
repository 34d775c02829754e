#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace safeclf {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Structural misuse: mismatched vector/matrix dimensions.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Geometry that violates a nondegeneracy precondition (parallel segment and
/// hyperplane, coplanar vertex set, ...).
class DegenerateGeometryError : public Error {
public:
    using Error::Error;
};

/// Scenario data that violates a problem-setup requirement (target inside the
/// polytope, initial state in the unsafe interior, bad rate ordering, ...).
class InvalidScenarioError : public Error {
public:
    using Error::Error;
};

/// Scenario file that does not match the documented schema.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Setpoint placement found no feasible scaling factor. Signals a malformed
/// polytope or tie-break rule; cannot occur for valid scenarios.
class InfeasibleSwitchError : public Error {
public:
    using Error::Error;
};

/// The controller QP had no solution at `state`. Only reachable when the
/// CLF/CBF compatibility conditions were not ensured.
class InfeasibleQpError : public Error {
public:
    InfeasibleQpError(const std::string& what, Eigen::VectorXd state_)
        : Error(what), state(std::move(state_)) {}
    Eigen::VectorXd state;
};

/// Integration produced a non-finite state; carries the last valid sample.
class NumericalBlowupError : public Error {
public:
    NumericalBlowupError(const std::string& what, double t_, Eigen::VectorXd last_state_)
        : Error(what), t(t_), last_state(std::move(last_state_)) {}
    double t;
    Eigen::VectorXd last_state;
};

/// Trajectory too short for the requested analysis window.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Operation only defined for 2-D data (SVG emission).
class UnsupportedDimensionError : public Error {
public:
    using Error::Error;
};

/// Two half-space constraints with (numerically) zero common Gaussian measure.
class EmptyIntersectionError : public Error {
public:
    using Error::Error;
};

/// Gradient-alignment cosine requested for a zero vector.
class UndefinedAlignmentError : public Error {
public:
    using Error::Error;
};

}  // namespace safeclf
