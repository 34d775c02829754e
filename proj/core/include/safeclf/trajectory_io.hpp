#pragma once

#include <optional>
#include <string>
#include <vector>

#include "safeclf/geometry.hpp"
#include "safeclf/sim.hpp"

namespace safeclf {

/// CSV serialization with the stable header
/// t,x_0..x_{n-1},u_0..u_{m-1},q,xhat_0..xhat_{n0-1},jump_flag
/// and 17-significant-digit floats (bit-faithful reruns).
std::string trajectory_csv(const HybridTrajectory& traj);
void write_trajectory_csv(const std::string& path, const HybridTrajectory& traj);

/// Standalone SVG overlay of 2-D runs: polytope outline, optional fitted
/// ellipse (dashed), one polyline per trajectory with a verdict style class,
/// start markers and a cross at the target. Throws
/// UnsupportedDimensionError for non-2-D data.
std::string render_svg(const std::vector<HybridTrajectory>& trajectories, const Polytope& poly,
                       const std::optional<Ellipsoid>& ellipse, const Eigen::VectorXd& target);
void write_svg(const std::string& path, const std::vector<HybridTrajectory>& trajectories,
               const Polytope& poly, const std::optional<Ellipsoid>& ellipse,
               const Eigen::VectorXd& target);

}  // namespace safeclf
