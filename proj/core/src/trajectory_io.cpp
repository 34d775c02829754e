#include "safeclf/trajectory_io.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "safeclf/errors.hpp"

namespace safeclf {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string verdict_class(Verdict v) {
    switch (v) {
        case Verdict::Converged: return "converged";
        case Verdict::Deadlock: return "deadlock";
        case Verdict::Unsafe: return "unsafe";
        case Verdict::TimedOut: return "timedout";
    }
    return "unknown";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file '" + path + "'");
    out << content;
}

}  // namespace

std::string trajectory_csv(const HybridTrajectory& traj) {
    if (traj.sample_count() == 0) {
        throw InsufficientDataError("trajectory_csv: empty trajectory");
    }
    const int n = static_cast<int>(traj.states.front().size());
    const int m = static_cast<int>(traj.inputs.front().size());
    const int n0 = traj.top_dim;

    std::ostringstream out;
    out << "t";
    for (int i = 0; i < n; ++i) out << ",x_" << i;
    for (int i = 0; i < m; ++i) out << ",u_" << i;
    out << ",q";
    for (int i = 0; i < n0; ++i) out << ",xhat_" << i;
    out << ",jump_flag\n";

    for (std::size_t k = 0; k < traj.sample_count(); ++k) {
        out << fmt17(traj.times[k]);
        for (int i = 0; i < n; ++i) out << ',' << fmt17(traj.states[k](i));
        for (int i = 0; i < m; ++i) out << ',' << fmt17(traj.inputs[k](i));
        out << ',' << traj.aux_history[k].active_index;
        for (int i = 0; i < n0; ++i) out << ',' << fmt17(traj.aux_history[k].setpoint(i));
        out << ',' << static_cast<int>(traj.jump_flags[k]) << '\n';
    }
    return out.str();
}

void write_trajectory_csv(const std::string& path, const HybridTrajectory& traj) {
    write_file(path, trajectory_csv(traj));
}

std::string render_svg(const std::vector<HybridTrajectory>& trajectories, const Polytope& poly,
                       const std::optional<Ellipsoid>& ellipse, const Eigen::VectorXd& target) {
    if (poly.dim() != 2 || target.size() != 2) {
        throw UnsupportedDimensionError("render_svg: only 2-D scenarios can be plotted");
    }
    for (const auto& traj : trajectories) {
        if (traj.top_dim != 2) {
            throw UnsupportedDimensionError("render_svg: only 2-D trajectories can be plotted");
        }
    }

    double min_x = target(0), max_x = target(0);
    double min_y = target(1), max_y = target(1);
    auto grow = [&](double x, double y) {
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
    };
    for (const auto& v : poly.vertices) grow(v(0), v(1));
    for (const auto& traj : trajectories) {
        for (const auto& x : traj.states) grow(x(0), x(1));
    }
    const double pad = 0.08 * std::max(max_x - min_x, max_y - min_y) + 0.2;
    min_x -= pad;
    max_x += pad;
    min_y -= pad;
    max_y += pad;
    const double width = max_x - min_x;
    const double height = max_y - min_y;
    const double stroke = 0.006 * std::max(width, height);

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\""
        << static_cast<int>(720.0 * height / width) << "\" viewBox=\"" << min_x << " " << -max_y
        << " " << width << " " << height << "\">\n";
    out << "<style>\n"
        << ".polytope { fill: #d9d9d9; stroke: #555555; stroke-width: " << stroke << "; }\n"
        << ".fit { fill: none; stroke: #555555; stroke-width: " << stroke
        << "; stroke-dasharray: " << 4 * stroke << " " << 3 * stroke << "; }\n"
        << ".traj { fill: none; stroke-width: " << 1.5 * stroke << "; }\n"
        << ".converged { stroke: #1f77b4; }\n"
        << ".deadlock { stroke: #ff7f0e; }\n"
        << ".unsafe { stroke: #d62728; }\n"
        << ".timedout { stroke: #9467bd; }\n"
        << ".marker { stroke: #000000; stroke-width: " << 1.5 * stroke << "; fill: #000000; }\n"
        << "</style>\n";
    // Flip the y axis once so the math coordinates read normally.
    out << "<g transform=\"scale(1,-1)\">\n";

    if (!poly.vertices.empty()) {
        out << "<polygon class=\"polytope\" points=\"";
        for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
            if (i) out << ' ';
            out << poly.vertices[i](0) << ',' << poly.vertices[i](1);
        }
        out << "\"/>\n";
    }

    if (ellipse) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(
            Eigen::Matrix2d(ellipse->shape));
        const Eigen::Vector2d axes =
            (ellipse->radius / es.eigenvalues().array().sqrt()).matrix();
        const Eigen::Matrix2d vecs = es.eigenvectors();
        const double angle_deg = std::atan2(vecs(1, 0), vecs(0, 0)) * 180.0 / M_PI;
        out << "<ellipse class=\"fit\" rx=\"" << axes(0) << "\" ry=\"" << axes(1)
            << "\" transform=\"translate(" << ellipse->center(0) << "," << ellipse->center(1)
            << ") rotate(" << angle_deg << ")\"/>\n";
    }

    for (const auto& traj : trajectories) {
        out << "<polyline class=\"traj " << verdict_class(traj.verdict) << "\" points=\"";
        for (std::size_t k = 0; k < traj.sample_count(); ++k) {
            if (k) out << ' ';
            out << traj.states[k](0) << ',' << traj.states[k](1);
        }
        out << "\"/>\n";
        if (traj.sample_count() > 0) {
            out << "<circle class=\"marker\" cx=\"" << traj.states.front()(0) << "\" cy=\""
                << traj.states.front()(1) << "\" r=\"" << 2.5 * stroke << "\"/>\n";
        }
    }

    const double c = 4.0 * stroke;
    out << "<line class=\"marker\" x1=\"" << target(0) - c << "\" y1=\"" << target(1) - c
        << "\" x2=\"" << target(0) + c << "\" y2=\"" << target(1) + c << "\"/>\n";
    out << "<line class=\"marker\" x1=\"" << target(0) - c << "\" y1=\"" << target(1) + c
        << "\" x2=\"" << target(0) + c << "\" y2=\"" << target(1) - c << "\"/>\n";
    out << "</g>\n</svg>\n";
    return out.str();
}

void write_svg(const std::string& path, const std::vector<HybridTrajectory>& trajectories,
               const Polytope& poly, const std::optional<Ellipsoid>& ellipse,
               const Eigen::VectorXd& target) {
    write_file(path, render_svg(trajectories, poly, ellipse, target));
}

}  // namespace safeclf
