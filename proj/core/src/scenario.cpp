#include "safeclf/scenario.hpp"

#include <Eigen/Dense>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "safeclf/errors.hpp"

namespace safeclf {

using nlohmann::json;

std::string to_string(DynamicsKind kind) {
    switch (kind) {
        case DynamicsKind::SingleIntegrator: return "single_integrator";
        case DynamicsKind::DoubleIntegrator: return "double_integrator";
        case DynamicsKind::CustomAffine: return "custom_affine";
    }
    return "?";
}

std::string to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::Hybrid: return "hybrid";
        case ControllerKind::BacksteppedHybrid: return "backstepped_hybrid";
        case ControllerKind::QpEllipsoid: return "qp_ellipsoid";
        case ControllerKind::QpSmoothmax: return "qp_smoothmax";
        case ControllerKind::HybridCbfOnly: return "hybrid_cbf_only";
    }
    return "?";
}

namespace {

const std::set<std::string> kVerdictNames = {"Converged", "Deadlock", "Unsafe", "TimedOut"};

DynamicsKind dynamics_from_string(const std::string& s) {
    if (s == "single_integrator") return DynamicsKind::SingleIntegrator;
    if (s == "double_integrator") return DynamicsKind::DoubleIntegrator;
    if (s == "custom_affine") return DynamicsKind::CustomAffine;
    throw ConfigError("dynamics.kind: unknown value '" + s +
                      "' (expected single_integrator | double_integrator | custom_affine)");
}

ControllerKind controller_from_string(const std::string& s) {
    if (s == "hybrid") return ControllerKind::Hybrid;
    if (s == "backstepped_hybrid") return ControllerKind::BacksteppedHybrid;
    if (s == "qp_ellipsoid") return ControllerKind::QpEllipsoid;
    if (s == "qp_smoothmax") return ControllerKind::QpSmoothmax;
    if (s == "hybrid_cbf_only") return ControllerKind::HybridCbfOnly;
    throw ConfigError("controller: unknown value '" + s +
                      "' (expected hybrid | backstepped_hybrid | qp_ellipsoid | qp_smoothmax | "
                      "hybrid_cbf_only)");
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

double as_double(const json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field + ": expected a number");
    return j.get<double>();
}

int as_int(const json& j, const std::string& field) {
    if (!j.is_number_integer()) throw ConfigError(field + ": expected an integer");
    return j.get<int>();
}

bool as_bool(const json& j, const std::string& field) {
    if (!j.is_boolean()) throw ConfigError(field + ": expected a boolean");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& field) {
    if (!j.is_string()) throw ConfigError(field + ": expected a string");
    return j.get<std::string>();
}

Eigen::VectorXd as_vector(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw ConfigError(field + ": expected a nonempty array");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(i) = as_double(j[i], field);
    return v;
}

Eigen::MatrixXd as_matrix(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw ConfigError(field + ": expected a nonempty 2-D array");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) throw ConfigError(field + ": expected a nonempty 2-D array");
    Eigen::MatrixXd m(j.size(), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            throw ConfigError(field + ": ragged rows");
        }
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = as_double(j[r][c], field);
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json arr = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        arr.push_back(row);
    }
    return arr;
}

}  // namespace

Polytope ScenarioConfig::build_polytope() const {
    if (!polytope_vertices.empty()) {
        return Polytope::from_vertices_2d(polytope_vertices);
    }
    return Polytope::from_halfspaces(polytope_halfspaces);
}

int ScenarioConfig::top_dim() const {
    if (!polytope_vertices.empty()) return 2;
    if (!polytope_halfspaces.empty()) return static_cast<int>(polytope_halfspaces.front().normal.size());
    return 0;
}

double ScenarioConfig::resolved_safety_tol(const Polytope& p) const {
    if (sim.safety_tol) return *sim.safety_tol;
    double max_offset = 0.0;
    for (const auto& hs : p.halfspaces) max_offset = std::max(max_offset, std::abs(hs.offset));
    return 1e-6 * (1.0 + max_offset);
}

ScenarioConfig parse_scenario(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: JSON parse failure: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("scenario: top level must be an object");
    reject_unknown_keys(root,
                        {"schema_version", "name", "reconstruction", "dynamics", "polytope",
                         "target", "initial_states", "grid", "controller", "parameters", "sim",
                         "expectations"},
                        "scenario");

    ScenarioConfig c;
    if (!root.contains("schema_version")) {
        throw ConfigError("schema_version: required (this reader understands schema_version = 1)");
    }
    c.schema_version = as_int(root["schema_version"], "schema_version");
    if (c.schema_version != 1) {
        throw ConfigError("schema_version: must be 1, got " + std::to_string(c.schema_version));
    }
    c.name = root.contains("name") ? as_string(root["name"], "name") : "scenario";
    c.reconstruction =
        root.contains("reconstruction") ? as_bool(root["reconstruction"], "reconstruction") : false;

    if (root.contains("dynamics")) {
        const json& dyn = root["dynamics"];
        if (!dyn.is_object()) throw ConfigError("dynamics: expected an object");
        reject_unknown_keys(dyn, {"kind", "A", "B"}, "dynamics");
        c.dynamics = dynamics_from_string(as_string(dyn.value("kind", json("single_integrator")),
                                                    "dynamics.kind"));
        if (dyn.contains("A")) c.A = as_matrix(dyn["A"], "dynamics.A");
        if (dyn.contains("B")) c.B = as_matrix(dyn["B"], "dynamics.B");
    }

    if (!root.contains("polytope")) throw ConfigError("polytope: required");
    {
        const json& poly = root["polytope"];
        if (!poly.is_object()) throw ConfigError("polytope: expected an object");
        reject_unknown_keys(poly, {"vertices", "halfspaces"}, "polytope");
        if (poly.contains("vertices") == poly.contains("halfspaces")) {
            throw ConfigError("polytope: exactly one of 'vertices' or 'halfspaces' is required");
        }
        if (poly.contains("vertices")) {
            const json& verts = poly["vertices"];
            if (!verts.is_array() || verts.size() < 3) {
                throw ConfigError("polytope.vertices: expected an array of at least 3 points");
            }
            for (std::size_t i = 0; i < verts.size(); ++i) {
                const Eigen::VectorXd v = as_vector(verts[i], "polytope.vertices");
                if (v.size() != 2) {
                    throw ConfigError("polytope.vertices: vertex entries must be 2-D");
                }
                c.polytope_vertices.emplace_back(v(0), v(1));
            }
        } else {
            const json& hss = poly["halfspaces"];
            if (!hss.is_array() || hss.empty()) {
                throw ConfigError("polytope.halfspaces: expected a nonempty array");
            }
            for (const auto& item : hss) {
                if (!item.is_object()) throw ConfigError("polytope.halfspaces: entries are objects");
                reject_unknown_keys(item, {"normal", "offset"}, "polytope.halfspaces[]");
                HalfSpace hs;
                hs.normal = as_vector(item.at("normal"), "polytope.halfspaces[].normal");
                hs.offset = as_double(item.at("offset"), "polytope.halfspaces[].offset");
                c.polytope_halfspaces.push_back(std::move(hs));
            }
        }
    }

    if (!root.contains("target")) throw ConfigError("target: required");
    c.target = as_vector(root["target"], "target");

    if (root.contains("initial_states")) {
        const json& states = root["initial_states"];
        if (!states.is_array()) throw ConfigError("initial_states: expected an array of points");
        for (const auto& item : states) {
            c.initial_states.push_back(as_vector(item, "initial_states[]"));
        }
    }
    if (root.contains("grid")) {
        const json& grid = root["grid"];
        if (!grid.is_object()) throw ConfigError("grid: expected an object");
        reject_unknown_keys(grid, {"count", "seed", "radius_min", "radius_max", "margin"}, "grid");
        GridSpec g;
        if (grid.contains("count")) g.count = as_int(grid["count"], "grid.count");
        if (grid.contains("seed")) {
            if (!grid["seed"].is_number_integer()) throw ConfigError("grid.seed: expected an integer");
            g.seed = grid["seed"].get<std::uint64_t>();
        }
        if (grid.contains("radius_min")) g.radius_min = as_double(grid["radius_min"], "grid.radius_min");
        if (grid.contains("radius_max")) g.radius_max = as_double(grid["radius_max"], "grid.radius_max");
        if (grid.contains("margin")) g.margin = as_double(grid["margin"], "grid.margin");
        c.grid = g;
    }

    if (root.contains("controller")) {
        c.controller = controller_from_string(as_string(root["controller"], "controller"));
    }

    if (root.contains("parameters")) {
        const json& p = root["parameters"];
        if (!p.is_object()) throw ConfigError("parameters: expected an object");
        reject_unknown_keys(p,
                            {"gamma_bar", "alpha_bar", "relaxation_weight", "mu", "sigma",
                             "smoothmax_kappa", "bump_eps", "bump_kappa", "backstep_beta_v",
                             "backstep_beta_h", "centroid_sigma", "epsilon_tiebreak",
                             "initial_halfspace"},
                            "parameters");
        auto& out = c.params;
        if (p.contains("gamma_bar")) out.gamma_bar = as_double(p["gamma_bar"], "parameters.gamma_bar");
        if (p.contains("alpha_bar")) out.alpha_bar = as_double(p["alpha_bar"], "parameters.alpha_bar");
        if (p.contains("relaxation_weight")) {
            out.relaxation_weight = as_double(p["relaxation_weight"], "parameters.relaxation_weight");
        }
        if (p.contains("mu")) out.mu = as_double(p["mu"], "parameters.mu");
        if (p.contains("sigma")) out.sigma = as_double(p["sigma"], "parameters.sigma");
        if (p.contains("smoothmax_kappa")) {
            out.smoothmax_kappa = as_double(p["smoothmax_kappa"], "parameters.smoothmax_kappa");
        }
        if (p.contains("bump_eps")) out.bump_eps = as_double(p["bump_eps"], "parameters.bump_eps");
        if (p.contains("bump_kappa")) out.bump_kappa = as_double(p["bump_kappa"], "parameters.bump_kappa");
        if (p.contains("backstep_beta_v")) {
            out.backstep_beta_v = as_double(p["backstep_beta_v"], "parameters.backstep_beta_v");
        }
        if (p.contains("backstep_beta_h")) {
            out.backstep_beta_h = as_double(p["backstep_beta_h"], "parameters.backstep_beta_h");
        }
        if (p.contains("centroid_sigma")) {
            out.centroid_sigma = as_double(p["centroid_sigma"], "parameters.centroid_sigma");
        }
        if (p.contains("epsilon_tiebreak")) {
            out.epsilon_tiebreak = as_vector(p["epsilon_tiebreak"], "parameters.epsilon_tiebreak");
        }
        if (p.contains("initial_halfspace")) {
            out.initial_halfspace = as_int(p["initial_halfspace"], "parameters.initial_halfspace");
        }
    }

    if (root.contains("sim")) {
        const json& s = root["sim"];
        if (!s.is_object()) throw ConfigError("sim: expected an object");
        reject_unknown_keys(
            s, {"dt", "t_max", "conv_tol", "stall_tol", "safety_tol", "decimation", "zoh"}, "sim");
        auto& out = c.sim;
        if (s.contains("dt")) out.dt = as_double(s["dt"], "sim.dt");
        if (s.contains("t_max")) out.t_max = as_double(s["t_max"], "sim.t_max");
        if (s.contains("conv_tol")) out.conv_tol = as_double(s["conv_tol"], "sim.conv_tol");
        if (s.contains("stall_tol")) out.stall_tol = as_double(s["stall_tol"], "sim.stall_tol");
        if (s.contains("safety_tol")) out.safety_tol = as_double(s["safety_tol"], "sim.safety_tol");
        if (s.contains("decimation")) out.decimation = as_int(s["decimation"], "sim.decimation");
        if (s.contains("zoh")) out.zoh = as_bool(s["zoh"], "sim.zoh");
    }

    if (root.contains("expectations")) {
        const json& e = root["expectations"];
        if (e.is_string()) {
            c.expectations.push_back(e.get<std::string>());
        } else if (e.is_array()) {
            for (const auto& item : e) {
                c.expectations.push_back(as_string(item, "expectations[]"));
            }
        } else {
            throw ConfigError("expectations: expected a verdict name or an array of them");
        }
    }

    validate_scenario(c);
    return c;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("scenario: cannot open file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

std::string emit_scenario(const ScenarioConfig& c) {
    json root;
    root["schema_version"] = c.schema_version;
    root["name"] = c.name;
    root["reconstruction"] = c.reconstruction;

    json dyn;
    dyn["kind"] = to_string(c.dynamics);
    if (c.A) dyn["A"] = matrix_to_json(*c.A);
    if (c.B) dyn["B"] = matrix_to_json(*c.B);
    root["dynamics"] = dyn;

    json poly;
    if (!c.polytope_vertices.empty()) {
        json verts = json::array();
        for (const auto& v : c.polytope_vertices) verts.push_back({v.x(), v.y()});
        poly["vertices"] = verts;
    } else {
        json hss = json::array();
        for (const auto& hs : c.polytope_halfspaces) {
            hss.push_back({{"normal", vector_to_json(hs.normal)}, {"offset", hs.offset}});
        }
        poly["halfspaces"] = hss;
    }
    root["polytope"] = poly;

    root["target"] = vector_to_json(c.target);
    json states = json::array();
    for (const auto& x : c.initial_states) states.push_back(vector_to_json(x));
    root["initial_states"] = states;
    if (c.grid) {
        root["grid"] = {{"count", c.grid->count},
                        {"seed", c.grid->seed},
                        {"radius_min", c.grid->radius_min},
                        {"radius_max", c.grid->radius_max},
                        {"margin", c.grid->margin}};
    }

    root["controller"] = to_string(c.controller);

    json p;
    p["gamma_bar"] = c.params.gamma_bar;
    p["alpha_bar"] = c.params.alpha_bar;
    p["relaxation_weight"] = c.params.relaxation_weight;
    p["mu"] = c.params.mu;
    p["sigma"] = c.params.sigma;
    p["smoothmax_kappa"] = c.params.smoothmax_kappa;
    p["bump_eps"] = c.params.bump_eps;
    p["bump_kappa"] = c.params.bump_kappa;
    p["backstep_beta_v"] = c.params.backstep_beta_v;
    p["backstep_beta_h"] = c.params.backstep_beta_h;
    p["centroid_sigma"] = c.params.centroid_sigma;
    if (c.params.epsilon_tiebreak) p["epsilon_tiebreak"] = vector_to_json(*c.params.epsilon_tiebreak);
    if (c.params.initial_halfspace) p["initial_halfspace"] = *c.params.initial_halfspace;
    root["parameters"] = p;

    json s;
    s["dt"] = c.sim.dt;
    s["t_max"] = c.sim.t_max;
    s["conv_tol"] = c.sim.conv_tol;
    s["stall_tol"] = c.sim.stall_tol;
    if (c.sim.safety_tol) s["safety_tol"] = *c.sim.safety_tol;
    s["decimation"] = c.sim.decimation;
    s["zoh"] = c.sim.zoh;
    root["sim"] = s;

    if (!c.expectations.empty()) {
        json e = json::array();
        for (const auto& name : c.expectations) e.push_back(name);
        root["expectations"] = e;
    }
    return root.dump(2) + "\n";
}

void validate_scenario(const ScenarioConfig& c) {
    const bool hybrid_family = c.controller == ControllerKind::Hybrid ||
                               c.controller == ControllerKind::BacksteppedHybrid ||
                               c.controller == ControllerKind::HybridCbfOnly;

    const Polytope poly = c.build_polytope();  // throws on geometric defects
    const int n0 = c.top_dim();

    if (c.target.size() != n0) {
        throw ConfigError("target: dimension " + std::to_string(c.target.size()) +
                          " does not match the polytope dimension " + std::to_string(n0));
    }
    if (max_halfspace_index(poly, c.target).second < 0.0) {
        throw InvalidScenarioError(
            "target: must lie outside the polytope interior (xbar not in int(P), i.e. "
            "max_q h_q(target) >= 0)");
    }

    if (!(c.params.gamma_bar > 0.0)) throw ConfigError("parameters.gamma_bar: must be positive");
    if (!(c.params.alpha_bar > 0.0)) throw ConfigError("parameters.alpha_bar: must be positive");
    if (!(c.params.relaxation_weight > 0.0)) {
        throw ConfigError("parameters.relaxation_weight: must be positive");
    }
    if (!(c.params.smoothmax_kappa > 0.0)) {
        throw ConfigError("parameters.smoothmax_kappa: must be positive");
    }
    if (!(c.params.bump_eps > 0.0)) throw ConfigError("parameters.bump_eps: must be positive");
    if (!(c.params.bump_kappa > 0.0)) throw ConfigError("parameters.bump_kappa: must be positive");
    if (!(c.params.backstep_beta_v > 0.0)) {
        throw ConfigError("parameters.backstep_beta_v: must be positive");
    }
    if (!(c.params.backstep_beta_h > 0.0)) {
        throw ConfigError("parameters.backstep_beta_h: must be positive");
    }
    if (!(c.params.centroid_sigma > 0.0)) {
        throw ConfigError("parameters.centroid_sigma: must be positive");
    }
    if (hybrid_family) {
        if (!(c.params.mu > 0.0)) throw ConfigError("parameters.mu: must be positive");
        if (!(c.params.sigma > 0.0 && c.params.sigma < c.params.mu)) {
            throw ConfigError("parameters.sigma: sigma must satisfy 0 < sigma < mu");
        }
        if (!(c.params.alpha_bar >= c.params.gamma_bar)) {
            throw ConfigError(
                "parameters.alpha_bar: compatible rates require alpha_bar >= gamma_bar");
        }
    }
    if (c.params.initial_halfspace) {
        const int q = *c.params.initial_halfspace;
        if (q < 0 || q >= poly.face_count()) {
            throw ConfigError("parameters.initial_halfspace: index out of range");
        }
    }
    if (c.params.epsilon_tiebreak) {
        if (c.params.epsilon_tiebreak->size() != n0) {
            throw ConfigError("parameters.epsilon_tiebreak: dimension mismatch with polytope");
        }
        if (c.params.epsilon_tiebreak->norm() <= 1e-12) {
            throw ConfigError("parameters.epsilon_tiebreak: must be a nonzero vector");
        }
    }

    if (!(c.sim.dt > 0.0)) throw ConfigError("sim.dt: must be positive");
    if (!(c.sim.t_max > 0.0)) throw ConfigError("sim.t_max: must be positive");
    if (!(c.sim.conv_tol > 0.0)) throw ConfigError("sim.conv_tol: must be positive");
    if (!(c.sim.stall_tol > 0.0)) throw ConfigError("sim.stall_tol: must be positive");
    if (c.sim.safety_tol && !(*c.sim.safety_tol > 0.0)) {
        throw ConfigError("sim.safety_tol: must be positive");
    }
    if (c.sim.decimation < 1) throw ConfigError("sim.decimation: must be >= 1");

    switch (c.controller) {
        case ControllerKind::BacksteppedHybrid:
            if (c.dynamics != DynamicsKind::DoubleIntegrator) {
                throw ConfigError(
                    "controller: backstepped_hybrid requires dynamics.kind = double_integrator");
            }
            break;
        case ControllerKind::QpEllipsoid:
            if (c.polytope_vertices.empty()) {
                throw ConfigError(
                    "controller: qp_ellipsoid needs a vertex-form polytope for the ellipsoid fit");
            }
            [[fallthrough]];
        default:
            if (c.dynamics == DynamicsKind::DoubleIntegrator) {
                throw ConfigError(
                    "dynamics.kind: double_integrator requires controller = backstepped_hybrid");
            }
            break;
    }
    if (c.dynamics == DynamicsKind::CustomAffine) {
        if (!c.A || !c.B) throw ConfigError("dynamics: custom_affine requires matrices A and B");
        if (c.A->rows() != c.A->cols() || c.A->rows() != n0 || c.B->rows() != n0) {
            throw ConfigError("dynamics: A must be n x n and B n x m for the polytope dimension n");
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(*c.B);
        qr.setThreshold(1e-10);
        if (qr.rank() < n0) {
            throw ConfigError("dynamics.B: must have full row rank");
        }
    } else if (c.A || c.B) {
        throw ConfigError("dynamics: A/B are only valid with kind = custom_affine");
    }

    const int full_dim = c.dynamics == DynamicsKind::DoubleIntegrator ? 2 * n0 : n0;
    for (std::size_t i = 0; i < c.initial_states.size(); ++i) {
        const auto& x0 = c.initial_states[i];
        if (x0.size() != n0 && x0.size() != full_dim) {
            throw ConfigError("initial_states[" + std::to_string(i) + "]: dimension must be " +
                              std::to_string(n0) + " (top level) or " + std::to_string(full_dim));
        }
        if (max_halfspace_index(poly, x0.head(n0)).second < 0.0) {
            throw InvalidScenarioError("initial_states[" + std::to_string(i) +
                                       "]: must lie in the safe set (max_q h_q(x0) >= 0)");
        }
    }
    if (c.grid) {
        if (c.grid->count < 1) throw ConfigError("grid.count: must be >= 1");
        if (!(c.grid->radius_min > 0.0) || !(c.grid->radius_max >= c.grid->radius_min)) {
            throw ConfigError("grid: need 0 < radius_min <= radius_max");
        }
        if (!(c.grid->margin >= 0.0)) throw ConfigError("grid.margin: must be nonnegative");
    }

    const std::size_t total_states =
        c.initial_states.size() + (c.grid ? static_cast<std::size_t>(c.grid->count) : 0);
    for (const auto& name : c.expectations) {
        if (!kVerdictNames.count(name)) {
            throw ConfigError("expectations: unknown verdict '" + name + "'");
        }
    }
    if (!c.expectations.empty() && c.expectations.size() != 1 &&
        c.expectations.size() != total_states) {
        throw ConfigError("expectations: need one entry total or one per initial state");
    }
}

std::vector<Eigen::VectorXd> expand_initial_states(const ScenarioConfig& c, const Polytope& p) {
    std::vector<Eigen::VectorXd> states = c.initial_states;
    if (!c.grid) return states;
    const int n0 = c.top_dim();

    // A point well inside P as the sampling center: least-squares solution of
    // the face equations.
    Eigen::MatrixXd normal_gram = Eigen::MatrixXd::Zero(n0, n0);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n0);
    for (const auto& hs : p.halfspaces) {
        normal_gram += hs.normal * hs.normal.transpose();
        rhs += hs.offset * hs.normal;
    }
    const Eigen::VectorXd center = normal_gram.ldlt().solve(rhs);

    std::mt19937_64 rng(c.grid->seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> radius(c.grid->radius_min, c.grid->radius_max);
    int accepted = 0;
    long attempts = 0;
    const long max_attempts = 10000L * c.grid->count;
    while (accepted < c.grid->count) {
        if (++attempts > max_attempts) {
            throw ConfigError("grid: sampling failed to find enough safe initial states");
        }
        Eigen::VectorXd dir(n0);
        for (int i = 0; i < n0; ++i) dir(i) = gauss(rng);
        const double len = dir.norm();
        if (len < 1e-12) continue;
        const Eigen::VectorXd candidate = center + dir / len * radius(rng);
        if (max_halfspace_index(p, candidate).second < c.grid->margin) continue;
        states.push_back(candidate);
        ++accepted;
    }
    return states;
}

bool operator==(const ScenarioConfig& lhs, const ScenarioConfig& rhs) {
    return emit_scenario(lhs) == emit_scenario(rhs);
}

}  // namespace safeclf
