#include "confgap/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "confgap/expression.hpp"

namespace confgap {

namespace {

double number(const Json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw ConfigError(std::string("missing numeric field '") + key + "'");
    }
    return j.at(key).get<double>();
}

double number_or(const Json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    return number(j, key);
}

int count_or(const Json& j, const char* key, int fallback) {
    const double v = number_or(j, key, fallback);
    if (v != std::floor(v) || v < 3 || v > 1e7) throw ConfigError(std::string("field '") + key + "' must be an integer >= 3");
    return static_cast<int>(v);
}

std::string string_or(const Json& j, const char* key, const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string()) throw ConfigError(std::string("field '") + key + "' must be a string");
    return j.at(key).get<std::string>();
}

Json point_json(Point p) { return Json::array({p.x, p.y}); }

void write_number(double x, std::ostream& out) {
    if (!std::isfinite(x)) {
        out << "null";
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf;
}

void write_value(const Json& j, std::ostream& out, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(2 * depth), ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out << "{}";
                return;
            }
            out << "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out << ",\n";
                first = false;
                out << pad << Json(it.key()).dump() << ": ";
                write_value(it.value(), out, depth + 1);
            }
            out << '\n' << close << '}';
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out << "[]";
                return;
            }
            out << "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out << ",\n";
                out << pad;
                write_value(j[i], out, depth + 1);
            }
            out << '\n' << close << ']';
            return;
        }
        case Json::value_t::number_float: write_number(j.get<double>(), out); return;
        default: out << j.dump(); return;
    }
}

std::string verdict_string(Verdict v) { return to_string(v); }

}  // namespace

Json chart_to_json(const ConformalChart& chart) {
    Json j{{"model", to_string(chart.model())}};
    if (chart.model() == Model::StereographicSphere) j["R"] = chart.radius();
    if (chart.deformed()) j["phi"] = chart.phi_expression();
    return j;
}

ConformalChart chart_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("chart must be a JSON object");
    const std::string model = string_or(j, "model", "");
    if (model.empty()) throw ConfigError("chart needs a 'model'");
    ConformalChart chart;
    try {
        switch (model_from_string(model)) {
            case Model::EuclideanPlane: chart = ConformalChart::euclidean(); break;
            case Model::PoincareDisk: chart = ConformalChart::poincare_disk(); break;
            case Model::StereographicSphere: chart = ConformalChart::stereographic_sphere(number_or(j, "R", 1.0)); break;
        }
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (j.contains("phi")) {
        const std::string phi = string_or(j, "phi", "");
        chart = chart.with_extra(parse_expression(phi), phi);
    }
    return chart;
}

Json domain_to_json(const Domain2D& domain) {
    Json j{{"chart", chart_to_json(domain.chart())}};
    Json verts = Json::array();
    for (const Point& p : domain.vertices()) verts.push_back(point_json(p));
    j["vertices"] = verts;
    if (domain.analytic()) {
        Json a{{"family", domain.analytic()->family}};
        for (const auto& [k, v] : domain.analytic()->params) a[k] = v;
        j["analytic"] = a;
    }
    return j;
}

Domain2D domain_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("domain must be a JSON object");
    const ConformalChart chart = j.contains("chart") ? chart_from_json(j.at("chart")) : ConformalChart::euclidean();
    if (j.contains("analytic")) {
        const Json& a = j.at("analytic");
        const std::string family = string_or(a, "family", "");
        const Point c{number_or(a, "cx", 0.0), number_or(a, "cy", 0.0)};
        if (family == "euclidean_circle") {
            return Domain2D::euclidean_circle(chart, c, number(a, "radius"), count_or(a, "n", 128));
        }
        if (family == "hyperbolic_circle") {
            if (chart.model() != Model::PoincareDisk || chart.deformed()) {
                throw ConfigError("hyperbolic_circle needs the PoincareDisk chart");
            }
            return Domain2D::hyperbolic_circle(c, number(a, "radius"), count_or(a, "n", 128));
        }
        if (family == "horocycle") {
            return Domain2D::horocycle(number_or(a, "omega", 0.0), number(a, "radius"), count_or(a, "n", 128));
        }
        if (family == "ellipse") {
            return Domain2D::ellipse(chart, c, number(a, "a"), number(a, "b"), number_or(a, "angle", 0.0),
                                     count_or(a, "n", 128));
        }
        if (family == "rectangle") {
            const double per_side = number_or(a, "per_side", 2.0);
            if (per_side != std::floor(per_side) || per_side < 1) throw ConfigError("per_side must be a positive integer");
            return Domain2D::rectangle(chart, {number(a, "x0"), number(a, "y0")}, {number(a, "x1"), number(a, "y1")},
                                       static_cast<int>(per_side));
        }
        if (family == "hyperbolic_lens") {
            return hyperbolic_lens(number(a, "D"), number(a, "alpha"), count_or(a, "n", 64));
        }
        throw ConfigError("unknown analytic family '" + family + "'");
    }
    if (!j.contains("vertices") || !j.at("vertices").is_array()) {
        throw ConfigError("domain needs 'vertices' or 'analytic'");
    }
    std::vector<Point> v;
    for (const Json& p : j.at("vertices")) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            throw ConfigError("each vertex must be a pair of numbers");
        }
        v.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return Domain2D(chart, std::move(v));
}

ProblemConfig problem_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("problem must be a JSON object");
    if (!j.contains("domain")) throw ConfigError("problem needs a 'domain'");
    const Domain2D domain = domain_from_json(j.at("domain"));
    Json echo{{"domain", domain_to_json(domain)}};
    const bool weighted = j.contains("V") || j.contains("rho");
    if (weighted && j.contains("rho_tilde")) throw ConfigError("give either rho_tilde or V/rho, not both");
    auto build = [&]() {
        if (weighted) {
            const std::string V = string_or(j, "V", "0");
            const std::string rho = string_or(j, "rho", "1");
            echo["V"] = V;
            echo["rho"] = rho;
            return WeightedProblem{domain.chart(), domain, parse_expression(V), parse_expression(rho)};
        }
        const std::string rho_tilde = string_or(j, "rho_tilde", "1");
        echo["rho_tilde"] = rho_tilde;
        return laplace_beltrami_problem(domain, parse_expression(rho_tilde));
    };
    ProblemConfig out{build(), Json::object()};
    const std::string bc = string_or(j, "bc", "dirichlet");
    if (bc == "dirichlet") {
        out.problem.bc = BoundaryCondition::Dirichlet;
    } else if (bc == "neumann") {
        out.problem.bc = BoundaryCondition::Neumann;
    } else {
        throw ConfigError("bc must be 'dirichlet' or 'neumann'");
    }
    out.echo = echo;
    out.echo["bc"] = bc;
    return out;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw ConfigError("cannot parse '" + path + "': " + e.what());
    }
}

void write_json(const Json& j, std::ostream& out) {
    write_value(j, out, 0);
    out << '\n';
}

std::string dump_json(const Json& j) {
    std::ostringstream s;
    write_json(j, s);
    return s.str();
}

Json to_json(const EigenResult& r) {
    return Json{{"lambda1", r.lambda1},         {"lambda2", r.lambda2},     {"gap", r.gap},
                {"residuals", r.residuals},     {"eigenvalues", r.eigenvalues}, {"h", r.mesh_h},
                {"iterations", r.iterations},   {"shift", r.shift},         {"num_vertices", r.num_vertices},
                {"num_unknowns", r.num_unknowns}};
}

Json to_json(const GapResult& r) {
    return Json{{"lambda1", r.fine.lambda1},
                {"lambda2", r.fine.lambda2},
                {"gap", r.gap},
                {"extrapolated_gap", r.extrapolated_gap},
                {"h", r.h},
                {"residuals", r.fine.residuals},
                {"coarse", to_json(r.coarse)},
                {"fine", to_json(r.fine)}};
}

Json to_json(const ConcavityReport& r) {
    return Json{{"max_hess_eig", r.max_hess_eig},
                {"worst_point", point_json(r.worst_point)},
                {"worst_direction", point_json(r.worst_direction)},
                {"b", r.b_used},
                {"verdict", verdict_string(r.verdict)},
                {"tolerance", r.tolerance},
                {"exclusion_margin", r.exclusion_margin},
                {"retained", r.retained},
                {"dropped", r.dropped}};
}

Json to_json(const SweepResult& r) {
    Json pts = Json::array();
    for (const auto& p : r.points) {
        pts.push_back(Json{{"t", p.t},
                           {"lambda1", p.lambda1},
                           {"lambda2", p.lambda2},
                           {"gap", p.gap},
                           {"concavity", to_json(p.report)}});
    }
    Json j{{"points", pts}};
    j["first_violation"] = r.first_violation ? Json(*r.first_violation) : Json(nullptr);
    return j;
}

Json to_json(const PipelineReport& r) {
    Json stages = Json::array();
    for (const auto& s : r.stages) {
        Json values = Json::object();
        for (const auto& [k, v] : s.values) values[k] = v;
        stages.push_back(Json{{"name", s.name}, {"passed", s.passed}, {"message", s.message}, {"values", values}});
    }
    Json j{{"stages", stages},  {"passed", r.passed}, {"failed_stage", r.failed_stage},
           {"diameter", r.diameter}, {"bound", r.bound}};
    j["gap"] = r.gap ? to_json(*r.gap) : Json(nullptr);
    j["concavity"] = r.concavity ? to_json(*r.concavity) : Json(nullptr);
    return j;
}

Json to_json(const TorsionSolution& s) {
    return Json{{"max_u", s.max_value()},
                {"residual", s.residual},
                {"circumcenter", point_json(s.circumcenter)},
                {"circumradius", s.circumradius},
                {"sphere_convex", s.sphere_convex},
                {"num_vertices", s.mesh.num_vertices()},
                {"h_max", s.mesh.h_max},
                {"chart", chart_to_json(s.chart)}};
}

Json to_json(const LevelSetConnectivity& c) {
    return Json{{"levels", c.levels}, {"components", c.components}, {"holds", c.holds}};
}

Json to_json(const LevelCurvature& c) {
    return Json{{"min_flat", c.min_flat},   {"min_sphere", c.min_sphere}, {"worst_point", point_json(c.worst_point)},
                {"tolerance", c.tolerance}, {"samples", c.samples},       {"holds", c.holds}};
}

Json to_json(const MaximumPrincipleCheck& c) {
    return Json{{"holds", c.holds},
                {"min_interior", c.min_interior},
                {"worst_excess", c.worst_excess},
                {"tolerance", c.tolerance}};
}

Json to_json(const SolverOptions& o) {
    Json j{{"eigenvalue_tolerance", o.eigenvalue_tolerance},
           {"residual_tolerance", o.residual_tolerance},
           {"max_iterations", o.max_iterations}};
    j["shift"] = o.shift ? Json(*o.shift) : Json(nullptr);
    return j;
}

Json to_json(const MeshOptions& o) {
    return Json{{"min_angle_degrees", o.min_angle_degrees},
                {"max_edge_factor", o.max_edge_factor},
                {"boundary_clearance", o.boundary_clearance},
                {"max_vertices", o.max_vertices}};
}

}  // namespace confgap
