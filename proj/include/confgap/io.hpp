#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "confgap/assembly.hpp"
#include "confgap/errors.hpp"
#include "confgap/horoconvex.hpp"
#include "confgap/torsion.hpp"

namespace confgap {

using Json = nlohmann::json;

/// Malformed or incomplete configuration input.
class ConfigError : public Error {
public:
    using Error::Error;
};

inline constexpr int kSchemaVersion = 1;

/// {"model": "EuclideanPlane" | "PoincareDisk" | "StereographicSphere", "R": number?, "phi": expression?}
Json chart_to_json(const ConformalChart& chart);
ConformalChart chart_from_json(const Json& j);

/// {"chart": chart, "vertices": [[x, y], ...]} or {"chart": chart, "analytic": {"family": name, params...}}.
/// Families: euclidean_circle (cx, cy, radius, n), hyperbolic_circle (cx, cy, radius, n),
/// horocycle (omega, radius, n), ellipse (cx, cy, a, b, angle, n),
/// rectangle (x0, y0, x1, y1, per_side), hyperbolic_lens (D, alpha, n).
/// When "analytic" is present the boundary is rebuilt from the family.
Json domain_to_json(const Domain2D& domain);
Domain2D domain_from_json(const Json& j);

/// {"domain": domain} plus either "rho_tilde" (expression, default "1"), giving
/// the Laplace-Beltrami problem of the domain's chart, or "V" and "rho"
/// (flat-chart expressions). "bc": "dirichlet" (default) or "neumann".
struct ProblemConfig {
    WeightedProblem problem;
    Json echo;  // normalized configuration
};
ProblemConfig problem_from_json(const Json& j);

/// Reads and parses a JSON file; ConfigError on I/O or syntax failure.
Json read_json_file(const std::string& path);

/// Pretty printer with keys in sorted order and every number written with
/// 17 significant digits; non-finite numbers become null.
void write_json(const Json& j, std::ostream& out);
std::string dump_json(const Json& j);

Json to_json(const EigenResult& r);
Json to_json(const GapResult& r);
Json to_json(const ConcavityReport& r);
Json to_json(const SweepResult& r);
Json to_json(const PipelineReport& r);
Json to_json(const TorsionSolution& s);
Json to_json(const LevelSetConnectivity& c);
Json to_json(const LevelCurvature& c);
Json to_json(const MaximumPrincipleCheck& c);
Json to_json(const SolverOptions& o);
Json to_json(const MeshOptions& o);

}  // namespace confgap
