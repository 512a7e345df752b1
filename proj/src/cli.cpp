#include "confgap/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "confgap/errors.hpp"
#include "confgap/expression.hpp"
#include "confgap/io.hpp"

namespace confgap {

namespace {

ConformalChart resolve_connection(const std::string& spec, const ConformalChart& fallback) {
    if (spec.empty()) return fallback;
    if (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json") return chart_from_json(read_json_file(spec));
    const auto colon = spec.find(':');
    const std::string model = spec.substr(0, colon);
    if (model == "euclidean") return ConformalChart::euclidean();
    if (model == "poincare") return ConformalChart::poincare_disk();
    if (model == "sphere") {
        double R = 1.0;
        if (colon != std::string::npos) {
            try {
                R = std::stod(spec.substr(colon + 1));
            } catch (const std::exception&) {
                throw ConfigError("cannot read the sphere radius in '" + spec + "'");
            }
        }
        if (!(R > 0.0)) throw ConfigError("sphere radius must be positive");
        return ConformalChart::stereographic_sphere(R);
    }
    throw ConfigError("unknown connection '" + spec + "'");
}

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::ostringstream s;
    s << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

Json config_json(const RunConfig& c) {
    Json j{{"command", to_string(c.command)},
           {"h", c.h},
           {"output_dir", c.output_dir},
           {"write_fields", c.write_fields},
           {"solver", to_json(c.solver)},
           {"mesh", to_json(c.mesh)},
           {"concavity_tolerance_scale", c.concavity_tolerance_scale}};
    switch (c.command) {
        case Command::Solve: j["eigenpairs"] = c.eigenpairs; [[fallthrough]];
        case Command::Gap: j["problem"] = c.problem_path; break;
        case Command::Sweep: j["t_grid"] = c.t_grid; [[fallthrough]];
        case Command::Concavity:
            j["problem"] = c.problem_path;
            j["connection"] = c.connection;
            j["b"] = c.b;
            j["margin"] = c.margin ? Json(*c.margin) : Json(nullptr);
            break;
        case Command::HoroconvexVerify:
            j["domain"] = c.domain_path;
            j["margin"] = c.margin ? Json(*c.margin) : Json(nullptr);
            break;
        case Command::HoroconvexThresholds: j["R"] = c.R ? Json(*c.R) : Json(nullptr); break;
        case Command::Torsion:
            j["domain"] = c.domain_path;
            j["beta"] = c.beta;
            j["levels"] = c.levels;
            j["margin"] = c.margin ? Json(*c.margin) : Json(nullptr);
            break;
    }
    return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    f << text;
}

template <class Writer>
void write_csv(const std::filesystem::path& path, Writer&& w) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    w(f);
}

/// Runs one command and fills `result`; returns the exit code for a completed run.
int execute(const RunConfig& c, const std::filesystem::path& dir, Json& result, Json& echo, std::ostream& out,
            std::ostream& err) {
    const SolverOptions& solver = c.solver;
    switch (c.command) {
        case Command::Solve: {
            const ProblemConfig pc = problem_from_json(read_json_file(c.problem_path));
            echo["problem_resolved"] = pc.echo;
            const TriMesh mesh = triangulate(pc.problem.domain, c.h, c.mesh);
            const EigenResult r = solve_lowest(assemble(pc.problem, mesh), c.eigenpairs, solver);
            result = to_json(r);
            if (c.write_fields) write_csv(dir / "fields.csv", [&](std::ostream& f) { write_eigen_csv(r, mesh, f); });
            out << "lambda1 " << std::setprecision(10) << r.lambda1 << "\n";
            if (r.vectors.size() > 1) out << "lambda2 " << r.lambda2 << "\ngap " << r.gap << "\n";
            return kExitSuccess;
        }
        case Command::Gap: {
            const ProblemConfig pc = problem_from_json(read_json_file(c.problem_path));
            echo["problem_resolved"] = pc.echo;
            const GapResult g = fundamental_gap(pc.problem, c.h, c.mesh, solver);
            result = to_json(g);
            if (c.write_fields) {
                write_csv(dir / "fields.csv", [&](std::ostream& f) { write_eigen_csv(g.fine, g.fine_mesh, f); });
            }
            out << std::setprecision(10) << "lambda1 " << g.fine.lambda1 << "\nlambda2 " << g.fine.lambda2 << "\ngap "
                << g.gap << "\nextrapolated_gap " << g.extrapolated_gap << "\n";
            return kExitSuccess;
        }
        case Command::Concavity: {
            const ProblemConfig pc = problem_from_json(read_json_file(c.problem_path));
            echo["problem_resolved"] = pc.echo;
            const ConformalChart connection = resolve_connection(c.connection, pc.problem.domain.chart());
            echo["connection_resolved"] = chart_to_json(connection);
            const TriMesh mesh = triangulate(pc.problem.domain, c.h, c.mesh);
            const EigenResult r = solve_lowest(assemble(pc.problem, mesh), 2, solver);
            const LogHessianField field = log_hessian_field(r, mesh, connection, c.margin);
            const ConcavityReport rep = concavity_report(field, parse_expression(c.b), c.concavity_tolerance_scale);
            const LogEquationResidual res = log_equation_residual(field, r.lambda1, pc.problem.V, pc.problem.rho);
            result = Json{{"eigen", to_json(r)},
                          {"concavity", to_json(rep)},
                          {"log_equation_residual",
                           Json{{"mean_abs", res.mean_abs}, {"max_abs", res.max_abs}, {"samples", res.samples}}}};
            if (c.write_fields) write_csv(dir / "fields.csv", [&](std::ostream& f) { write_field_csv(field, f); });
            out << "verdict " << to_string(rep.verdict) << "\nmax_hess_eig " << std::setprecision(10)
                << rep.max_hess_eig << "\n";
            if (rep.verdict == Verdict::InconclusiveMargin) {
                err << "concavity inconclusive: too few retained vertices\n";
                return kExitNumerical;
            }
            if (rep.verdict == Verdict::Violated) {
                err << "concavity violated at (" << rep.worst_point.x << ", " << rep.worst_point.y << ")\n";
                return kExitVerification;
            }
            return kExitSuccess;
        }
        case Command::Sweep: {
            const ProblemConfig pc = problem_from_json(read_json_file(c.problem_path));
            echo["problem_resolved"] = pc.echo;
            const ConformalChart connection = resolve_connection(c.connection, pc.problem.domain.chart());
            echo["connection_resolved"] = chart_to_json(connection);
            SweepOptions so;
            so.h = c.h;
            so.margin = c.margin;
            so.mesh = c.mesh;
            so.solver = solver;
            const SweepResult sweep = continuity_sweep(pc.problem, c.t_grid, connection, parse_expression(c.b), so);
            result = to_json(sweep);
            write_csv(dir / "sweep.csv", [&](std::ostream& f) { write_sweep_csv(sweep, f); });
            write_sweep_csv(sweep, out);
            if (sweep.first_violation) {
                err << "concavity first violated at t = " << *sweep.first_violation << "\n";
                return kExitVerification;
            }
            return kExitSuccess;
        }
        case Command::HoroconvexVerify: {
            const Domain2D domain = domain_from_json(read_json_file(c.domain_path));
            echo["domain_resolved"] = domain_to_json(domain);
            PipelineOptions po;
            po.h = c.h;
            po.mesh = c.mesh;
            po.solver = solver;
            po.margin = c.margin;
            if (c.R) po.config = HoroconvexConfig::from_radius(*c.R);
            const PipelineReport rep = verify_pipeline(domain, po);
            result = to_json(rep);
            for (const auto& s : rep.stages) {
                out << s.name << ": " << (s.passed ? "pass" : "FAIL") << " (" << s.message << ")\n";
            }
            if (!rep.passed) {
                err << "stage " << rep.failed_stage << " failed: " << rep.stages.back().message << "\n";
                return kExitVerification;
            }
            return kExitSuccess;
        }
        case Command::HoroconvexThresholds: {
            const double R = c.R.value_or(optimal_sphere_radius());
            const HoroconvexConfig cfg = HoroconvexConfig::from_radius(R);
            const GapBoundIngredients ing = gap_bound_ingredients(R);
            const AdmissibleRadius adm = admissible_radius(R);
            result = Json{{"R", R},
                          {"r_max", cfg.r_max},
                          {"r_max_sq", adm.r_max_sq},
                          {"C_max", cfg.C_max},
                          {"D_max", cfg.D_max},
                          {"rho_sup", ing.rho_sup},
                          {"coefficient", ing.coefficient},
                          {"constant", ing.constant},
                          {"optimal_R", optimal_sphere_radius()},
                          {"optimal_coefficient", gap_bound_coefficient()},
                          {"optimal_constant", gap_bound_constant()},
                          {"diameter_threshold", diameter_threshold()}};
            out << std::setprecision(10) << "R " << R << "\nr_max " << cfg.r_max << "\nr_max_sq " << adm.r_max_sq
                << "\nC_max " << cfg.C_max << "\nD_max " << cfg.D_max << "\ncoefficient " << ing.coefficient
                << "\nconstant " << ing.constant << "\n";
            return kExitSuccess;
        }
        case Command::Torsion: {
            const Domain2D domain = domain_from_json(read_json_file(c.domain_path));
            echo["domain_resolved"] = domain_to_json(domain);
            const bool sphere = domain.chart().model() == Model::StereographicSphere;
            const TorsionSolution sol = sphere ? solve_torsion(domain, c.h, {.mesh = c.mesh})
                                               : solve_flat_torsion(domain, c.h, {.mesh = c.mesh});
            const double threshold = circumradius_threshold(c.beta);
            const bool hypothesis = sphere ? (sol.sphere_convex && sol.circumradius <= threshold) : true;
            const double exponent = sphere ? kennington_exponent(c.beta) : 0.5;
            const ConcavityReport rep = power_concavity(sol.mesh, sol.u, exponent, c.margin);
            const LevelSetConnectivity levels = level_set_connectivity(sol, c.levels);
            const MaximumPrincipleCheck mp = maximum_principle_check(sol);
            result = Json{{"solution", to_json(sol)},
                          {"exponent", exponent},
                          {"circumradius_threshold", sphere ? Json(threshold) : Json(nullptr)},
                          {"hypothesis_holds", hypothesis},
                          {"power_concavity", to_json(rep)},
                          {"level_sets", to_json(levels)},
                          {"maximum_principle", to_json(mp)}};
            if (sphere) result["level_curvature"] = to_json(level_curve_curvature(sol, c.beta, c.margin));
            if (c.write_fields) write_csv(dir / "fields.csv", [&](std::ostream& f) { write_torsion_csv(sol, f); });
            out << "power " << std::setprecision(10) << exponent << " verdict " << to_string(rep.verdict)
                << "\nlevel sets connected " << (levels.holds ? "yes" : "no") << "\n";
            if (!mp.holds) {
                err << "maximum principle bound violated\n";
                return kExitVerification;
            }
            if (hypothesis && (rep.verdict != Verdict::Concave || !levels.holds)) {
                err << "power concavity or level-set connectivity failed under the theorem's hypotheses\n";
                return kExitVerification;
            }
            if (!hypothesis) err << "circumradius or convexity hypothesis not met; results are informational\n";
            return kExitSuccess;
        }
    }
    return kExitUsage;
}

void add_common(CLI::App* app, RunConfig& c) {
    app->add_option("--h", c.h, "target mesh size in chart coordinates")->check(CLI::PositiveNumber);
    app->add_option("--out", c.output_dir, "output directory for report.json and CSV files");
    app->add_flag("--fields", c.write_fields, "also write fields.csv");
    app->add_option("--eig-tol", c.solver.eigenvalue_tolerance, "relative Ritz-value change tolerance")
        ->check(CLI::PositiveNumber);
    app->add_option("--residual-tol", c.solver.residual_tolerance, "eigenpair residual tolerance")
        ->check(CLI::PositiveNumber);
    app->add_option("--max-iterations", c.solver.max_iterations, "eigensolver iteration cap")
        ->check(CLI::PositiveNumber);
    app->add_option("--min-angle", c.mesh.min_angle_degrees, "mesh minimum angle in degrees")
        ->check(CLI::Range(1.0, 33.0));
}

}  // namespace

std::string to_string(Command c) {
    switch (c) {
        case Command::Solve: return "solve";
        case Command::Gap: return "gap";
        case Command::Concavity: return "concavity";
        case Command::Sweep: return "sweep";
        case Command::HoroconvexVerify: return "horoconvex-verify";
        case Command::HoroconvexThresholds: return "horoconvex-thresholds";
        case Command::Torsion: return "torsion";
    }
    return "unknown";
}

std::optional<int> parse_command_line(const std::vector<std::string>& args, RunConfig& c, std::ostream& out,
                                      std::ostream& err) {
    CLI::App app{"confgap: Dirichlet spectra, fundamental gaps and concavity checks on conformal charts"};
    app.set_help_flag("--help", "print this help message and exit");
    app.require_subcommand(1);

    auto* solve = app.add_subcommand("solve", "lowest Dirichlet eigenpairs of a problem");
    solve->add_option("--problem", c.problem_path, "problem JSON file")->required()->check(CLI::ExistingFile);
    solve->add_option("--k", c.eigenpairs, "number of eigenpairs (1 to 3)")->check(CLI::Range(1, 3));
    add_common(solve, c);

    auto* gap = app.add_subcommand("gap", "fundamental gap at h and h/2 with extrapolation");
    gap->add_option("--problem", c.problem_path, "problem JSON file")->required()->check(CLI::ExistingFile);
    add_common(gap, c);

    auto add_concavity_options = [&](CLI::App* sub) {
        sub->add_option("--problem", c.problem_path, "problem JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--connection", c.connection, "chart JSON file or euclidean | poincare | sphere[:R]");
        sub->add_option("--b", c.b, "barrier function b as an expression in x1, x2");
        sub->add_option("--margin", c.margin, "boundary exclusion margin")->check(CLI::PositiveNumber);
        sub->add_option("--tol-scale", c.concavity_tolerance_scale, "relative concavity tolerance")
            ->check(CLI::PositiveNumber);
        add_common(sub, c);
    };
    auto* conc = app.add_subcommand("concavity", "log-concavity of the ground state for a connection");
    add_concavity_options(conc);
    auto* sweep = app.add_subcommand("sweep", "continuity sweep from the constant-weight problem");
    add_concavity_options(sweep);
    sweep->add_option("--t-grid", c.t_grid, "sorted t values from 0 to 1")->delimiter(',');

    auto add_verify = [&](CLI::App* sub) {
        sub->add_option("--domain", c.domain_path, "domain JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--R", c.R, "sphere radius of the comparison connection")->check(CLI::Range(0.5, 1.0));
        sub->add_option("--margin", c.margin, "boundary exclusion margin")->check(CLI::PositiveNumber);
        add_common(sub, c);
    };
    auto add_thresholds = [&](CLI::App* sub) {
        sub->add_option("--R", c.R, "sphere radius")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--out", c.output_dir, "output directory for report.json");
    };
    auto* horo = app.add_subcommand("horoconvex", "horoconvex gap pipeline");
    horo->require_subcommand(1);
    auto* verify = horo->add_subcommand("verify", "run every pipeline stage on a domain");
    add_verify(verify);
    auto* thresholds = horo->add_subcommand("thresholds", "admissible radius, diameter threshold and bound");
    add_thresholds(thresholds);
    auto* verify_h = app.add_subcommand("horoconvex-verify", "same as horoconvex verify");
    add_verify(verify_h);
    auto* thresholds_h = app.add_subcommand("horoconvex-thresholds", "same as horoconvex thresholds");
    add_thresholds(thresholds_h);

    auto add_torsion = [&](CLI::App* sub) {
        sub->add_option("--domain", c.domain_path, "domain JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--beta", c.beta, "power-concavity parameter beta >= 1")->check(CLI::Range(1.0, 1e6));
        sub->add_option("--levels", c.levels, "number of level sets checked")->check(CLI::Range(1, 1000));
        sub->add_option("--margin", c.margin, "boundary exclusion margin")->check(CLI::PositiveNumber);
        add_common(sub, c);
    };
    auto* torsion = app.add_subcommand("torsion", "torsion problem and power concavity");
    torsion->require_subcommand(1);
    add_torsion(torsion->add_subcommand("solve", "solve and check a domain"));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitSuccess;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kExitSuccess;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    if (*solve) c.command = Command::Solve;
    if (*gap) c.command = Command::Gap;
    if (*conc) c.command = Command::Concavity;
    if (*sweep) c.command = Command::Sweep;
    if (*verify || *verify_h) c.command = Command::HoroconvexVerify;
    if (*thresholds || *thresholds_h) c.command = Command::HoroconvexThresholds;
    if (*torsion) c.command = Command::Torsion;
    return std::nullopt;
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    Json report{{"schema", kSchemaVersion}, {"command", to_string(c.command)}};
    Json echo = config_json(c);
    Json result = nullptr;
    int code = kExitSuccess;
    std::string error;

    std::filesystem::path dir(c.output_dir);
    try {
        std::filesystem::create_directories(dir);
    } catch (const std::filesystem::filesystem_error& e) {
        err << "cannot create output directory: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (!(c.h > 0.0)) throw ConfigError("h must be positive");
        code = execute(c, dir, result, echo, out, err);
    } catch (const ConfigError& e) {
        code = kExitUsage, error = e.what();
    } catch (const ParseError& e) {
        code = kExitUsage, error = e.what();
    } catch (const MalformedDomain& e) {
        code = kExitUsage, error = e.what();
    } catch (const UnsupportedOperation& e) {
        code = kExitUsage, error = e.what();
    } catch (const ThresholdError& e) {
        code = kExitVerification, error = e.what();
    } catch (const Error& e) {
        code = kExitNumerical, error = e.what();
    } catch (const std::exception& e) {
        code = kExitNumerical, error = e.what();
    }
    if (!error.empty()) err << "error: " << error << "\n";

    report["config"] = echo;
    report["result"] = result;
    report["exit_code"] = code;
    report["error"] = error.empty() ? Json(nullptr) : Json(error);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report["metadata"] = Json{{"timestamp", timestamp()}, {"elapsed_seconds", elapsed}};
    try {
        write_text(dir / "report.json", dump_json(report));
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return code;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig config;
    if (const auto early = parse_command_line(args, config, out, err)) return *early;
    return run(config, out, err);
}

}  // namespace confgap
