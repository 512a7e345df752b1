#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "confgap/cli.hpp"
#include "confgap/horoconvex.hpp"
#include "confgap/io.hpp"
#include "confgap/torsion.hpp"
#include "gap_corollaries.hpp"
#include "oracles.hpp"

using namespace confgap;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double pi2 = pi * pi;
const std::string data_dir = CONFGAP_DATA_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Line {
    std::ostringstream s;
    bool ok = true;

    Line() { s.precision(8); }
    template <class T>
    Line& operator<<(const T& v) {
        s << v;
        return *this;
    }
    /// Records one comparison and its numbers.
    Line& check(bool cond, const std::string& what) {
        if (!cond) ok = false;
        s << what << (cond ? " ok" : " FAIL") << "; ";
        return *this;
    }
    Outcome done() const { return {ok, s.str()}; }
};

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(8);
    s << x;
    return s.str();
}

Domain2D unit_square() { return Domain2D::rectangle(ConformalChart::euclidean(), {0, 0}, {1, 1}, 2); }

Domain2D ball_fixture(double D) {
    return domain_from_json(read_json_file(data_dir + "/ball_D" + fmt(D) + ".json"));
}

Outcome rectangle_spectrum() {
    const auto sq = unit_square();
    const auto mesh = triangulate(sq, 0.01);
    const auto r = solve_lowest(assemble(laplace_beltrami_problem(sq), mesh), 2);
    Line l;
    l.check(rel(r.lambda1, 2 * pi2) <= 0.005, "lambda1 " + fmt(r.lambda1) + " vs 2pi^2");
    l.check(rel(r.lambda2, 5 * pi2) <= 0.005, "lambda2 " + fmt(r.lambda2) + " vs 5pi^2");
    l.check(rel(r.gap, 3 * pi2) <= 0.01, "gap " + fmt(r.gap) + " vs 3pi^2");
    return l.done();
}

Outcome disk_spectrum() {
    const double j01 = oracle::bessel_zero(0, 2.0, 3.0);
    const auto disk = domain_from_json(read_json_file(data_dir + "/unit_disk.json").at("domain"));
    const auto mesh = triangulate(disk, 0.02);
    const auto r = solve_lowest(assemble(laplace_beltrami_problem(disk), mesh), 1);
    Line l;
    l.check(rel(r.lambda1, j01 * j01) <= 0.005, "lambda1 " + fmt(r.lambda1) + " vs j01^2 " + fmt(j01 * j01));
    return l.done();
}

Outcome identity_suite() {
    Line l;
    auto g = oracle::rng(11);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const Point x = oracle::random_in_disk(g, 0.6);
        const double R = oracle::uniform(g, 0.3, 0.95);
        const SymMatrix2 exact = spherical_hessian_rho(x, R);
        worst = std::max(worst, (exact - oracle::fd_spherical_hessian(x, R)).max_abs_entry() / exact.max_abs_entry());
    }
    l.check(worst <= 1e-6, "spherical Hessian rel err " + fmt(worst));

    double mu_err = 0.0;
    for (int k = 0; k < 50; ++k) {
        const double r = oracle::uniform(g, 0.0, 0.9);
        const double R = oracle::uniform(g, 0.1, 0.99);
        const SymMatrix2 H = spherical_hessian_rho({r, 0.0}, R);
        // 2x2 symmetric eigenvalues from the characteristic polynomial
        const double tr = H.a11 + H.a22, det = H.a11 * H.a22 - H.a12 * H.a12;
        const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
        const double lo = tr / 2 - disc, hi = tr / 2 + disc;
        const auto mu = mu_eigenvalues(r, R);
        const double mlo = std::min(mu.mu1, mu.mu2), mhi = std::max(mu.mu1, mu.mu2);
        mu_err = std::max(mu_err, std::max(std::fabs(lo - mlo), std::fabs(hi - mhi)) / std::fabs(mhi));
    }
    l.check(mu_err <= 1e-12, "mu pair rel err " + fmt(mu_err));

    double beta_err = 0.0;
    for (double beta : {1.0, 2.0}) {
        auto rho_beta = [beta](Point p) { return std::pow(4.0 / std::pow(1.0 + p.sq_norm(), 2), beta); };
        for (int k = 0; k < 50; ++k) {
            const Point x = oracle::random_in_disk(g, 0.9);
            const auto fd = oracle::fd_hessian(rho_beta, x, 1e-4).eigenvalues();
            auto [e1, e2] = rho_beta_hessian_eigs(x, beta);
            if (e1 > e2) std::swap(e1, e2);
            const double scale = std::max(std::fabs(fd[0]), std::fabs(fd[1]));
            beta_err = std::max(beta_err, std::max(std::fabs(e1 - fd[0]), std::fabs(e2 - fd[1])) / scale);
        }
    }
    l.check(beta_err <= 1e-6, "rho^beta eigenvalues rel err " + fmt(beta_err));
    return l.done();
}

Outcome threshold_reproduction() {
    Line l;
    const auto adm = admissible_radius(std::sqrt(7.0 - std::sqrt(33.0)) / 2.0);
    l.check(std::fabs(adm.r_max_sq - 0.0217494) <= 1e-4, "r^2 " + fmt(adm.r_max_sq));
    l.check(std::fabs(adm.r_max - 0.147477) <= 5e-4, "r " + fmt(adm.r_max));
    const auto opt = optimal_R();
    l.check(std::fabs(opt.golden_section - 0.560232) <= 1e-4, "argmax R " + fmt(opt.golden_section));
    const double dek = dekster_min_diameter(0.297121);
    l.check(std::fabs(dek - 0.516475) <= 1e-4, "Dekster D " + fmt(dek));
    const double closed = 2.0 * std::asinh(1.0 / (2.0 * std::sqrt(11.0 / 3.0)));
    l.check(std::fabs(dek - closed) <= 1e-4, "2 arccsch(2 sqrt(11/3)) " + fmt(closed));
    return l.done();
}

const std::vector<double> kBallDiameters{0.2, 0.3, 0.4, 0.45, 0.5};

std::vector<PipelineReport>& pipeline_reports() {
    static std::vector<PipelineReport> reports;
    if (reports.empty()) {
        PipelineOptions opts;
        opts.h = 0.01;
        for (double D : kBallDiameters) reports.push_back(verify_pipeline(ball_fixture(D), opts));
    }
    return reports;
}

Outcome horoconvex_gap_property() {
    Line l;
    const auto& reps = pipeline_reports();
    for (std::size_t i = 0; i < reps.size(); ++i) {
        const auto& r = reps[i];
        const double D = r.diameter;
        const double gap = r.gap ? r.gap->extrapolated_gap : std::nan("");
        const double bound = 0.837 * pi2 / (D * D) + 4.0 / 3.0;
        l.check(r.passed && gap >= bound, "D=" + fmt(kBallDiameters[i]) + " stages " +
                                              (r.passed ? "all" : "failed at " + r.failed_stage) + " gap " + fmt(gap) +
                                              " >= " + fmt(bound));
    }
    return l.done();
}

Outcome log_concavity_suite() {
    Line l;
    const auto& reps = pipeline_reports();
    for (std::size_t i = 0; i < reps.size(); ++i) {
        const auto& c = reps[i].concavity;
        const bool ok = c && c->verdict == Verdict::Concave && c->max_hess_eig <= c->tolerance;
        l.check(ok, "D=" + fmt(kBallDiameters[i]) + " max eig " + (c ? fmt(c->max_hess_eig) : "none"));
    }
    const auto sq = unit_square();
    const auto mesh = triangulate(sq, 0.01);
    const auto eig = solve_lowest(assemble(laplace_beltrami_problem(sq), mesh), 2);
    const auto rep = concavity_report(log_hessian_field(eig, mesh, ConformalChart::euclidean()));
    l.check(rep.max_hess_eig <= -pi2 * 0.95, "square max eig " + fmt(rep.max_hess_eig) + " <= -0.95 pi^2");
    return l.done();
}

Outcome neumann_crosscheck() {
    Line l;
    const auto sq = unit_square();
    const auto problem = laplace_beltrami_problem(sq);
    const auto mesh = triangulate(sq, 0.01);
    const auto eig = solve_lowest(assemble(problem, mesh), 2);
    const auto nm = drift_neumann_mu2(eig, problem, mesh);
    l.check(rel(nm.mu2, eig.gap) <= 0.02, "mu2 " + fmt(nm.mu2) + " vs gap " + fmt(eig.gap));
    const double D = diameter(sq, ConformalChart::euclidean());
    const double lhs = weight_sup(problem.rho, mesh) * nm.mu2;
    l.check(lhs >= pi2 / (D * D), "|rho| mu2 " + fmt(lhs) + " >= pi^2/D^2 " + fmt(pi2 / (D * D)));
    return l.done();
}

Outcome torsion_suite() {
    Line l;
    const auto sphere = ConformalChart::stereographic_sphere(1.0);
    const double a = std::tan(0.5 * 0.9 * circumradius_threshold(1.0));
    const auto cap = Domain2D::euclidean_circle(sphere, {0.0, 0.0}, a, 512);
    const auto sol = solve_torsion(cap, a / 40.0);
    const auto rep = power_concavity_check(sol, 1.0);
    l.check(rep.verdict == Verdict::Concave, "cube-root max eig " + fmt(rep.max_hess_eig));
    const auto levels = level_set_connectivity(sol, 10);
    l.check(levels.holds && levels.levels.size() == 10, "10 level sets connected");
    const auto curv = level_curve_curvature(sol, 1.0);
    l.check(curv.holds, "level curve sphere curvature min " + fmt(curv.min_sphere));
    l.check(maximum_principle_check(sol).holds, "maximum principle bound");
    const double oracle_center =
        oracle::radial_poisson_center([](double r) { return 4.0 / std::pow(1.0 + r * r, 2); }, a);
    const double err = rel(sol.value_at({0, 0}), oracle_center);
    l.check(err <= 1e-4, "center rel err " + fmt(err));
    const auto disk = Domain2D::euclidean_circle(ConformalChart::euclidean(), {0, 0}, 1.0, 512);
    const auto flat = solve_flat_torsion(disk, 0.02);
    const auto ml = power_concavity(flat.mesh, flat.u, 0.5);
    l.check(ml.verdict == Verdict::Concave, "flat sqrt(u) max eig " + fmt(ml.max_hess_eig));
    return l.done();
}

double residual_mean(const WeightedProblem& problem, const ConformalChart& connection, double h, double margin) {
    const auto mesh = triangulate(problem.domain, h);
    const auto eig = solve_lowest(assemble(problem, mesh), 2);
    const auto field = log_hessian_field(eig, mesh, connection, margin);
    return log_equation_residual(field, eig.lambda1, problem.V, problem.rho).mean_abs;
}

Outcome log_equation_residual_suite() {
    Line l;
    const auto sq = laplace_beltrami_problem(unit_square());
    const double s1 = residual_mean(sq, ConformalChart::euclidean(), 0.02, 0.1);
    const double s2 = residual_mean(sq, ConformalChart::euclidean(), 0.01, 0.1);
    l.check(s1 / s2 >= 1.7, "square " + fmt(s1) + " -> " + fmt(s2) + " factor " + fmt(s1 / s2));
    const auto ball = laplace_beltrami_problem(Domain2D::hyperbolic_circle({0.0, 0.0}, 0.2, 128));
    const double b1 = residual_mean(ball, ConformalChart::poincare_disk(), 0.01, 0.035);
    const double b2 = residual_mean(ball, ConformalChart::poincare_disk(), 0.005, 0.035);
    l.check(b1 / b2 >= 1.7, "hyperbolic ball " + fmt(b1) + " -> " + fmt(b2) + " factor " + fmt(b1 / b2));
    return l.done();
}

Outcome determinism() {
    Line l;
    std::string dumps[2];
    for (int k = 0; k < 2; ++k) {
        const auto dir = std::filesystem::temp_directory_path() / ("confgap_acceptance_det_" + std::to_string(k));
        std::filesystem::remove_all(dir);
        std::ostringstream out, err;
        const int code = run_cli({"horoconvex", "verify", "--domain", data_dir + "/ball_D0.2.json", "--h", "0.01",
                                  "--out", dir.string()},
                                 out, err);
        l.check(code == kExitSuccess, "run " + std::to_string(k + 1) + " exit " + std::to_string(code));
        Json rep = read_json_file((dir / "report.json").string());
        rep.erase("metadata");
        rep["config"].erase("output_dir");
        dumps[k] = dump_json(rep);
    }
    l.check(!dumps[0].empty() && dumps[0] == dumps[1], "reports byte-identical");
    return l.done();
}

Outcome conformal_sphere_property() {
    Line l;
    const auto r = gapcheck::conformal_cap("0.002 + 0.003*x1^2 - 0.002*x1*x2 + 0.001*x2^2", 0.3, 0.02);
    l.check(r.phi_norm <= 0.01, "phi norm " + fmt(r.phi_norm));
    l.check(r.sphere_convex, "cap convex for the round metric");
    l.check(r.condition.holds, "space-form condition margin " + fmt(r.condition.worst_margin));
    l.check(r.concavity.verdict == Verdict::Concave, "log u max eig " + fmt(r.concavity.max_hess_eig));
    l.check(r.gap >= r.bound, "gap " + fmt(r.gap) + " >= " + fmt(r.bound));
    return l.done();
}

struct Criterion {
    std::string id;
    std::string name;
    double limit_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"1", "analytic spectrum, unit square", 30, rectangle_spectrum},
        {"2", "analytic spectrum, unit disk", 60, disk_spectrum},
        {"3", "closed-form identity suite", 5, identity_suite},
        {"4", "threshold reproduction", 5, threshold_reproduction},
        {"5", "horoconvex gap property suite", 600, horoconvex_gap_property},
        {"6", "log-concavity suite", 300, log_concavity_suite},
        {"7", "ratio and Neumann cross-check", 120, neumann_crosscheck},
        {"8", "torsion suite", 120, torsion_suite},
        {"9", "log-equation residual under refinement", 300, log_equation_residual_suite},
        {"10", "determinism", 300, determinism},
        {"C", "nearly round conformal sphere property", 300, conformal_sphere_property},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.limit_seconds;
        const bool pass = o.pass && in_time;
        if (!pass) ++failures;
        std::printf("[%s] %-2s %s: %s(%.2f s of %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id.c_str(), c.name.c_str(),
                    o.detail.c_str(), secs, c.limit_seconds, in_time ? "" : ", over time");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
