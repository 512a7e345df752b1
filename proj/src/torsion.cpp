#include "confgap/torsion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "confgap/assembly.hpp"
#include "confgap/errors.hpp"

namespace confgap {

namespace {

TorsionSolution solve_poisson(const Domain2D& domain, double h, const TorsionOptions& options) {
    TorsionSolution sol;
    sol.chart = domain.chart();
    sol.unit_density = options.rho_tilde.is_constant() && options.rho_tilde.constant_value() == 1.0;
    sol.domain = domain;
    sol.mesh = triangulate(domain, h, options.mesh);

    const WeightedProblem problem = laplace_beltrami_problem(domain, options.rho_tilde);
    const AssembledSystem sys = assemble(problem, sol.mesh);
    const Eigen::VectorXd load_full = sys.B_full * Eigen::VectorXd::Ones(sys.B_full.cols());
    const Eigen::VectorXd b = sys.restrict_to_dofs(load_full);

    Eigen::SimplicialLDLT<SparseMatrix> ldlt(sys.A);
    if (ldlt.info() != Eigen::Success) throw NumericalError("LDL^T factorization of the torsion stiffness failed");
    Eigen::VectorXd x = ldlt.solve(b);
    Eigen::VectorXd r = b - sys.A * x;
    std::vector<double> history{r.norm() / b.norm()};
    for (int step = 0; step < 3 && history.back() > kTorsionResidualTolerance; ++step) {
        x += ldlt.solve(r);
        r = b - sys.A * x;
        history.push_back(r.norm() / b.norm());
    }
    sol.residual = history.back();
    if (!(sol.residual <= kTorsionResidualTolerance)) {
        std::ostringstream msg;
        msg << "torsion residual " << sol.residual << " exceeds " << kTorsionResidualTolerance;
        throw NumericalError(msg.str(), history);
    }
    sol.u = sys.expand(x);
    return sol;
}

}  // namespace

double TorsionSolution::value_at(Point x) const {
    for (const auto& t : mesh.triangles) {
        const Point a = mesh.vertices[static_cast<std::size_t>(t[0])];
        const Point b = mesh.vertices[static_cast<std::size_t>(t[1])];
        const Point c = mesh.vertices[static_cast<std::size_t>(t[2])];
        const double area = cross(b - a, c - a);
        const double la = cross(c - b, x - b) / area;
        const double lb = cross(a - c, x - c) / area;
        const double lc = 1.0 - la - lb;
        constexpr double eps = -1e-12;
        if (la >= eps && lb >= eps && lc >= eps) {
            return la * u(t[0]) + lb * u(t[1]) + lc * u(t[2]);
        }
    }
    throw DomainError("point lies outside the torsion mesh");
}

TorsionSolution solve_torsion(const Domain2D& domain, double h, const TorsionOptions& options) {
    const ConformalChart& chart = domain.chart();
    if (chart.model() != Model::StereographicSphere || chart.deformed() || chart.radius() != 1.0) {
        throw UnsupportedOperation("solve_torsion needs a domain on the undeformed unit sphere");
    }
    const Circumball ball = circumradius(domain, chart);
    TorsionSolution sol = solve_poisson(options.recenter ? sphere_recenter(domain, ball.center) : domain, h, options);
    sol.circumcenter = ball.center;
    sol.circumradius = ball.radius;
    sol.sphere_convex = is_convex_wrt(*sol.domain, chart).holds;
    return sol;
}

TorsionSolution solve_flat_torsion(const Domain2D& domain, double h, const TorsionOptions& options) {
    const ConformalChart& chart = domain.chart();
    if (chart.model() != Model::EuclideanPlane || chart.deformed()) {
        throw UnsupportedOperation("solve_flat_torsion needs a domain on the undeformed plane");
    }
    const Circumball ball = circumradius(domain, chart);
    TorsionSolution sol = solve_poisson(domain, h, options);
    sol.circumcenter = ball.center;
    sol.circumradius = ball.radius;
    return sol;
}

LogHessianField power_hessian_field(const TriMesh& mesh, const Eigen::VectorXd& u, double exponent,
                                    std::optional<double> margin, const FitOptions& options) {
    if (static_cast<std::size_t>(u.size()) != mesh.num_vertices()) {
        throw DomainError("nodal values do not belong to this mesh");
    }
    if (!(exponent > 0.0)) throw DomainError("power exponent must be positive");
    const double m = margin.value_or(default_exclusion_margin(mesh));
    if (margin && m < 2.0 * mesh.h_max) {
        std::ostringstream msg;
        msg << "exclusion margin " << m << " is below 2 h_max = " << 2.0 * mesh.h_max;
        throw DomainError(msg.str());
    }
    const auto dist = boundary_distances(mesh);
    std::vector<int> candidates;
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
        if (mesh.boundary[i] || dist[i] < m) continue;
        if (!(u(static_cast<Eigen::Index>(i)) > 0.0)) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "u = " << u(static_cast<Eigen::Index>(i)) << " is not positive at retained vertex " << i;
            throw DomainError(msg.str());
        }
        candidates.push_back(static_cast<int>(i));
    }
    const FitSet fits = fit_local_polynomials(mesh, u, candidates, options);

    LogHessianField field;
    field.connection = ConformalChart::euclidean();
    field.exclusion_margin = m;
    field.candidates = fits.candidates;
    field.dropped = fits.dropped;
    field.h_max = mesh.h_max;
    for (const auto& f : fits.fits) {
        const double uu = f.value;
        if (!(uu > 0.0)) {
            ++field.dropped;
            continue;
        }
        const double scale = exponent * std::pow(uu, exponent - 1.0);
        LogHessianSample s;
        s.vertex = f.vertex;
        s.x = f.x;
        s.v = std::pow(u(f.vertex), exponent);
        s.grad = f.gradient * scale;
        s.hess_flat = (f.hessian + SymMatrix2::sym_outer(f.gradient, f.gradient) * ((exponent - 1.0) / uu)) * scale;
        s.hess = s.hess_flat;
        field.samples.push_back(s);
    }
    return field;
}

ConcavityReport power_concavity(const TriMesh& mesh, const Eigen::VectorXd& u, double exponent,
                                std::optional<double> margin) {
    return concavity_report(power_hessian_field(mesh, u, exponent, margin));
}

double kennington_exponent(double beta) { return beta / (1.0 + 2.0 * beta); }

ConcavityReport power_concavity_check(const TorsionSolution& sol, double beta, std::optional<double> margin) {
    if (!(beta >= 1.0)) throw DomainError("power concavity needs beta >= 1");
    return power_concavity(sol.mesh, sol.u, kennington_exponent(beta), margin);
}

std::pair<double, double> rho_beta_hessian_eigs(Point x, double beta) {
    if (!(beta >= 1.0)) throw DomainError("rho^beta eigenvalues need beta >= 1");
    const double s = x.sq_norm();
    const double c = std::pow(4.0, 1.0 + beta) * beta;
    return {-c / std::pow(1.0 + s, 1.0 + 2.0 * beta),
            c * (-1.0 + (1.0 + 4.0 * beta) * s) / std::pow(1.0 + s, 2.0 * (1.0 + beta))};
}

double circumradius_threshold(double beta) {
    if (!(beta >= 1.0)) throw DomainError("circumradius threshold needs beta >= 1");
    return 2.0 * std::atan(1.0 / (1.0 + 4.0 * beta));
}

LevelSetConnectivity level_set_connectivity(const TorsionSolution& sol, int levels) {
    if (levels < 1) throw DomainError("level_set_connectivity needs at least one level");
    const std::size_t n = sol.mesh.num_vertices();
    const auto neighbors = sol.mesh.vertex_neighbors();
    const double top = sol.max_value();
    LevelSetConnectivity out;
    out.holds = true;
    std::vector<int> label(n);
    std::vector<int> stack;
    for (int k = 1; k <= levels; ++k) {
        const double c = top * k / (levels + 1);
        std::fill(label.begin(), label.end(), -1);
        int count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (label[i] >= 0 || sol.u(static_cast<Eigen::Index>(i)) < c) continue;
            label[i] = count;
            stack.assign(1, static_cast<int>(i));
            while (!stack.empty()) {
                const int a = stack.back();
                stack.pop_back();
                for (int b : neighbors[static_cast<std::size_t>(a)]) {
                    if (label[static_cast<std::size_t>(b)] < 0 && sol.u(b) >= c) {
                        label[static_cast<std::size_t>(b)] = count;
                        stack.push_back(b);
                    }
                }
            }
            ++count;
        }
        out.levels.push_back(c);
        out.components.push_back(count);
        if (count != 1) out.holds = false;
    }
    return out;
}

LevelCurvature level_curve_curvature(const TorsionSolution& sol, double beta, std::optional<double> margin) {
    const LogHessianField field = power_hessian_field(sol.mesh, sol.u, kennington_exponent(beta), margin);
    double max_grad = 0.0;
    for (const auto& s : field.samples) max_grad = std::max(max_grad, s.grad.norm());

    LevelCurvature out;
    out.min_flat = std::numeric_limits<double>::infinity();
    out.min_sphere = std::numeric_limits<double>::infinity();
    double scale = 0.0;
    for (const auto& s : field.samples) {
        const double g = s.grad.norm();
        if (g < 1e-3 * max_grad) continue;
        const Vec2 tangent{-s.grad.y / g, s.grad.x / g};
        const double kappa = -s.hess_flat.quad(tangent) / g;
        const Jet2 phi = sol.chart.log_factor(s.x);
        const Vec2 normal = s.grad * (-1.0 / g);
        const double kappa_sphere = principal_curvature_transform(kappa, dot(phi.g, normal), phi.v);
        scale = std::max(scale, std::fabs(kappa));
        ++out.samples;
        if (kappa < out.min_flat) {
            out.min_flat = kappa;
            out.worst_point = s.x;
        }
        out.min_sphere = std::min(out.min_sphere, kappa_sphere);
    }
    out.tolerance = kConcavityToleranceScale * scale;
    out.holds = out.samples > 0 && out.min_flat >= -out.tolerance;
    return out;
}

MaximumPrincipleCheck maximum_principle_check(const TorsionSolution& sol) {
    if (!sol.unit_density) throw UnsupportedOperation("the ball comparison needs rho_tilde = 1");
    const bool sphere = sol.chart.model() == Model::StereographicSphere;
    if (sphere && !sol.domain) throw DomainError("torsion solution carries no domain");
    // on the sphere the meshed domain is centered at the origin
    const double a = std::tan(0.5 * sol.circumradius);
    auto bound = [&](Point x) {
        if (sphere) return std::log((1.0 + a * a) / (1.0 + x.sq_norm()));
        const double C = sol.circumradius;
        return 0.25 * (C * C - (x - sol.circumcenter).sq_norm());
    };
    MaximumPrincipleCheck out;
    out.tolerance = 1e-3 * sol.max_value();
    out.min_interior = std::numeric_limits<double>::infinity();
    out.worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sol.mesh.num_vertices(); ++i) {
        const double ui = sol.u(static_cast<Eigen::Index>(i));
        if (!sol.mesh.boundary[i]) out.min_interior = std::min(out.min_interior, ui);
        out.worst_excess = std::max(out.worst_excess, ui - bound(sol.mesh.vertices[i]));
    }
    out.holds = out.min_interior > 0.0 && out.worst_excess <= out.tolerance;
    return out;
}

void write_torsion_csv(const TorsionSolution& sol, std::ostream& out) {
    out << "x,y,u,boundary\n";
    out.precision(17);
    for (std::size_t i = 0; i < sol.mesh.num_vertices(); ++i) {
        const Point p = sol.mesh.vertices[i];
        out << p.x << ',' << p.y << ',' << sol.u(static_cast<Eigen::Index>(i)) << ',' << (sol.mesh.boundary[i] ? 1 : 0)
            << '\n';
    }
}

}  // namespace confgap
