#include "confgap/concavity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <Eigen/SVD>

#include "confgap/errors.hpp"

namespace confgap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<int> two_ring(const std::vector<std::vector<int>>& neighbors, int i) {
    std::vector<int> patch = neighbors[static_cast<std::size_t>(i)];
    for (int j : neighbors[static_cast<std::size_t>(i)]) {
        for (int k : neighbors[static_cast<std::size_t>(j)]) patch.push_back(k);
    }
    patch.push_back(i);
    std::sort(patch.begin(), patch.end());
    patch.erase(std::unique(patch.begin(), patch.end()), patch.end());
    return patch;
}

// Model: c0 + g.d + 1/2 d^T H d (+ cubic terms), d scaled by the patch radius.
std::optional<LocalFit> fit_one(const TriMesh& mesh, const Eigen::VectorXd& values, int i,
                                const std::vector<int>& patch, const FitOptions& options) {
    const Point xi = mesh.vertices[static_cast<std::size_t>(i)];
    std::vector<int> usable;
    usable.reserve(patch.size());
    double scale = 0.0;
    for (int j : patch) {
        if (!std::isfinite(values(j))) continue;
        usable.push_back(j);
        scale = std::max(scale, (mesh.vertices[static_cast<std::size_t>(j)] - xi).norm());
    }
    // the centre must be one of the samples and at least six neighbours must remain
    if (!std::isfinite(values(i)) || usable.size() < 7 || scale == 0.0) return std::nullopt;

    const bool cubic = options.prefer_cubic && usable.size() >= 14;
    const int cols = cubic ? 10 : 6;
    const auto rows = static_cast<Eigen::Index>(usable.size());
    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXd rhs(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const int j = usable[static_cast<std::size_t>(r)];
        const Vec2 d = (mesh.vertices[static_cast<std::size_t>(j)] - xi) / scale;
        const double w = std::sqrt(1.0 / (1.0 + 4.0 * d.sq_norm()));
        A(r, 0) = w;
        A(r, 1) = w * d.x;
        A(r, 2) = w * d.y;
        A(r, 3) = w * 0.5 * d.x * d.x;
        A(r, 4) = w * d.x * d.y;
        A(r, 5) = w * 0.5 * d.y * d.y;
        if (cubic) {
            A(r, 6) = w * d.x * d.x * d.x;
            A(r, 7) = w * d.x * d.x * d.y;
            A(r, 8) = w * d.x * d.y * d.y;
            A(r, 9) = w * d.y * d.y * d.y;
        }
        rhs(r) = w * values(j);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (!(sv(cols - 1) > options.rank_tolerance * sv(0))) return std::nullopt;
    const Eigen::VectorXd c = svd.solve(rhs);

    LocalFit fit;
    fit.vertex = i;
    fit.x = xi;
    fit.value = c(0);
    fit.gradient = Vec2{c(1), c(2)} / scale;
    const double s2 = scale * scale;
    fit.hessian = SymMatrix2{c(3) / s2, c(4) / s2, c(5) / s2};
    if (!std::isfinite(fit.hessian.a11) || !std::isfinite(fit.hessian.a12) || !std::isfinite(fit.hessian.a22)) {
        return std::nullopt;
    }
    return fit;
}

FitSet fit_impl(const TriMesh& mesh, const Eigen::VectorXd& values, const std::vector<int>& vertices,
                const FitOptions& options, bool parallel) {
    const auto neighbors = mesh.vertex_neighbors();
    std::vector<std::optional<LocalFit>> fits(vertices.size());
    const auto n = static_cast<std::ptrdiff_t>(vertices.size());
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const int i = vertices[static_cast<std::size_t>(k)];
        fits[static_cast<std::size_t>(k)] = fit_one(mesh, values, i, two_ring(neighbors, i), options);
    }
    FitSet out;
    out.candidates = vertices.size();
    for (auto& f : fits) {
        if (f) {
            out.fits.push_back(*f);
        } else {
            ++out.dropped;
        }
    }
    return out;
}

double point_segment_distance(Point p, Point a, Point b) {
    const Vec2 ab = b - a;
    const double len2 = ab.sq_norm();
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

LogHessianField log_hessian_impl(const EigenResult& result, const TriMesh& mesh, const ConformalChart& connection,
                                 std::optional<double> margin, const FitOptions& options, bool parallel) {
    if (result.vectors.empty() || static_cast<std::size_t>(result.u1().size()) != mesh.num_vertices()) {
        throw DomainError("eigen result does not belong to this mesh");
    }
    const double m = margin.value_or(default_exclusion_margin(mesh));
    if (margin && m < 2.0 * mesh.h_max) {
        std::ostringstream msg;
        msg << "exclusion margin " << m << " is below 2 h_max = " << 2.0 * mesh.h_max;
        throw DomainError(msg.str());
    }
    const auto dist = boundary_distances(mesh);
    const auto& u = result.u1();
    Eigen::VectorXd v(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        v(i) = (!mesh.boundary[static_cast<std::size_t>(i)] && u(i) > 0.0) ? std::log(u(i)) : kNaN;
    }
    std::vector<int> candidates;
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
        if (mesh.boundary[i] || dist[i] < m) continue;
        if (!(u(static_cast<Eigen::Index>(i)) > 0.0)) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "u1 = " << u(static_cast<Eigen::Index>(i)) << " is not positive at retained vertex " << i;
            throw DomainError(msg.str());
        }
        candidates.push_back(static_cast<int>(i));
    }
    FitSet fits = fit_impl(mesh, options.fit_log_values ? v : u, candidates, options, parallel);
    if (!options.fit_log_values) {
        std::vector<LocalFit> kept;
        kept.reserve(fits.fits.size());
        for (auto f : fits.fits) {
            const double uu = f.value;
            if (!(uu > 0.0)) {
                ++fits.dropped;
                continue;
            }
            const Vec2 g = f.gradient / uu;
            f.gradient = g;
            f.hessian = f.hessian * (1.0 / uu) - SymMatrix2::sym_outer(g, g);
            kept.push_back(f);
        }
        fits.fits = std::move(kept);
    }

    LogHessianField field;
    field.connection = connection;
    field.exclusion_margin = m;
    field.candidates = fits.candidates;
    field.dropped = fits.dropped;
    field.h_max = mesh.h_max;
    field.samples.reserve(fits.fits.size());
    for (const auto& f : fits.fits) {
        LogHessianSample s;
        s.vertex = f.vertex;
        s.x = f.x;
        s.v = v(f.vertex);
        s.grad = f.gradient;
        s.hess_flat = f.hessian;
        const Jet2 phi = connection.log_factor(f.x);
        s.phi = phi.v;
        s.grad_phi = phi.g;
        s.hess = conformal_hessian(f.hessian, f.gradient, phi.g, SymMatrix2::identity());
        field.samples.push_back(s);
    }
    return field;
}

SymMatrix2 orthonormal_hessian_of(const ConformalChart& connection, const Jet2& f, Point x) {
    const Jet2 phi = connection.log_factor(x);
    return conformal_hessian(f.h, f.g, phi.g, SymMatrix2::identity()) * std::exp(-2.0 * phi.v);
}

ConformalChart model_chart(double K) {
    if (K > 0.0) return ConformalChart::stereographic_sphere(1.0 / std::sqrt(K));
    if (K == 0.0) return ConformalChart::euclidean();
    if (K == -1.0) return ConformalChart::poincare_disk();
    throw UnsupportedOperation("no model chart for curvature K < 0 other than -1");
}

void require_space_form(const ConformalChart& connection) {
    if (connection.deformed()) {
        throw UnsupportedOperation("barrier operator requires a constant-curvature connection; chart " +
                                   connection.label() + " is deformed");
    }
}

}  // namespace

FitSet fit_local_polynomials(const TriMesh& mesh, const Eigen::VectorXd& values, const std::vector<int>& vertices,
                             const FitOptions& options) {
    return fit_impl(mesh, values, vertices, options, true);
}

FitSet fit_local_polynomials_serial(const TriMesh& mesh, const Eigen::VectorXd& values,
                                    const std::vector<int>& vertices, const FitOptions& options) {
    return fit_impl(mesh, values, vertices, options, false);
}

std::vector<double> boundary_distances(const TriMesh& mesh) {
    std::set<std::pair<int, int>> directed;
    for (const auto& t : mesh.triangles) {
        for (int k = 0; k < 3; ++k) directed.emplace(t[static_cast<std::size_t>(k)], t[static_cast<std::size_t>((k + 1) % 3)]);
    }
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : directed) {
        if (!directed.count({e.second, e.first})) edges.push_back(e);
    }
    std::vector<double> dist(mesh.num_vertices(), 0.0);
    const auto n = static_cast<std::ptrdiff_t>(mesh.num_vertices());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (mesh.boundary[static_cast<std::size_t>(i)]) continue;
        const Point p = mesh.vertices[static_cast<std::size_t>(i)];
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [a, b] : edges) {
            best = std::min(best, point_segment_distance(p, mesh.vertices[static_cast<std::size_t>(a)],
                                                         mesh.vertices[static_cast<std::size_t>(b)]));
        }
        dist[static_cast<std::size_t>(i)] = best;
    }
    return dist;
}

double default_exclusion_margin(const TriMesh& mesh) {
    std::vector<Point> b;
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
        if (mesh.boundary[i]) b.push_back(mesh.vertices[i]);
    }
    double d = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        for (std::size_t j = i + 1; j < b.size(); ++j) d = std::max(d, (b[i] - b[j]).norm());
    }
    return std::max(2.0 * mesh.h_max, d / 50.0);
}

LogHessianField log_hessian_field(const EigenResult& result, const TriMesh& mesh, const ConformalChart& connection,
                                  std::optional<double> margin, const FitOptions& options) {
    return log_hessian_impl(result, mesh, connection, margin, options, true);
}

LogHessianField log_hessian_field_serial(const EigenResult& result, const TriMesh& mesh,
                                         const ConformalChart& connection, std::optional<double> margin,
                                         const FitOptions& options) {
    return log_hessian_impl(result, mesh, connection, margin, options, false);
}

SymMatrix2 flat_hessian_from_connection(const SymMatrix2& hess_connection, Vec2 grad_v, Vec2 grad_phi) {
    return hess_connection + SymMatrix2::sym_outer(grad_phi, grad_v) * 2.0 -
           SymMatrix2::scalar(dot(grad_phi, grad_v));
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Concave: return "concave";
        case Verdict::Violated: return "violated";
        case Verdict::InconclusiveMargin: return "inconclusive-margin";
    }
    return "unknown";
}

ConcavityReport concavity_report(const LogHessianField& field, const ScalarField& b, double tolerance_scale) {
    ConcavityReport rep;
    rep.b_used = b.is_constant() ? "constant " + [&] {
        std::ostringstream s;
        s.precision(17);
        s << b.constant_value();
        return s.str();
    }()
                                 : b.description();
    rep.exclusion_margin = field.exclusion_margin;
    rep.retained = field.samples.size();
    rep.dropped = field.dropped;
    rep.max_hess_eig = -std::numeric_limits<double>::infinity();
    double scale = 0.0;
    for (const auto& s : field.samples) {
        const double inv_g = std::exp(-2.0 * s.phi);
        const SymMatrix2 normalized = s.hess * inv_g;
        scale = std::max(scale, normalized.max_abs_entry());
        const SymMatrix2 form = normalized + SymMatrix2::scalar(b(s.x));
        const double top = form.eigenvalues()[1];
        if (top > rep.max_hess_eig) {
            rep.max_hess_eig = top;
            rep.worst_point = s.x;
            rep.worst_direction = form.top_eigenvector();
        }
    }
    rep.tolerance = tolerance_scale * scale;
    if (field.inconclusive()) {
        rep.verdict = Verdict::InconclusiveMargin;
    } else {
        rep.verdict = rep.max_hess_eig <= rep.tolerance ? Verdict::Concave : Verdict::Violated;
    }
    if (field.samples.empty()) rep.max_hess_eig = kNaN;
    return rep;
}

double barrier_operator(const BarrierState& s, bool eliminate_laplacian) {
    const double grad_v_sq = s.grad_v.sq_norm();
    const double lap_v = eliminate_laplacian ? s.V - s.lambda * s.rho - grad_v_sq : s.hess_v.trace();
    const double v_X = dot(s.grad_v, s.X);
    const double v_XX = s.hess_v.quad(s.X);
    return -2.0 * s.b * s.b + 2.0 * dot(s.grad_b, s.grad_v) - 2.0 * s.K * (grad_v_sq + lap_v - v_X * v_X - v_XX) +
           s.lap_b - s.lambda * s.rho_XX + s.V_XX;
}

double barrier_operator(const ConformalChart& connection, const BarrierState& state, bool eliminate_laplacian) {
    require_space_form(connection);
    return barrier_operator(state, eliminate_laplacian);
}

double barrier_family_closed_form(double t, double lambda, double rho, double rho_XX, double V, double V_XX,
                                  double v_X, double K) {
    return t * lambda * (2.0 * K * rho - rho_XX) + 2.0 * K * v_X * v_X + 2.0 * K * lambda * (1.0 - t) +
           t * (V_XX - 2.0 * K * V);
}

SymMatrix2 orthonormal_hessian(const ConformalChart& connection, const ScalarField& f, Point x) {
    return orthonormal_hessian_of(connection, f.jet(x), x);
}

BarrierState barrier_state_from_sample(const ConformalChart& connection, const LogHessianSample& sample, Vec2 X_flat,
                                       double lambda, const ScalarField& rho_connection,
                                       const ScalarField& V_connection, const ScalarField& b) {
    require_space_form(connection);
    const double n = X_flat.norm();
    if (!(n > 0.0)) throw DomainError("barrier direction must be nonzero");
    const double e = std::exp(-sample.phi);
    BarrierState s;
    s.point = sample.x;
    s.X = X_flat / n;
    const Jet2 bj = b.jet(sample.x);
    s.b = bj.v;
    s.grad_b = bj.g * e;
    s.lap_b = orthonormal_hessian_of(connection, bj, sample.x).trace();
    s.grad_v = sample.grad * e;
    s.hess_v = sample.hess * (e * e);
    s.lambda = lambda;
    s.rho = rho_connection(sample.x);
    s.V = V_connection(sample.x);
    s.rho_XX = orthonormal_hessian(connection, rho_connection, sample.x).quad(s.X);
    s.V_XX = orthonormal_hessian(connection, V_connection, sample.x).quad(s.X);
    s.K = connection.curvature();
    return s;
}

LogEquationResidual log_equation_residual(const LogHessianField& field, double lambda, const ScalarField& V_flat,
                           const ScalarField& rho_flat) {
    LogEquationResidual out;
    double sum = 0.0;
    for (const auto& s : field.samples) {
        const double inv_g = std::exp(-2.0 * s.phi);
        const double grad_sq = s.grad.sq_norm() * inv_g;
        const double lap = s.hess.trace() * inv_g;
        const double rhs = (V_flat(s.x) - lambda * rho_flat(s.x)) * inv_g;
        const double r = std::fabs(grad_sq + lap - rhs);
        sum += r;
        out.max_abs = std::max(out.max_abs, r);
    }
    out.samples = field.samples.size();
    out.mean_abs = out.samples ? sum / static_cast<double>(out.samples) : kNaN;
    return out;
}

ConditionCheck check_space_form_condition(const ScalarField& V, const ScalarField& rho, double lambda_t,
                                     const ConformalChart& connection, const Domain2D& domain, int samples) {
    require_space_form(connection);
    std::vector<Point> pts = domain.vertices();
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const Point& p : domain.vertices()) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const double step = std::sqrt(domain.area() / std::max(1, samples));
    for (double y = ymin + 0.5 * step; y < ymax; y += step) {
        for (double x = xmin + 0.5 * step; x < xmax; x += step) {
            if (domain.contains({x, y})) pts.push_back({x, y});
        }
    }
    const double K = connection.curvature();
    std::vector<double> margins(pts.size());
    const auto n = static_cast<std::ptrdiff_t>(pts.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const Point p = pts[static_cast<std::size_t>(i)];
        const Jet2 W = V.jet(p) - rho.jet(p) * lambda_t;
        margins[static_cast<std::size_t>(i)] = orthonormal_hessian_of(connection, W, p).eigenvalues()[0] - 2.0 * K * W.v;
    }
    ConditionCheck out;
    out.samples = pts.size();
    out.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (margins[i] < out.worst_margin) {
            out.worst_margin = margins[i];
            out.worst_point = pts[i];
        }
    }
    out.holds = !pts.empty() && out.worst_margin > 0.0;
    return out;
}

ConditionCheck check_space_form_condition(const ScalarField& V, const ScalarField& rho, double lambda_t, double K,
                                     const Domain2D& domain, int samples) {
    return check_space_form_condition(V, rho, lambda_t, model_chart(K), domain, samples);
}

SweepResult continuity_sweep(const WeightedProblem& base, const std::vector<double>& t_grid,
                             const ConformalChart& connection, const ScalarField& b, const SweepOptions& options) {
    if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end()) || t_grid.front() != 0.0 ||
        t_grid.back() != 1.0) {
        throw DomainError("t grid must be sorted and run from 0 to 1");
    }
    const TriMesh mesh = triangulate(base.domain, options.h, options.mesh);
    const ScalarField conn_factor =
        ScalarField::from_values([connection](Point p) { return connection.factor(p); }, "connection factor");

    std::vector<SweepPoint> points(t_grid.size());
    std::vector<std::string> errors(t_grid.size());
    const auto n = static_cast<std::ptrdiff_t>(t_grid.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const double t = t_grid[static_cast<std::size_t>(k)];
        try {
            WeightedProblem p = base;
            p.rho = t * base.rho + (1.0 - t) * conn_factor;
            p.V = t * base.V;
            const auto sys = assemble(p, mesh);
            const EigenResult eig = solve_lowest(sys, 2, options.solver);
            const auto field = log_hessian_field(eig, mesh, connection, options.margin);
            SweepPoint& out = points[static_cast<std::size_t>(k)];
            out.t = t;
            out.lambda1 = eig.lambda1;
            out.lambda2 = eig.lambda2;
            out.gap = eig.gap;
            out.report = concavity_report(field, b);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(k)] = e.what();
        }
    }
    for (std::size_t k = 0; k < errors.size(); ++k) {
        if (!errors[k].empty()) {
            std::ostringstream msg;
            msg << "sweep failed at t = " << t_grid[k] << ": " << errors[k];
            throw NumericalError(msg.str());
        }
    }
    SweepResult out;
    out.points = std::move(points);
    for (const auto& p : out.points) {
        if (p.report.verdict == Verdict::Violated) {
            out.first_violation = p.t;
            break;
        }
    }
    return out;
}

void write_sweep_csv(const SweepResult& sweep, std::ostream& out) {
    out.precision(17);
    out << "t,lambda1,lambda2,gap,max_hess_eig,verdict\n";
    for (const auto& p : sweep.points) {
        out << p.t << ',' << p.lambda1 << ',' << p.lambda2 << ',' << p.gap << ',' << p.report.max_hess_eig << ','
            << to_string(p.report.verdict) << '\n';
    }
}

void write_field_csv(const LogHessianField& field, std::ostream& out) {
    out.precision(17);
    out << "x,y,v,v1,v2,h11,h12,h22\n";
    for (const auto& s : field.samples) {
        out << s.x.x << ',' << s.x.y << ',' << s.v << ',' << s.grad.x << ',' << s.grad.y << ',' << s.hess.a11 << ','
            << s.hess.a12 << ',' << s.hess.a22 << '\n';
    }
}

}  // namespace confgap
