#include "confgap/horoconvex.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "confgap/errors.hpp"

namespace confgap {

namespace {

constexpr double pi = std::numbers::pi;

void require_in_disk(Point x) {
    if (!(x.sq_norm() < 1.0)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "point (" << x.x << ", " << x.y << ") is outside the unit disk";
        throw DomainError(msg.str());
    }
}

StageResult stage(const std::string& name) {
    StageResult s;
    s.name = name;
    return s;
}

}  // namespace

double optimal_sphere_radius() { return std::sqrt(7.0 - std::sqrt(33.0)) / 2.0; }

double rho_hyper_to_sphere(Point x, double R) {
    require_in_disk(x);
    const double s = x.sq_norm();
    const double num = R * R + s;
    const double den = R * R * (1.0 - s);
    return num * num / (den * den);
}

ScalarField rho_hyper_to_sphere_field(double R) {
    std::ostringstream d;
    d.precision(17);
    d << "(R^2+|x|^2)^2/(R^4(1-|x|^2)^2), R=" << R;
    return ScalarField::from_jet(
        [R](const Jet2& x1, const Jet2& x2) {
            const Jet2 s = x1 * x1 + x2 * x2;
            const Jet2 q = (R * R + s) / ((1.0 - s) * (R * R));
            return q * q;
        },
        d.str());
}

SymMatrix2 spherical_hessian_rho(Point x, double R) {
    require_in_disk(x);
    const double s = x.sq_norm();
    const double R2 = R * R;
    const double pre = 4.0 * (1.0 + R2) / (R2 * R2 * std::pow(1.0 - s, 4));
    const double x1s = x.x * x.x, x2s = x.y * x.y;
    const double a11 = 5.0 * x1s - x2s + R2 * (1.0 + 5.0 * x1s - x2s) + s * s;
    const double a22 = 5.0 * x2s - x1s + R2 * (1.0 + 5.0 * x2s - x1s) + s * s;
    const double a12 = 6.0 * (1.0 + R2) * x.x * x.y;
    return SymMatrix2{a11, a12, a22} * pre;
}

MuPair mu_eigenvalues(double r, double R) {
    const double s = r * r, R2 = R * R;
    const double d = 1.0 - s;
    return {4.0 * (1.0 + R2) * (R2 - s) / (R2 * R2 * d * d * d),
            4.0 * (1.0 + R2) * (s * (5.0 + s) + R2 * (1.0 + 5.0 * s)) / (R2 * R2 * d * d * d * d)};
}

MuPair normalized_mu(double r, double R) {
    const double s = r * r, R2 = R * R;
    const double d = 1.0 - s;
    return {(1.0 + R2) * (R2 - s) / (R2 * d), (1.0 + R2) * (s * (5.0 + s) + R2 * (1.0 + 5.0 * s)) / (R2 * d * d)};
}

AdmissibleRadius admissible_radius(double R) {
    if (!(R > 0.0 && R < 1.0)) {
        std::ostringstream msg;
        msg << "admissible radius needs 0 < R < 1, got R = " << R;
        throw DomainError(msg.str());
    }
    const double R2 = R * R, R4 = R2 * R2;
    AdmissibleRadius out;
    out.r_max_sq = (-5.0 - 5.0 * R4 - 14.0 * R2 + (1.0 + R2) * std::sqrt(25.0 + 94.0 * R2 + 25.0 * R4)) /
                   (2.0 - 2.0 * R2);
    out.r_max = std::sqrt(out.r_max_sq);
    out.mu1_below_two = true;
    constexpr int kSamples = 1000;
    for (int i = 0; i <= kSamples; ++i) {
        const double r = out.r_max * i / kSamples;
        if (!(normalized_mu(r, R).mu1 < 2.0)) out.mu1_below_two = false;
    }
    return out;
}

OptimalRadius optimal_R() {
    OptimalRadius out;
    out.closed_form = optimal_sphere_radius();
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.01, b = 0.99;
    auto f = [](double R) { return admissible_radius(R).r_max_sq; };
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > 1e-10) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
        ++out.iterations;
    }
    out.golden_section = 0.5 * (a + b);
    return out;
}

double gap_bound_coefficient() { return 32.0 / (3.0 * (7.0 + std::sqrt(33.0))); }

double gap_bound_constant() { return 4.0 / 3.0; }

double diameter_threshold() {
    // arccsch(z) = asinh(1/z)
    return 2.0 * std::asinh(1.0 / (2.0 * std::sqrt(11.0 / 3.0)));
}

double gap_lower_bound(double D) {
    const double dmax = diameter_threshold();
    if (!(D > 0.0 && D < dmax)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "diameter " << D << " is outside (0, D_max) with D_max = " << dmax;
        throw ThresholdError(msg.str());
    }
    return gap_bound_coefficient() * pi * pi / (D * D) + gap_bound_constant();
}

GapBoundIngredients gap_bound_ingredients(double R) {
    GapBoundIngredients g;
    g.R = R;
    g.K = 1.0 / (R * R);
    g.r_max = admissible_radius(R).r_max;
    // rho_hyper_to_sphere is radially increasing, so its sup over the ball sits on the rim
    g.rho_sup = rho_hyper_to_sphere({g.r_max, 0.0}, R);
    g.coefficient = 1.0 / g.rho_sup;
    g.constant = g.K / (2.0 * g.rho_sup);
    return g;
}

Step2Margin step2_margin(double r, double R) {
    if (!(r >= 0.0) || !(R > 0.5)) {
        std::ostringstream msg;
        msg << "step 2 margin needs r >= 0 and R > 1/2, got r = " << r << ", R = " << R;
        throw DomainError(msg.str());
    }
    const double e_minus_phi = (R * R + r * r) / (2.0 * R * R);
    const double q = 0.5 + r;
    return {e_minus_phi * (1.0 - 2.0 * r) / (q * q), r >= 0.5};
}

HoroconvexConfig HoroconvexConfig::from_radius(double R) {
    HoroconvexConfig c;
    c.R = R;
    c.r_max = admissible_radius(R).r_max;
    c.C_max = 2.0 * std::atanh(c.r_max);
    c.D_max = dekster_min_diameter(c.C_max);
    return c;
}

PipelineReport verify_pipeline(const Domain2D& domain, const PipelineOptions& options) {
    if (domain.chart().model() != Model::PoincareDisk || domain.chart().deformed()) {
        throw UnsupportedOperation("the horoconvex pipeline needs a domain in the undeformed Poincare disk");
    }
    const HoroconvexConfig& cfg = options.config;
    const ConformalChart disk = ConformalChart::poincare_disk();
    const ConformalChart sphere = ConformalChart::stereographic_sphere(cfg.R);
    PipelineReport rep;
    auto finish = [&rep](StageResult s) {
        const bool ok = s.passed;
        if (!ok && rep.failed_stage.empty()) rep.failed_stage = s.name;
        rep.stages.push_back(std::move(s));
        return ok;
    };

    {
        StageResult s = stage(kStageNames[0]);
        const auto cert = is_horoconvex(domain);
        rep.diameter = diameter(domain, disk);
        s.values = {{"min_geodesic_curvature", cert.min_geodesic_curvature},
                    {"diameter", rep.diameter},
                    {"D_max", cfg.D_max}};
        s.passed = cert.holds && rep.diameter < cfg.D_max;
        std::ostringstream msg;
        msg.precision(17);
        if (!cert.holds) {
            msg << "boundary is not horoconvex: min hyperbolic curvature " << cert.min_geodesic_curvature;
        } else if (!(rep.diameter < cfg.D_max)) {
            msg << "hyperbolic diameter " << rep.diameter << " is not below D_max = " << cfg.D_max;
        } else {
            msg << "horoconvex with diameter below D_max";
        }
        s.message = msg.str();
        if (!finish(std::move(s))) return rep;
    }

    Domain2D centered = domain;
    {
        StageResult s = stage(kStageNames[1]);
        const Circumball ball = circumradius(domain, disk);
        centered = mobius_recenter(domain, ball.center);
        s.values = {{"circumcenter_x", ball.center.x},
                    {"circumcenter_y", ball.center.y},
                    {"circumradius", ball.radius}};
        s.passed = true;
        s.message = "circumcenter moved to the origin";
        finish(std::move(s));
    }

    {
        StageResult s = stage(kStageNames[2]);
        const Circumball ball = circumradius(centered, disk);
        const double rmax = centered.max_radius();
        s.values = {{"circumradius", ball.radius},
                    {"C_max", cfg.C_max},
                    {"max_euclidean_radius", rmax},
                    {"r_max", cfg.r_max}};
        s.passed = ball.radius <= cfg.C_max && rmax <= cfg.r_max;
        s.message = s.passed ? "contained in the admissible ball" : "not contained in the admissible ball";
        if (!finish(std::move(s))) return rep;
    }

    {
        StageResult s = stage(kStageNames[3]);
        const auto cert = is_convex_wrt(centered, sphere);
        const auto margin = step2_margin(centered.max_radius(), cfg.R);
        s.values = {{"min_sphere_curvature", cert.min_geodesic_curvature}, {"step2_margin", margin.value}};
        s.passed = cert.holds;
        s.message = cert.holds ? "convex for the sphere metric" : "not convex for the sphere metric";
        if (!finish(std::move(s))) return rep;
    }

    {
        StageResult s = stage(kStageNames[4]);
        const WeightedProblem problem = laplace_beltrami_problem(centered);
        rep.gap = fundamental_gap(problem, options.h, options.mesh, options.solver);
        const auto& g = *rep.gap;
        s.values = {{"h", options.h},
                    {"lambda1", g.fine.lambda1},
                    {"lambda2", g.fine.lambda2},
                    {"gap_coarse", g.coarse.gap},
                    {"gap_fine", g.fine.gap},
                    {"extrapolated_gap", g.extrapolated_gap},
                    {"residual1", g.fine.residual1},
                    {"residual2", g.fine.residual2},
                    {"vertices", static_cast<double>(g.fine.num_vertices)}};
        s.passed = g.fine.gap > 0.0 && g.coarse.gap > 0.0;
        s.message = "hyperbolic Dirichlet problem solved at h and h/2";
        if (!finish(std::move(s))) return rep;
    }

    {
        StageResult s = stage(kStageNames[5]);
        const auto field = log_hessian_field(rep.gap->fine, rep.gap->fine_mesh, sphere, options.margin);
        rep.concavity = concavity_report(field);
        const auto& c = *rep.concavity;
        s.values = {{"max_hess_eig", c.max_hess_eig},
                    {"tolerance", c.tolerance},
                    {"exclusion_margin", c.exclusion_margin},
                    {"retained", static_cast<double>(c.retained)},
                    {"dropped", static_cast<double>(c.dropped)}};
        s.passed = c.verdict == Verdict::Concave;
        s.message = "log u1 " + to_string(c.verdict) + " for the sphere connection";
        if (!finish(std::move(s))) return rep;
    }

    {
        StageResult s = stage(kStageNames[6]);
        rep.bound = gap_lower_bound(rep.diameter);
        const double gap = rep.gap->extrapolated_gap;
        s.values = {{"extrapolated_gap", gap}, {"bound", rep.bound}, {"ratio", gap / rep.bound}};
        s.passed = gap >= rep.bound;
        s.message = s.passed ? "gap exceeds the lower bound" : "gap is below the lower bound";
        finish(std::move(s));
    }
    rep.passed = rep.failed_stage.empty();
    return rep;
}

Domain2D hyperbolic_lens(double D, double alpha, int n_per_arc) {
    const double t = std::tanh(D / 4.0);
    // a Euclidean circle |z - c| = s in the disk has hyperbolic curvature (1 - |c|^2 + s^2) / (2 s)
    const double s = (1.0 + t * t) / (2.0 * alpha);
    if (!(D > 0.0) || !(alpha > 0.0) || s < t || n_per_arc < 2) {
        throw DomainError("lens needs D > 0, n_per_arc >= 2 and alpha <= (1 + t^2) / (2 t)");
    }
    const double c = std::sqrt(s * s - t * t);
    const double half_angle = std::asin(t / s);
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(2 * n_per_arc));
    for (int k = 0; k < n_per_arc; ++k) {
        // upper arc from (t, 0) to (-t, 0), centre (0, -c)
        const double a = pi / 2.0 - half_angle + 2.0 * half_angle * k / n_per_arc;
        pts.push_back({s * std::cos(a), -c + s * std::sin(a)});
    }
    for (int k = 0; k < n_per_arc; ++k) {
        const Point p = pts[static_cast<std::size_t>(k)];
        pts.push_back({-p.x, -p.y});
    }
    return Domain2D(ConformalChart::poincare_disk(), std::move(pts));
}

std::vector<ConvexityClassPoint> convexity_class_sweep(const std::vector<double>& diameters,
                                                       const std::vector<double>& alphas, double relative_h,
                                                       const SolverOptions& solver) {
    std::vector<ConvexityClassPoint> rows;
    for (double D : diameters) {
        for (double alpha : alphas) {
            const Domain2D lens = hyperbolic_lens(D, alpha, 64);
            ConvexityClassPoint p;
            p.D = D;
            p.alpha = alpha;
            p.diameter = diameter(lens, ConformalChart::poincare_disk());
            p.min_curvature = is_horoconvex(lens).min_geodesic_curvature;
            p.sphere_convex = is_convex_wrt(lens, ConformalChart::stereographic_sphere(optimal_sphere_radius())).holds;
            const double h = relative_h * std::tanh(D / 4.0);
            const auto eig = solve_lowest(assemble(laplace_beltrami_problem(lens), triangulate(lens, h)), 2, solver);
            p.gap = eig.gap;
            p.scaled_gap = eig.gap * p.diameter * p.diameter;
            rows.push_back(p);
        }
    }
    return rows;
}

void write_convexity_class_csv(const std::vector<ConvexityClassPoint>& rows, std::ostream& out) {
    out.precision(17);
    out << "D,alpha,diameter,min_curvature,sphere_convex,gap,scaled_gap\n";
    for (const auto& r : rows) {
        out << r.D << ',' << r.alpha << ',' << r.diameter << ',' << r.min_curvature << ',' << (r.sphere_convex ? 1 : 0)
            << ',' << r.gap << ',' << r.scaled_gap << '\n';
    }
}

}  // namespace confgap
