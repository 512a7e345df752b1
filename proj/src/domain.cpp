#include "confgap/domain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "confgap/errors.hpp"

namespace confgap {

namespace {

bool segments_cross(Point a, Point b, Point c, Point d) {
    const double d1 = cross(b - a, c - a);
    const double d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c);
    const double d4 = cross(d - c, b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

double signed_area(const std::vector<Point>& v) {
    double s = 0.0;
    for (std::size_t i = 0, n = v.size(); i < n; ++i) s += cross(v[i], v[(i + 1) % n]);
    return 0.5 * s;
}

double point_segment_distance(Point p, Point a, Point b) {
    const Vec2 ab = b - a;
    const double len2 = ab.sq_norm();
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

// circle through three points; used to carry exact circle overlays through isometries
std::optional<AnalyticBoundary> circle_through(Point a, Point b, Point c, std::string family) {
    const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if (std::fabs(d) < 1e-300) return std::nullopt;
    const double a2 = a.sq_norm(), b2 = b.sq_norm(), c2 = c.sq_norm();
    const Point center{(a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
                       (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d};
    AnalyticBoundary ab;
    ab.family = std::move(family);
    ab.kind = AnalyticBoundary::Kind::Circle;
    ab.center = center;
    ab.a = ab.b = (a - center).norm();
    return ab;
}

std::optional<AnalyticBoundary> map_overlay(const std::optional<AnalyticBoundary>& overlay,
                                            const std::vector<Point>& mapped) {
    if (!overlay || overlay->kind != AnalyticBoundary::Kind::Circle || mapped.size() < 3) return std::nullopt;
    const std::size_t n = mapped.size();
    auto out = circle_through(mapped[0], mapped[n / 3], mapped[(2 * n) / 3], overlay->family);
    if (out) out->params = overlay->params;
    return out;
}

}  // namespace

double AnalyticBoundary::flat_curvature(Point p) const {
    if (kind == Kind::Circle) return 1.0 / a;
    const Vec2 d = p - center;
    const double c = std::cos(angle), s = std::sin(angle);
    const double xl = c * d.x + s * d.y;
    const double yl = -s * d.x + c * d.y;
    const double t = std::atan2(yl / b, xl / a);
    const double st = std::sin(t), ct = std::cos(t);
    return a * b / std::pow(a * a * st * st + b * b * ct * ct, 1.5);
}

Vec2 AnalyticBoundary::outward_normal(Point p) const {
    const Vec2 d = p - center;
    if (kind == Kind::Circle) return d / d.norm();
    const double c = std::cos(angle), s = std::sin(angle);
    const double xl = c * d.x + s * d.y;
    const double yl = -s * d.x + c * d.y;
    const double t = std::atan2(yl / b, xl / a);
    Vec2 nl{b * std::cos(t), a * std::sin(t)};
    nl = nl / nl.norm();
    return {c * nl.x - s * nl.y, s * nl.x + c * nl.y};
}

Domain2D::Domain2D(ConformalChart chart, std::vector<Point> vertices, std::optional<AnalyticBoundary> analytic)
    : chart_(std::move(chart)), vertices_(std::move(vertices)), analytic_(std::move(analytic)) {
    const std::size_t n = vertices_.size();
    if (n < 3) throw MalformedDomain("domain boundary needs at least 3 vertices");
    for (std::size_t i = 0; i < n; ++i) {
        if (!chart_.in_range(vertices_[i])) {
            throw DomainError("boundary vertex " + std::to_string(i) + " outside the range of " + chart_.label());
        }
        if (vertices_[i] == vertices_[(i + 1) % n]) {
            throw MalformedDomain("repeated consecutive vertex at index " + std::to_string(i));
        }
    }
    const double area = signed_area(vertices_);
    if (!(std::fabs(area) > 0.0)) throw MalformedDomain("degenerate boundary polygon with zero area");
    if (area < 0.0) std::reverse(vertices_.begin(), vertices_.end());
    for (std::size_t i = 0; i < n; ++i) {
        const Point a = vertices_[i], b = vertices_[(i + 1) % n];
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            if (segments_cross(a, b, vertices_[j], vertices_[(j + 1) % n])) {
                throw MalformedDomain("boundary polygon self-intersects at edges " + std::to_string(i) + " and " +
                                      std::to_string(j));
            }
        }
    }
}

Domain2D Domain2D::euclidean_circle(const ConformalChart& chart, Point center, double radius, int n) {
    if (n < 3 || !(radius > 0.0)) throw MalformedDomain("circle needs n >= 3 and a positive radius");
    std::vector<Point> v;
    v.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * std::numbers::pi * k / n;
        v.push_back({center.x + radius * std::cos(t), center.y + radius * std::sin(t)});
    }
    AnalyticBoundary ab;
    ab.family = "euclidean_circle";
    ab.center = center;
    ab.a = ab.b = radius;
    ab.params = {{"cx", center.x}, {"cy", center.y}, {"radius", radius}, {"n", n}};
    return Domain2D(chart, std::move(v), ab);
}

Domain2D Domain2D::hyperbolic_circle(Point hyperbolic_center, double hyperbolic_radius, int n) {
    if (!(hyperbolic_radius > 0.0)) throw MalformedDomain("hyperbolic radius must be positive");
    if (!(hyperbolic_center.sq_norm() < 1.0)) throw DomainError("hyperbolic center outside the unit disk");
    const double t = std::tanh(0.5 * hyperbolic_radius);
    const double c = hyperbolic_center.norm();
    const Vec2 dir = c > 0.0 ? hyperbolic_center / c : Vec2{1.0, 0.0};
    const double p1 = (c + t) / (1.0 + c * t);
    const double p2 = (c - t) / (1.0 - c * t);
    const Point ecenter = dir * (0.5 * (p1 + p2));
    const double eradius = 0.5 * (p1 - p2);
    Domain2D d = euclidean_circle(ConformalChart::poincare_disk(), ecenter, eradius, n);
    d.analytic_->family = "hyperbolic_circle";
    d.analytic_->params = {{"cx", hyperbolic_center.x},
                           {"cy", hyperbolic_center.y},
                           {"radius", hyperbolic_radius},
                           {"n", n}};
    return d;
}

Domain2D Domain2D::horocycle(double omega, double a, int n) {
    if (!(a > 0.0 && a < 1.0) || n < 3) throw MalformedDomain("horocycle needs 0 < a < 1 and n >= 3");
    const Vec2 dir{std::cos(omega), std::sin(omega)};
    const Point center = dir * (1.0 - a);
    std::vector<Point> v;
    v.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double t = omega + std::numbers::pi * (2.0 * k + 1.0) / n;
        v.push_back({center.x + a * std::cos(t), center.y + a * std::sin(t)});
    }
    AnalyticBoundary ab;
    ab.family = "horocycle";
    ab.center = center;
    ab.a = ab.b = a;
    ab.params = {{"omega", omega}, {"radius", a}, {"n", n}};
    return Domain2D(ConformalChart::poincare_disk(), std::move(v), ab);
}

Domain2D Domain2D::ellipse(const ConformalChart& chart, Point center, double a, double b, double angle, int n) {
    if (n < 3 || !(a > 0.0) || !(b > 0.0)) throw MalformedDomain("ellipse needs n >= 3 and positive axes");
    const double c = std::cos(angle), s = std::sin(angle);
    std::vector<Point> v;
    v.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * std::numbers::pi * k / n;
        const double xl = a * std::cos(t), yl = b * std::sin(t);
        v.push_back({center.x + c * xl - s * yl, center.y + s * xl + c * yl});
    }
    AnalyticBoundary ab;
    ab.family = "ellipse";
    ab.kind = AnalyticBoundary::Kind::Ellipse;
    ab.center = center;
    ab.a = a;
    ab.b = b;
    ab.angle = angle;
    ab.params = {{"cx", center.x}, {"cy", center.y}, {"a", a}, {"b", b}, {"angle", angle}, {"n", n}};
    return Domain2D(chart, std::move(v), ab);
}

Domain2D Domain2D::rectangle(const ConformalChart& chart, Point lo, Point hi, int per_side) {
    if (per_side < 1 || !(hi.x > lo.x) || !(hi.y > lo.y)) throw MalformedDomain("invalid rectangle");
    const std::array<Point, 4> corners{lo, Point{hi.x, lo.y}, hi, Point{lo.x, hi.y}};
    std::vector<Point> v;
    for (int side = 0; side < 4; ++side) {
        const Point a = corners[static_cast<std::size_t>(side)];
        const Point b = corners[static_cast<std::size_t>((side + 1) % 4)];
        for (int k = 0; k < per_side; ++k) v.push_back(a + (b - a) * (static_cast<double>(k) / per_side));
    }
    return Domain2D(chart, std::move(v));
}

double Domain2D::area() const { return signed_area(vertices_); }

double Domain2D::perimeter() const {
    double s = 0.0;
    for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) s += (vertices_[(i + 1) % n] - vertices_[i]).norm();
    return s;
}

bool Domain2D::contains(Point p) const {
    bool inside = false;
    for (std::size_t i = 0, n = vertices_.size(), j = n - 1; i < n; j = i++) {
        const Point a = vertices_[i], b = vertices_[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

double Domain2D::distance_to_boundary(Point p) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) {
        best = std::min(best, point_segment_distance(p, vertices_[i], vertices_[(i + 1) % n]));
    }
    return best;
}

Point Domain2D::centroid() const {
    double a = 0.0;
    Vec2 c{};
    for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) {
        const Point p = vertices_[i], q = vertices_[(i + 1) % n];
        const double w = cross(p, q);
        a += w;
        c += (p + q) * w;
    }
    return c / (3.0 * a);
}

double Domain2D::max_radius() const {
    double r = 0.0;
    for (const Point& p : vertices_) r = std::max(r, p.norm());
    return r;
}

Domain2D Domain2D::with_chart(ConformalChart chart) const { return Domain2D(std::move(chart), vertices_, analytic_); }

std::vector<CurvatureSample> geodesic_curvature_profile(const Domain2D& domain, const ConformalChart& target_chart) {
    const auto& v = domain.vertices();
    const std::size_t n = v.size();
    if (n < 3) throw MalformedDomain("curvature profile needs at least 3 vertices");
    const auto& overlay = domain.analytic();
    if (!overlay && n < 64) {
        throw MalformedDomain("discrete curvature estimation needs at least 64 boundary vertices (got " +
                              std::to_string(n) + ")");
    }

    std::vector<double> turning(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e0 = v[i] - v[(i + n - 1) % n];
        const Vec2 e1 = v[(i + 1) % n] - v[i];
        turning[i] = std::atan2(cross(e0, e1), dot(e0, e1));
    }
    std::vector<double> sorted(n);
    std::transform(turning.begin(), turning.end(), sorted.begin(), [](double t) { return std::fabs(t); });
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 2), sorted.end());
    const double median = sorted[n / 2];
    const double corner_threshold = std::max(0.35, 3.0 * median);

    std::vector<CurvatureSample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Point a = v[(i + n - 1) % n], p = v[i], c = v[(i + 1) % n];
        double kappa = 0.0;
        Vec2 normal{};
        if (overlay) {
            kappa = overlay->flat_curvature(p);
            normal = overlay->outward_normal(p);
        } else {
            const double denom = (p - a).norm() * (c - p).norm() * (c - a).norm();
            kappa = 2.0 * cross(p - a, c - p) / denom;
            const Vec2 t = (c - a) / (c - a).norm();
            normal = {t.y, -t.x};
        }
        const Jet2 phi = target_chart.log_factor(p);
        CurvatureSample s;
        s.point = p;
        s.kappa = principal_curvature_transform(kappa, dot(phi.g, normal), phi.v);
        if (!overlay && std::fabs(turning[i]) > corner_threshold) {
            s.corner = true;
            s.reflex = turning[i] < 0.0;
        }
        out[i] = s;
    }
    return out;
}

namespace {

ConvexityCertificate certify(const Domain2D& domain, const ConformalChart& target, double threshold,
                             double tolerance, std::string label) {
    const auto profile = geodesic_curvature_profile(domain, target);
    ConvexityCertificate cert;
    cert.metric_label = std::move(label);
    cert.tolerance = tolerance;
    cert.threshold = threshold;
    cert.min_geodesic_curvature = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const auto& s = profile[i];
        if (s.corner) {
            cert.corner_vertices.push_back(i);
            if (s.reflex) ++cert.reflex_corners;
            continue;
        }
        ++cert.samples;
        if (s.kappa < cert.min_geodesic_curvature) {
            cert.min_geodesic_curvature = s.kappa;
            cert.worst_point = s.point;
        }
    }
    cert.holds = cert.samples > 0 && cert.reflex_corners == 0 && cert.min_geodesic_curvature >= threshold - tolerance;
    return cert;
}

}  // namespace

ConvexityCertificate is_horoconvex(const Domain2D& domain) {
    if (domain.chart().model() != Model::PoincareDisk || domain.chart().deformed()) {
        throw UnsupportedOperation("horoconvexity is defined for domains in the Poincare disk");
    }
    return certify(domain, ConformalChart::poincare_disk(), 1.0, kHoroconvexityTolerance, "hyperbolic");
}

ConvexityCertificate is_convex_wrt(const Domain2D& domain, const ConformalChart& target_chart) {
    for (const Point& p : domain.vertices()) target_chart.require_in_range(p);
    return certify(domain, target_chart, 0.0, kConvexityTolerance, target_chart.label());
}

double diameter_serial(const Domain2D& domain, const ConformalChart& target_chart) {
    if (target_chart.deformed()) throw UnsupportedOperation("diameter needs an undeformed target chart");
    const auto& v = domain.vertices();
    double best = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = i + 1; j < v.size(); ++j) best = std::max(best, distance(target_chart, v[i], v[j]));
    }
    return best;
}

double diameter(const Domain2D& domain, const ConformalChart& target_chart) {
    if (target_chart.deformed()) throw UnsupportedOperation("diameter needs an undeformed target chart");
    for (const Point& p : domain.vertices()) target_chart.require_in_range(p);
    const auto& v = domain.vertices();
    const auto n = static_cast<std::ptrdiff_t>(v.size());
    double best = 0.0;
    // max is exact, so the reduction order cannot change the result
#pragma omp parallel for reduction(max : best) schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t j = i + 1; j < n; ++j) {
            const double d = distance(target_chart, v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
            if (d > best) best = d;
        }
    }
    return best;
}

namespace {

double model_distance(const ConformalChart& chart, Point c, Point p) { return distance(chart, c, p); }

Vec2 distance_gradient(const ConformalChart& chart, Point c, Point p) {
    switch (chart.model()) {
        case Model::EuclideanPlane: {
            const Vec2 d = c - p;
            const double n = d.norm();
            return n > 0.0 ? d / n : Vec2{};
        }
        case Model::PoincareDisk: {
            const Vec2 d = c - p;
            const double dd = d.sq_norm();
            if (dd == 0.0) return {};
            const double oc = 1.0 - c.sq_norm();
            const double op = 1.0 - p.sq_norm();
            const double q = dd / (oc * op);
            const Vec2 dq = (d * (2.0 * oc) + c * (2.0 * dd)) / (oc * oc * op);
            return dq / (std::sqrt(q) * std::sqrt(1.0 + q));
        }
        case Model::StereographicSphere: {
            const double h = 1e-7 * chart.radius();
            const Vec2 ex{h, 0.0}, ey{0.0, h};
            return {(model_distance(chart, c + ex, p) - model_distance(chart, c - ex, p)) / (2.0 * h),
                    (model_distance(chart, c + ey, p) - model_distance(chart, c - ey, p)) / (2.0 * h)};
        }
    }
    return {};
}

// minimum-norm point of the convex hull of a planar vector set
Vec2 min_norm_hull_point(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() == 1) return pts[0];
    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const Vec2& p : pts) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        const Vec2 p = pts[i];
        while (k >= t && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
        hull[k++] = p;
    }
    hull.resize(k - 1);
    const std::size_t m = hull.size();
    if (m >= 3) {
        bool inside = true;
        for (std::size_t i = 0; i < m; ++i) {
            if (cross(hull[(i + 1) % m] - hull[i], Vec2{} - hull[i]) < 0) {
                inside = false;
                break;
            }
        }
        if (inside) return {};
    }
    Vec2 best = hull[0];
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2 a = hull[i], b = hull[(i + 1) % m];
        const Vec2 ab = b - a;
        const double len2 = ab.sq_norm();
        const double t = len2 > 0.0 ? std::clamp(-dot(a, ab) / len2, 0.0, 1.0) : 0.0;
        const Vec2 q = a + ab * t;
        if (q.sq_norm() < best.sq_norm()) best = q;
    }
    return best;
}

}  // namespace

Circumball circumradius(const Domain2D& domain, const ConformalChart& target_chart) {
    if (target_chart.deformed()) throw UnsupportedOperation("circumradius needs an undeformed target chart");
    const auto& v = domain.vertices();
    for (const Point& p : v) target_chart.require_in_range(p);

    auto max_distance = [&](Point c) {
        double m = 0.0;
        for (const Point& p : v) m = std::max(m, model_distance(target_chart, c, p));
        return m;
    };

    Circumball out;
    Point c = domain.centroid();
    if (!target_chart.in_range(c)) c = Point{};
    double f = max_distance(c);
    double eps = 1e-3 * f;
    double step = 0.1 * f;
    constexpr int kMaxIterations = 200;
    bool converged = false;
    for (int it = 0; it < kMaxIterations; ++it) {
        out.trace.push_back(f);
        out.iterations = it + 1;
        std::vector<Vec2> grads;
        for (const Point& p : v) {
            if (model_distance(target_chart, c, p) >= f - eps) grads.push_back(distance_gradient(target_chart, c, p));
        }
        const Vec2 g = min_norm_hull_point(grads);
        const double gn = g.norm();
        if (gn < 1e-9) {
            if (eps < 1e-13 * std::max(1.0, f)) {
                converged = true;
                break;
            }
            eps *= 0.1;
            continue;
        }
        const Vec2 dir = g / -gn;
        double tau = step;
        bool improved = false;
        for (int ls = 0; ls < 80; ++ls, tau *= 0.5) {
            const Point trial = c + dir * tau;
            if (!target_chart.in_range(trial)) continue;
            const double ft = max_distance(trial);
            if (ft < f) {
                const double gain = f - ft;
                c = trial;
                f = ft;
                step = 2.0 * tau;
                improved = true;
                if (gain < 1e-15 * std::max(1.0, f)) eps *= 0.1;
                break;
            }
        }
        if (!improved) {
            if (eps < 1e-13 * std::max(1.0, f)) {
                converged = true;
                break;
            }
            eps *= 0.1;
        }
    }
    if (!converged) {
        // accept stagnation once the last iterations moved the radius by less than 1e-9
        const auto& t = out.trace;
        const std::size_t m = t.size();
        if (m < 10 || std::fabs(t[m - 10] - t[m - 1]) > 1e-9) {
            throw NumericalError("circumradius iteration did not converge", out.trace);
        }
    }
    out.radius = f;
    out.center = c;
    return out;
}

double dekster_min_diameter(double C) {
    if (!(C > 0.0)) throw DomainError("circumradius must be positive");
    return 2.0 * std::asinh(0.5 * std::sqrt(3.0) * std::sinh(C));
}

Domain2D mobius_recenter(const Domain2D& domain, Point target_center) {
    if (domain.chart().model() != Model::PoincareDisk) {
        throw UnsupportedOperation("Mobius recentering needs a Poincare disk domain");
    }
    if (!(target_center.sq_norm() < 1.0)) throw DomainError("recentering target outside the unit disk");
    std::vector<Point> mapped;
    mapped.reserve(domain.size());
    for (const Point& p : domain.vertices()) {
        if (!(p.sq_norm() < 1.0 - 1e-12)) throw DomainError("domain touches the unit circle");
        mapped.push_back(mobius_to_origin(p, target_center));
    }
    auto overlay = map_overlay(domain.analytic(), mapped);
    return Domain2D(domain.chart(), std::move(mapped), std::move(overlay));
}

Domain2D sphere_recenter(const Domain2D& domain, Point target_center) {
    if (domain.chart().model() != Model::StereographicSphere) {
        throw UnsupportedOperation("sphere recentering needs a stereographic sphere domain");
    }
    const double R = domain.chart().radius();
    std::vector<Point> mapped;
    mapped.reserve(domain.size());
    for (const Point& p : domain.vertices()) mapped.push_back(sphere_rotation_to_origin(p, target_center, R));
    auto overlay = map_overlay(domain.analytic(), mapped);
    return Domain2D(domain.chart(), std::move(mapped), std::move(overlay));
}

}  // namespace confgap
