#pragma once

#include <optional>
#include <string>
#include <vector>

#include "confgap/chart.hpp"
#include "confgap/linalg2.hpp"

namespace confgap {

/// Exact boundary geometry for named curve families. Curvature and outward
/// normal are flat (chart-coordinate) quantities evaluated at boundary points.
struct AnalyticBoundary {
    enum class Kind { Circle, Ellipse };

    std::string family;  // euclidean_circle, hyperbolic_circle, horocycle, ellipse
    Kind kind = Kind::Circle;
    Point center{};
    double a = 1.0;  // circle radius or ellipse semi-axis along the rotated x axis
    double b = 1.0;
    double angle = 0.0;
    /// Family parameters as given by the caller (hyperbolic center/radius, ...).
    std::vector<std::pair<std::string, double>> params;

    double flat_curvature(Point p) const;
    Vec2 outward_normal(Point p) const;
};

/// A simple closed polygon in chart coordinates, counterclockwise, with an
/// optional analytic overlay.
class Domain2D {
public:
    /// Validates the boundary; clockwise input is reversed.
    Domain2D(ConformalChart chart, std::vector<Point> vertices, std::optional<AnalyticBoundary> analytic = {});

    static Domain2D euclidean_circle(const ConformalChart& chart, Point center, double radius, int n);
    /// Geodesic ball of the Poincare disk, sampled uniformly around its Euclidean center.
    static Domain2D hyperbolic_circle(Point hyperbolic_center, double hyperbolic_radius, int n);
    /// Euclidean circle of radius a internally tangent to the unit circle at angle omega.
    /// Samples avoid the tangency point.
    static Domain2D horocycle(double omega, double a, int n);
    static Domain2D ellipse(const ConformalChart& chart, Point center, double a, double b, double angle, int n);
    /// Axis-aligned rectangle with per_side vertices on each side (corners included once).
    static Domain2D rectangle(const ConformalChart& chart, Point lo, Point hi, int per_side);

    const ConformalChart& chart() const noexcept { return chart_; }
    const std::vector<Point>& vertices() const noexcept { return vertices_; }
    const std::optional<AnalyticBoundary>& analytic() const noexcept { return analytic_; }
    std::size_t size() const noexcept { return vertices_.size(); }

    double area() const;
    double perimeter() const;
    bool contains(Point p) const;
    double distance_to_boundary(Point p) const;
    Point centroid() const;
    double max_radius() const;

    /// Same boundary measured in another chart.
    Domain2D with_chart(ConformalChart chart) const;

private:
    ConformalChart chart_;
    std::vector<Point> vertices_;
    std::optional<AnalyticBoundary> analytic_;
};

struct CurvatureSample {
    Point point;
    double kappa = 0.0;
    bool corner = false;
    bool reflex = false;
};

/// Geodesic curvature of the boundary with respect to target_chart at every
/// vertex, from the analytic overlay when present and otherwise the
/// three-point circumscribed-circle estimate, transformed by
/// kappa~ = e^{-phi} (kappa + dphi/dN). Corners are flagged.
std::vector<CurvatureSample> geodesic_curvature_profile(const Domain2D& domain, const ConformalChart& target_chart);

struct ConvexityCertificate {
    double min_geodesic_curvature = 0.0;
    Point worst_point{};
    std::string metric_label;
    bool holds = false;
    double tolerance = 0.0;
    double threshold = 0.0;
    std::size_t samples = 0;
    std::vector<std::size_t> corner_vertices;
    std::size_t reflex_corners = 0;
};

inline constexpr double kConvexityTolerance = 1e-8;
inline constexpr double kHoroconvexityTolerance = 1e-8;

ConvexityCertificate is_horoconvex(const Domain2D& domain);
ConvexityCertificate is_convex_wrt(const Domain2D& domain, const ConformalChart& target_chart);

/// Largest pairwise geodesic distance between boundary vertices.
double diameter(const Domain2D& domain, const ConformalChart& target_chart);
double diameter_serial(const Domain2D& domain, const ConformalChart& target_chart);

struct Circumball {
    double radius = 0.0;
    Point center{};
    int iterations = 0;
    std::vector<double> trace;
};

/// Minimal enclosing geodesic ball of the boundary vertices.
Circumball circumradius(const Domain2D& domain, const ConformalChart& target_chart);

/// Smallest diameter of a hyperbolic domain with circumradius C: 2 asinh(sqrt(3)/2 sinh C).
double dekster_min_diameter(double C);

/// Isometric image under the disk automorphism sending target_center to 0.
Domain2D mobius_recenter(const Domain2D& domain, Point target_center);
/// Isometric image under the sphere rotation sending target_center to the chart origin.
Domain2D sphere_recenter(const Domain2D& domain, Point target_center);

}  // namespace confgap
