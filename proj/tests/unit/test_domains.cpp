#include <cmath>
#include <numbers>

#include "confgap/domain.hpp"
#include "confgap/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace confgap;

namespace {

Domain2D upper_half_disk(double r, int n) {
    std::vector<Point> v;
    for (int k = 0; k <= n; ++k) {
        const double t = std::numbers::pi * k / n;
        v.push_back({r * std::cos(t), r * std::sin(t)});
    }
    for (int k = 1; k < n; ++k) v.push_back({-r + 2 * r * k / n, 0.0});
    return Domain2D(ConformalChart::poincare_disk(), v);
}

std::vector<Point> ellipse_points(Point c, double a, double b, double angle, int n) {
    std::vector<Point> v;
    for (int k = 0; k < n; ++k) {
        const double t = 2 * std::numbers::pi * k / n;
        const double x = a * std::cos(t), y = b * std::sin(t);
        v.push_back({c.x + std::cos(angle) * x - std::sin(angle) * y, c.y + std::sin(angle) * x + std::cos(angle) * y});
    }
    return v;
}

}  // namespace

TEST_CASE("domain validation") {
    const auto flat = ConformalChart::euclidean();
    CHECK_THROWS_AS(Domain2D(flat, {{0, 0}, {1, 0}}), MalformedDomain);
    CHECK_THROWS_AS(Domain2D(flat, {{0, 0}, {1, 1}, {1, 0}, {0, 1}}), MalformedDomain);
    CHECK_THROWS_AS(Domain2D(flat, {{0, 0}, {1, 0}, {2, 0}}), MalformedDomain);
    CHECK_THROWS_AS(Domain2D(ConformalChart::poincare_disk(), {{0, 0}, {1.2, 0}, {0, 0.5}}), DomainError);

    const Domain2D cw(flat, {{0, 0}, {0, 1}, {1, 1}, {1, 0}});
    CHECK(cw.area() == doctest::Approx(1.0));
    CHECK(cw.contains({0.5, 0.5}));
    CHECK_FALSE(cw.contains({1.5, 0.5}));
    CHECK(cw.distance_to_boundary({0.5, 0.25}) == doctest::Approx(0.25));
    CHECK(cw.perimeter() == doctest::Approx(4.0));
    CHECK(cw.centroid().x == doctest::Approx(0.5));
}

TEST_CASE("flat curvature of circles") {
    const auto d = Domain2D::euclidean_circle(ConformalChart::euclidean(), {0.2, 0.1}, 0.5, 128);
    for (const auto& s : geodesic_curvature_profile(d, ConformalChart::euclidean())) {
        CHECK(s.kappa == doctest::Approx(2.0).epsilon(1e-12));
    }
    const Domain2D polygon(ConformalChart::euclidean(), d.vertices());
    for (const auto& s : geodesic_curvature_profile(polygon, ConformalChart::euclidean())) {
        CHECK(s.kappa == doctest::Approx(2.0).epsilon(1e-3));
        CHECK_FALSE(s.corner);
    }
    const Domain2D coarse(ConformalChart::euclidean(), std::vector<Point>(d.vertices().begin(), d.vertices().begin() + 32));
    CHECK_THROWS_AS(geodesic_curvature_profile(coarse, ConformalChart::euclidean()), MalformedDomain);
}

TEST_CASE("hyperbolic curvature of circles about the origin is coth of the radius") {
    const auto disk = ConformalChart::poincare_disk();
    for (double s : {0.05, 0.2, 0.5, 0.8}) {
        const auto d = Domain2D::euclidean_circle(disk, {0, 0}, s, 128);
        const double oracle = 1.0 / std::tanh(2.0 * std::atanh(s));
        for (const auto& sample : geodesic_curvature_profile(d, disk)) {
            CHECK(sample.kappa == doctest::Approx(oracle).epsilon(1e-12));
        }
        const Domain2D polygon(disk, d.vertices());
        for (const auto& sample : geodesic_curvature_profile(polygon, disk)) {
            CHECK(sample.kappa == doctest::Approx(oracle).epsilon(2e-3));
        }
    }
}

TEST_CASE("off-center hyperbolic balls have constant curvature coth") {
    const auto ball = Domain2D::hyperbolic_circle({-0.4, 0.25}, 0.6, 256);
    const auto cert = is_horoconvex(ball);
    CHECK(cert.holds);
    CHECK(cert.metric_label == "hyperbolic");
    for (const auto& s : geodesic_curvature_profile(ball, ConformalChart::poincare_disk())) {
        CHECK(s.kappa == doctest::Approx(1.0 / std::tanh(0.6)).epsilon(1e-10));
    }
}

TEST_CASE("horocycles have hyperbolic curvature one") {
    const auto h = Domain2D::horocycle(0.7, 0.3, 256);
    for (const auto& s : geodesic_curvature_profile(h, ConformalChart::poincare_disk())) {
        CHECK(std::fabs(s.kappa - 1.0) <= 1e-6);
    }
    const auto cert = is_horoconvex(h);
    CHECK(cert.min_geodesic_curvature == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cert.holds);
}

TEST_CASE("geodesic sides break horoconvexity") {
    const auto d = upper_half_disk(0.3, 96);
    const auto cert = is_horoconvex(d);
    CHECK_FALSE(cert.holds);
    CHECK(std::fabs(cert.min_geodesic_curvature) < 1e-9);
    CHECK(cert.corner_vertices.size() == 2);
    CHECK(cert.reflex_corners == 0);
    CHECK_THROWS_AS(is_horoconvex(Domain2D::euclidean_circle(ConformalChart::euclidean(), {0, 0}, 1, 64)),
                    UnsupportedOperation);
}

TEST_CASE("square corners are flagged") {
    const auto sq = Domain2D::rectangle(ConformalChart::poincare_disk(), {-0.3, -0.3}, {0.3, 0.3}, 40);
    const auto cert = is_convex_wrt(sq, ConformalChart::poincare_disk());
    CHECK(cert.corner_vertices.size() == 4);
    CHECK(cert.reflex_corners == 0);
    // straight sides off the origin bend toward the interior in the hyperbolic metric
    CHECK(cert.min_geodesic_curvature > 0.0);

    std::vector<Point> ell;
    for (int k = 0; k <= 40; ++k) ell.push_back({0.4 * k / 40.0, 0.0});
    for (int k = 1; k <= 40; ++k) ell.push_back({0.4, 0.2 * k / 40.0});
    for (int k = 1; k <= 20; ++k) ell.push_back({0.4 - 0.2 * k / 20.0, 0.2});
    for (int k = 1; k <= 20; ++k) ell.push_back({0.2, 0.2 + 0.2 * k / 20.0});
    for (int k = 1; k <= 20; ++k) ell.push_back({0.2 - 0.2 * k / 20.0, 0.4});
    for (int k = 1; k < 40; ++k) ell.push_back({0.0, 0.4 - 0.4 * k / 40.0});
    const Domain2D lshape(ConformalChart::euclidean(), ell);
    const auto lc = is_convex_wrt(lshape, ConformalChart::euclidean());
    CHECK(lc.reflex_corners == 1);
    CHECK_FALSE(lc.holds);
}

TEST_CASE("discrete curvature converges at second order") {
    const Point c{0.1, -0.05};
    const double a = 0.4, b = 0.25, angle = 0.3;
    const auto analytic = Domain2D::ellipse(ConformalChart::euclidean(), c, a, b, angle, 64);
    const auto sphere = ConformalChart::stereographic_sphere(0.8);
    double errors[2];
    const int sizes[2] = {128, 256};
    for (int level = 0; level < 2; ++level) {
        const Domain2D d(ConformalChart::euclidean(), ellipse_points(c, a, b, angle, sizes[level]));
        const auto discrete = geodesic_curvature_profile(d, sphere);
        double e = 0.0;
        for (const auto& s : discrete) {
            const double kappa = analytic.analytic()->flat_curvature(s.point);
            const Vec2 n = analytic.analytic()->outward_normal(s.point);
            const Jet2 phi = sphere.log_factor(s.point);
            e = std::max(e, std::fabs(s.kappa - principal_curvature_transform(kappa, dot(phi.g, n), phi.v)));
        }
        errors[level] = e;
    }
    CHECK(errors[0] / errors[1] > 3.5);
}

TEST_CASE("diameter in each model") {
    const auto flat = ConformalChart::euclidean();
    const auto unit = Domain2D::euclidean_circle(flat, {0, 0}, 1.0, 256);
    CHECK(diameter(unit, flat) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(diameter_serial(unit, flat) == diameter(unit, flat));

    const auto disk = ConformalChart::poincare_disk();
    const auto ball = Domain2D::euclidean_circle(disk, {0, 0}, 0.147477, 256);
    CHECK(diameter(ball, disk) == doctest::Approx(4 * std::atanh(0.147477)).epsilon(1e-12));
    CHECK(diameter(ball, disk) == doctest::Approx(0.594242).epsilon(1e-6));

    auto g = oracle::rng(3);
    const auto sphere = ConformalChart::stereographic_sphere(std::sqrt(7 - std::sqrt(33.0)) / 2);
    for (int i = 0; i < 10; ++i) {
        const Point c = oracle::random_in_disk(g, 0.4);
        const auto d = Domain2D::ellipse(disk, c, oracle::uniform(g, 0.05, 0.2), oracle::uniform(g, 0.05, 0.2),
                                         oracle::uniform(g, 0, 3), 128);
        CHECK(diameter(d, sphere) <= diameter(d, disk));
    }
}

TEST_CASE("circumradius") {
    const auto flat = ConformalChart::euclidean();
    const auto disk = Domain2D::euclidean_circle(flat, {0.3, -0.1}, 0.7, 128);
    const auto cb = circumradius(disk, flat);
    CHECK(cb.radius == doctest::Approx(0.7).epsilon(1e-9));
    CHECK((cb.center - Point{0.3, -0.1}).norm() < 1e-6);

    const Domain2D tri(flat, {{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}});
    CHECK(std::fabs(circumradius(tri, flat).radius - 1 / std::sqrt(3.0)) <= 1e-6);

    // obtuse triangle: the enclosing ball is the longest side's midpoint ball
    const Domain2D obtuse(flat, {{0, 0}, {2, 0}, {1, 0.3}});
    CHECK(std::fabs(circumradius(obtuse, flat).radius - 1.0) <= 1e-6);

    const auto hdisk = ConformalChart::poincare_disk();
    const auto ball = Domain2D::hyperbolic_circle({0.2, 0.35}, 0.297121, 256);
    const auto hb = circumradius(ball, hdisk);
    CHECK(std::fabs(hb.radius - 0.297121) <= 1e-6);
    CHECK(distance(hdisk, hb.center, {0.2, 0.35}) < 1e-5);
}

TEST_CASE("Jung-type inequalities on random convex hyperbolic domains") {
    auto g = oracle::rng(5);
    const auto hdisk = ConformalChart::poincare_disk();
    for (int i = 0; i < 20; ++i) {
        const Point c = oracle::random_in_disk(g, 0.5);
        const auto d = Domain2D::ellipse(hdisk, c, oracle::uniform(g, 0.05, 0.3), oracle::uniform(g, 0.05, 0.3),
                                         oracle::uniform(g, 0, 3), 96);
        const double D = diameter(d, hdisk);
        const double C = circumradius(d, hdisk).radius;
        CHECK(D <= 2 * C + 1e-9);
        CHECK(D >= dekster_min_diameter(C) - 1e-9);
    }
}

TEST_CASE("circumradius is monotone under inclusion") {
    const auto hdisk = ConformalChart::poincare_disk();
    for (double s : {0.1, 0.2, 0.3}) {
        const auto inner = Domain2D::ellipse(hdisk, {0.1, 0.2}, s, 0.5 * s, 0.4, 96);
        const auto outer = Domain2D::ellipse(hdisk, {0.1, 0.2}, 1.2 * s, 0.6 * s + 0.02, 0.4, 96);
        CHECK(circumradius(inner, hdisk).radius < circumradius(outer, hdisk).radius);
    }
}

TEST_CASE("Dekster minimal diameter") {
    CHECK(std::fabs(dekster_min_diameter(0.297121) - 0.516475) < 1e-6);
    const double arccsch = std::asinh(1.0 / (2 * std::sqrt(11.0 / 3.0)));
    CHECK(std::fabs(2 * arccsch - dekster_min_diameter(2 * std::atanh(0.147477))) < 1e-5);
    CHECK(dekster_min_diameter(1e-6) / 1e-6 == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
    CHECK_THROWS_AS(dekster_min_diameter(0.0), DomainError);
}

TEST_CASE("recentering puts a small domain inside the matching Euclidean ball") {
    const auto hdisk = ConformalChart::poincare_disk();
    const auto d = Domain2D::ellipse(hdisk, {0.4, -0.3}, 0.09, 0.05, 1.1, 128);
    const auto cb = circumradius(d, hdisk);
    REQUIRE(cb.radius <= 0.297121);
    const auto moved = mobius_recenter(d, cb.center);
    CHECK(moved.max_radius() <= std::tanh(cb.radius / 2) + 1e-9);
}
