#include <cmath>
#include <numbers>

#include "confgap/chart.hpp"
#include "confgap/domain.hpp"
#include "confgap/errors.hpp"
#include "confgap/expression.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace confgap;

TEST_CASE("conformal factor of the three models") {
    CHECK(conformal_factor(ConformalChart::poincare_disk(), {0, 0}) == doctest::Approx(4.0));
    CHECK(conformal_factor(ConformalChart::euclidean(), {3.5, -2}) == 1.0);
    // 4 R^4 / (R^2 + |x|^2)^2 with R = 1, x = (1, 0)
    const double oracle = 4.0 * std::pow(1.0, 4) / std::pow(1.0 + 1.0, 2);
    CHECK(conformal_factor(ConformalChart::stereographic_sphere(1.0), {1, 0}) == doctest::Approx(oracle));
    CHECK_THROWS_AS(conformal_factor(ConformalChart::poincare_disk(), {1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(conformal_factor(ConformalChart::poincare_disk(), {0.8, 0.7}), DomainError);
}

TEST_CASE("deformed chart multiplies the model factor") {
    const auto chart = ConformalChart::poincare_disk().with_extra(parse_expression("0.1*x1"));
    const Point x{0.3, 0.2};
    CHECK(chart.factor(x) == doctest::Approx(4.0 / std::pow(1 - x.sq_norm(), 2) * std::exp(0.2 * x.x)));
    CHECK(chart.deformed());
}

TEST_CASE("conformal Hessian hand example and identities") {
    const SymMatrix2 out = conformal_hessian({}, {1, 0}, {0, 1}, SymMatrix2::identity());
    CHECK(out.a11 == 0.0);
    CHECK(out.a22 == 0.0);
    CHECK(out.a12 == -1.0);

    const SymMatrix2 h{1.5, -0.25, 3.0};
    const SymMatrix2 same = conformal_hessian(h, {0.7, -0.2}, {}, SymMatrix2::identity());
    CHECK(same.a11 == h.a11);
    CHECK(same.a12 == h.a12);
    CHECK(same.a22 == h.a22);
}

TEST_CASE("conformal Hessian matches the Christoffel-symbol oracle") {
    const ScalarField F = parse_expression("exp(0.5*x1) + x1*x2^2 - 0.3*x2");
    const std::vector<ConformalChart> charts{
        ConformalChart::poincare_disk(),
        ConformalChart::stereographic_sphere(0.7),
        ConformalChart::euclidean().with_extra(parse_expression("0.2*x1*x2 + 0.1*x1^2")),
    };
    auto g = oracle::rng();
    for (const auto& chart : charts) {
        for (int i = 0; i < 20; ++i) {
            const Point x = oracle::random_in_disk(g, 0.6);
            const Jet2 f = F.jet(x);
            const Jet2 phi = chart.log_factor(x);
            const SymMatrix2 got = conformal_hessian(f.h, f.g, phi.g, SymMatrix2::identity());
            const SymMatrix2 want = oracle::christoffel_hessian(
                [&](Point p) { return F(p); }, [&](Point p) { return chart.log_factor(p).v; }, x, 1e-4);
            const double scale = std::max(1.0, want.max_abs_entry());
            CHECK(std::fabs(got.a11 - want.a11) / scale <= 1e-5);
            CHECK(std::fabs(got.a12 - want.a12) / scale <= 1e-5);
            CHECK(std::fabs(got.a22 - want.a22) / scale <= 1e-5);
        }
    }
}

TEST_CASE("conformal Laplacian coefficients") {
    const auto flat = conformal_laplacian_coeffs(ConformalChart::euclidean(), 2).at({0.4, 0.1});
    CHECK(flat.multiplier == 1.0);
    CHECK(flat.drift.sq_norm() == 0.0);

    const auto disk2 = conformal_laplacian_coeffs(ConformalChart::poincare_disk(), 2).at({0.4, 0.1});
    CHECK(disk2.drift.sq_norm() == 0.0);
    CHECK(disk2.multiplier == doctest::Approx(std::pow(1 - 0.17, 2) / 4));

    const auto chart = ConformalChart::euclidean().with_extra(parse_expression("x1"));
    const auto c3 = conformal_laplacian_coeffs(chart, 3).at({0.2, -0.5});
    CHECK(c3.drift.x == doctest::Approx(1.0));
    CHECK(c3.drift.y == doctest::Approx(0.0));
    CHECK_THROWS_AS(conformal_laplacian_coeffs(chart, 1), DomainError);
}

TEST_CASE("Schrodinger transform") {
    const ScalarField rho_tilde = parse_expression("1 + 0.5*x1");
    const auto disk = ConformalChart::poincare_disk();
    const auto form = schrodinger_transform(disk, rho_tilde, 2);
    auto g = oracle::rng(7);
    for (int i = 0; i < 20; ++i) {
        const Point x = oracle::random_in_disk(g, 0.8);
        CHECK(form.potential(x) == 0.0);
        CHECK(form.weight(x) == doctest::Approx(rho_tilde(x) * 4 / std::pow(1 - x.sq_norm(), 2)));
    }

    const auto flat = schrodinger_transform(ConformalChart::euclidean(), rho_tilde, 2);
    CHECK(flat.weight({0.3, 0.1}) == doctest::Approx(1.15));

    // phi = |x|^2 / 2: |grad phi|^2 = |x|^2, Laplacian 2, so V = |x|^2 / 4 + 1
    const auto chart = ConformalChart::euclidean().with_extra(parse_expression("(x1^2 + x2^2)/2"));
    const auto form3 = schrodinger_transform(chart, ScalarField::constant(1.0), 3);
    for (int i = 0; i < 10; ++i) {
        const Point x = oracle::random_in_disk(g, 2.0);
        CHECK(form3.potential(x) == doctest::Approx(0.25 * x.sq_norm() + 1.0).epsilon(1e-12));
    }
}

TEST_CASE("principal curvature transform") {
    CHECK(principal_curvature_transform(2.5, 0.0, 0.0) == 2.5);
    CHECK(principal_curvature_transform(1.0, -1.0, 3.7) == 0.0);
    CHECK(principal_curvature_transform(1.0, 1.0, std::log(2.0)) == doctest::Approx(1.0));
}

TEST_CASE("geodesic distance closed forms") {
    const auto disk = ConformalChart::poincare_disk();
    for (double x : {0.05, 0.3, 0.7, 0.95}) {
        const double quad = oracle::simpson([](double t) { return 2.0 / (1 - t * t); }, 0.0, x, 4000);
        CHECK(distance(disk, {0, 0}, {x, 0}) == doctest::Approx(quad).epsilon(1e-10));
        CHECK(distance(disk, {0, 0}, {x, 0}) == doctest::Approx(2 * std::atanh(x)).epsilon(1e-13));
    }
    CHECK(distance(disk, {0, 0}, {0.147477, 0}) == doctest::Approx(0.297121).epsilon(1e-6));

    // a meridian through the chart origin: arc length of 2R^2/(R^2 + t^2)
    const double R = 0.56;
    const auto sphere = ConformalChart::stereographic_sphere(R);
    const double quad = oracle::simpson([R](double t) { return 2 * R * R / (R * R + t * t); }, 0.0, 0.9, 4000);
    CHECK(distance(sphere, {0, 0}, {0.9, 0}) == doctest::Approx(quad).epsilon(1e-10));
    CHECK(distance(ConformalChart::euclidean(), {1, 2}, {4, 6}) == 5.0);

    const auto deformed = disk.with_extra(parse_expression("0.01*x1"));
    CHECK_THROWS_AS(distance(deformed, {0, 0}, {0.1, 0}), UnsupportedOperation);
    CHECK_THROWS_AS(distance(disk, {0, 0}, {1.0, 0}), DomainError);
}

TEST_CASE("distance is a metric on random triples") {
    const std::vector<ConformalChart> charts{ConformalChart::euclidean(), ConformalChart::poincare_disk(),
                                             ConformalChart::stereographic_sphere(0.8)};
    auto g = oracle::rng(11);
    for (const auto& chart : charts) {
        for (int i = 0; i < 100; ++i) {
            const Point p = oracle::random_in_disk(g, 0.9);
            const Point q = oracle::random_in_disk(g, 0.9);
            const Point s = oracle::random_in_disk(g, 0.9);
            CHECK(distance(chart, p, p) == 0.0);
            CHECK(std::fabs(distance(chart, p, q) - distance(chart, q, p)) <= 1e-12);
            CHECK(distance(chart, p, s) <= distance(chart, p, q) + distance(chart, q, s) + 1e-9);
        }
    }
}

TEST_CASE("Mobius recentering is an isometry") {
    const auto ball = Domain2D::hyperbolic_circle({0.3, -0.2}, 0.35, 200);
    const Point c{0.3, -0.2};
    const auto moved = mobius_recenter(ball, c);
    const auto disk = ConformalChart::poincare_disk();
    for (std::size_t i = 0; i < 50; ++i) {
        const std::size_t j = (i * 37 + 11) % ball.size();
        const double before = distance(disk, ball.vertices()[i], ball.vertices()[j]);
        const double after = distance(disk, moved.vertices()[i], moved.vertices()[j]);
        CHECK(std::fabs(before - after) <= 1e-10);
    }
    CHECK(std::fabs(diameter(ball, disk) - diameter(moved, disk)) < 1e-10);
    // centered image is the Euclidean circle of radius tanh(s/2)
    REQUIRE(moved.analytic().has_value());
    CHECK(moved.analytic()->center.norm() < 1e-12);
    CHECK(moved.analytic()->a == doctest::Approx(std::tanh(0.175)).epsilon(1e-12));

    const auto centered = Domain2D::hyperbolic_circle({0, 0}, 0.3, 64);
    const auto same = mobius_recenter(centered, {0, 0});
    for (std::size_t i = 0; i < centered.size(); ++i) CHECK(same.vertices()[i] == centered.vertices()[i]);

    CHECK_THROWS_AS(mobius_recenter(Domain2D::euclidean_circle(ConformalChart::euclidean(), {0, 0}, 1, 32), {0, 0}),
                    UnsupportedOperation);
}

TEST_CASE("sphere rotation preserves spherical distances") {
    const double R = 0.9;
    const auto chart = ConformalChart::stereographic_sphere(R);
    const auto cap = Domain2D::euclidean_circle(chart, {0.4, 0.3}, 0.2, 120);
    const auto moved = sphere_recenter(cap, {0.4, 0.3});
    for (std::size_t i = 0; i < 50; ++i) {
        const std::size_t j = (i * 13 + 5) % cap.size();
        CHECK(std::fabs(distance(chart, cap.vertices()[i], cap.vertices()[j]) -
                        distance(chart, moved.vertices()[i], moved.vertices()[j])) <= 1e-10);
    }
}

TEST_CASE("expression parser") {
    CHECK(parse_expression("2^3^2")({0, 0}) == doctest::Approx(512.0));
    CHECK(parse_expression("-x1^2")({3, 0}) == doctest::Approx(-9.0));
    CHECK(parse_expression("exp(log(x1))*sqrt(x2)")({2.0, 9.0}) == doctest::Approx(6.0));
    CHECK(parse_expression("1 \xE2\x88\x92 x1")({0.25, 0}) == doctest::Approx(0.75));
    CHECK(parse_expression("4.5").is_constant());
    const auto jet = parse_expression("x1*x2 + pi").jet({2, 3});
    CHECK(jet.v == doctest::Approx(6 + std::numbers::pi));
    CHECK(jet.g.x == doctest::Approx(3.0));
    CHECK(jet.h.a12 == doctest::Approx(1.0));
    CHECK_THROWS_AS(parse_expression("x1 +"), ParseError);
    CHECK_THROWS_AS(parse_expression("foo(x1)"), ParseError);
    CHECK_THROWS_AS(parse_expression("(x1"), ParseError);
}

TEST_CASE("sampled fields use centered differences") {
    const auto f = ScalarField::from_values([](Point p) { return std::sin(p.x) * std::exp(p.y); });
    const Point x{0.4, -0.3};
    CHECK_FALSE(f.exact_derivatives());
    CHECK(f.gradient(x).x == doctest::Approx(std::cos(0.4) * std::exp(-0.3)).epsilon(1e-8));
    CHECK(f.hessian(x).a12 == doctest::Approx(std::cos(0.4) * std::exp(-0.3)).epsilon(1e-4));
    const auto sum = f + ScalarField::constant(2.0);
    CHECK(sum(x) == doctest::Approx(f(x) + 2.0));
}
