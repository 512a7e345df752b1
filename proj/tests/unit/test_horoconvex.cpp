#include <cmath>
#include <numbers>
#include <sstream>

#include "confgap/errors.hpp"
#include "confgap/horoconvex.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace confgap;

namespace {

constexpr double pi = std::numbers::pi;

}  // namespace

TEST_CASE("hyperbolic weight relative to the sphere") {
    CHECK(rho_hyper_to_sphere({0, 0}, 0.7) == doctest::Approx(1.0));
    CHECK(rho_hyper_to_sphere({std::sqrt(0.5), 0}, 1.0) == doctest::Approx(9.0));
    auto rng = oracle::rng();
    for (int k = 0; k < 20; ++k) {
        const Point x = oracle::random_in_disk(rng, 0.95);
        const double R = oracle::uniform(rng, 0.2, 2.0);
        const double s = x.sq_norm();
        const double product = 4.0 / ((1 - s) * (1 - s)) * (R * R + s) * (R * R + s) / (4 * R * R * R * R);
        CHECK(rho_hyper_to_sphere(x, R) == doctest::Approx(product).epsilon(1e-13));
        CHECK(rho_hyper_to_sphere_field(R)(x) == doctest::Approx(product).epsilon(1e-13));
    }
    CHECK_THROWS_AS(rho_hyper_to_sphere({1.0, 0.0}, 0.5), DomainError);
}

TEST_CASE("closed-form spherical Hessian of the weight") {
    const double R = optimal_sphere_radius();
    const SymMatrix2 h0 = spherical_hessian_rho({0, 0}, R);
    CHECK(h0.a11 == doctest::Approx(4.0 * (1 + R * R) / (R * R)).epsilon(1e-14));
    CHECK(h0.a12 == 0.0);
    CHECK(spherical_hessian_rho({0.3, 0.0}, R).a12 == 0.0);

    auto rng = oracle::rng(11);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const Point x = oracle::random_in_disk(rng, 0.6);
        const double Rk = oracle::uniform(rng, 0.3, 0.95);
        const SymMatrix2 exact = spherical_hessian_rho(x, Rk);
        const SymMatrix2 fd = oracle::fd_spherical_hessian(x, Rk);
        worst = std::max(worst, (exact - fd).max_abs_entry() / exact.max_abs_entry());
        // field derivatives through the library transform agree as well
        const auto lib = orthonormal_hessian(ConformalChart::stereographic_sphere(Rk), rho_hyper_to_sphere_field(Rk), x) *
                         conformal_factor(ConformalChart::stereographic_sphere(Rk), x);
        CHECK((lib - exact).max_abs_entry() <= 1e-10 * exact.max_abs_entry());
    }
    MESSAGE("worst relative error " << worst);
    CHECK(worst <= 1e-6);
}

TEST_CASE("mu eigenvalues") {
    auto rng = oracle::rng(5);
    for (int k = 0; k < 100; ++k) {
        const double r = oracle::uniform(rng, 0.0, 0.9);
        const double R = oracle::uniform(rng, 0.1, 0.99);
        const auto ev = spherical_hessian_rho({r, 0.0}, R).eigenvalues();
        const auto mu = mu_eigenvalues(r, R);
        const double lo = std::min(mu.mu1, mu.mu2), hi = std::max(mu.mu1, mu.mu2);
        CHECK(std::fabs(ev[0] - lo) <= 1e-12 * std::fabs(hi));
        CHECK(std::fabs(ev[1] - hi) <= 1e-12 * std::fabs(hi));
        // normalization by K rho e^{2 phi} = 4 / (R^2 (1 - r^2)^2)
        const auto nm = normalized_mu(r, R);
        const double scale = 4.0 / (R * R * (1 - r * r) * (1 - r * r));
        CHECK(nm.mu1 == doctest::Approx(mu.mu1 / scale).epsilon(1e-12));
        CHECK(nm.mu2 == doctest::Approx(mu.mu2 / scale).epsilon(1e-12));
    }
    const auto at0 = mu_eigenvalues(0.0, 0.5);
    CHECK(at0.mu1 == doctest::Approx(at0.mu2));
}

TEST_CASE("admissible radius") {
    const double R = optimal_sphere_radius();
    CHECK(R == doctest::Approx(0.560232).epsilon(1e-6));
    const auto adm = admissible_radius(R);
    CHECK(std::fabs(adm.r_max_sq - 0.0217494) <= 1e-6);
    CHECK(std::fabs(adm.r_max - 0.147477) <= 1e-6);
    CHECK(adm.mu1_below_two);
    CHECK(normalized_mu(adm.r_max, R).mu2 == doctest::Approx(2.0).epsilon(1e-9));
    // independent root of normalized mu2 - 2
    auto rng = oracle::rng(3);
    for (int k = 0; k < 20; ++k) {
        const double Rk = oracle::uniform(rng, 0.05, 0.95);
        const double root = oracle::bisect([Rk](double r) { return normalized_mu(r, Rk).mu2 - 2.0; }, 0.0, 0.999);
        CHECK(std::fabs(admissible_radius(Rk).r_max - root) <= 1e-10);
        const double rm = admissible_radius(Rk).r_max;
        for (int i = 0; i < 1000; ++i) {
            const double r = rm * i / 1000.0;
            CHECK(std::max(normalized_mu(r, Rk).mu1, normalized_mu(r, Rk).mu2) < 2.0);
        }
    }
    // mu1 stays below 2 on all of [0, 1) when R < 1
    for (int i = 0; i < 1000; ++i) CHECK(normalized_mu(0.999 * i / 1000.0, 0.8).mu1 < 2.0);
    CHECK(admissible_radius(1e-4).r_max < 1e-3);
    CHECK_THROWS_AS(admissible_radius(1.0), DomainError);
    CHECK_THROWS_AS(admissible_radius(1.5), DomainError);
}

TEST_CASE("optimal sphere radius") {
    const auto opt = optimal_R();
    CHECK(std::fabs(opt.golden_section - opt.closed_form) <= 1e-6);
    const double R = opt.closed_form, d = 1e-4;
    const double deriv = (admissible_radius(R + d).r_max_sq - admissible_radius(R - d).r_max_sq) / (2 * d);
    CHECK(std::fabs(deriv) <= 1e-6);
    CHECK(admissible_radius(R).r_max > admissible_radius(R + 0.05).r_max);
    CHECK(admissible_radius(R).r_max > admissible_radius(R - 0.05).r_max);
}

TEST_CASE("gap bound constants and thresholds") {
    CHECK(gap_bound_coefficient() == doctest::Approx(0.836958).epsilon(1e-6));
    const auto ing = gap_bound_ingredients(optimal_sphere_radius());
    CHECK(ing.constant == doctest::Approx(4.0 / 3.0).epsilon(1e-3));
    CHECK(ing.coefficient == doctest::Approx(gap_bound_coefficient()).epsilon(1e-4));

    const auto cfg = HoroconvexConfig::standard();
    CHECK(std::fabs(cfg.C_max - 0.297121) <= 1e-6);
    CHECK(std::fabs(cfg.D_max - 0.516475) <= 1e-5);
    CHECK(std::fabs(diameter_threshold() - cfg.D_max) <= 1e-5);
    CHECK(std::fabs(dekster_min_diameter(0.297121) - diameter_threshold()) <= 1e-4);

    CHECK(gap_lower_bound(0.4) == doctest::Approx(gap_bound_coefficient() * pi * pi / 0.16 + 4.0 / 3.0));
    CHECK(gap_lower_bound(0.5164) == doctest::Approx(32.3).epsilon(0.01));
    CHECK_THROWS_AS(gap_lower_bound(0.6), ThresholdError);
    CHECK_THROWS_AS(gap_lower_bound(0.0), ThresholdError);
}

TEST_CASE("step 2 margin") {
    const double R = optimal_sphere_radius();
    CHECK(step2_margin(0.0, R).value == doctest::Approx(2.0));
    CHECK(step2_margin(0.0, 0.9).value == doctest::Approx(2.0));
    CHECK(step2_margin(0.147477, R).value > 0.0);
    double prev = step2_margin(0.0, R).value;
    for (int i = 1; i <= 100; ++i) {
        const double v = step2_margin(0.2 * i / 100.0, R).value;
        CHECK(v < prev);
        prev = v;
    }
    const auto w = step2_margin(0.6, R);
    CHECK(w.warning);
    CHECK(w.value < 0.0);
    CHECK_THROWS_AS(step2_margin(0.1, 0.4), DomainError);
}

TEST_CASE("weight condition on the admissible ball") {
    const double R = optimal_sphere_radius();
    const auto rho = rho_hyper_to_sphere_field(R);
    const auto V = ScalarField::constant(0.0);
    const auto sphere = ConformalChart::stereographic_sphere(R);
    const double rmax = admissible_radius(R).r_max;
    double prev = 1e300;
    for (double f : {0.5, 0.9, 0.99}) {
        const auto ball = Domain2D::euclidean_circle(ConformalChart::euclidean(), {0, 0}, f * rmax, 128);
        const auto c = check_space_form_condition(V, rho, 10.0, sphere, ball, 400);
        CHECK(c.holds);
        CHECK(c.worst_margin < prev);
        prev = c.worst_margin;
    }
    const auto outside = Domain2D::euclidean_circle(ConformalChart::euclidean(), {0, 0}, 1.1 * rmax, 128);
    CHECK_FALSE(check_space_form_condition(V, rho, 10.0, sphere, outside, 400).holds);
}

TEST_CASE("pipeline on a hyperbolic ball") {
    const auto ball = Domain2D::hyperbolic_circle({0.05, -0.02}, 0.2, 128);
    PipelineOptions opts;
    opts.h = 0.02;
    const auto rep = verify_pipeline(ball, opts);
    for (const auto& s : rep.stages) MESSAGE(s.name << ": " << (s.passed ? "pass" : "FAIL") << " " << s.message);
    CHECK(rep.passed);
    REQUIRE(rep.stages.size() == 7);
    CHECK(rep.diameter == doctest::Approx(0.4).epsilon(1e-3));
    CHECK(rep.gap->extrapolated_gap >= rep.bound);
    CHECK(rep.bound == doctest::Approx(gap_lower_bound(rep.diameter)));
}

TEST_CASE("pipeline rejects a ball above the diameter threshold") {
    const auto ball = Domain2D::hyperbolic_circle({0, 0}, 0.3, 128);
    const auto rep = verify_pipeline(ball);
    CHECK_FALSE(rep.passed);
    CHECK(rep.failed_stage == "threshold");
    CHECK(rep.stages.size() == 1);
}

TEST_CASE("pipeline on an ellipse-like horoconvex domain") {
    const double a = std::tanh(0.45 / 4.0), b = 0.8 * a;
    const auto ell = Domain2D::ellipse(ConformalChart::poincare_disk(), {0.02, 0.01}, a, b, 0.3, 256);
    const auto cert = is_horoconvex(ell);
    CHECK(cert.min_geodesic_curvature >= 1.05);
    PipelineOptions opts;
    opts.h = 0.02;
    const auto rep = verify_pipeline(ell, opts);
    for (const auto& s : rep.stages) MESSAGE(s.name << ": " << (s.passed ? "pass" : "FAIL") << " " << s.message);
    CHECK(rep.passed);
}

TEST_CASE("lens family") {
    const auto lens = hyperbolic_lens(0.4, 2.0, 64);
    const auto cert = is_horoconvex(lens);
    CHECK(cert.min_geodesic_curvature == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(cert.corner_vertices.size() == 2);
    CHECK(diameter(lens, ConformalChart::poincare_disk()) == doctest::Approx(0.4).epsilon(1e-9));
    const auto flat = hyperbolic_lens(0.4, 0.3, 64);
    CHECK(is_horoconvex(flat).min_geodesic_curvature == doctest::Approx(0.3).epsilon(1e-3));
    CHECK_FALSE(is_horoconvex(flat).holds);

    const auto rows = convexity_class_sweep({0.3}, {0.5, 2.0}, 0.1);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) CHECK(r.scaled_gap > 0.0);
    std::ostringstream out;
    write_convexity_class_csv(rows, out);
    CHECK(out.str().rfind("D,alpha,diameter,min_curvature,sphere_convex,gap,scaled_gap\n", 0) == 0);
}
