#include <cmath>
#include <numbers>
#include <sstream>

#include "confgap/errors.hpp"
#include "confgap/torsion.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace confgap;

namespace {

constexpr double pi = std::numbers::pi;

double cap_chart_radius() { return std::tan(0.9 * std::atan(1.0 / 5.0)); }

double cap_rhs(double r) { return 4.0 / ((1.0 + r * r) * (1.0 + r * r)); }

}  // namespace

TEST_CASE("rho^beta Hessian eigenvalues against finite differences") {
    auto g = oracle::rng(77);
    for (double beta : {1.0, 2.5}) {
        auto rho_beta = [beta](Point p) {
            const double s = p.sq_norm();
            return std::pow(4.0 / ((1.0 + s) * (1.0 + s)), beta);
        };
        double worst = 0.0;
        for (int k = 0; k < 50; ++k) {
            const Point x = oracle::random_in_disk(g, 0.9);
            const auto fd = oracle::fd_hessian(rho_beta, x, 1e-4).eigenvalues();
            auto [e1, e2] = rho_beta_hessian_eigs(x, beta);
            if (e1 > e2) std::swap(e1, e2);
            worst = std::max(worst, std::fabs(e1 - fd[0]) / std::fabs(fd[0]));
            worst = std::max(worst, std::fabs(e2 - fd[1]) / std::max(std::fabs(fd[1]), std::fabs(fd[0])));
        }
        MESSAGE("beta " << beta << " worst relative error " << worst);
        CHECK(worst <= 1e-6);
    }
    const auto [a, b] = rho_beta_hessian_eigs({0.0, 0.0}, 1.0);
    CHECK(a == doctest::Approx(-16.0));
    CHECK(b == doctest::Approx(-16.0));

    for (double beta : {1.0, 3.0}) {
        const double edge = 1.0 / std::sqrt(1.0 + 4.0 * beta);
        CHECK(rho_beta_hessian_eigs({0.99 * edge, 0.0}, beta).second < 0.0);
        CHECK(rho_beta_hessian_eigs({0.0, 1.01 * edge}, beta).second > 0.0);
        CHECK(rho_beta_hessian_eigs({0.0, 1.01 * edge}, beta).first < 0.0);
    }
    CHECK_THROWS_AS(rho_beta_hessian_eigs({0.1, 0.1}, 0.5), DomainError);
}

TEST_CASE("circumradius threshold and chart containment") {
    CHECK(circumradius_threshold(1.0) == doctest::Approx(0.394791).epsilon(1e-6));
    CHECK(circumradius_threshold(1e8) < 1e-8);
    for (double beta : {1.0, 2.0, 10.0}) {
        // a geodesic ball of radius C about the chart origin has chart radius tan(C / 2)
        const double chart_r = std::tan(0.5 * circumradius_threshold(beta));
        CHECK(chart_r == doctest::Approx(1.0 / (1.0 + 4.0 * beta)));
        CHECK(chart_r < 1.0 / std::sqrt(1.0 + 4.0 * beta));
        const auto sphere = ConformalChart::stereographic_sphere(1.0);
        CHECK(distance(sphere, {0.0, 0.0}, {chart_r, 0.0}) == doctest::Approx(circumradius_threshold(beta)));
    }
}

TEST_CASE("flat disk torsion converges to the classical solution") {
    const double a = 1.0;
    const auto disk = Domain2D::euclidean_circle(ConformalChart::euclidean(), {0.0, 0.0}, a, 1024);
    double err[2] = {0.0, 0.0};
    const double hs[2] = {0.05, 0.025};
    for (int k = 0; k < 2; ++k) {
        const auto sol = solve_flat_torsion(disk, hs[k]);
        CHECK(sol.residual <= 1e-10);
        for (std::size_t i = 0; i < sol.mesh.num_vertices(); ++i) {
            const Point p = sol.mesh.vertices[i];
            err[k] = std::max(err[k], std::fabs(sol.u(static_cast<Eigen::Index>(i)) - 0.25 * (a * a - p.sq_norm())));
        }
        CHECK(maximum_principle_check(sol).holds);
    }
    MESSAGE("max errors " << err[0] << " " << err[1]);
    CHECK(err[1] <= 1e-3);
    CHECK(err[0] / err[1] >= 3.0);
}

TEST_CASE("Makar-Limanov square-root concavity on the flat disk") {
    const auto disk = Domain2D::euclidean_circle(ConformalChart::euclidean(), {0.0, 0.0}, 1.0, 512);
    const auto sol = solve_flat_torsion(disk, 0.02);
    const auto rep = power_concavity(sol.mesh, sol.u, 0.5);
    MESSAGE("discrete max eig " << rep.max_hess_eig << " tol " << rep.tolerance);
    CHECK(rep.verdict == Verdict::Concave);

    Eigen::VectorXd exact(sol.mesh.num_vertices());
    for (std::size_t i = 0; i < sol.mesh.num_vertices(); ++i) {
        exact(static_cast<Eigen::Index>(i)) =
            sol.mesh.boundary[i] ? 0.0 : 0.25 * (1.0 - sol.mesh.vertices[i].sq_norm());
    }
    const auto field = power_hessian_field(sol.mesh, exact, 0.5);
    double worst = 0.0;
    for (const auto& s : field.samples) {
        // sqrt((1 - r^2) / 4): radial -1 / (2 (1 - r^2)^{3/2}), tangential -1 / (2 sqrt(1 - r^2))
        const double q = 1.0 - s.x.sq_norm();
        const double radial = -0.5 / std::pow(q, 1.5);
        const double tangential = -0.5 / std::sqrt(q);
        const auto e = s.hess_flat.eigenvalues();
        worst = std::max(worst, std::fabs(e[0] - radial) / std::fabs(radial));
        worst = std::max(worst, std::fabs(e[1] - tangential) / std::fabs(tangential));
    }
    MESSAGE("exact nodal values: worst relative Hessian error " << worst);
    CHECK(worst <= 1e-2);
    CHECK(concavity_report(field).verdict == Verdict::Concave);
}

TEST_CASE("torsion is linear in the density") {
    const auto sphere = ConformalChart::stereographic_sphere(1.0);
    const auto cap = Domain2D::euclidean_circle(sphere, {0.0, 0.0}, 0.15, 128);
    const auto one = solve_torsion(cap, 0.02);
    TorsionOptions opts;
    opts.rho_tilde = ScalarField::constant(2.0);
    const auto two = solve_torsion(cap, 0.02, opts);
    REQUIRE(one.u.size() == two.u.size());
    CHECK((two.u - 2.0 * one.u).norm() <= 1e-12 * two.u.norm());
    CHECK_THROWS_AS(maximum_principle_check(two), UnsupportedOperation);
}

TEST_CASE("spherical cap torsion below the Kennington threshold") {
    const auto sphere = ConformalChart::stereographic_sphere(1.0);
    const double a = cap_chart_radius();
    CHECK(2.0 * std::atan(a) == doctest::Approx(0.9 * circumradius_threshold(1.0)));
    const auto cap = Domain2D::euclidean_circle(sphere, {0.0, 0.0}, a, 512);
    const auto sol = solve_torsion(cap, a / 40.0);
    CHECK(sol.residual <= 1e-10);
    CHECK(sol.sphere_convex);
    CHECK(sol.circumradius == doctest::Approx(0.9 * circumradius_threshold(1.0)).epsilon(1e-4));

    const double oracle_center = oracle::radial_poisson_center(cap_rhs, a);
    CHECK(oracle_center == doctest::Approx(std::log(1.0 + a * a)).epsilon(1e-10));
    const double rel = std::fabs(sol.value_at({0.0, 0.0}) - oracle_center) / oracle_center;
    MESSAGE("center relative error " << rel);
    CHECK(rel <= 1e-4);

    const auto rep = power_concavity_check(sol, 1.0);
    MESSAGE("cube-root max eig " << rep.max_hess_eig << " tol " << rep.tolerance);
    CHECK(rep.verdict == Verdict::Concave);

    const auto levels = level_set_connectivity(sol, 10);
    CHECK(levels.levels.size() == 10);
    CHECK(levels.holds);

    const auto curv = level_curve_curvature(sol, 1.0);
    MESSAGE("level curvature flat " << curv.min_flat << " sphere " << curv.min_sphere);
    CHECK(curv.holds);
    CHECK(curv.min_sphere > 0.0);

    CHECK(maximum_principle_check(sol).holds);
    CHECK_THROWS_AS(power_concavity_check(sol, 0.5), DomainError);
}

TEST_CASE("off-center cap is recentered before meshing") {
    const auto sphere = ConformalChart::stereographic_sphere(1.0);
    const auto cap = Domain2D::euclidean_circle(sphere, {0.3, -0.2}, 0.12, 256);
    const auto sol = solve_torsion(cap, 0.006);
    const double a = std::tan(0.5 * sol.circumradius);
    for (const Point& p : sol.domain->vertices()) CHECK(p.norm() == doctest::Approx(a).epsilon(1e-6));
    const double rel = std::fabs(sol.value_at({0.0, 0.0}) - std::log(1.0 + a * a)) / std::log(1.0 + a * a);
    MESSAGE("center relative error " << rel);
    CHECK(rel <= 1e-3);
    CHECK(power_concavity_check(sol, 1.0).verdict == Verdict::Concave);

    std::ostringstream out;
    write_torsion_csv(sol, out);
    CHECK(out.str().rfind("x,y,u,boundary\n", 0) == 0);
}

TEST_CASE("torsion chart requirements") {
    const auto flat = Domain2D::euclidean_circle(ConformalChart::euclidean(), {0.0, 0.0}, 0.2, 64);
    CHECK_THROWS_AS(solve_torsion(flat, 0.05), UnsupportedOperation);
    const auto big = Domain2D::euclidean_circle(ConformalChart::stereographic_sphere(2.0), {0.0, 0.0}, 0.2, 64);
    CHECK_THROWS_AS(solve_torsion(big, 0.05), UnsupportedOperation);
    const auto cap = Domain2D::euclidean_circle(ConformalChart::stereographic_sphere(1.0), {0.0, 0.0}, 0.2, 64);
    CHECK_THROWS_AS(solve_flat_torsion(cap, 0.05), UnsupportedOperation);
}
