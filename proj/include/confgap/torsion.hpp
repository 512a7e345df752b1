#pragma once

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "confgap/concavity.hpp"

namespace confgap {

/// Nodal solution of -Delta u = f on a triangulated domain, f = rho_tilde e^{2 phi}
/// in the flat chart of the domain's model.
struct TorsionSolution {
    Eigen::VectorXd u;  // zero on boundary vertices
    TriMesh mesh;
    ConformalChart chart;
    /// The meshed domain: recentered so its circumcenter is the chart origin on the sphere.
    std::optional<Domain2D> domain;
    /// Circumcenter of the input domain (chart coordinates) and the geodesic circumradius.
    Point circumcenter{};
    double circumradius = 0.0;
    bool sphere_convex = false;
    bool unit_density = true;
    double residual = 0.0;  // |A u - b| / |b|

    /// Piecewise-linear interpolant; DomainError outside the mesh.
    double value_at(Point x) const;
    double max_value() const { return u.maxCoeff(); }
};

struct TorsionOptions {
    MeshOptions mesh;
    /// Density multiplying the metric factor in the right-hand side.
    ScalarField rho_tilde = ScalarField::constant(1.0);
    /// Rotate the circumcenter to the stereographic origin before meshing.
    bool recenter = true;
};

inline constexpr double kTorsionResidualTolerance = 1e-10;

/// Torsion problem on the unit sphere in the stereographic chart:
/// Delta u + rho_tilde 4 / (1 + |x|^2)^2 = 0, u = 0 on the boundary. The chart is
/// the antipodal projection from the circumcenter: the domain is rotated
/// so its circumcenter sits at the chart origin. UnsupportedOperation unless
/// the domain chart is the undeformed sphere of radius 1.
TorsionSolution solve_torsion(const Domain2D& domain, double h, const TorsionOptions& options = {});

/// Euclidean torsion problem Delta u + rho_tilde = 0. UnsupportedOperation unless
/// the domain chart is the undeformed plane.
TorsionSolution solve_flat_torsion(const Domain2D& domain, double h, const TorsionOptions& options = {});

/// Flat-chart Hessian of w = u^p at interior vertices at least `margin` from
/// the boundary (default_exclusion_margin when unset). The fits are taken
/// on u and pushed through grad w = p u^{p-1} grad u,
/// Hess w = p u^{p-1} (Hess u + (p - 1) grad u (x) grad u / u).
/// Each sample stores w in `v`; the connection is the flat chart.
LogHessianField power_hessian_field(const TriMesh& mesh, const Eigen::VectorXd& u, double exponent,
                                    std::optional<double> margin = {}, const FitOptions& options = {});

/// Concavity of u^exponent in the flat chart.
ConcavityReport power_concavity(const TriMesh& mesh, const Eigen::VectorXd& u, double exponent,
                                std::optional<double> margin = {});

/// beta / (1 + 2 beta).
double kennington_exponent(double beta);

/// Concavity of u^{beta / (1 + 2 beta)}. DomainError for beta < 1.
ConcavityReport power_concavity_check(const TorsionSolution& sol, double beta, std::optional<double> margin = {});

/// Eigenvalues of the flat Hessian of rho^beta, rho = 4 / (1 + |x|^2)^2, with s = |x|^2:
/// -4^{1+beta} beta / (1+s)^{1+2 beta} (tangential) and
/// 4^{1+beta} beta (-1 + (1 + 4 beta) s) / (1+s)^{2(1+beta)} (radial).
std::pair<double, double> rho_beta_hessian_eigs(Point x, double beta);

/// 2 arctan(1 / (1 + 4 beta)).
double circumradius_threshold(double beta);

struct LevelSetConnectivity {
    std::vector<double> levels;
    std::vector<int> components;  // per level
    bool holds = false;
};

/// Mesh-connected components of {u >= c} for c = k max(u) / (levels + 1), k = 1..levels.
LevelSetConnectivity level_set_connectivity(const TorsionSolution& sol, int levels = 10);

struct LevelCurvature {
    double min_flat = 0.0;    // curvature of the w-level curves, positive when the superlevel set is convex
    double min_sphere = 0.0;  // e^{-phi} (kappa + dphi/dN) with N = -grad u / |grad u|
    Point worst_point{};
    double tolerance = 0.0;
    std::size_t samples = 0;
    bool holds = false;
};

/// Level-curve curvature of u at the retained samples of power_hessian_field(beta / (1 + 2 beta)).
/// Samples with |grad u| below 1e-3 of its maximum are skipped.
LevelCurvature level_curve_curvature(const TorsionSolution& sol, double beta, std::optional<double> margin = {});

struct MaximumPrincipleCheck {
    bool holds = false;
    double min_interior = 0.0;
    double worst_excess = 0.0;  // max over vertices of u - bound
    double tolerance = 0.0;
};

/// 0 < u in the interior and u <= the same problem's solution on the circumscribed ball:
/// log((1 + a^2) / (1 + |x|^2)) with a = tan(C / 2) on the sphere, (C^2 - |x - c|^2) / 4 in the plane.
/// Only defined for rho_tilde = 1. The tolerance is 1e-3 max(u).
MaximumPrincipleCheck maximum_principle_check(const TorsionSolution& sol);

/// Rows: x,y,u,boundary.
void write_torsion_csv(const TorsionSolution& sol, std::ostream& out);

}  // namespace confgap
