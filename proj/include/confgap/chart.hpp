#pragma once

#include <optional>
#include <string>

#include "confgap/field.hpp"
#include "confgap/jet.hpp"
#include "confgap/linalg2.hpp"

namespace confgap {

enum class Model { EuclideanPlane, PoincareDisk, StereographicSphere };

std::string to_string(Model m);
Model model_from_string(const std::string& name);

/// A conformal metric e^{2 phi} |dx|^2 on the plane of chart coordinates.
///
/// phi is the sum of the model's log-factor (0 for the plane,
/// log(2 / (1 - |x|^2)) for the Poincare disk, log(2 R^2 / (R^2 + |x|^2)) for
/// the sphere of radius R) and an optional extra smooth field. All charts
/// share one coordinate plane, so a domain's vertices can be measured against
/// any chart.
class ConformalChart {
public:
    ConformalChart() = default;

    static ConformalChart euclidean();
    static ConformalChart poincare_disk();
    static ConformalChart stereographic_sphere(double radius);

    /// Deformed metric e^{2 phi_extra} g_model.
    ConformalChart with_extra(ScalarField phi_extra, std::string expression = {}) const;

    Model model() const noexcept { return model_; }
    double radius() const noexcept { return radius_; }
    bool deformed() const noexcept { return phi_extra_.has_value(); }
    const std::optional<ScalarField>& phi_extra() const noexcept { return phi_extra_; }
    /// Source text of phi_extra when it came from an expression.
    const std::string& phi_expression() const noexcept { return phi_expression_; }

    /// Gaussian curvature of the undeformed model.
    double curvature() const;

    bool in_range(Point x) const;
    /// Throws DomainError outside the coordinate range.
    void require_in_range(Point x) const;

    /// Total log-conformal factor phi with exact derivatives.
    Jet2 log_factor(Point x) const;
    /// e^{2 phi} at x.
    double factor(Point x) const;

    std::string label() const;

private:
    Model model_ = Model::EuclideanPlane;
    double radius_ = 1.0;
    std::optional<ScalarField> phi_extra_;
    std::string phi_expression_;
};

/// e^{2 phi_total(x)}; DomainError outside the model's range.
double conformal_factor(const ConformalChart& chart, Point x);

/// Hessian with respect to e^{2 phi} g from the g-Hessian of F:
/// Hess_g F - (dphi (x) dF + dF (x) dphi) + <grad phi, grad F>_g g.
/// Gradients are differentials (covector components); g is the base metric
/// at the same point.
SymMatrix2 conformal_hessian(const SymMatrix2& hess_g, Vec2 grad_F, Vec2 grad_phi, const SymMatrix2& g_at_x);

/// Coefficients of the conformal Laplacian in dimension n at a point:
/// Delta_{g~} F = multiplier * (Delta_g F + drift . grad F).
struct LaplacianCoefficients {
    double multiplier = 1.0;
    Vec2 drift{};
};

/// Evaluable description of the conformal Laplacian of a chart relative to
/// flat coordinates.
class ConformalLaplacian {
public:
    ConformalLaplacian(ConformalChart chart, int n) : chart_(std::move(chart)), n_(n) {}
    LaplacianCoefficients at(Point x) const;
    int dimension() const noexcept { return n_; }

private:
    ConformalChart chart_;
    int n_;
};

ConformalLaplacian conformal_laplacian_coeffs(const ConformalChart& chart, int n);

/// Potential and weight of the Schrodinger form of the conformal eigenproblem:
/// V = (n-2)^2/4 |grad phi|^2 + (n-2)/2 Delta phi, rho = rho_tilde e^{2 phi}.
/// Derivatives are flat-chart derivatives of the chart's total log-factor.
struct SchrodingerForm {
    ScalarField potential;
    ScalarField weight;
};

SchrodingerForm schrodinger_transform(const ConformalChart& chart, const ScalarField& rho_tilde, int n);

/// Geodesic curvature after the conformal change: e^{-phi} (kappa + dphi/dN).
double principal_curvature_transform(double kappa, double dphi_dN, double phi);

/// Geodesic distance in an undeformed model.
double distance(const ConformalChart& chart, Point p, Point q);

/// Disk automorphism z -> (z - a) / (1 - conj(a) z), sending a to the origin.
Point mobius_to_origin(Point z, Point a);
/// Sphere rotation in stereographic coordinates (radius R) sending a to the origin.
Point sphere_rotation_to_origin(Point z, Point a, double radius);

}  // namespace confgap
