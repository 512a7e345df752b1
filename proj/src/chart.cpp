#include "confgap/chart.hpp"

#include <cmath>
#include <array>
#include <complex>
#include <numbers>

#include "confgap/errors.hpp"

namespace confgap {

std::string to_string(Model m) {
    switch (m) {
        case Model::EuclideanPlane: return "EuclideanPlane";
        case Model::PoincareDisk: return "PoincareDisk";
        case Model::StereographicSphere: return "StereographicSphere";
    }
    return "unknown";
}

Model model_from_string(const std::string& name) {
    if (name == "EuclideanPlane" || name == "euclidean") return Model::EuclideanPlane;
    if (name == "PoincareDisk" || name == "poincare") return Model::PoincareDisk;
    if (name == "StereographicSphere" || name == "sphere") return Model::StereographicSphere;
    throw DomainError("unknown chart model '" + name + "'");
}

ConformalChart ConformalChart::euclidean() { return {}; }

ConformalChart ConformalChart::poincare_disk() {
    ConformalChart c;
    c.model_ = Model::PoincareDisk;
    return c;
}

ConformalChart ConformalChart::stereographic_sphere(double radius) {
    if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
    ConformalChart c;
    c.model_ = Model::StereographicSphere;
    c.radius_ = radius;
    return c;
}

ConformalChart ConformalChart::with_extra(ScalarField phi_extra, std::string expression) const {
    ConformalChart c = *this;
    c.phi_extra_ = std::move(phi_extra);
    c.phi_expression_ = expression.empty() ? c.phi_extra_->description() : std::move(expression);
    return c;
}

double ConformalChart::curvature() const {
    switch (model_) {
        case Model::EuclideanPlane: return 0.0;
        case Model::PoincareDisk: return -1.0;
        case Model::StereographicSphere: return 1.0 / (radius_ * radius_);
    }
    return 0.0;
}

bool ConformalChart::in_range(Point x) const {
    if (!std::isfinite(x.x) || !std::isfinite(x.y)) return false;
    if (model_ == Model::PoincareDisk) return x.sq_norm() < 1.0;
    return true;
}

void ConformalChart::require_in_range(Point x) const {
    if (!in_range(x)) {
        throw DomainError("point (" + std::to_string(x.x) + ", " + std::to_string(x.y) + ") outside the range of " +
                          to_string(model_));
    }
}

Jet2 ConformalChart::log_factor(Point x) const {
    const Jet2 x1 = Jet2::x1(x.x);
    const Jet2 x2 = Jet2::x2(x.y);
    Jet2 phi;
    switch (model_) {
        case Model::EuclideanPlane: break;
        case Model::PoincareDisk: phi = std::numbers::ln2 - log(1.0 - (x1 * x1 + x2 * x2)); break;
        case Model::StereographicSphere: {
            const double r2 = radius_ * radius_;
            phi = std::log(2.0 * r2) - log(r2 + x1 * x1 + x2 * x2);
            break;
        }
    }
    if (phi_extra_) phi += phi_extra_->jet(x);
    return phi;
}

double ConformalChart::factor(Point x) const {
    const double s = x.sq_norm();
    double f = 1.0;
    switch (model_) {
        case Model::EuclideanPlane: break;
        case Model::PoincareDisk: {
            const double d = 1.0 - s;
            f = 4.0 / (d * d);
            break;
        }
        case Model::StereographicSphere: {
            const double r2 = radius_ * radius_;
            const double d = r2 + s;
            f = 4.0 * r2 * r2 / (d * d);
            break;
        }
    }
    if (phi_extra_) f *= std::exp(2.0 * (*phi_extra_)(x));
    return f;
}

std::string ConformalChart::label() const {
    std::string s = to_string(model_);
    if (model_ == Model::StereographicSphere) s += "(R=" + std::to_string(radius_) + ")";
    if (phi_extra_) s += "+phi[" + phi_expression_ + "]";
    return s;
}

double conformal_factor(const ConformalChart& chart, Point x) {
    chart.require_in_range(x);
    return chart.factor(x);
}

SymMatrix2 conformal_hessian(const SymMatrix2& hess_g, Vec2 grad_F, Vec2 grad_phi, const SymMatrix2& g_at_x) {
    // <grad phi, grad F>_g = dphi^T g^{-1} dF
    const double det = g_at_x.det();
    const SymMatrix2 g_inv{g_at_x.a22 / det, -g_at_x.a12 / det, g_at_x.a11 / det};
    const double inner = dot(grad_phi, g_inv.apply(grad_F));
    return hess_g - SymMatrix2::sym_outer(grad_phi, grad_F) * 2.0 + g_at_x * inner;
}

LaplacianCoefficients ConformalLaplacian::at(Point x) const {
    chart_.require_in_range(x);
    const Jet2 phi = chart_.log_factor(x);
    return {std::exp(-2.0 * phi.v), phi.g * static_cast<double>(n_ - 2)};
}

ConformalLaplacian conformal_laplacian_coeffs(const ConformalChart& chart, int n) {
    if (n < 2) throw DomainError("dimension must be at least 2");
    return ConformalLaplacian(chart, n);
}

SchrodingerForm schrodinger_transform(const ConformalChart& chart, const ScalarField& rho_tilde, int n) {
    if (n < 2) throw DomainError("dimension must be at least 2");
    SchrodingerForm out;
    if (n == 2) {
        out.potential = ScalarField::constant(0.0);
    } else {
        const double a = 0.25 * (n - 2) * (n - 2);
        const double b = 0.5 * (n - 2);
        out.potential = ScalarField::from_values(
            [chart, a, b](Point x) {
                const Jet2 phi = chart.log_factor(x);
                return a * phi.g.sq_norm() + b * phi.h.trace();
            },
            "schrodinger potential n=" + std::to_string(n));
    }
    if (rho_tilde.exact_derivatives()) {
        out.weight = ScalarField::from_jet(
            [chart, rho_tilde](const Jet2& x1, const Jet2& x2) {
                const Point p{x1.v, x2.v};
                return rho_tilde.jet(p) * exp(chart.log_factor(p) * 2.0);
            },
            "(" + rho_tilde.description() + ")*e^{2phi}[" + chart.label() + "]");
    } else {
        out.weight = ScalarField::from_values([chart, rho_tilde](Point p) { return rho_tilde(p) * chart.factor(p); },
                                              "(" + rho_tilde.description() + ")*e^{2phi}");
    }
    return out;
}

double principal_curvature_transform(double kappa, double dphi_dN, double phi) {
    return std::exp(-phi) * (kappa + dphi_dN);
}

double distance(const ConformalChart& chart, Point p, Point q) {
    if (chart.deformed()) throw UnsupportedOperation("geodesic distance is only available on undeformed models");
    chart.require_in_range(p);
    chart.require_in_range(q);
    switch (chart.model()) {
        case Model::EuclideanPlane: return (p - q).norm();
        case Model::PoincareDisk: {
            const double num = (p - q).norm();
            const double den = std::sqrt((1.0 - p.sq_norm()) * (1.0 - q.sq_norm()));
            return 2.0 * std::asinh(num / den);
        }
        case Model::StereographicSphere: {
            const double R = chart.radius();
            // unit vectors on the sphere; chord length gives the angle stably
            auto lift = [R](Point x) {
                const Point u = x / R;
                const double s = u.sq_norm();
                const double d = 1.0 + s;
                return std::array<double, 3>{2.0 * u.x / d, 2.0 * u.y / d, (s - 1.0) / d};
            };
            const auto a = lift(p);
            const auto b = lift(q);
            const double chord = std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                                           (a[2] - b[2]) * (a[2] - b[2]));
            return 2.0 * R * std::asin(std::fmin(1.0, 0.5 * chord));
        }
    }
    return 0.0;
}

Point mobius_to_origin(Point z, Point a) {
    const std::complex<double> zc{z.x, z.y};
    const std::complex<double> ac{a.x, a.y};
    const std::complex<double> w = (zc - ac) / (1.0 - std::conj(ac) * zc);
    return {w.real(), w.imag()};
}

Point sphere_rotation_to_origin(Point z, Point a, double radius) {
    const std::complex<double> zc{z.x / radius, z.y / radius};
    const std::complex<double> bc{a.x / radius, a.y / radius};
    const std::complex<double> w = (zc - bc) / (1.0 + std::conj(bc) * zc);
    return {w.real() * radius, w.imag() * radius};
}

}  // namespace confgap
