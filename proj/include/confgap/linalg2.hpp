#pragma once

#include <array>
#include <cmath>

namespace confgap {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double a) const { return {x * a, y * a}; }
    constexpr Vec2 operator/(double a) const { return {x / a, y / a}; }
    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr bool operator==(const Vec2&) const = default;

    constexpr double sq_norm() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }
};

constexpr Vec2 operator*(double a, Vec2 v) { return v * a; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
/// Counterclockwise rotation by a quarter turn.
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

using Point = Vec2;

/// Symmetric 2x2 matrix [[a11, a12], [a12, a22]].
struct SymMatrix2 {
    double a11 = 0.0;
    double a12 = 0.0;
    double a22 = 0.0;

    static constexpr SymMatrix2 identity() { return {1.0, 0.0, 1.0}; }
    static constexpr SymMatrix2 scalar(double s) { return {s, 0.0, s}; }
    /// Symmetrized outer product (a b^T + b a^T) / 2.
    static constexpr SymMatrix2 sym_outer(Vec2 a, Vec2 b) {
        return {a.x * b.x, 0.5 * (a.x * b.y + a.y * b.x), a.y * b.y};
    }

    constexpr SymMatrix2 operator+(const SymMatrix2& o) const { return {a11 + o.a11, a12 + o.a12, a22 + o.a22}; }
    constexpr SymMatrix2 operator-(const SymMatrix2& o) const { return {a11 - o.a11, a12 - o.a12, a22 - o.a22}; }
    constexpr SymMatrix2 operator*(double s) const { return {a11 * s, a12 * s, a22 * s}; }
    constexpr bool operator==(const SymMatrix2&) const = default;

    constexpr Vec2 apply(Vec2 v) const { return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y}; }
    constexpr double quad(Vec2 v) const { return a11 * v.x * v.x + 2.0 * a12 * v.x * v.y + a22 * v.y * v.y; }
    constexpr double trace() const { return a11 + a22; }
    constexpr double det() const { return a11 * a22 - a12 * a12; }
    double max_abs_entry() const { return std::fmax(std::fabs(a11), std::fmax(std::fabs(a12), std::fabs(a22))); }

    /// Eigenvalues in ascending order.
    std::array<double, 2> eigenvalues() const {
        const double mean = 0.5 * (a11 + a22);
        const double rad = std::hypot(0.5 * (a11 - a22), a12);
        return {mean - rad, mean + rad};
    }

    /// Unit eigenvector of the largest eigenvalue.
    Vec2 top_eigenvector() const {
        const double lmax = eigenvalues()[1];
        // pick the better conditioned of the two row-derived candidates
        Vec2 c1{a12, lmax - a11};
        Vec2 c2{lmax - a22, a12};
        Vec2 v = c1.sq_norm() >= c2.sq_norm() ? c1 : c2;
        const double n = v.norm();
        if (n == 0.0) return {1.0, 0.0};
        return v / n;
    }
};

constexpr SymMatrix2 operator*(double s, const SymMatrix2& m) { return m * s; }

}  // namespace confgap
