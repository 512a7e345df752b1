#pragma once

#include <cmath>

#include "confgap/linalg2.hpp"

namespace confgap {

/// Second-order jet of a scalar function of two variables: value, gradient
/// and Hessian, propagated exactly through arithmetic (forward-mode AD).
struct Jet2 {
    double v = 0.0;
    Vec2 g{};
    SymMatrix2 h{};

    static constexpr Jet2 constant(double c) { return {c, {}, {}}; }
    static constexpr Jet2 x1(double at) { return {at, {1.0, 0.0}, {}}; }
    static constexpr Jet2 x2(double at) { return {at, {0.0, 1.0}, {}}; }
    static constexpr Jet2 variables(Point p, int which) { return which == 0 ? x1(p.x) : x2(p.y); }

    constexpr Jet2 operator-() const { return {-v, -g, h * -1.0}; }
    constexpr Jet2& operator+=(const Jet2& o) { v += o.v; g += o.g; h = h + o.h; return *this; }
    constexpr Jet2& operator-=(const Jet2& o) { v -= o.v; g -= o.g; h = h - o.h; return *this; }
};

/// Applies a scalar function with derivatives f0 = f(a), f1 = f'(a), f2 = f''(a).
constexpr Jet2 chain(const Jet2& a, double f0, double f1, double f2) {
    return {f0, a.g * f1, a.h * f1 + SymMatrix2::sym_outer(a.g, a.g) * f2};
}

constexpr Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
constexpr Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
constexpr Jet2 operator+(Jet2 a, double c) { a.v += c; return a; }
constexpr Jet2 operator+(double c, Jet2 a) { a.v += c; return a; }
constexpr Jet2 operator-(Jet2 a, double c) { a.v -= c; return a; }
constexpr Jet2 operator-(double c, const Jet2& a) { return -a + c; }
constexpr Jet2 operator*(const Jet2& a, double c) { return {a.v * c, a.g * c, a.h * c}; }
constexpr Jet2 operator*(double c, const Jet2& a) { return a * c; }

constexpr Jet2 operator*(const Jet2& a, const Jet2& b) {
    const SymMatrix2 cross_terms = SymMatrix2::sym_outer(a.g, b.g) * 2.0;
    return {a.v * b.v, a.g * b.v + b.g * a.v, a.h * b.v + b.h * a.v + cross_terms};
}

constexpr Jet2 reciprocal(const Jet2& a) {
    const double r = 1.0 / a.v;
    return chain(a, r, -r * r, 2.0 * r * r * r);
}

constexpr Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }
constexpr Jet2 operator/(const Jet2& a, double c) { return a * (1.0 / c); }
constexpr Jet2 operator/(double c, const Jet2& a) { return reciprocal(a) * c; }

inline Jet2 exp(const Jet2& a) {
    const double e = std::exp(a.v);
    return chain(a, e, e, e);
}

inline Jet2 log(const Jet2& a) { return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }

inline Jet2 sqrt(const Jet2& a) {
    const double s = std::sqrt(a.v);
    return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

/// a^p for a real exponent p (a > 0 unless p is a small nonnegative integer).
inline Jet2 pow(const Jet2& a, double p) {
    if (p == 0.0) return Jet2::constant(1.0);
    if (p == 1.0) return a;
    if (p == 2.0) return a * a;
    const double base = std::pow(a.v, p - 2.0);
    return chain(a, base * a.v * a.v, p * base * a.v, p * (p - 1.0) * base);
}

/// General a^b, requires a > 0 when b is not constant.
inline Jet2 pow(const Jet2& a, const Jet2& b) {
    if (b.g == Vec2{} && b.h == SymMatrix2{}) return pow(a, b.v);
    return exp(b * log(a));
}

inline Jet2 sin(const Jet2& a) { return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet2 cos(const Jet2& a) { return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }

}  // namespace confgap
