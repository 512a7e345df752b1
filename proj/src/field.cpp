#include "confgap/field.hpp"

#include <cmath>
#include <cstdio>

namespace confgap {

namespace {

Jet2 finite_difference_jet(const ScalarField::ValueFn& f, Point p) {
    const double h = 1e-5 * (1.0 + p.norm());
    const Vec2 ex{h, 0.0};
    const Vec2 ey{0.0, h};
    const double f0 = f(p);
    const double fxp = f(p + ex), fxm = f(p - ex);
    const double fyp = f(p + ey), fym = f(p - ey);
    const double fpp = f(p + ex + ey), fpm = f(p + ex - ey);
    const double fmp = f(p - ex + ey), fmm = f(p - ex - ey);
    Jet2 j;
    j.v = f0;
    j.g = {(fxp - fxm) / (2.0 * h), (fyp - fym) / (2.0 * h)};
    j.h = {(fxp - 2.0 * f0 + fxm) / (h * h), (fpp - fpm - fmp + fmm) / (4.0 * h * h),
           (fyp - 2.0 * f0 + fym) / (h * h)};
    return j;
}

}  // namespace

ScalarField::ScalarField()
    : jet_(std::make_shared<const JetFn>([](const Jet2&, const Jet2&) { return Jet2::constant(0.0); })),
      is_constant_(true),
      description_("0") {}

ScalarField ScalarField::constant(double c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", c);
    ScalarField f = from_jet([c](const Jet2&, const Jet2&) { return Jet2::constant(c); }, buf);
    f.is_constant_ = true;
    f.constant_value_ = c;
    return f;
}

ScalarField ScalarField::from_jet(JetFn fn, std::string description) {
    ScalarField f;
    f.is_constant_ = false;
    f.jet_ = std::make_shared<const JetFn>(std::move(fn));
    f.description_ = std::move(description);
    return f;
}

ScalarField ScalarField::from_values(ValueFn fn, std::string description) {
    ScalarField f;
    f.jet_.reset();
    f.is_constant_ = false;
    f.value_ = std::make_shared<const ValueFn>(std::move(fn));
    f.description_ = std::move(description);
    return f;
}

double ScalarField::operator()(Point p) const {
    if (is_constant_) return constant_value_;
    if (jet_) return (*jet_)(Jet2::constant(p.x), Jet2::constant(p.y)).v;
    return (*value_)(p);
}

Jet2 ScalarField::jet(Point p) const {
    if (jet_) return (*jet_)(Jet2::x1(p.x), Jet2::x2(p.y));
    return finite_difference_jet(*value_, p);
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    if (a.is_constant_ && b.is_constant_) return ScalarField::constant(a.constant_value_ + b.constant_value_);
    const std::string desc = "(" + a.description_ + ")+(" + b.description_ + ")";
    if (a.jet_ && b.jet_) {
        return ScalarField::from_jet(
            [fa = a.jet_, fb = b.jet_](const Jet2& x1, const Jet2& x2) { return (*fa)(x1, x2) + (*fb)(x1, x2); },
            desc);
    }
    return ScalarField::from_values([a, b](Point p) { return a(p) + b(p); }, desc);
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    if (a.is_constant_ && b.is_constant_) return ScalarField::constant(a.constant_value_ * b.constant_value_);
    const std::string desc = "(" + a.description_ + ")*(" + b.description_ + ")";
    if (a.jet_ && b.jet_) {
        return ScalarField::from_jet(
            [fa = a.jet_, fb = b.jet_](const Jet2& x1, const Jet2& x2) { return (*fa)(x1, x2) * (*fb)(x1, x2); },
            desc);
    }
    return ScalarField::from_values([a, b](Point p) { return a(p) * b(p); }, desc);
}

ScalarField operator*(double s, const ScalarField& a) { return ScalarField::constant(s) * a; }

}  // namespace confgap
