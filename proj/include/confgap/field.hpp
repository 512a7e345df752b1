#pragma once

#include <functional>
#include <memory>
#include <string>

#include "confgap/jet.hpp"
#include "confgap/linalg2.hpp"

namespace confgap {

/// A smooth scalar field on chart coordinates.
///
/// Fields built from a jet evaluator (closed forms, parsed expressions) carry
/// exact first and second derivatives. Fields built from a plain value
/// function fall back to centered differences with step 1e-5 * (1 + |x|).
/// Copies share the underlying evaluator; all evaluation is const and
/// thread-safe.
class ScalarField {
public:
    using JetFn = std::function<Jet2(const Jet2& x1, const Jet2& x2)>;
    using ValueFn = std::function<double(Point)>;

    ScalarField();  // identically zero

    static ScalarField constant(double c);
    static ScalarField from_jet(JetFn fn, std::string description = "closed-form");
    static ScalarField from_values(ValueFn fn, std::string description = "sampled");

    double operator()(Point p) const;
    Jet2 jet(Point p) const;
    Vec2 gradient(Point p) const { return jet(p).g; }
    SymMatrix2 hessian(Point p) const { return jet(p).h; }

    bool exact_derivatives() const noexcept { return jet_ != nullptr; }
    /// Set only for fields known to be constant.
    bool is_constant() const noexcept { return is_constant_; }
    double constant_value() const noexcept { return constant_value_; }
    const std::string& description() const noexcept { return description_; }

    /// Pointwise combinations keep exact derivatives when both inputs have them.
    friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
    friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
    friend ScalarField operator*(double s, const ScalarField& a);

private:
    std::shared_ptr<const JetFn> jet_;
    std::shared_ptr<const ValueFn> value_;
    bool is_constant_ = false;
    double constant_value_ = 0.0;
    std::string description_;
};

}  // namespace confgap
