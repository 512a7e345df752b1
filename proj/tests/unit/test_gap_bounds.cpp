#include "doctest.h"
#include "gap_corollaries.hpp"

TEST_CASE("weighted cap gap exceeds the sup-weight bound") {
    const auto r = gapcheck::weighted_cap("1 + 0.1*x1", 0.3, 0.02);
    MESSAGE("gap " << r.gap << " bound " << r.bound << " condition margin " << r.condition.worst_margin);
    CHECK(r.sphere_convex);
    CHECK(r.condition.holds);
    CHECK(r.concavity.verdict == confgap::Verdict::Concave);
    CHECK(r.gap >= r.bound);
    CHECK(r.passed());
}

TEST_CASE("strongly convex weight breaks the space-form condition") {
    const auto r = gapcheck::weighted_cap("1 + 5*(x1^2 + x2^2)", 0.3, 0.04);
    MESSAGE("condition margin " << r.condition.worst_margin);
    CHECK_FALSE(r.condition.holds);
}

TEST_CASE("nearly round conformal sphere") {
    const auto r = gapcheck::conformal_cap("0.002 + 0.003*x1^2 - 0.002*x1*x2 + 0.001*x2^2", 0.3, 0.02);
    MESSAGE("phi norm " << r.phi_norm << " gap " << r.gap << " bound " << r.bound);
    CHECK(r.phi_norm <= 0.01);
    CHECK(r.rho_min < r.rho_max);
    CHECK(r.passed());
}
