#include <doctest.h>

#include "cocyclelab/errors.hpp"
#include "cocyclelab/perturb.hpp"

#include <cmath>

using namespace cocy;

namespace {

Mat diag2(double a, double b) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

}  // namespace

TEST_SUITE("collapse") {

TEST_CASE("swap of diagonal blocks sends the top incoming direction to the bottom outgoing one") {
    const GroupFamily fam = GroupFamily::sl(2);
    bool degenerate = true;
    double err = 1.0;
    const Mat r = midpoint_swap(diag2(8, 0.125), diag2(8, 0.125), 1, fam, &degenerate, &err);
    CHECK_FALSE(degenerate);
    CHECK(fam.contains(r));
    CHECK(projective_angle(r * Vec::Unit(2, 0), Vec::Unit(2, 1)) < 1e-12);
    CHECK(err < 1e-12);
    // the swapped product has no growth: G R P is orthogonal here
    const Mat prod = diag2(8, 0.125) * r * diag2(8, 0.125);
    CHECK(spectral_norm(prod) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("property: swaps stay in the family") {
    Rng rng(44);
    for (const auto& fam : {GroupFamily::sl(3), GroupFamily::gl(3), GroupFamily::sp(4)}) {
        for (int i = 0; i < 10; ++i) {
            const Mat p = fam.kind == FamilyKind::Sp ? random_sp(rng, 4, 1.0) : random_sl(rng, 3, 1.0);
            const Mat g = fam.kind == FamilyKind::Sp ? random_sp(rng, 4, 1.0) : random_sl(rng, 3, 1.0);
            bool degenerate = false;
            const Mat r = midpoint_swap(p, g, 1, fam, &degenerate);
            CHECK(fam.contains(r, 1e-8));
        }
    }
}

TEST_CASE("degenerate gap: no-op by default, error when strict") {
    const auto base = DiscreteBase::golden_rotation();
    const auto a = MatrixCocycle::constant(GroupFamily::sl(2), Mat::Identity(2, 2));
    CollapsePlan plan;
    plan.horizon = 20;
    plan.lambda_n = 1000;
    const CollapseStep s = collapse_step(a, base, base.point(0.1), plan);
    CHECK(s.degenerate);
    CHECK((s.R - Mat::Identity(2, 2)).norm() == 0.0);
    plan.strict = true;
    CHECK_THROWS_AS(collapse_step(a, base, base.point(0.1), plan), DegenerateGap);
}

TEST_CASE("collapse step bound on a hyperbolic constant") {
    const auto base = DiscreteBase::golden_rotation();
    const auto a = MatrixCocycle::constant(GroupFamily::sl(2), diag2(2, 0.5));
    CollapsePlan plan;
    plan.lambda_n = 5000;
    const CollapseStep s = collapse_step(a, base, base.point(0.3), plan);
    CHECK(s.lhs <= s.rhs + 0.05);
    CHECK(s.lhs_unswapped == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("collapse reduces the top exponent within the budget") {
    const auto base = DiscreteBase::golden_rotation();
    const auto a = MatrixCocycle::constant(GroupFamily::sl(2), diag2(2, 0.5));
    CollapseParams cp;
    cp.n = 20000;
    cp.points = 3;
    const CollapseResult r = collapse(a, base, 1, 0.1, 0.1, cp);
    CHECK_FALSE(r.report.trivial);
    CHECK(r.report.distance.d < 0.1);
    CHECK(r.report.lambda_B.value <= 0.5 * r.report.lambda_A.value);
    CHECK(r.report.first_return >= cp.horizon);
}

TEST_CASE("collapse of a one-point spectrum is trivial") {
    const auto base = DiscreteBase::golden_rotation();
    const MatrixCocycle a(GroupFamily::sl(2), rotation_field(2, 0.2, 1.0));
    CollapseParams cp;
    cp.n = 5000;
    cp.points = 2;
    const CollapseResult r = collapse(a, base, 1, 0.1, 0.1, cp);
    CHECK(r.report.trivial);
    CHECK(r.B.patches().empty());
}

TEST_CASE("collapse coverage budget") {
    const auto base = DiscreteBase::golden_rotation();
    const auto a = MatrixCocycle::constant(GroupFamily::sl(2), diag2(2, 0.5));
    CollapseParams cp;
    cp.n = 2000;
    cp.points = 2;
    cp.min_coverage = 5.0;
    CHECK_THROWS_AS(collapse(a, base, 1, 0.1, 0.1, cp), BudgetExceeded);
    CHECK_THROWS_AS(collapse(a, base, 2, 0.1, 0.1, cp), InvalidArgument);
}

}
