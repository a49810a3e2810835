#include <doctest.h>

#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/errors.hpp"

#include <cmath>

using namespace cocy;

namespace {

Mat diag2(double a, double b) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

// random piecewise SL(2) cocycle on 2^j cells
MatrixCocycle random_piecewise(Rng& rng, int cells, double spread) {
    std::vector<Mat> m;
    for (int i = 0; i < cells; ++i) m.push_back(random_sl(rng, 2, spread));
    return MatrixCocycle(GroupFamily::sl(2), piecewise_rule(m));
}

}  // namespace

TEST_SUITE("cocycle_space") {

TEST_CASE("constant cocycle evaluates and composes") {
    const auto base = DiscreteBase::golden_rotation();
    const auto a = MatrixCocycle::constant(GroupFamily::sl(2), diag2(2, 0.5));
    const Mat p = compose_n(a, base, base.point(0.3), 5);
    CHECK((p - diag2(32, 1.0 / 32)).norm() < 1e-9);
    const Mat q = compose_n(a, base, base.point(0.3), -3);
    CHECK((q - diag2(1.0 / 8, 8)).norm() < 1e-12);
    CHECK((compose_n(a, base, base.point(0.3), 0) - Mat::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("compose_n follows the orbit order A(T^{n-1}x)...A(x)") {
    const auto base = DiscreteBase::rotation(0.5);
    Mat a0(2, 2), a1(2, 2);
    a0 << 1, 1, 0, 1;
    a1 << 1, 0, 1, 1;
    const MatrixCocycle c(GroupFamily::sl(2), piecewise_rule({a0, a1}));
    const Mat p = compose_n(c, base, base.point(0.1), 2);
    CHECK((p - a1 * a0).norm() < 1e-12);
}

TEST_CASE("family violations are raised on checked evaluation") {
    const MatrixCocycle bad(GroupFamily::sl(2), constant_rule(diag2(2, 2)));
    CHECK_THROWS_AS(bad.evaluate(DiscreteBase::golden_rotation().point(0.1)), FamilyViolation);
}

TEST_CASE("patches override the generator and must not overlap") {
    const auto base = DiscreteBase::golden_rotation();
    auto a = MatrixCocycle::constant(GroupFamily::sl(2), Mat::Identity(2, 2));
    auto b = a.with_patch(RegionSet::interval(0.2, 0.1), constant_rule(diag2(3, 1.0 / 3)));
    CHECK(b.evaluate(base.point(0.25))(0, 0) == doctest::Approx(3.0));
    CHECK(b.evaluate(base.point(0.35))(0, 0) == doctest::Approx(1.0));
    CHECK_THROWS(b.with_patch(RegionSet::interval(0.25, 0.1), constant_rule(Mat::Identity(2, 2))));
}

TEST_CASE("exact distance of a patched cocycle, computed by hand") {
    // A = Id, B = diag(2, 1/2) on [0, 0.5): |A-B| = 1, |A^-1 - B^-1| = 1 on half the circle
    const auto base = DiscreteBase::golden_rotation();
    const auto a = MatrixCocycle::constant(GroupFamily::sl(2), Mat::Identity(2, 2));
    const auto b = a.with_patch(RegionSet::interval(0.0, 0.5), constant_rule(diag2(2, 0.5)));
    for (double p : {1.0, 2.0, 4.0}) {
        const LpEstimate e = lp_estimate(a, b, base, {p, 2000, 1});
        CHECK(e.exact);
        const double half = std::pow(0.5, 1.0 / p);
        CHECK(e.norm_direct == doctest::Approx(half).epsilon(1e-12));
        CHECK(e.norm_inverse == doctest::Approx(half).epsilon(1e-12));
        CHECK(e.d == doctest::Approx(2 * half / (1 + 2 * half)).epsilon(1e-12));
    }
    const LpEstimate sup = lp_estimate(a, b, base, {INFINITY, 2000, 1});
    CHECK(sup.delta == doctest::Approx(2.0));
}

TEST_CASE("distance is zero on identical cocycles and symmetric") {
    Rng rng(4);
    const auto base = DiscreteBase::doubling();
    const auto a = random_piecewise(rng, 4, 0.5);
    const auto b = random_piecewise(rng, 8, 0.5);
    CHECK(lp_distance(a, a, base, {}) == 0.0);
    CHECK(lp_distance(a, b, base, {}) == doctest::Approx(lp_distance(b, a, base, {})).epsilon(1e-12));
}

TEST_CASE("property: d_p is monotone in p and below 1") {
    Rng rng(99);
    const auto base = DiscreteBase::doubling();
    for (int i = 0; i < 20; ++i) {
        const auto a = random_piecewise(rng, 1 << (i % 4), 0.6);
        const auto b = random_piecewise(rng, 1 << ((i + 1) % 4), 0.6);
        const double d1 = lp_distance(a, b, base, {1.0, 4000, 7});
        const double d2 = lp_distance(a, b, base, {2.0, 4000, 7});
        const double d4 = lp_distance(a, b, base, {4.0, 4000, 7});
        CHECK(d1 <= d2 + 1e-12);
        CHECK(d2 <= d4 + 1e-12);
        CHECK(d4 < 1.0);
    }
}

TEST_CASE("property: triangle inequality for Delta_1") {
    Rng rng(31);
    const auto base = DiscreteBase::doubling();
    for (int i = 0; i < 10; ++i) {
        const auto a = random_piecewise(rng, 4, 0.5), b = random_piecewise(rng, 2, 0.5), c = random_piecewise(rng, 8, 0.5);
        const double ab = lp_estimate(a, b, base, {}).delta, bc = lp_estimate(b, c, base, {}).delta;
        const double ac = lp_estimate(a, c, base, {}).delta;
        CHECK(ac <= ab + bc + 1e-9);
    }
}

TEST_CASE("rule grammar") {
    const auto base = DiscreteBase::golden_rotation();
    const RulePtr r = parse_rule("product (diag 2 0.5) (rotation 0.25 0)", 2);
    const Mat m = r->eval(base.point(0.4));
    Mat want(2, 2);
    want << 0, -2, 0.5, 0;
    CHECK((m - want).norm() < 1e-12);
    const RulePtr pw = parse_rule("piecewise 2 1 0 0 1  2 0 0 0.5", 2);
    CHECK(pw->eval(base.point(0.7))(0, 0) == doctest::Approx(2.0));
    REQUIRE(pw->breaks(0));
    CHECK(*pw->breaks(0) == std::vector<double>{0.5});
    CHECK(parse_rule("scaled 3 (identity)", 2)->eval(base.point(0.1))(1, 1) == doctest::Approx(3.0));
    CHECK_THROWS_AS(parse_rule("diag 1", 2), ConfigError);
    CHECK_THROWS_AS(parse_rule("wobble 1 2", 2), ConfigError);
    CHECK_THROWS_AS(parse_rule("identity extra", 2), ConfigError);
}

TEST_CASE("describe round-trips through the grammar") {
    const auto base = DiscreteBase::golden_rotation();
    for (const char* text : {"constant 1 2 0 1", "diag 3 0.25", "rotation 0.1 2", "piecewise 2 1 0 0 1 0 1 -1 0"}) {
        const RulePtr r = parse_rule(text, 2);
        const RulePtr s = parse_rule(r->describe(), 2);
        CHECK((r->eval(base.point(0.37)) - s->eval(base.point(0.37))).norm() < 1e-12);
    }
}

TEST_CASE("integrability of bounded cocycles") {
    Rng rng(2);
    const auto base = DiscreteBase::doubling();
    const auto a = random_piecewise(rng, 4, 0.5);
    const auto rep = check_integrability(a, base, {});
    CHECK(rep.finite);
    CHECK(rep.log_plus >= 0.0);
}

}
