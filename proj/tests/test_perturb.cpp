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

TEST_SUITE("perturbation_lab") {

TEST_CASE("property: mixing aligns B(y)E with A(y)F inside the budget") {
    Rng rng(6);
    const auto base = DiscreteBase::golden_rotation();
    for (int i = 0; i < 12; ++i) {
        const int d = 2 + i % 3;
        const auto fam = i % 2 ? GroupFamily::sl(d) : GroupFamily::gl(d);
        const auto a = MatrixCocycle::constant(fam, random_sl(rng, d, 0.4));
        const BasePoint y = base.sample(rng);
        const Vec e = rng.unit_vector(d), f = rng.unit_vector(d);
        const double eps = 0.05 + 0.2 * rng.uniform();
        const MixResult r = mix_directions(a, base, y, e, f, eps);
        CHECK(r.alignment_error < 1e-9);
        CHECK(r.distance.d < eps);
        CHECK(r.region.contains(y));
        CHECK(r.measure <= 0.05 + 1e-15);
        CHECK(fam.contains(r.B.evaluate(y)));
    }
}

TEST_CASE("mixing parallel directions") {
    const auto base = DiscreteBase::golden_rotation();
    const auto a = MatrixCocycle::constant(GroupFamily::sl(2), Mat::Identity(2, 2));
    const Vec e = Vec::Unit(2, 0);
    CHECK_THROWS_AS(mix_directions(a, base, base.point(0.2), e, -3.0 * e, 0.1), DegenerateDirections);
    MixOptions o;
    o.allow_parallel = true;
    const MixResult r = mix_directions(a, base, base.point(0.2), e, 2.0 * e, 0.1, o);
    CHECK(r.distance.d == 0.0);
}

TEST_CASE("line field: return time against a brute-force backward scan") {
    const auto base = DiscreteBase::doubling();
    const RegionSet V = RegionSet::interval(0.5, 0.1);
    const auto a = MatrixCocycle::constant(GroupFamily::sl(2), Mat::Identity(2, 2));
    const LineField field(a, base, V, Vec::Unit(2, 0), 100000);
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const BasePoint x = base.sample(rng);
        long brute = -1;
        BasePoint q = x;
        for (long n = 1; n < 100000; ++n) {
            q = base.backward(q);
            // q in T(V) iff its own preimage lies in V
            if (V.contains(base.backward(q))) {
                brute = n;
                break;
            }
        }
        CHECK(field.return_time(x) == brute);
        CHECK(projective_angle(field.at(x), Vec::Unit(2, 0)) < 1e-12);
    }
}

TEST_CASE("split over the identity: invariants of D") {
    const auto base = DiscreteBase::doubling();
    const auto a = MatrixCocycle::constant(GroupFamily::sl(2), Mat::Identity(2, 2));
    SplitPlan plan;
    plan.delta = std::exp(1.0) - 1.0;
    plan.verify_n = 100000;
    const SplitResult r = split_spectrum(a, base, plan);
    const SplitReport& rep = r.report;
    CHECK(rep.mu_V == doctest::Approx(0.1));
    CHECK(rep.line_field_error < 1e-9);
    CHECK(rep.det_residual < 1e-9);
    for (const auto& dc : rep.distances) {
        CHECK(dc.c1.delta <= dc.bound_c1 + 1e-12);
        CHECK(dc.d.delta <= dc.bound_d + 1e-12);
    }
    CHECK(std::abs(rep.exponent_D - 0.1) < 0.02);
    CHECK(std::abs(rep.sum_rule_lhs - rep.sum_rule_rhs) < 1e-6);
}

TEST_CASE("split preconditions") {
    const auto base = DiscreteBase::doubling();
    const auto id = MatrixCocycle::constant(GroupFamily::sl(2), Mat::Identity(2, 2));
    SplitPlan bad_region;
    bad_region.V = RegionSet::interval(0.0, 0.1);
    CHECK_THROWS_AS(split_spectrum(id, base, bad_region), InvalidArgument);
    const auto hyp = MatrixCocycle::constant(GroupFamily::sl(2), diag2(2, 0.5));
    CHECK_THROWS_AS(split_spectrum(hyp, base, SplitPlan{}), NotOnePoint);
    const auto so = MatrixCocycle::constant(GroupFamily::so(2), Mat::Identity(2, 2));
    CHECK_THROWS_AS(split_spectrum(so, base, SplitPlan{}), NotSaddleConservative);
}

TEST_CASE("scaling shifts every exponent by log(1+delta) mu(U)") {
    const auto base = DiscreteBase::doubling();
    const auto a = MatrixCocycle::constant(GroupFamily::gl(2), Mat::Identity(2, 2));
    const ScaleResult r = scale_spectrum(a, base, RegionSet::interval(0.0, 0.1), 0.5, 0.9);
    CHECK_FALSE(r.shrunk);
    const auto s = full_spectrum(r.B, base, sample_measure(base, 9), 200000);
    const double want = std::log(1.5) * 0.1;
    CHECK(std::abs(s.exponents[0] - want) < 5e-3);
    CHECK(std::abs(s.exponents[1] - want) < 5e-3);
    CHECK_THROWS_AS(scale_spectrum(MatrixCocycle::constant(GroupFamily::sl(2), Mat::Identity(2, 2)), base,
                                   RegionSet::interval(0.0, 0.1), 0.5, 0.9),
                    FamilyViolation);
}

TEST_CASE("scaling shrinks the region to respect a small budget") {
    const auto base = DiscreteBase::doubling();
    const auto a = MatrixCocycle::constant(GroupFamily::gl(2), Mat::Identity(2, 2));
    const ScaleResult r = scale_spectrum(a, base, RegionSet::interval(0.0, 0.5), 1.0, 0.05);
    CHECK(r.shrunk);
    CHECK(r.distance.d < 0.05);
}

TEST_CASE("split regions avoid their image") {
    for (auto base : {DiscreteBase::doubling(), DiscreteBase::golden_rotation()}) {
        const auto V = choose_split_region(base, 0.05);
        REQUIRE(V);
        CHECK(V->measure() == doctest::Approx(0.05));
        CHECK(disjoint_from_image(base, *V));
    }
}

TEST_CASE("densify separates a one-point spectrum") {
    const auto base = DiscreteBase::doubling();
    const auto a = MatrixCocycle::constant(GroupFamily::sl(3), Mat::Identity(3, 3));
    DensifyOptions o;
    o.n = 60000;
    const DensifyResult r = densify_simple(a, base, 0.5, o);
    CHECK(r.report.simple);
    CHECK(r.report.multiplicities == std::vector<int>{1, 1, 1});
    CHECK(r.report.distance < 0.5);
}

TEST_CASE("constant patch rules are frozen") {
    const auto base = DiscreteBase::golden_rotation();
    const RulePtr f = function_rule([](const BasePoint&) { return Mat(Mat::Identity(2, 2)); }, "");
    CHECK(freeze_if_constant(f, RegionSet::interval(0.1, 0.2), base, 1)->describe().rfind("constant", 0) == 0);
    const RulePtr g = rotation_field(2, 0.0, 1.0);
    CHECK(freeze_if_constant(g, RegionSet::interval(0.1, 0.2), base, 1) == g);
}

}
