#include <doctest.h>

#include "cocyclelab/errors.hpp"
#include "cocyclelab/lds.hpp"

#include <cmath>
#include <numbers>

using namespace cocy;

namespace {

constexpr double kPi = std::numbers::pi;

Mat sample_sl2() {
    Mat m(2, 2);
    m << 0.3, 1.0, -0.5, -0.3;
    return m;
}

// scalar generator a(z) = sin(2 pi z0) on the torus, height dependent
Generator sine_generator() {
    return Generator(Algebra::gl(1),
                     function_rule([](const BasePoint& z) { return Mat::Constant(1, 1, std::sin(2 * kPi * z[0])); },
                                   "sine"),
                     false);
}

DirectionField constant_field(const Vec& v) {
    return [v](const BasePoint&) { return v; };
}

}  // namespace

TEST_SUITE("lds_engine") {

TEST_CASE("algebra membership") {
    CHECK(Algebra::sl(2).contains(sample_sl2()));
    CHECK_FALSE(Algebra::sl(2).contains(Mat::Identity(2, 2)));
    // J times a symmetric matrix is Hamiltonian
    CHECK(Algebra::sp(4).contains(symplectic_J(4) * Mat::Identity(4, 4)));
    CHECK(parse_algebra("gl", 3).has_value());
    CHECK_FALSE(parse_algebra("sp", 3).has_value());
    CHECK_THROWS_AS(Generator::constant(Algebra::sl(2), Mat::Identity(2, 2)), FamilyViolation);
}

TEST_CASE("constant generator: matriciant is the exponential") {
    const auto fb = FlowBase::linear_torus(0.61803398875);
    const Generator g = Generator::constant(Algebra::sl(2), sample_sl2());
    const Mat phi = integrate_matriciant(g, fb, fb.point(0.1, 0.2), 2.5);
    CHECK((phi - expm(2.5 * sample_sl2())).norm() < 1e-10);
    const Mat back = integrate_matriciant(g, fb, fb.point(0.1, 0.2), -1.0);
    CHECK((back - expm(-1.0 * sample_sl2())).norm() < 1e-10);
}

TEST_CASE("height dependent scalar generator against the closed form") {
    const auto fb = FlowBase::linear_torus(0.5);
    const Generator g = sine_generator();
    for (double x : {0.0, 0.17, 0.5}) {
        for (double t : {0.3, 1.0, 2.7}) {
            MatriciantInfo info;
            const Mat phi = integrate_matriciant(g, fb, fb.point(x, 0.0), t, {}, &info);
            const double integral = (std::cos(2 * kPi * x) - std::cos(2 * kPi * (x + t))) / (2 * kPi);
            CHECK(phi(0, 0) == doctest::Approx(std::exp(integral)).epsilon(1e-10));
            CHECK(info.trace_integral == doctest::Approx(integral).epsilon(1e-9).scale(1.0));
            CHECK(info.halving_error < 1e-6);
        }
    }
}

TEST_CASE("coarse steps are rejected") {
    const auto fb = FlowBase::linear_torus(0.5);
    const Generator g(Algebra::gl(1),
                      function_rule([](const BasePoint& z) { return Mat::Constant(1, 1, 40.0 * std::sin(2 * kPi * 7.3 * z[0])); },
                                    "fast"),
                      false);
    IntegrateOptions o;
    o.h = 0.2;
    CHECK_THROWS_AS(integrate_matriciant(g, fb, fb.point(0.1, 0.0), 1.0, o), StepTooCoarse);
}

TEST_CASE("Liouville residual is tiny") {
    const auto fb = FlowBase::linear_torus(0.5);
    CHECK(liouville_residual(Generator::constant(Algebra::gl(2), sample_sl2() + Mat::Identity(2, 2)), fb,
                             fb.point(0.3, 0.4), 10.0) < 1e-6);
    CHECK(liouville_residual(sine_generator(), fb, fb.point(0.3, 0.4), 10.0) < 1e-6);
}

TEST_CASE("spectrum of a constant generator") {
    const auto fb = FlowBase::linear_torus(0.5);
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = 0.4;
    m(1, 1) = -0.4;
    const auto s = lds_spectrum(Generator::constant(Algebra::sl(2), m), fb, fb.point(0.0, 0.0), 200.0, 1.0);
    CHECK(s.exponents[0] == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(s.exponents[1] == doctest::Approx(-0.4).epsilon(1e-6));
}

TEST_CASE("property: Gronwall bound on random constant pairs") {
    Rng rng(50);
    const auto fb = FlowBase::linear_torus(0.5);
    for (int i = 0; i < 10; ++i) {
        const Mat a = 0.5 * rng.gaussian(2, 2);
        const Mat b = a + 0.2 * rng.gaussian(2, 2);
        const auto r = gronwall_check(Generator::constant(Algebra::gl(2), a), Generator::constant(Algebra::gl(2), b), fb,
                                      1.0, 20, 3 + static_cast<std::uint64_t>(i));
        CHECK(r.holds());
    }
}

TEST_CASE("mix flowbox: direction contract, traceless, det preserved") {
    const auto fb = FlowBase::suspension(DiscreteBase::golden_rotation());
    const Generator a = Generator::constant(Algebra::sl(2), sample_sl2());
    FlowboxSpec spec;
    spec.center = fb.section_map().point(0.4);
    spec.r = 0.05;
    Vec u(2), v(2);
    u << 1, 0.3;
    v << -0.2, 1;
    const FlowboxResult r = flowbox_mix(a, fb, spec, constant_field(u), constant_field(v), 1.0);
    for (double x : {0.38, 0.4, 0.42}) {
        const BasePoint s = fb.section_map().point(x);
        const Mat pb = time_one(r.B, fb, s), pa = time_one(a, fb, s);
        CHECK(projective_angle(pb * u, pa * v) < 1e-7);
        CHECK(pb.determinant() == doctest::Approx(pa.determinant()).epsilon(1e-9));
        for (double t : {0.1, 0.5, 0.9}) CHECK(std::abs(r.B.perturbation(fb, fb.point(s, t)).trace()) < 1e-11);
    }
    // outside the box nothing changes
    const BasePoint far = fb.section_map().point(0.8);
    CHECK((time_one(r.B, fb, far) - time_one(a, fb, far)).norm() < 1e-12);
}

TEST_CASE("saddle flowbox scales e by 1+delta") {
    const auto fb = FlowBase::suspension(DiscreteBase::doubling());
    const Generator a = Generator::constant(Algebra::sl(2), sample_sl2());
    FlowboxSpec spec;
    spec.center = fb.section_map().point(0.3);
    Vec e(2);
    e << 0.6, 0.8;
    const FlowboxResult r = flowbox_saddle(a, fb, spec, constant_field(e), 0.5, 1.0);
    const BasePoint s = fb.section_map().point(0.3);
    const Mat pb = time_one(r.B, fb, s), pa = time_one(a, fb, s);
    CHECK((pb * e - 1.5 * pa * e).norm() < 1e-7 * (pa * e).norm());
}

TEST_CASE("overlapping flowboxes are refused") {
    const auto fb = FlowBase::suspension(DiscreteBase::golden_rotation());
    const Generator a = Generator::constant(Algebra::sl(2), Mat::Zero(2, 2));
    FlowboxSpec spec;
    spec.center = fb.section_map().point(0.4);
    const Vec e = Vec::Unit(2, 0);
    const FlowboxResult r = flowbox_saddle(a, fb, spec, constant_field(e), 0.5, 1.0);
    spec.center = fb.section_map().point(0.43);
    CHECK_THROWS_AS(flowbox_saddle(r.B, fb, spec, constant_field(e), 0.5, 1.0), FlowboxOverlap);
    spec.r = 0.6;
    CHECK_THROWS_AS(flowbox_saddle(a, fb, spec, constant_field(e), 0.5, 100.0), FlowboxOverlap);
    const auto torus = FlowBase::linear_torus(0.5);
    spec.r = 0.05;
    CHECK_THROWS_AS(flowbox_saddle(a, torus, spec, constant_field(e), 0.5, 1.0), InvalidArgument);
}

TEST_CASE("continuous split, short horizon") {
    const auto fb = FlowBase::suspension(DiscreteBase::doubling());
    const Generator a = Generator::constant(Algebra::sl(2), Mat::Zero(2, 2));
    FlowSplitParams p;
    p.center = fb.section_map().point(0.55);
    p.T_total = 5000.0;
    const FlowSplitResult r = split_spectrum_flow(a, fb, p);
    CHECK(r.report.mu_V == doctest::Approx(0.1));
    CHECK(r.report.effective_measure < r.report.mu_V);
    CHECK(std::abs(r.report.exponent_D - r.report.predicted) < 0.03);
    CHECK(std::abs(r.report.spectrum_D.sum() - r.report.sum_rule_rhs) < 1e-6);
}

}
