#include <doctest.h>

#include "cocyclelab/base.hpp"

#include <cmath>

using namespace cocy;

TEST_SUITE("base_dynamics") {

TEST_CASE("rotation orbit matches x + n alpha mod 1") {
    const double alpha = (std::sqrt(5.0) - 1.0) / 2.0;
    const auto base = DiscreteBase::golden_rotation();
    BasePoint x = base.point(0.123);
    for (int n = 1; n <= 50; ++n) {
        x = base.forward(x);
        const double want = std::fmod(0.123 + n * alpha, 1.0);
        CHECK(circle_dist(x[0], want) < 1e-12);
    }
    CHECK(circle_dist(iterate(base, base.point(0.123), -7)[0], std::fmod(0.123 - 7 * alpha + 10.0, 1.0)) < 1e-12);
}

TEST_CASE("doubling: forward doubles, backward undoes exactly") {
    const auto base = DiscreteBase::doubling();
    const BasePoint x = base.point(0.3);
    const BasePoint y = base.forward(x);
    CHECK(y[0] == doctest::Approx(0.6).epsilon(1e-12));
    const BasePoint z = base.backward(y);
    CHECK(z.window == x.window);
    CHECK(z.pos == x.pos);
    // long round trip through the natural extension
    const BasePoint far = iterate(base, x, 500);
    const BasePoint back = iterate(base, far, -500);
    CHECK(back.window == x.window);
    // orbit does not collapse to 0 after 53 steps
    CHECK(far[0] > 0.0);
}

TEST_CASE("cat map is (x+y, x+2y) mod 1") {
    const auto base = DiscreteBase::cat();
    const BasePoint x = base.point(0.2, 0.7);
    const BasePoint y = base.forward(x);
    CHECK(circle_dist(y[0], 0.9) < 1e-12);
    CHECK(circle_dist(y[1], 0.6) < 1e-12);
    const BasePoint z = base.backward(y);
    CHECK(circle_dist(z[0], 0.2) < 1e-12);
    CHECK(circle_dist(z[1], 0.7) < 1e-12);
}

TEST_CASE("property: backward inverts forward on random points") {
    Rng rng(17);
    for (auto base : {DiscreteBase::golden_rotation(), DiscreteBase::rotation(0.3183), DiscreteBase::doubling(),
                      DiscreteBase::cat()}) {
        for (int i = 0; i < 200; ++i) {
            const BasePoint x = base.sample(rng);
            const BasePoint y = base.backward(base.forward(x));
            for (int c = 0; c < base.dim(); ++c) CHECK(circle_dist(x[c], y[c]) < 1e-9);
        }
    }
}

TEST_CASE("golden rotation visit frequency has low discrepancy") {
    const auto base = DiscreteBase::golden_rotation();
    const double f = visit_frequency(base, RegionSet::interval(0.0, 0.1), base.point(0.0), 100000);
    CHECK(std::abs(f - 0.1) < 1e-3);
}

TEST_CASE("doubling visit frequency is Lebesgue-typical") {
    const auto base = DiscreteBase::doubling();
    const double f = visit_frequency(base, RegionSet::interval(0.5, 0.1), sample_measure(base, 5), 200000);
    CHECK(std::abs(f - 0.1) < 5e-3);
}

TEST_CASE("regions: measure, wrap-around, containment") {
    const RegionSet w = RegionSet::interval(0.95, 0.1);
    CHECK(w.measure() == doctest::Approx(0.1));
    CHECK(w.pieces().size() == 2);
    const auto base = DiscreteBase::golden_rotation();
    CHECK(w.contains(base.point(0.99)));
    CHECK(w.contains(base.point(0.02)));
    CHECK_FALSE(w.contains(base.point(0.5)));
    const RegionSet b = RegionSet::box(0.1, 0.2, 0.3, 0.5);
    CHECK(b.measure() == doctest::Approx(0.1));
    CHECK(RegionSet::interval(0.0, 0.2).overlaps(RegionSet::interval(0.15, 0.1)));
    CHECK_FALSE(RegionSet::interval(0.0, 0.2).overlaps(RegionSet::interval(0.25, 0.1)));
}

TEST_CASE("images of intervals") {
    const auto dbl = DiscreteBase::doubling();
    const auto img = image_region(dbl, RegionSet::interval(0.5, 0.1));
    REQUIRE(img);
    CHECK(img->a == doctest::Approx(0.0));
    CHECK(img->len == doctest::Approx(0.2));
    CHECK(disjoint_from_image(dbl, RegionSet::interval(0.5, 0.1)));
    CHECK_FALSE(disjoint_from_image(dbl, RegionSet::interval(0.0, 0.1)));
    // invariance of Lebesgue measure
    CHECK(preimage_measure(dbl, RegionSet::interval(0.3, 0.2)) == doctest::Approx(0.2));
    const auto rot = DiscreteBase::rotation(0.25);
    CHECK(disjoint_from_image(rot, RegionSet::interval(0.0, 0.2)));
    CHECK_FALSE(disjoint_from_image(rot, RegionSet::interval(0.0, 0.3)));
}

TEST_CASE("suspension flow climbs the roof and applies the map") {
    const auto fb = FlowBase::suspension(DiscreteBase::golden_rotation());
    const BasePoint z = fb.point(fb.section_map().point(0.1), 0.25);
    const BasePoint w = flow(fb, z, 1.5);
    CHECK(fb.height_of(w) == doctest::Approx(0.75));
    const double alpha = (std::sqrt(5.0) - 1.0) / 2.0;
    CHECK(circle_dist(fb.section_of(w)[0], std::fmod(0.1 + alpha, 1.0)) < 1e-12);
    const BasePoint back = flow(fb, w, -1.5);
    CHECK(fb.height_of(back) == doctest::Approx(0.25));
    CHECK(circle_dist(fb.section_of(back)[0], 0.1) < 1e-12);
}

TEST_CASE("linear torus flow") {
    const auto fb = FlowBase::linear_torus(0.7);
    const BasePoint w = flow(fb, fb.point(0.1, 0.2), 2.0);
    CHECK(circle_dist(w[0], std::fmod(0.1 + 2.0, 1.0)) < 1e-12);
    CHECK(circle_dist(w[1], std::fmod(0.2 + 1.4, 1.0)) < 1e-12);
}

TEST_CASE("sampling is deterministic in the seed") {
    const auto base = DiscreteBase::doubling();
    const auto a = sample_points(base, 42, 5);
    const auto b = sample_points(base, 42, 5);
    for (int i = 0; i < 5; ++i) CHECK(a[static_cast<std::size_t>(i)].window == b[static_cast<std::size_t>(i)].window);
    const auto c = sample_points(base, 43, 5);
    CHECK(a[0].window != c[0].window);
}

}
