#include <doctest.h>

#include "cocyclelab/errors.hpp"
#include "cocyclelab/groups.hpp"

#include <cmath>

using namespace cocy;

namespace {

// generator of finite-difference derivative zeta'(t) zeta(t)^-1
Mat fd_generator(const IsotopyPath& p, double t) {
    const double h = 1e-5;
    return (p.at(t + h) - p.at(t - h)) / (2 * h) * p.at(t).inverse();
}

std::vector<GroupFamily> steerable_families() {
    return {GroupFamily::gl(2), GroupFamily::gl(3), GroupFamily::sl(2), GroupFamily::sl(3), GroupFamily::sl(4),
            GroupFamily::sp(2), GroupFamily::sp(4), GroupFamily::sp(6), GroupFamily::so(3)};
}

}  // namespace

TEST_SUITE("matrix_groups") {

TEST_CASE("membership residuals") {
    Mat m(2, 2);
    m << 2, 0, 0, 0.5;
    CHECK(GroupFamily::sl(2).contains(m));
    CHECK(GroupFamily::sp(2).contains(m));
    CHECK_FALSE(GroupFamily::so(2).contains(m));
    m(0, 0) = 3;
    CHECK_FALSE(GroupFamily::sl(2).contains(m));
    CHECK(GroupFamily::gl(2).contains(m));
    CHECK_THROWS_AS(GroupFamily::sp(3), InvalidArgument);
    CHECK(parse_family("SL", 3).has_value());
    CHECK_FALSE(parse_family("sp", 3).has_value());
    CHECK_FALSE(parse_family("nope", 2).has_value());
}

TEST_CASE("property: rotation_to hits the target line inside the family") {
    Rng rng(21);
    for (const auto& fam : steerable_families()) {
        for (int i = 0; i < 25; ++i) {
            const Vec u = rng.unit_vector(fam.d) * (0.5 + rng.uniform());
            const Vec v = rng.unit_vector(fam.d);
            const Mat r = rotation_to(u, v, fam);
            CHECK(fam.contains(r, 1e-9));
            CHECK(projective_angle(r * u, v) < 1e-9);
            CHECK(spectral_norm(r) <= steering_constant(fam) + 1e-9);
            CHECK(spectral_norm(r.inverse()) <= steering_constant(fam) + 1e-9);
        }
    }
}

TEST_CASE("rotation_to of parallel vectors is the identity up to sign") {
    Vec u(3);
    u << 1, 2, 3;
    const Mat r = rotation_to(u, 2.0 * u, GroupFamily::sl(3));
    CHECK(projective_angle(r * u, u) < 1e-12);
}

TEST_CASE("saddle scales e by 1+delta and its partner by 1/(1+delta)") {
    Rng rng(5);
    for (const auto& fam : {GroupFamily::sl(2), GroupFamily::sl(3), GroupFamily::sp(4), GroupFamily::gl(3)}) {
        const Vec e = rng.unit_vector(fam.d);
        const Mat s = saddle(e, 0.7, fam);
        CHECK(fam.contains(s));
        CHECK((s * e - 1.7 * e).norm() < 1e-12);
        const Vec f = saddle_partner(e, fam);
        CHECK(std::abs(f.dot(e)) < 1e-12);
        CHECK((s * f - f / 1.7).norm() < 1e-12);
    }
    CHECK_THROWS_AS(saddle(Vec::Unit(3, 0), 0.5, GroupFamily::so(3)), NotSaddleConservative);
    CHECK_THROWS_AS(saddle(Vec::Zero(3), 0.5, GroupFamily::sl(3)), InvalidArgument);
}

TEST_CASE("property: isotopies start at Id, end on target, generator matches derivative") {
    Rng rng(8);
    for (const auto& fam : steerable_families()) {
        const Vec u = rng.unit_vector(fam.d), v = rng.unit_vector(fam.d);
        const IsotopyPath p = isotopy_to(u, v, fam);
        CHECK((p.at(0.0) - Mat::Identity(fam.d, fam.d)).norm() < 1e-12);
        CHECK(projective_angle(p.at(1.0) * u, v) < 1e-9);
        for (double t : {0.2, 0.5, 0.8}) {
            CHECK(fam.contains(p.at(t), 1e-9));
            CHECK((fd_generator(p, t) - p.gen(t)).norm() < 1e-5 * (1.0 + p.K));
            CHECK(spectral_norm(p.gen(t)) <= p.K * (1.0 + 1e-6));
        }
        CHECK(p.gen(1.5).norm() == 0.0);
    }
}

TEST_CASE("saddle isotopy ends at the saddle map") {
    Vec e = Vec::Unit(2, 0);
    const IsotopyPath p = saddle_isotopy(e, 1.0, GroupFamily::sl(2));
    CHECK((p.at(1.0) - saddle(e, 1.0, GroupFamily::sl(2))).norm() < 1e-12);
    CHECK(std::abs(p.gen(0.4).trace()) < 1e-12);
}

TEST_CASE("property: steering path moves u along the straight interpolation") {
    Rng rng(13);
    for (const auto& fam : steerable_families()) {
        if (fam.kind == FamilyKind::SO) continue;
        const Vec u = rng.unit_vector(fam.d), v = rng.unit_vector(fam.d);
        const SteeringPath sp = steering_path(u, v, fam);
        for (double t : {0.0, 0.3, 0.6, 1.0}) {
            const Mat rot = sp.rotation(t);
            CHECK(fam.contains(rot, 1e-9));
            CHECK((sp.scale(t) * rot * u - sp.target(t)).norm() < 1e-9);
        }
        const double h = 1e-5, t = 0.45;
        const Mat fd = (sp.rotation(t + h) - sp.rotation(t - h)) / (2 * h) * sp.rotation(t).inverse();
        CHECK((fd - sp.rotation_rate(t)).norm() < 1e-5);
        const double fs = (std::log(sp.scale(t + h)) - std::log(sp.scale(t - h))) / (2 * h);
        CHECK(sp.scale_rate(t) == doctest::Approx(fs).epsilon(1e-5));
    }
}

}
