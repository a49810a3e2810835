#include <doctest.h>

#include "cocyclelab/linalg.hpp"

#include <cmath>

using namespace cocy;

TEST_SUITE("linalg") {

TEST_CASE("second compound of a fixed 3x3, minors by hand") {
    Mat m(3, 3);
    m << 1, 2, 3, 4, 5, 6, 7, 8, 10;
    // subsets {0,1},{0,2},{1,2}
    Mat want(3, 3);
    want << -3, -6, -3,
            -6, -11, -4,
            -3, -2, 2;
    CHECK((compound(m, 2) - want).norm() < 1e-12);
    CHECK(compound(m, 3)(0, 0) == doctest::Approx(m.determinant()));
    CHECK((compound(m, 1) - m).norm() == 0.0);
}

TEST_CASE("property: Cauchy-Binet, compounds are multiplicative") {
    Rng rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = 2 + trial % 4;
        const int k = 1 + trial % d;
        const Mat a = rng.gaussian(d, d), b = rng.gaussian(d, d);
        const Mat lhs = compound(a * b, k);
        const Mat rhs = compound(a, k) * compound(b, k);
        CHECK((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }
}

TEST_CASE("binomials and subsets") {
    CHECK(binomial(6, 3) == 20);
    CHECK(binomial(5, 0) == 1);
    const auto s = index_subsets(4, 2);
    REQUIRE(s.size() == 6);
    CHECK(s.front() == std::vector<int>{0, 1});
    CHECK(s.back() == std::vector<int>{2, 3});
}

TEST_CASE("bump profile") {
    CHECK(bump(0.0) == 0.0);
    CHECK(bump(1.0) == 1.0);
    CHECK(bump(0.5) == doctest::Approx(0.5));
    CHECK(bump(-1.0) == 0.0);
    CHECK(bump(2.0) == 1.0);
    for (double t = 0.05; t < 1.0; t += 0.1) {
        const double fd = (bump(t + 1e-6) - bump(t - 1e-6)) / 2e-6;
        CHECK(bump_dot(t) == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK(bump_dot(0.0) == doctest::Approx(0.0));
    CHECK(bump_dot(1.0) == doctest::Approx(0.0));
}

TEST_CASE("expm of a rotation generator") {
    Mat g(2, 2);
    g << 0, -1, 1, 0;
    const Mat r = expm(0.7 * g);
    CHECK(r(0, 0) == doctest::Approx(std::cos(0.7)));
    CHECK(r(1, 0) == doctest::Approx(std::sin(0.7)));
}

TEST_CASE("norms and angles") {
    Mat d = Mat::Zero(3, 3);
    d.diagonal() << 1, -5, 2;
    CHECK(spectral_norm(d) == doctest::Approx(5.0));
    Vec u(2), v(2);
    u << 1, 0;
    v << -1, 0;
    CHECK(projective_angle(u, v) == doctest::Approx(0.0));
    v << 0, 3;
    CHECK(projective_angle(u, v) == doctest::Approx(M_PI / 2));
}

TEST_CASE("property: 2x2 spectral norm agrees with the SVD, also near orthogonal") {
    Rng rng(19);
    for (int i = 0; i < 200; ++i) {
        Mat m = i % 2 ? rng.gaussian(2, 2) : random_orthogonal(rng, 2);
        if (i % 4 == 2) m.col(0) *= -1.0;
        const double svd = Eigen::JacobiSVD<Mat>(m).singularValues()(0);
        CHECK(std::abs(spectral_norm(m) - svd) <= 1e-14 * (1.0 + svd));
    }
}

TEST_CASE("property: random family samplers") {
    Rng rng(11);
    for (int i = 0; i < 30; ++i) {
        const int d = 2 + i % 3;
        CHECK(random_sl(rng, d, 0.5).determinant() == doctest::Approx(1.0).epsilon(1e-10));
        const Mat q = random_orthogonal(rng, d);
        CHECK((q.transpose() * q - Mat::Identity(d, d)).norm() < 1e-12);
        const int e = 2 * (1 + i % 2);
        const Mat s = random_sp(rng, e, 0.5);
        const Mat J = symplectic_J(e);
        CHECK((s.transpose() * J * s - J).norm() < 1e-10);
    }
}

TEST_CASE("rng is reproducible") {
    Rng a(9), b(9);
    for (int i = 0; i < 10; ++i) CHECK(a.uniform() == b.uniform());
    CHECK(mix64(1) != mix64(2));
}

}
