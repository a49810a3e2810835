#include <doctest.h>

#include "cocyclelab/lyapunov.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

using namespace cocy;

namespace {

// log-moduli of eigenvalues, descending: the spectrum of a constant cocycle
std::vector<double> eigen_oracle(const Mat& m) {
    Eigen::EigenSolver<Mat> es(m);
    std::vector<double> out;
    for (int i = 0; i < m.rows(); ++i) out.push_back(std::log(std::abs(es.eigenvalues()(i))));
    std::sort(out.rbegin(), out.rend());
    return out;
}

}  // namespace

TEST_SUITE("lyapunov_engine") {

TEST_CASE("frozen oracle: diag(2, 1/2) has exponents +-log 2") {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = 2;
    m(1, 1) = 0.5;
    const auto base = DiscreteBase::golden_rotation();
    const auto s = full_spectrum(MatrixCocycle::constant(GroupFamily::sl(2), m), base, base.point(0.1), 1000);
    CHECK(s.exponents[0] == doctest::Approx(0.6931471805599453).epsilon(1e-9));
    CHECK(s.exponents[1] == doctest::Approx(-0.6931471805599453).epsilon(1e-9));
    CHECK(s.simple());
}

TEST_CASE("property: constant cocycles match eigenvalue moduli") {
    Rng rng(12);
    const auto base = DiscreteBase::golden_rotation();
    for (int i = 0; i < 12; ++i) {
        const int d = 2 + i % 3;
        const Mat m = random_sl(rng, d, 0.6);
        const auto want = eigen_oracle(m);
        const auto s = full_spectrum(MatrixCocycle::constant(GroupFamily::sl(d), m), base, base.point(0.2), 20000);
        // complex pairs converge slowly, hence the loose tolerance
        for (int k = 0; k < d; ++k) CHECK(std::abs(s.exponents[static_cast<std::size_t>(k)] - want[static_cast<std::size_t>(k)]) < 2e-3);
    }
}

TEST_CASE("rotation cocycle has zero spectrum with multiplicity d") {
    const auto base = DiscreteBase::golden_rotation();
    const MatrixCocycle a(GroupFamily::sl(2), rotation_field(2, 0.1, 1.0));
    const auto s = full_spectrum(a, base, base.point(0.0), 20000);
    CHECK(std::abs(s.exponents[0]) < 1e-2);
    CHECK(s.one_point());
    CHECK(s.multiplicities() == std::vector<int>{2});
}

TEST_CASE("grouping of exponents") {
    const auto g = group_exponents({1.0, 0.99, 0.0, -1.0, -1.02}, 0.05);
    CHECK(g.size() == 3);
    CHECK(g[0].size() == 2);
    CHECK(g[2].size() == 2);
}

TEST_CASE("property: sum rule for exterior powers on constant SL(3)") {
    Rng rng(77);
    const auto base = DiscreteBase::golden_rotation();
    for (int i = 0; i < 5; ++i) {
        const Mat m = random_sl(rng, 3, 0.5);
        const auto a = MatrixCocycle::constant(GroupFamily::sl(3), m);
        const auto s = full_spectrum(a, base, base.point(0.3), 20000);
        for (int k = 1; k <= 3; ++k)
            CHECK(std::abs(lambda_hat_k(a, base, base.point(0.3), 20000, k) - s.top_sum(k)) < 1e-2);
        CHECK(lambda_hat_k(a, base, base.point(0.3), 100, 0) == 0.0);
    }
}

TEST_CASE("exterior power of a constant is its compound") {
    Rng rng(1);
    const Mat m = random_sl(rng, 3, 0.5);
    const auto ext = exterior_power(MatrixCocycle::constant(GroupFamily::sl(3), m), 2);
    CHECK(ext.dim() == 3);
    const auto base = DiscreteBase::golden_rotation();
    CHECK((ext.evaluate(base.point(0.5)) - compound(m, 2)).norm() < 1e-12);
    CHECK(ext.as_cocycle().dim() == 3);
}

TEST_CASE("Lambda_k and jumps for a constant diagonal") {
    Mat m = Mat::Zero(3, 3);
    m.diagonal() << 4, 1, 0.25;
    const auto a = MatrixCocycle::constant(GroupFamily::sl(3), m);
    const auto base = DiscreteBase::golden_rotation();
    const Estimate l1 = Lambda_k(a, base, 1, 2000, 4, 3);
    CHECK(l1.value == doctest::Approx(std::log(4.0)).epsilon(1e-3));
    const Estimate l2 = Lambda_k(a, base, 2, 2000, 4, 3);
    CHECK(l2.value == doctest::Approx(std::log(4.0)).epsilon(1e-3));
    const Estimate j1 = jump_k(a, base, 1, 2000, 4, 3);
    CHECK(j1.value == doctest::Approx(0.5 * std::log(4.0)).epsilon(1e-3));
}

TEST_CASE("direction exponent and Birkhoff average") {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = 3;
    m(1, 1) = 1.0 / 3;
    const auto a = MatrixCocycle::constant(GroupFamily::sl(2), m);
    const auto base = DiscreteBase::golden_rotation();
    CHECK(direction_exponent(a, base, base.point(0.0), Vec::Unit(2, 1), 1000) ==
          doctest::Approx(-std::log(3.0)).epsilon(1e-9));
    CHECK(birkhoff_log_det(a, base, base.point(0.0), 1000) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("spectrum JSON record") {
    const auto base = DiscreteBase::golden_rotation();
    const auto s = full_spectrum(MatrixCocycle::constant(GroupFamily::sl(2), Mat::Identity(2, 2)), base,
                                 base.point(0.0), 200);
    const auto j = nlohmann::json::parse(to_json(s, 5));
    CHECK(j["seed"] == 5);
    CHECK(j["exponents"].size() == 2);
    CHECK(j["n"] == 200);
}

TEST_CASE("history records finite-time exponents") {
    SpectrumOptions o;
    o.history_points = 5;
    const auto base = DiscreteBase::golden_rotation();
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = 2;
    m(1, 1) = 0.5;
    const auto s = full_spectrum(MatrixCocycle::constant(GroupFamily::sl(2), m), base, base.point(0.0), 1000, o);
    CHECK(s.history.size() == 5);
    CHECK(s.history.back().first == doctest::Approx(1000));
}

}
