#include "cocyclelab/lds.hpp"
#include "cocyclelab/linalg.hpp"
#include "cocyclelab/lyapunov.hpp"
#include "cocyclelab/perturb.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

using namespace cocy;

namespace {

// rotating SL(d) cocycle over the golden rotation, a nontrivial spectrum
MatrixCocycle test_cocycle(int d) {
    Mat m = Mat::Identity(d, d);
    for (int i = 0; i + 1 < d; ++i) m(i, i + 1) = 1.0;
    return MatrixCocycle(GroupFamily::sl(d), product_rule({constant_rule(m), rotation_field(d, 0.0, 1.0)}));
}

void BM_full_spectrum(benchmark::State& st) {
    const int d = static_cast<int>(st.range(0));
    const auto a = test_cocycle(d);
    const auto base = DiscreteBase::golden_rotation();
    for (auto _ : st) benchmark::DoNotOptimize(full_spectrum(a, base, base.point(0.1), 10000).exponents);
    st.SetItemsProcessed(st.iterations() * 10000);
}
BENCHMARK(BM_full_spectrum)->Arg(2)->Arg(3)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_lambda_hat(benchmark::State& st) {
    const int k = static_cast<int>(st.range(0));
    const auto a = test_cocycle(4);
    const auto base = DiscreteBase::golden_rotation();
    for (auto _ : st) benchmark::DoNotOptimize(lambda_hat_k(a, base, base.point(0.2), 10000, k));
    st.SetItemsProcessed(st.iterations() * 10000);
}
BENCHMARK(BM_lambda_hat)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_matriciant_rk4(benchmark::State& st) {
    const auto fb = FlowBase::linear_torus((std::sqrt(5.0) - 1.0) / 2.0);
    const Generator g(Algebra::gl(2),
                      function_rule(
                          [](const BasePoint& z) {
                              Mat m(2, 2);
                              m << std::sin(2 * std::numbers::pi * z[0]), 1.0, std::cos(2 * std::numbers::pi * z[1]), 0.2;
                              return m;
                          },
                          "mixed"),
                      false);
    IntegrateOptions o;
    o.verify = false;
    for (auto _ : st) benchmark::DoNotOptimize(integrate_matriciant(g, fb, fb.point(0.1, 0.2), 10.0, o));
    st.SetItemsProcessed(st.iterations() * 10000);
}
BENCHMARK(BM_matriciant_rk4)->Unit(benchmark::kMillisecond);

void BM_lp_distance(benchmark::State& st) {
    const auto base = DiscreteBase::doubling();
    const auto a = test_cocycle(2);
    const auto b = MatrixCocycle::constant(GroupFamily::sl(2), Mat::Identity(2, 2));
    LpParams lp;
    lp.samples = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(lp_estimate(a, b, base, lp).d);
    st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_lp_distance)->Arg(1000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_split(benchmark::State& st) {
    const auto base = DiscreteBase::doubling();
    const auto a = MatrixCocycle::constant(GroupFamily::sl(2), Mat::Identity(2, 2));
    SplitPlan plan;
    plan.delta = std::exp(1.0) - 1.0;
    for (auto _ : st) benchmark::DoNotOptimize(split_spectrum(a, base, plan).report.distances.size());
}
BENCHMARK(BM_split)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
