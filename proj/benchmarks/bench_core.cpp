#include <benchmark/benchmark.h>

#include <cmath>

#include "sconv/conv.hpp"
#include "sconv/functional.hpp"
#include "sconv/oracle.hpp"
#include "sconv/regularity.hpp"

using namespace sconv;

namespace {

SphereField perturbed(int res) {
    return SphereField::from_function(SphereGrid::make(3, res), [](const Vec3& w) { return cplx(1.0 + 0.1 * w[0], 0.05 * w[2]); });
}

void BM_FieldAnalysis(benchmark::State& state) {
    auto g = SphereGrid::make(3, int(state.range(0)));
    auto fn = [](const Vec3& w) { return cplx(std::exp(w[0]) * w[1]); };
    for (auto _ : state) benchmark::DoNotOptimize(SphereField::from_function(g, fn));
    state.SetItemsProcessed(state.iterations() * g->size());
}
BENCHMARK(BM_FieldAnalysis)->Arg(16)->Arg(32)->Arg(64);

void BM_TwoFoldDensity(benchmark::State& state) {
    auto f = perturbed(16);
    Vec3 x{0.3, -0.4, 0.9};
    for (auto _ : state) benchmark::DoNotOptimize(two_fold_density(f, f, x));
}
BENCHMARK(BM_TwoFoldDensity);

void BM_ThreeFoldDensity(benchmark::State& state) {
    auto f = perturbed(8);
    ConvDensity D({f, f, f});
    Vec3 x{0.7, 0.2, -1.1};
    for (auto _ : state) benchmark::DoNotOptimize(D(x));
}
BENCHMARK(BM_ThreeFoldDensity);

void BM_FourFoldCircle(benchmark::State& state) {
    auto g = SphereGrid::make(2, 8);
    ConvDensity D(std::vector<SphereField>(4, SphereField::constant(g, 1.0)));
    Vec3 x{0.8, 1.3, 0.0};
    for (auto _ : state) benchmark::DoNotOptimize(D(x));
}
BENCHMARK(BM_FourFoldCircle);

void BM_MOperator(benchmark::State& state) {
    auto f = perturbed(int(state.range(0)));
    std::vector<SphereField> fs{f, conjugate_reflection(f), f};
    for (auto _ : state) benchmark::DoNotOptimize(m_operator(fs));
}
BENCHMARK(BM_MOperator)->Arg(16)->Arg(32)->Arg(48)->Unit(benchmark::kMillisecond);

void BM_Phi(benchmark::State& state) {
    auto f = perturbed(12);
    for (auto _ : state) benchmark::DoNotOptimize(phi_functional(f, 4));
}
BENCHMARK(BM_Phi)->Unit(benchmark::kMillisecond);

void BM_MonteCarloMoment(benchmark::State& state) {
    auto g = SphereGrid::make(3, 8);
    std::vector<SphereField> fs(2, SphereField::constant(g, 1.0));
    auto gauss = builtin_test_function("gauss");
    for (auto _ : state) benchmark::DoNotOptimize(mc_moment(fs, gauss, std::size_t(state.range(0)), 1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarloMoment)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_NormEstimate(benchmark::State& state) {
    auto f = random_field(SphereGrid::make(3, 32), 12, 1, 0);
    for (auto _ : state) benchmark::DoNotOptimize(norm_estimate(f, NormFamily::first, 0.5));
}
BENCHMARK(BM_NormEstimate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
