#include <benchmark/benchmark.h>

#include "specdyn/clustering.hpp"
#include "specdyn/estimator.hpp"
#include "specdyn/features.hpp"
#include "specdyn/numerics.hpp"
#include "specdyn/oracle.hpp"
#include "specdyn/simulator.hpp"

using specdyn::Matrix;
using specdyn::Vector;

namespace {

Matrix four_well_states(std::size_t n, std::uint64_t seed) {
    specdyn::SimulationOptions o;
    o.x0 = Vector::Constant(1, 0.7);
    o.inner_dt = 1e-3;
    o.stride = 100;
    o.n_samples = n;
    o.burn_in = 1000;
    o.seed = seed;
    return specdyn::simulate(specdyn::four_well_1d().spec, o).states;
}

specdyn::RawFeatureMap raw_map(std::size_t n_features) {
    specdyn::GaussianKernelSpec kernel;
    kernel.bandwidth = 0.1;
    kernel.dim = 1;
    return specdyn::sample_rff(kernel, n_features, 2);
}

void BM_FeatureEvaluation(benchmark::State& state) {
    const auto raw = raw_map(static_cast<std::size_t>(state.range(0)));
    const Vector x = Vector::Constant(1, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(raw.evaluate(x));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FeatureEvaluation)->Arg(200)->Arg(2000);

void BM_Accumulate(benchmark::State& state) {
    const Matrix states = four_well_states(static_cast<std::size_t>(state.range(0)), 3);
    const auto raw = raw_map(500);
    const auto left = specdyn::build_left_basis(raw, states, {});
    const auto right = specdyn::build_right_basis(raw, states, {});
    for (auto _ : state) benchmark::DoNotOptimize(specdyn::accumulate(states, left, right).p_hat().data());
    state.SetItemsProcessed(state.iterations() * (state.range(0) - 1));
}
BENCHMARK(BM_Accumulate)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ThinSvd(benchmark::State& state) {
    specdyn::Rng rng(5);
    const auto n = static_cast<Eigen::Index>(state.range(0));
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
    for (auto _ : state) benchmark::DoNotOptimize(specdyn::thin_svd(a).singular_values.data());
}
BENCHMARK(BM_ThinSvd)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(four_well_states(1000, 7).data());
    state.SetItemsProcessed(state.iterations() * (1000 * 100 + 1000));
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

void BM_EulerGridChain(benchmark::State& state) {
    const auto spec = specdyn::four_well_1d().spec;
    const auto count = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(specdyn::euler_grid_chain(spec, 1e-3, 1000, -2.2, 2.2, count).stationary.data());
}
BENCHMARK(BM_EulerGridChain)->Arg(101)->Arg(401)->Unit(benchmark::kMillisecond);

void BM_Hungarian(benchmark::State& state) {
    specdyn::Rng rng(9);
    const auto m = static_cast<Eigen::Index>(state.range(0));
    Matrix cost(m, m);
    for (Eigen::Index i = 0; i < cost.size(); ++i) cost.data()[i] = rng.uniform();
    for (auto _ : state) benchmark::DoNotOptimize(specdyn::min_cost_permutation(cost).total_cost);
}
BENCHMARK(BM_Hungarian)->Arg(4)->Arg(15)->Arg(100);

void BM_WeightedKMeans(benchmark::State& state) {
    specdyn::Rng rng(11);
    Matrix pts(20000, 4);
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = rng.normal();
    const auto set = specdyn::WeightedPointSet::uniform(pts);
    for (auto _ : state) benchmark::DoNotOptimize(specdyn::weighted_kmeans(set, 4, 1).objective);
}
BENCHMARK(BM_WeightedKMeans)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
