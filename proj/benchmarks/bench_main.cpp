#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "omht/detectors.hpp"
#include "omht/mmd.hpp"
#include "omht/scoring.hpp"

namespace {

using namespace omht;

std::vector<double> draw(std::mt19937_64& eng, std::size_t n) {
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> out(n);
    for (auto& v : out) v = d(eng);
    return out;
}

ObservationSet make_set(std::size_t m, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::vector<std::vector<double>> rows(m);
    for (auto& r : rows) r = draw(eng, n);
    rows[0] = draw(eng, n);
    for (auto& v : rows[0]) v += 1.5;
    return ObservationSet::from_rows(std::move(rows));
}

void BM_Mmd2Unbiased(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 eng(42);
    const std::vector<double> x = draw(eng, n);
    const std::vector<double> y = draw(eng, n);
    const KernelSpec spec = KernelSpec::gaussian(1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mmd2_unbiased(spec, x, y));
    }
    state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_Mmd2Unbiased)->Arg(64)->Arg(256)->Arg(1024)->Complexity(benchmark::oNSquared);

void BM_PairStateAppend(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 eng(43);
    const std::vector<double> x = draw(eng, n);
    const std::vector<double> y = draw(eng, n);
    const KernelSpec spec = KernelSpec::gaussian(1.0);
    for (auto _ : state) {
        PairMmdState s(spec);
        for (std::size_t i = 0; i < n; ++i) {
            s.append_x(x[i]);
            s.append_y(y[i]);
        }
        benchmark::DoNotOptimize(s.mmd2());
    }
}
BENCHMARK(BM_PairStateAppend)->Arg(64)->Arg(256);

void BM_ScoreTable(benchmark::State& state) {
    const auto t_max = static_cast<std::size_t>(state.range(0));
    const ObservationSet y = make_set(10, 40, 7);
    const KernelSpec spec = KernelSpec::gaussian(1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(score_table(spec, y, t_max));
    }
}
BENCHMARK(BM_ScoreTable)->Arg(1)->Arg(2)->Arg(4);

void BM_FixedMultiTrial(benchmark::State& state) {
    const ObservationSet y = make_set(10, 40, 11);
    const KernelSpec spec = KernelSpec::gaussian(1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fixed_length_multi(spec, y, 0.1, 4));
    }
}
BENCHMARK(BM_FixedMultiTrial);

}  // namespace

BENCHMARK_MAIN();
