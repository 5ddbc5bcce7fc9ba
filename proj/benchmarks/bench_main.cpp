#include <benchmark/benchmark.h>

#include "lrlab/gradients.hpp"
#include "lrlab/linalg.hpp"
#include "lrlab/model.hpp"
#include "lrlab/trainer.hpp"

namespace {

using namespace lrlab;

Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix a(rows, cols);
    for (double& v : a.data()) {
        v = rng.normal();
    }
    return a;
}

struct ReferenceScale {
    DataConfig dc;
    ModelConfig mc;
    PatternSet ps{gen_patterns(dc)};
    Dataset data{gen_dataset(50, ps, dc, 2)};
    Params params{init_params(mc, make_dims(dc, mc))};
};

void BM_Svd(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix a = gaussian(n, n, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(svd(a));
    }
}
BENCHMARK(BM_Svd)->Arg(20)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_TruncateRank2(benchmark::State& state) {
    const Matrix a = gaussian(20, 20, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(truncate_rank(a, 2));
    }
}
BENCHMARK(BM_TruncateRank2);

void BM_Forward(benchmark::State& state) {
    ReferenceScale s;
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward(s.params, s.data.examples[0]));
    }
}
BENCHMARK(BM_Forward);

void BM_Backward(benchmark::State& state) {
    ReferenceScale s;
    for (auto _ : state) {
        benchmark::DoNotOptimize(backward(s.params, s.data.examples[0]));
    }
}
BENCHMARK(BM_Backward);

void BM_SgdStep(benchmark::State& state) {
    ReferenceScale s;
    std::vector<const Example*> batch;
    for (const Example& e : s.data.examples) {
        batch.push_back(&e);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(sgd_step(s.params, batch, 1.0));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.size()));
}
BENCHMARK(BM_SgdStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
