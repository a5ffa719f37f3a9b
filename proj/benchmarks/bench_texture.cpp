#include <benchmark/benchmark.h>

#include "drf/rng.hpp"
#include "drf/texture.hpp"

using namespace drf;

namespace {

struct GridFixture {
    Dim3 dims;
    RoiMask mask;
    std::vector<float> values;

    explicit GridFixture(int n) : dims{n, n, n}, mask(dims, 1), values(voxel_count(dims)) {
        Rng rng(42);
        for (auto& v : values) v = static_cast<float>(rng.uniform());
        // ellipsoidal region, roughly half the cube
        for (int z = 0; z < n; ++z)
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x) {
                    const double ex = (x - n / 2.0) / (0.45 * n);
                    const double ey = (y - n / 2.0) / (0.38 * n);
                    const double ez = (z - n / 2.0) / (0.32 * n);
                    mask.set(x, y, z, ex * ex + ey * ey + ez * ez <= 1.0);
                }
    }
};

void BM_QuantizeRoi(benchmark::State& state) {
    GridFixture fx(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto q = quantize(fx.values, fx.dims, fx.mask, 32);
        benchmark::DoNotOptimize(q.values.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(fx.mask.count()));
}
BENCHMARK(BM_QuantizeRoi)->Arg(32)->Arg(64);

void BM_GlcmSingleDirection(benchmark::State& state) {
    GridFixture fx(static_cast<int>(state.range(0)));
    const auto q = quantize(fx.values, fx.dims, fx.mask, 32);
    for (auto _ : state) {
        auto m = compute_glcm(q, {1, 1, 0}, 2);
        benchmark::DoNotOptimize(m.p.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(fx.mask.count()));
}
BENCHMARK(BM_GlcmSingleDirection)->Arg(32)->Arg(64);

void BM_GlcmAggregate52(benchmark::State& state) {
    GridFixture fx(static_cast<int>(state.range(0)));
    const auto q = quantize(fx.values, fx.dims, fx.mask, 32);
    for (auto _ : state) {
        auto f = aggregate_glcm_features(q);
        benchmark::DoNotOptimize(f.data());
    }
}
BENCHMARK(BM_GlcmAggregate52)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Ngtdm(benchmark::State& state) {
    GridFixture fx(static_cast<int>(state.range(0)));
    const auto q = quantize(fx.values, fx.dims, fx.mask, 32);
    for (auto _ : state) {
        auto f = ngtdm_features(compute_ngtdm(q));
        benchmark::DoNotOptimize(f.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(fx.mask.count()));
}
BENCHMARK(BM_Ngtdm)->Arg(32)->Arg(64);

void BM_GlzsmFloodFill(benchmark::State& state) {
    GridFixture fx(static_cast<int>(state.range(0)));
    const auto q = quantize(fx.values, fx.dims, fx.mask, 32);
    for (auto _ : state) {
        auto f = glzsm_features(compute_glzsm(q));
        benchmark::DoNotOptimize(f.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(fx.mask.count()));
}
BENCHMARK(BM_GlzsmFloodFill)->Arg(32)->Arg(64);

void BM_FullFeatureVector(benchmark::State& state) {
    GridFixture fx(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto fv = feature_vector(fx.values, fx.dims, fx.mask, 32);
        benchmark::DoNotOptimize(fv.data());
    }
}
BENCHMARK(BM_FullFeatureVector)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

} // namespace
