#include <benchmark/benchmark.h>

#include "drf/conv3d.hpp"
#include "drf/rng.hpp"

using namespace drf;

namespace {

Volume random_volume(int n, std::uint64_t seed) {
    Volume vol({n, n, n}, {1.0, 1.0, 1.0});
    Rng rng(seed);
    for (auto& v : vol.data) v = static_cast<float>(rng.uniform());
    return vol;
}

void BM_Conv3dLayer1(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Volume vol = random_volume(n, 7);
    const auto weights = init_seeded_weights(1);
    FeatureMapStack input(1, vol.dims);
    std::copy(vol.data.begin(), vol.data.end(), input.data.begin());

    for (auto _ : state) {
        auto out = conv3d_forward(input, weights.conv_layers[0], {2, 2, 2});
        benchmark::DoNotOptimize(out.data.data());
    }
    // 10 filters x 8 taps per output voxel
    const std::int64_t macs = 10LL * 8 * (n / 2) * (n / 2) * (n / 2);
    state.SetItemsProcessed(state.iterations() * macs);
}
BENCHMARK(BM_Conv3dLayer1)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_MaxPoolStride2(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    FeatureMapStack input(10, {n, n, n});
    Rng rng(3);
    for (auto& v : input.data) v = static_cast<float>(rng.uniform());
    for (auto _ : state) {
        auto out = maxpool3d(input, 2, 2);
        benchmark::DoNotOptimize(out.data.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(input.data.size()));
}
BENCHMARK(BM_MaxPoolStride2)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ForwardFeatures(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Volume vol = random_volume(n, 11);
    const auto weights = init_seeded_weights(5);
    for (auto _ : state) {
        auto [l1, l2] = forward_features(vol, weights);
        benchmark::DoNotOptimize(l1.data.data());
        benchmark::DoNotOptimize(l2.data.data());
    }
}
BENCHMARK(BM_ForwardFeatures)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_DownsampleMask(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    RoiMask mask({n, n, n});
    Rng rng(9);
    for (auto& b : mask.bits) b = rng.uniform() < 0.3;
    for (auto _ : state) {
        auto out = downsample_mask(mask, 4);
        benchmark::DoNotOptimize(out.bits.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mask.bits.size()));
}
BENCHMARK(BM_DownsampleMask)->Arg(64)->Arg(128);

} // namespace
