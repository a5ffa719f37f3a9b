#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "drf/volume.hpp"

namespace drf {

struct PoolSpec {
    int size = 2;
    int stride = 2;
};

struct ConvLayerSpec {
    Dim3 filter_size{2, 2, 2};
    Dim3 stride{2, 2, 2};
    int out_channels = 10;
    PoolSpec pool;
    double dropout_rate = 0.0; // identity at inference
};

/// The two convolutional stages quantified by the deep features. Layer 2
/// pools with stride 1 (replicate padding) so a 256^3 input yields 10x64^3
/// and 10x32^3 stacks.
struct NetworkSpec {
    std::vector<ConvLayerSpec> layers;

    static NetworkSpec default_spec() {
        NetworkSpec s;
        s.layers.push_back({{2, 2, 2}, {2, 2, 2}, 10, {2, 2}, 0.8});
        s.layers.push_back({{2, 2, 2}, {2, 2, 2}, 10, {2, 1}, 0.8});
        return s;
    }
};

struct ConvLayerWeights {
    int out_channels = 0;
    int in_channels = 0;
    Dim3 filter_size{0, 0, 0};
    std::vector<float> filters; // out-major: [out][in][z][y][x]
    std::vector<float> bias;    // out_channels entries

    std::size_t filter_volume() const {
        return static_cast<std::size_t>(filter_size[0]) * filter_size[1] * filter_size[2];
    }
};

/// A record in the weight file that is not a convolutional layer (dense or
/// softmax blocks). Stored for round-tripping, never evaluated.
struct ExtraWeightBlock {
    std::uint8_t layer_index = 0;
    ConvLayerWeights payload;
};

struct NetworkWeights {
    std::vector<ConvLayerWeights> conv_layers;
    std::vector<ExtraWeightBlock> extra_blocks;
};

/// Multi-channel real-valued grid: one layer's feature maps.
struct FeatureMapStack {
    int channels = 0;
    Dim3 dims{0, 0, 0};
    std::vector<float> data; // channel-major, x fastest within a channel

    FeatureMapStack() = default;
    FeatureMapStack(int ch, const Dim3& d)
        : channels(ch), dims(d), data(static_cast<std::size_t>(ch) * voxel_count(d), 0.0f) {}

    std::size_t channel_size() const { return voxel_count(dims); }
    float* channel(int c) { return data.data() + static_cast<std::size_t>(c) * channel_size(); }
    const float* channel(int c) const {
        return data.data() + static_cast<std::size_t>(c) * channel_size();
    }
};

/// Valid (no padding) strided cross-correlation summed over input channels,
/// plus per-filter bias. Output dim_i = floor((in_i - k_i)/s_i) + 1.
FeatureMapStack conv3d_forward(const FeatureMapStack& input, const ConvLayerWeights& weights,
                               const Dim3& stride);

/// Per-channel window max. Stride 1 replicate-pads at the upper border so the
/// output keeps the input dims; other strides use valid windows.
FeatureMapStack maxpool3d(const FeatureMapStack& input, int size, int stride);

/// Elementwise max(0, x).
FeatureMapStack relu(const FeatureMapStack& input);

/// Runs both convolutional stages on a single-channel volume:
/// layer_k = pool(relu(conv(prev))). Dropout is the identity at inference.
std::pair<FeatureMapStack, FeatureMapStack> forward_features(const Volume& vol,
                                                             const NetworkWeights& weights,
                                                             const NetworkSpec& spec = NetworkSpec::default_spec());

/// Projects a mask onto feature-map resolution: an output cell is set iff any
/// voxel of its factor^3 block is set. Dims must divide evenly.
RoiMask downsample_mask(const RoiMask& mask, int factor);

/// Deterministic fallback weights, uniform in [-a, a] with
/// a = sqrt(6 / (fan_in + fan_out)) per filter bank; biases zero.
NetworkWeights init_seeded_weights(std::uint64_t seed, const NetworkSpec& spec = NetworkSpec::default_spec());

/// Self-describing binary weight file (magic "DRF1"). Records with layer
/// index 1..N are convolutional; any trailing records are kept as opaque
/// blocks. Shape inconsistencies raise WeightError.
NetworkWeights load_weights(const std::filesystem::path& path);
void save_weights(const NetworkWeights& weights, const std::filesystem::path& path);

} // namespace drf
