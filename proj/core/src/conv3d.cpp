#include "drf/conv3d.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "drf/error.hpp"
#include "drf/rng.hpp"

namespace drf {

namespace {

int conv_out_dim(int in, int k, int s) { return (in - k) / s + 1; }

FeatureMapStack stack_from_volume(const Volume& vol) {
    FeatureMapStack s(1, vol.dims);
    std::copy(vol.data.begin(), vol.data.end(), s.data.begin());
    return s;
}

} // namespace

FeatureMapStack conv3d_forward(const FeatureMapStack& input, const ConvLayerWeights& weights,
                               const Dim3& stride) {
    if (input.channels != weights.in_channels)
        throw ShapeError("conv3d_forward: input has " + std::to_string(input.channels) +
                         " channels, weights expect " + std::to_string(weights.in_channels));
    const Dim3& k = weights.filter_size;
    for (int a = 0; a < 3; ++a) {
        if (stride[a] < 1) throw ArgumentError("conv3d_forward: stride must be >= 1");
        if (input.dims[a] < k[a])
            throw ShapeError("conv3d_forward: input smaller than filter on axis " +
                             std::to_string(a));
    }

    Dim3 out_dims{conv_out_dim(input.dims[0], k[0], stride[0]),
                  conv_out_dim(input.dims[1], k[1], stride[1]),
                  conv_out_dim(input.dims[2], k[2], stride[2])};
    FeatureMapStack out(weights.out_channels, out_dims);

    const std::size_t in_xy = static_cast<std::size_t>(input.dims[0]) * input.dims[1];
    const std::size_t kv = weights.filter_volume();

    for (int oc = 0; oc < weights.out_channels; ++oc) {
        float* dst = out.channel(oc);
        const float bias = weights.bias[oc];
        for (int oz = 0; oz < out_dims[2]; ++oz) {
            const int iz0 = oz * stride[2];
            for (int oy = 0; oy < out_dims[1]; ++oy) {
                const int iy0 = oy * stride[1];
                for (int ox = 0; ox < out_dims[0]; ++ox) {
                    const int ix0 = ox * stride[0];
                    double acc = bias;
                    for (int ic = 0; ic < weights.in_channels; ++ic) {
                        const float* src = input.channel(ic);
                        const float* w = weights.filters.data() +
                                         (static_cast<std::size_t>(oc) * weights.in_channels + ic) * kv;
                        for (int kz = 0; kz < k[2]; ++kz) {
                            const std::size_t plane = (iz0 + kz) * in_xy;
                            for (int ky = 0; ky < k[1]; ++ky) {
                                const std::size_t row =
                                    plane + static_cast<std::size_t>(iy0 + ky) * input.dims[0] + ix0;
                                const float* wrow =
                                    w + (static_cast<std::size_t>(kz) * k[1] + ky) * k[0];
                                for (int kx = 0; kx < k[0]; ++kx)
                                    acc += static_cast<double>(src[row + kx]) * wrow[kx];
                            }
                        }
                    }
                    dst[flat_index(out_dims, ox, oy, oz)] = static_cast<float>(acc);
                }
            }
        }
    }
    return out;
}

FeatureMapStack maxpool3d(const FeatureMapStack& input, int size, int stride) {
    if (size < 1 || stride < 1) throw ArgumentError("maxpool3d: size and stride must be >= 1");

    Dim3 out_dims;
    for (int a = 0; a < 3; ++a) {
        if (stride == 1) {
            out_dims[a] = input.dims[a]; // replicate padding at the upper border
        } else {
            if (input.dims[a] < size)
                throw ShapeError("maxpool3d: input smaller than window on axis " +
                                 std::to_string(a));
            out_dims[a] = (input.dims[a] - size) / stride + 1;
        }
    }

    FeatureMapStack out(input.channels, out_dims);
    for (int c = 0; c < input.channels; ++c) {
        const float* src = input.channel(c);
        float* dst = out.channel(c);
        for (int oz = 0; oz < out_dims[2]; ++oz) {
            for (int oy = 0; oy < out_dims[1]; ++oy) {
                for (int ox = 0; ox < out_dims[0]; ++ox) {
                    float best = -std::numeric_limits<float>::infinity();
                    for (int kz = 0; kz < size; ++kz) {
                        const int z = std::min(oz * stride + kz, input.dims[2] - 1);
                        for (int ky = 0; ky < size; ++ky) {
                            const int y = std::min(oy * stride + ky, input.dims[1] - 1);
                            for (int kx = 0; kx < size; ++kx) {
                                const int x = std::min(ox * stride + kx, input.dims[0] - 1);
                                best = std::max(best, src[flat_index(input.dims, x, y, z)]);
                            }
                        }
                    }
                    dst[flat_index(out_dims, ox, oy, oz)] = best;
                }
            }
        }
    }
    return out;
}

FeatureMapStack relu(const FeatureMapStack& input) {
    FeatureMapStack out = input;
    for (auto& v : out.data)
        if (v < 0.0f) v = 0.0f;
    return out;
}

std::pair<FeatureMapStack, FeatureMapStack> forward_features(const Volume& vol,
                                                             const NetworkWeights& weights,
                                                             const NetworkSpec& spec) {
    if (spec.layers.size() < 2 || weights.conv_layers.size() < 2)
        throw ArgumentError("forward_features: two convolutional layers required");
    if (weights.conv_layers[0].in_channels != 1)
        throw ShapeError("forward_features: layer 1 must take a single-channel volume");

    FeatureMapStack current = stack_from_volume(vol);
    std::vector<FeatureMapStack> stacks;
    for (std::size_t li = 0; li < 2; ++li) {
        const ConvLayerSpec& ls = spec.layers[li];
        const ConvLayerWeights& w = weights.conv_layers[li];
        if (w.filter_size != ls.filter_size || w.out_channels != ls.out_channels)
            throw WeightError("forward_features: weights disagree with layer spec");
        for (int a = 0; a < 3; ++a) {
            if (current.dims[a] < ls.filter_size[a] ||
                (current.dims[a] - ls.filter_size[a]) % ls.stride[a] != 0)
                throw ShapeError("forward_features: layer " + std::to_string(li + 1) +
                                 " dims do not tile with filter/stride on axis " +
                                 std::to_string(a));
        }
        FeatureMapStack conv = conv3d_forward(current, w, ls.stride);
        FeatureMapStack act = relu(conv);
        if (ls.pool.stride > 1) {
            for (int a = 0; a < 3; ++a)
                if ((act.dims[a] - ls.pool.size) % ls.pool.stride != 0)
                    throw ShapeError("forward_features: layer " + std::to_string(li + 1) +
                                     " pooling does not tile on axis " + std::to_string(a));
        }
        current = maxpool3d(act, ls.pool.size, ls.pool.stride);
        stacks.push_back(current);
    }
    return {std::move(stacks[0]), std::move(stacks[1])};
}

RoiMask downsample_mask(const RoiMask& mask, int factor) {
    if (factor < 1) throw ArgumentError("downsample_mask: factor must be >= 1");
    for (int a = 0; a < 3; ++a)
        if (mask.dims[a] % factor != 0)
            throw ShapeError("downsample_mask: dims not divisible by factor on axis " +
                             std::to_string(a));

    Dim3 out_dims{mask.dims[0] / factor, mask.dims[1] / factor, mask.dims[2] / factor};
    RoiMask out(out_dims);
    for (int z = 0; z < mask.dims[2]; ++z)
        for (int y = 0; y < mask.dims[1]; ++y)
            for (int x = 0; x < mask.dims[0]; ++x)
                if (mask.at(x, y, z)) out.set(x / factor, y / factor, z / factor, true);
    return out;
}

NetworkWeights init_seeded_weights(std::uint64_t seed, const NetworkSpec& spec) {
    NetworkWeights w;
    int in_channels = 1;
    for (std::size_t li = 0; li < spec.layers.size(); ++li) {
        const ConvLayerSpec& ls = spec.layers[li];
        ConvLayerWeights layer;
        layer.out_channels = ls.out_channels;
        layer.in_channels = in_channels;
        layer.filter_size = ls.filter_size;
        const std::size_t kv = layer.filter_volume();
        layer.filters.resize(static_cast<std::size_t>(ls.out_channels) * in_channels * kv);
        layer.bias.assign(ls.out_channels, 0.0f);

        const double fan_in = static_cast<double>(in_channels) * kv;
        const double fan_out = static_cast<double>(ls.out_channels) * kv;
        const double a = std::sqrt(6.0 / (fan_in + fan_out));

        Rng rng(Rng::mix(seed, li));
        for (auto& f : layer.filters) f = static_cast<float>(rng.uniform(-a, a));

        in_channels = ls.out_channels;
        w.conv_layers.push_back(std::move(layer));
    }
    return w;
}

namespace {

constexpr char kWeightMagic[4] = {'D', 'R', 'F', '1'};

void validate_chain(const NetworkWeights& w) {
    if (w.conv_layers.empty()) throw WeightError("weight file holds no convolutional layers");
    int expected_in = 1;
    for (std::size_t i = 0; i < w.conv_layers.size(); ++i) {
        const auto& l = w.conv_layers[i];
        if (l.in_channels != expected_in)
            throw WeightError("layer " + std::to_string(i + 1) + " in_channels " +
                              std::to_string(l.in_channels) + ", expected " +
                              std::to_string(expected_in));
        for (float v : l.filters)
            if (!std::isfinite(v)) throw WeightError("non-finite filter weight in layer " +
                                                     std::to_string(i + 1));
        for (float v : l.bias)
            if (!std::isfinite(v)) throw WeightError("non-finite bias in layer " +
                                                     std::to_string(i + 1));
        expected_in = l.out_channels;
    }
}

template <typename T>
void write_pod(std::ofstream& f, T v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& f, const char* what) {
    T v;
    if (!f.read(reinterpret_cast<char*>(&v), sizeof(T)))
        throw FormatError(std::string("weight file truncated reading ") + what);
    return v;
}

} // namespace

void save_weights(const NetworkWeights& weights, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f.write(kWeightMagic, 4);

    auto write_record = [&f](std::uint8_t index, const ConvLayerWeights& l) {
        write_pod(f, index);
        write_pod(f, static_cast<std::uint32_t>(l.out_channels));
        write_pod(f, static_cast<std::uint32_t>(l.in_channels));
        write_pod(f, static_cast<std::uint32_t>(l.filter_size[0]));
        write_pod(f, static_cast<std::uint32_t>(l.filter_size[1]));
        write_pod(f, static_cast<std::uint32_t>(l.filter_size[2]));
        f.write(reinterpret_cast<const char*>(l.filters.data()),
                static_cast<std::streamsize>(l.filters.size() * 4));
        f.write(reinterpret_cast<const char*>(l.bias.data()),
                static_cast<std::streamsize>(l.bias.size() * 4));
    };

    for (std::size_t i = 0; i < weights.conv_layers.size(); ++i)
        write_record(static_cast<std::uint8_t>(i + 1), weights.conv_layers[i]);
    for (const auto& extra : weights.extra_blocks) write_record(extra.layer_index, extra.payload);
    if (!f) throw IoError("short write to " + path.string());
}

NetworkWeights load_weights(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());

    char magic[4];
    if (!f.read(magic, 4) || std::memcmp(magic, kWeightMagic, 4) != 0)
        throw FormatError("weight file magic: expected DRF1");

    NetworkWeights w;
    while (true) {
        int peek = f.peek();
        if (peek == EOF) break;
        const auto index = read_pod<std::uint8_t>(f, "layer_index");
        ConvLayerWeights l;
        l.out_channels = static_cast<int>(read_pod<std::uint32_t>(f, "out_ch"));
        l.in_channels = static_cast<int>(read_pod<std::uint32_t>(f, "in_ch"));
        l.filter_size[0] = static_cast<int>(read_pod<std::uint32_t>(f, "kx"));
        l.filter_size[1] = static_cast<int>(read_pod<std::uint32_t>(f, "ky"));
        l.filter_size[2] = static_cast<int>(read_pod<std::uint32_t>(f, "kz"));
        if (l.out_channels < 1 || l.in_channels < 1 || l.filter_size[0] < 1 ||
            l.filter_size[1] < 1 || l.filter_size[2] < 1)
            throw FormatError("weight record " + std::to_string(index) + ": non-positive shape");
        const std::size_t nf =
            static_cast<std::size_t>(l.out_channels) * l.in_channels * l.filter_volume();
        l.filters.resize(nf);
        if (!f.read(reinterpret_cast<char*>(l.filters.data()),
                    static_cast<std::streamsize>(nf * 4)))
            throw SizeError("weight record " + std::to_string(index) + ": filter payload short");
        l.bias.resize(l.out_channels);
        if (!f.read(reinterpret_cast<char*>(l.bias.data()),
                    static_cast<std::streamsize>(l.bias.size() * 4)))
            throw SizeError("weight record " + std::to_string(index) + ": bias payload short");

        // Layer indices follow the network numbering: 1..2 convolutional,
        // anything later (dense, softmax) is carried along unevaluated.
        if (index == w.conv_layers.size() + 1 && index <= 2 && w.extra_blocks.empty())
            w.conv_layers.push_back(std::move(l));
        else
            w.extra_blocks.push_back({index, std::move(l)});
    }
    validate_chain(w);
    return w;
}

} // namespace drf
