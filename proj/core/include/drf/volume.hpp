#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "drf/error.hpp"

namespace drf {

using Dim3 = std::array<int, 3>;
using Spacing3 = std::array<double, 3>;

inline std::size_t voxel_count(const Dim3& d) {
    return static_cast<std::size_t>(d[0]) * static_cast<std::size_t>(d[1]) *
           static_cast<std::size_t>(d[2]);
}

/// Flat index with x fastest, then y, then z.
inline std::size_t flat_index(const Dim3& d, int x, int y, int z) {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(d[0]) *
               (static_cast<std::size_t>(y) + static_cast<std::size_t>(d[1]) * static_cast<std::size_t>(z));
}

inline bool in_bounds(const Dim3& d, int x, int y, int z) {
    return x >= 0 && y >= 0 && z >= 0 && x < d[0] && y < d[1] && z < d[2];
}

/// Dense 3D scalar grid with physical voxel spacing in millimetres.
struct Volume {
    Dim3 dims{0, 0, 0};
    Spacing3 spacing{1.0, 1.0, 1.0};
    std::vector<float> data;

    Volume() = default;
    Volume(const Dim3& d, const Spacing3& s, float fill = 0.0f)
        : dims(d), spacing(s), data(voxel_count(d), fill) {
        validate_dims();
    }

    float& at(int x, int y, int z) { return data[flat_index(dims, x, y, z)]; }
    float at(int x, int y, int z) const { return data[flat_index(dims, x, y, z)]; }

    void validate_dims() const {
        for (int a = 0; a < 3; ++a) {
            if (dims[a] < 1) throw ShapeError("volume dims must be >= 1 on every axis");
            if (!(spacing[a] > 0.0)) throw ShapeError("volume spacing must be > 0 on every axis");
        }
    }
};

/// Binary region-of-interest grid; dims track the associated volume.
struct RoiMask {
    Dim3 dims{0, 0, 0};
    std::vector<std::uint8_t> bits;

    RoiMask() = default;
    explicit RoiMask(const Dim3& d, std::uint8_t fill = 0) : dims(d), bits(voxel_count(d), fill) {}

    bool at(int x, int y, int z) const { return bits[flat_index(dims, x, y, z)] != 0; }
    void set(int x, int y, int z, bool v = true) {
        bits[flat_index(dims, x, y, z)] = v ? 1 : 0;
    }

    std::size_t count() const {
        std::size_t n = 0;
        for (auto b : bits) n += (b != 0);
        return n;
    }
};

/// Mask from a volume read off disk: any non-zero voxel is inside the region.
inline RoiMask binarize(const Volume& v) {
    RoiMask m(v.dims);
    for (std::size_t i = 0; i < v.data.size(); ++i) m.bits[i] = (v.data[i] != 0.0f) ? 1 : 0;
    return m;
}

} // namespace drf
