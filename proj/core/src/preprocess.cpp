#include "drf/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "drf/error.hpp"

namespace drf {

namespace {

int clamp_index(int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); }

} // namespace

std::pair<Volume, RoiMask> resample_isotropic(const Volume& vol, const RoiMask& mask,
                                              double target) {
    if (!(target > 0.0)) throw ArgumentError("resample target spacing must be > 0");
    if (vol.dims != mask.dims) throw ShapeError("volume and mask dims differ");

    Dim3 out_dims;
    for (int a = 0; a < 3; ++a)
        out_dims[a] = std::max(1, static_cast<int>(std::ceil(vol.dims[a] * vol.spacing[a] / target)));

    Volume out(out_dims, {target, target, target});
    RoiMask out_mask(out_dims);

    const Dim3& in = vol.dims;
    for (int z = 0; z < out_dims[2]; ++z) {
        // Voxel-center mapping: output center (i+0.5)*target lands at input
        // continuous coordinate (i+0.5)*target/spacing - 0.5.
        const double fz = (z + 0.5) * target / vol.spacing[2] - 0.5;
        const int z0 = clamp_index(static_cast<int>(std::floor(fz)), in[2] - 1);
        const int z1 = clamp_index(z0 + 1, in[2] - 1);
        const double tz = std::clamp(fz - z0, 0.0, 1.0);
        const int zn = clamp_index(static_cast<int>(std::lround(fz)), in[2] - 1);
        for (int y = 0; y < out_dims[1]; ++y) {
            const double fy = (y + 0.5) * target / vol.spacing[1] - 0.5;
            const int y0 = clamp_index(static_cast<int>(std::floor(fy)), in[1] - 1);
            const int y1 = clamp_index(y0 + 1, in[1] - 1);
            const double ty = std::clamp(fy - y0, 0.0, 1.0);
            const int yn = clamp_index(static_cast<int>(std::lround(fy)), in[1] - 1);
            for (int x = 0; x < out_dims[0]; ++x) {
                const double fx = (x + 0.5) * target / vol.spacing[0] - 0.5;
                const int x0 = clamp_index(static_cast<int>(std::floor(fx)), in[0] - 1);
                const int x1 = clamp_index(x0 + 1, in[0] - 1);
                const double tx = std::clamp(fx - x0, 0.0, 1.0);

                const double c000 = vol.at(x0, y0, z0), c100 = vol.at(x1, y0, z0);
                const double c010 = vol.at(x0, y1, z0), c110 = vol.at(x1, y1, z0);
                const double c001 = vol.at(x0, y0, z1), c101 = vol.at(x1, y0, z1);
                const double c011 = vol.at(x0, y1, z1), c111 = vol.at(x1, y1, z1);

                const double c00 = c000 + (c100 - c000) * tx;
                const double c10 = c010 + (c110 - c010) * tx;
                const double c01 = c001 + (c101 - c001) * tx;
                const double c11 = c011 + (c111 - c011) * tx;
                const double c0 = c00 + (c10 - c00) * ty;
                const double c1 = c01 + (c11 - c01) * ty;
                out.at(x, y, z) = static_cast<float>(c0 + (c1 - c0) * tz);

                const int xn = clamp_index(static_cast<int>(std::lround(fx)), in[0] - 1);
                out_mask.set(x, y, z, mask.at(xn, yn, zn));
            }
        }
    }
    return {std::move(out), std::move(out_mask)};
}

Volume normalize_gray_levels(const Volume& vol, int levels) {
    if (levels < 2) throw ArgumentError("gray levels must be >= 2");
    const auto [mn_it, mx_it] = std::minmax_element(vol.data.begin(), vol.data.end());
    const double mn = *mn_it, mx = *mx_it;

    Volume out = vol;
    if (mx == mn) {
        std::fill(out.data.begin(), out.data.end(), 0.0f);
        return out;
    }
    const double scale = levels / (mx - mn);
    for (auto& v : out.data) {
        double q = std::floor((v - mn) * scale);
        if (q < 0.0) q = 0.0;
        if (q > levels - 1) q = levels - 1;
        v = static_cast<float>(q);
    }
    return out;
}

namespace {

// Per axis offsets mapping output index -> input index; out-of-range reads
// become zero fill.
struct AxisMap {
    int crop = 0; // input start when cropping
    int pad = 0;  // output start when padding
};

AxisMap axis_map(int in, int target) {
    AxisMap m;
    if (in > target)
        m.crop = (in - target) / 2;
    else
        m.pad = (target - in) / 2;
    return m;
}

} // namespace

std::pair<Volume, RoiMask> conform(const Volume& vol, const RoiMask& mask,
                                   const Dim3& target_dims) {
    for (int a = 0; a < 3; ++a)
        if (target_dims[a] < 1) throw ArgumentError("conform target dims must be >= 1");
    if (vol.dims != mask.dims) throw ShapeError("volume and mask dims differ");
    if (vol.dims == target_dims) return {vol, mask};

    const AxisMap mx = axis_map(vol.dims[0], target_dims[0]);
    const AxisMap my = axis_map(vol.dims[1], target_dims[1]);
    const AxisMap mz = axis_map(vol.dims[2], target_dims[2]);

    Volume out(target_dims, vol.spacing, 0.0f);
    RoiMask out_mask(target_dims);

    for (int z = 0; z < target_dims[2]; ++z) {
        const int sz = z - mz.pad + mz.crop;
        if (sz < 0 || sz >= vol.dims[2]) continue;
        for (int y = 0; y < target_dims[1]; ++y) {
            const int sy = y - my.pad + my.crop;
            if (sy < 0 || sy >= vol.dims[1]) continue;
            const int x_begin = std::max(0, mx.pad);
            const int x_end = std::min(target_dims[0], mx.pad + vol.dims[0] - mx.crop);
            for (int x = x_begin; x < x_end; ++x) {
                const int sx = x - mx.pad + mx.crop;
                out.at(x, y, z) = vol.at(sx, sy, sz);
                out_mask.set(x, y, z, mask.at(sx, sy, sz));
            }
        }
    }
    return {std::move(out), std::move(out_mask)};
}

Volume apply_mask(const Volume& vol, const RoiMask& mask) {
    if (vol.dims != mask.dims) throw ShapeError("apply_mask: volume and mask dims differ");
    Volume out = vol;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        if (!mask.bits[i]) out.data[i] = 0.0f;
    return out;
}

} // namespace drf
