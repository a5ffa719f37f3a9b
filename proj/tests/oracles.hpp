// Test-only reference implementations, written straight from the textbook
// definitions and kept independent of the library's computation paths:
// matrices by exhaustive enumeration, features by direct summation, zones by
// union-find, convolution by the naive seven-deep loop.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <vector>

#include "drf/conv3d.hpp"
#include "drf/rng.hpp"
#include "drf/texture.hpp"
#include "drf/volume.hpp"

namespace oracle {

using drf::Dim3;
using drf::RoiMask;

struct LevelGrid {
    Dim3 dims;
    int levels;
    std::vector<int> values; // 1..levels at in-mask voxels
    RoiMask mask;
};

inline LevelGrid random_level_grid(const Dim3& dims, int levels, std::uint64_t seed,
                                   double mask_fill = 1.0) {
    LevelGrid g;
    g.dims = dims;
    g.levels = levels;
    g.mask = RoiMask(dims);
    g.values.assign(drf::voxel_count(dims), 0);
    drf::Rng rng(seed);
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        const bool inside = rng.uniform() < mask_fill;
        g.mask.bits[i] = inside ? 1 : 0;
        if (inside) g.values[i] = 1 + static_cast<int>(rng.index(levels));
    }
    return g;
}

// ---- GLCM ------------------------------------------------------------------

/// Unnormalized symmetric co-occurrence counts by scanning every voxel and
/// bounds-checking its partner explicitly.
inline std::vector<double> glcm_counts(const LevelGrid& g, const Dim3& dir, int dist) {
    std::vector<double> counts(static_cast<std::size_t>(g.levels) * g.levels, 0.0);
    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
            for (int x = 0; x < g.dims[0]; ++x) {
                if (!g.mask.at(x, y, z)) continue;
                const int px = x + dir[0] * dist;
                const int py = y + dir[1] * dist;
                const int pz = z + dir[2] * dist;
                if (!drf::in_bounds(g.dims, px, py, pz)) continue;
                if (!g.mask.at(px, py, pz)) continue;
                const int a = g.values[drf::flat_index(g.dims, x, y, z)] - 1;
                const int b = g.values[drf::flat_index(g.dims, px, py, pz)] - 1;
                counts[static_cast<std::size_t>(a) * g.levels + b] += 1.0;
                counts[static_cast<std::size_t>(b) * g.levels + a] += 1.0;
            }
    return counts;
}

/// The 19 Haralick statistics from a normalized matrix by direct summation.
inline std::array<double, 19> glcm_features_direct(const std::vector<double>& p, int G) {
    auto P = [&](int i, int j) { return p[static_cast<std::size_t>(i - 1) * G + (j - 1)]; };
    auto lg2 = [](double v) { return std::log2(v); };

    std::vector<double> px(G + 1, 0.0), py(G + 1, 0.0);
    for (int i = 1; i <= G; ++i)
        for (int j = 1; j <= G; ++j) {
            px[i] += P(i, j);
            py[j] += P(i, j);
        }

    double mu_x = 0.0, mu_y = 0.0;
    for (int i = 1; i <= G; ++i) {
        mu_x += i * px[i];
        mu_y += i * py[i];
    }
    double sigma_x = 0.0, sigma_y = 0.0;
    for (int i = 1; i <= G; ++i) {
        sigma_x += (i - mu_x) * (i - mu_x) * px[i];
        sigma_y += (i - mu_y) * (i - mu_y) * py[i];
    }
    sigma_x = std::sqrt(sigma_x);
    sigma_y = std::sqrt(sigma_y);

    std::vector<double> p_sum(2 * G + 1, 0.0);
    std::vector<double> p_diff(G, 0.0);
    for (int i = 1; i <= G; ++i)
        for (int j = 1; j <= G; ++j) {
            p_sum[i + j] += P(i, j);
            p_diff[std::abs(i - j)] += P(i, j);
        }

    double asm_ = 0, contrast = 0, corr_num = 0, ssv = 0, homog = 0, entropy = 0;
    double autocorr = 0, dissim = 0, shade = 0, prom = 0, maxp = 0, invdiff = 0;
    for (int i = 1; i <= G; ++i)
        for (int j = 1; j <= G; ++j) {
            const double v = P(i, j);
            asm_ += v * v;
            contrast += (i - j) * (i - j) * v;
            corr_num += i * j * v;
            ssv += (i - mu_x) * (i - mu_x) * v;
            homog += v / (1.0 + (i - j) * (i - j));
            if (v > 0) entropy -= v * lg2(v);
            autocorr += i * j * v;
            dissim += std::abs(i - j) * v;
            shade += std::pow(i + j - mu_x - mu_y, 3.0) * v;
            prom += std::pow(i + j - mu_x - mu_y, 4.0) * v;
            maxp = std::max(maxp, v);
            invdiff += v / (1.0 + std::abs(i - j));
        }

    const double correlation =
        (sigma_x > 0 && sigma_y > 0) ? (corr_num - mu_x * mu_y) / (sigma_x * sigma_y) : 0.0;

    double sum_avg = 0, sum_entropy = 0;
    for (int k = 2; k <= 2 * G; ++k) {
        sum_avg += k * p_sum[k];
        if (p_sum[k] > 0) sum_entropy -= p_sum[k] * lg2(p_sum[k]);
    }
    double sum_var = 0;
    for (int k = 2; k <= 2 * G; ++k) sum_var += (k - sum_avg) * (k - sum_avg) * p_sum[k];

    double diff_avg = 0, diff_entropy = 0;
    for (int k = 0; k < G; ++k) {
        diff_avg += k * p_diff[k];
        if (p_diff[k] > 0) diff_entropy -= p_diff[k] * lg2(p_diff[k]);
    }
    double diff_var = 0;
    for (int k = 0; k < G; ++k) diff_var += (k - diff_avg) * (k - diff_avg) * p_diff[k];

    double hx = 0, hy = 0, hxy1 = 0, hxy2 = 0;
    for (int i = 1; i <= G; ++i) {
        if (px[i] > 0) hx -= px[i] * lg2(px[i]);
        if (py[i] > 0) hy -= py[i] * lg2(py[i]);
    }
    for (int i = 1; i <= G; ++i)
        for (int j = 1; j <= G; ++j) {
            if (px[i] > 0 && py[j] > 0) {
                if (P(i, j) > 0) hxy1 -= P(i, j) * lg2(px[i] * py[j]);
                hxy2 -= px[i] * py[j] * lg2(px[i] * py[j]);
            }
        }
    const double imc1 = std::max(hx, hy) > 0 ? (entropy - hxy1) / std::max(hx, hy) : 0.0;
    const double imc2 =
        std::sqrt(std::clamp(1.0 - std::exp2(-2.0 * (hxy2 - entropy)), 0.0, 1.0));

    return {asm_,    contrast, correlation, ssv,      homog,  sum_avg, sum_var,
            sum_entropy, entropy, diff_var, diff_entropy, imc1, imc2,  autocorr,
            dissim,  shade,    prom,        maxp,     invdiff};
}

// ---- NGTDM -----------------------------------------------------------------

struct NgtdmTable {
    std::vector<double> s;
    std::vector<std::size_t> n;
    std::size_t total = 0;
};

inline NgtdmTable ngtdm_direct(const LevelGrid& g) {
    NgtdmTable t;
    t.s.assign(g.levels, 0.0);
    t.n.assign(g.levels, 0);
    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
            for (int x = 0; x < g.dims[0]; ++x) {
                if (!g.mask.at(x, y, z)) continue;
                double sum = 0.0;
                int count = 0;
                for (int dz = -1; dz <= 1; ++dz)
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            if (dx == 0 && dy == 0 && dz == 0) continue;
                            const int nx = x + dx, ny = y + dy, nz = z + dz;
                            if (!drf::in_bounds(g.dims, nx, ny, nz)) continue;
                            if (!g.mask.at(nx, ny, nz)) continue;
                            sum += g.values[drf::flat_index(g.dims, nx, ny, nz)];
                            ++count;
                        }
                if (count == 0) continue;
                const int v = g.values[drf::flat_index(g.dims, x, y, z)];
                t.s[v - 1] += std::abs(v - sum / count);
                t.n[v - 1] += 1;
                ++t.total;
            }
    return t;
}

inline std::array<double, 5> ngtdm_features_direct(const NgtdmTable& t, int levels) {
    const double N = static_cast<double>(t.total);
    std::vector<int> present;
    for (int i = 0; i < levels; ++i)
        if (t.n[i] > 0) present.push_back(i);

    double ps = 0, s_total = 0;
    for (int i : present) {
        ps += (t.n[i] / N) * t.s[i];
        s_total += t.s[i];
    }
    double coarseness = std::min(1.0 / (1e-12 + ps), 1e12);
    if (present.size() <= 1) return {coarseness, 0, 0, 0, 0};

    double contrast = 0, busy_den = 0, complexity = 0, strength = 0;
    for (int i : present)
        for (int j : present) {
            const double pi = t.n[i] / N, pj = t.n[j] / N;
            const double di = (i + 1) - (j + 1);
            contrast += pi * pj * di * di;
            busy_den += std::abs((i + 1) * pi - (j + 1) * pj);
            complexity += std::abs(di) * (pi * t.s[i] + pj * t.s[j]) / (N * (pi + pj));
            strength += (pi + pj) * di * di;
        }
    const double ng = static_cast<double>(present.size());
    contrast = contrast / (ng * (ng - 1.0)) * (s_total / N);
    const double busyness = busy_den > 0 ? ps / busy_den : 0.0;
    strength = strength / (1e-12 + s_total);
    return {coarseness, contrast, busyness, complexity, strength};
}

// ---- GLZSM -----------------------------------------------------------------

/// Zone decomposition via union-find over 26-connected equal-level voxels.
inline std::map<std::pair<int, std::size_t>, std::size_t> zones_union_find(const LevelGrid& g) {
    const std::size_t n = drf::voxel_count(g.dims);
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);

    std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    auto unite = [&](std::size_t a, std::size_t b) { parent[find(a)] = find(b); };

    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
            for (int x = 0; x < g.dims[0]; ++x) {
                if (!g.mask.at(x, y, z)) continue;
                const std::size_t idx = drf::flat_index(g.dims, x, y, z);
                for (int dz = -1; dz <= 1; ++dz)
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            if (dx == 0 && dy == 0 && dz == 0) continue;
                            const int nx = x + dx, ny = y + dy, nz = z + dz;
                            if (!drf::in_bounds(g.dims, nx, ny, nz)) continue;
                            if (!g.mask.at(nx, ny, nz)) continue;
                            const std::size_t nidx = drf::flat_index(g.dims, nx, ny, nz);
                            if (g.values[idx] == g.values[nidx]) unite(idx, nidx);
                        }
            }

    std::map<std::size_t, std::size_t> component_size;
    for (std::size_t i = 0; i < n; ++i) {
        if (!g.mask.bits[i]) continue;
        ++component_size[find(i)];
    }
    std::map<std::pair<int, std::size_t>, std::size_t> zone_counts; // (level, size) -> count
    for (const auto& [root, size] : component_size)
        ++zone_counts[{g.values[root], size}];
    return zone_counts;
}

inline std::array<double, 11> glzsm_features_direct(
    const std::map<std::pair<int, std::size_t>, std::size_t>& zones, std::size_t in_mask_voxels) {
    double nz = 0;
    for (const auto& [key, count] : zones) nz += static_cast<double>(count);

    double sze = 0, lze = 0, lgze = 0, hgze = 0, szlge = 0, szhge = 0, lzlge = 0, lzhge = 0;
    std::map<int, double> per_level;
    std::map<std::size_t, double> per_size;
    for (const auto& [key, count] : zones) {
        const double i = key.first;
        const double s = static_cast<double>(key.second);
        const double c = static_cast<double>(count);
        sze += c / (s * s);
        lze += c * s * s;
        lgze += c / (i * i);
        hgze += c * i * i;
        szlge += c / (s * s * i * i);
        szhge += c * i * i / (s * s);
        lzlge += c * s * s / (i * i);
        lzhge += c * s * s * i * i;
        per_level[key.first] += c;
        per_size[key.second] += c;
    }
    double gln = 0, zsn = 0;
    for (const auto& [lvl, c] : per_level) gln += c * c;
    for (const auto& [sz, c] : per_size) zsn += c * c;

    return {sze / nz,   lze / nz,   lgze / nz, hgze / nz, szlge / nz, szhge / nz,
            lzlge / nz, lzhge / nz, gln / nz,  zsn / nz,
            nz / static_cast<double>(in_mask_voxels)};
}

// ---- convolution / pooling ------------------------------------------------

inline drf::FeatureMapStack conv_direct(const drf::FeatureMapStack& in,
                                        const drf::ConvLayerWeights& w, const Dim3& stride) {
    Dim3 out_dims{(in.dims[0] - w.filter_size[0]) / stride[0] + 1,
                  (in.dims[1] - w.filter_size[1]) / stride[1] + 1,
                  (in.dims[2] - w.filter_size[2]) / stride[2] + 1};
    drf::FeatureMapStack out(w.out_channels, out_dims);
    for (int oc = 0; oc < w.out_channels; ++oc)
        for (int oz = 0; oz < out_dims[2]; ++oz)
            for (int oy = 0; oy < out_dims[1]; ++oy)
                for (int ox = 0; ox < out_dims[0]; ++ox) {
                    double acc = w.bias[oc];
                    for (int ic = 0; ic < w.in_channels; ++ic)
                        for (int kz = 0; kz < w.filter_size[2]; ++kz)
                            for (int ky = 0; ky < w.filter_size[1]; ++ky)
                                for (int kx = 0; kx < w.filter_size[0]; ++kx) {
                                    const std::size_t widx =
                                        ((static_cast<std::size_t>(oc) * w.in_channels + ic) *
                                             w.filter_size[2] +
                                         kz) *
                                            w.filter_size[1] * w.filter_size[0] +
                                        static_cast<std::size_t>(ky) * w.filter_size[0] + kx;
                                    acc += static_cast<double>(w.filters[widx]) *
                                           in.channel(ic)[drf::flat_index(
                                               in.dims, ox * stride[0] + kx, oy * stride[1] + ky,
                                               oz * stride[2] + kz)];
                                }
                    out.channel(oc)[drf::flat_index(out_dims, ox, oy, oz)] =
                        static_cast<float>(acc);
                }
    return out;
}

inline drf::FeatureMapStack maxpool_direct(const drf::FeatureMapStack& in, int size, int stride) {
    Dim3 out_dims;
    for (int a = 0; a < 3; ++a)
        out_dims[a] = (stride == 1) ? in.dims[a] : (in.dims[a] - size) / stride + 1;
    drf::FeatureMapStack out(in.channels, out_dims);
    for (int c = 0; c < in.channels; ++c)
        for (int oz = 0; oz < out_dims[2]; ++oz)
            for (int oy = 0; oy < out_dims[1]; ++oy)
                for (int ox = 0; ox < out_dims[0]; ++ox) {
                    float best = -1e30f;
                    for (int kz = 0; kz < size; ++kz)
                        for (int ky = 0; ky < size; ++ky)
                            for (int kx = 0; kx < size; ++kx) {
                                const int x = std::min(ox * stride + kx, in.dims[0] - 1);
                                const int y = std::min(oy * stride + ky, in.dims[1] - 1);
                                const int z = std::min(oz * stride + kz, in.dims[2] - 1);
                                best = std::max(best,
                                                in.channel(c)[drf::flat_index(in.dims, x, y, z)]);
                            }
                    out.channel(c)[drf::flat_index(out_dims, ox, oy, oz)] = best;
                }
    return out;
}

inline RoiMask downsample_any_direct(const RoiMask& mask, int factor) {
    Dim3 out_dims{mask.dims[0] / factor, mask.dims[1] / factor, mask.dims[2] / factor};
    RoiMask out(out_dims);
    for (int z = 0; z < out_dims[2]; ++z)
        for (int y = 0; y < out_dims[1]; ++y)
            for (int x = 0; x < out_dims[0]; ++x) {
                bool any = false;
                for (int dz = 0; dz < factor && !any; ++dz)
                    for (int dy = 0; dy < factor && !any; ++dy)
                        for (int dx = 0; dx < factor && !any; ++dx)
                            any = mask.at(x * factor + dx, y * factor + dy, z * factor + dz);
                out.set(x, y, z, any);
            }
    return out;
}

// ---- NIfTI writer ----------------------------------------------------------

/// Minimal single-file NIfTI-1 writer assembled byte by byte from the header
/// layout, independent of the reader under test.
inline void write_nifti_file(const std::string& path, const Dim3& dims,
                             const std::array<float, 3>& pixdim,
                             const std::vector<float>& payload, float scl_slope = 0.0f,
                             float scl_inter = 0.0f) {
    std::vector<char> hdr(352, 0); // 348-byte header + 4 padding bytes to vox_offset 352
    auto put = [&hdr](std::size_t off, const auto& v) {
        std::memcpy(hdr.data() + off, &v, sizeof(v));
    };
    put(0, std::int32_t{348});
    std::int16_t dim[8] = {3,
                           static_cast<std::int16_t>(dims[0]),
                           static_cast<std::int16_t>(dims[1]),
                           static_cast<std::int16_t>(dims[2]),
                           1, 1, 1, 1};
    std::memcpy(hdr.data() + 40, dim, sizeof(dim));
    put(70, std::int16_t{16}); // float32
    put(72, std::int16_t{32});
    float pd[8] = {1.0f, pixdim[0], pixdim[1], pixdim[2], 0, 0, 0, 0};
    std::memcpy(hdr.data() + 76, pd, sizeof(pd));
    put(108, float{352.0f});
    put(112, scl_slope);
    put(116, scl_inter);
    hdr[344] = 'n';
    hdr[345] = '+';
    hdr[346] = '1';
    hdr[347] = '\0';

    std::ofstream f(path, std::ios::binary);
    f.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
    f.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * 4));
}

} // namespace oracle
