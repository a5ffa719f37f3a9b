#include "drf/texture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drf/error.hpp"

namespace drf {

namespace {

constexpr double kLog2 = 0.69314718055994530942;
constexpr double kCoarsenessEps = 1e-12;
constexpr double kCoarsenessCap = 1e12;

inline double log2_safe(double p) { return p > 0.0 ? std::log(p) / kLog2 : 0.0; }

// Effective mask bounding box; grids built without one scan the full extent.
struct Bbox {
    Dim3 lo;
    Dim3 hi; // inclusive
};

Bbox effective_bbox(const QuantizedGrid& q) {
    if (q.bbox_hi[0] < q.bbox_lo[0] || q.bbox_hi[1] < q.bbox_lo[1] ||
        q.bbox_hi[2] < q.bbox_lo[2])
        return {{0, 0, 0}, {q.dims[0] - 1, q.dims[1] - 1, q.dims[2] - 1}};
    return {q.bbox_lo, q.bbox_hi};
}

// 26-neighbourhood offsets, fixed scan order.
const std::array<Dim3, 26>& neighbour_offsets() {
    static const auto offsets = [] {
        std::array<Dim3, 26> o{};
        int idx = 0;
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0 && dz == 0) continue;
                    o[idx++] = {dx, dy, dz};
                }
        return o;
    }();
    return offsets;
}

} // namespace

const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names{
        "hist_mean",
        "hist_variance",
        "hist_skewness",
        "hist_kurtosis",
        "hist_energy",
        "hist_entropy",
        "glcm_angular_second_moment",
        "glcm_contrast",
        "glcm_correlation",
        "glcm_sum_of_squares_variance",
        "glcm_homogeneity",
        "glcm_sum_average",
        "glcm_sum_variance",
        "glcm_sum_entropy",
        "glcm_entropy",
        "glcm_difference_variance",
        "glcm_difference_entropy",
        "glcm_information_correlation_1",
        "glcm_information_correlation_2",
        "glcm_autocorrelation",
        "glcm_dissimilarity",
        "glcm_cluster_shade",
        "glcm_cluster_prominence",
        "glcm_maximum_probability",
        "glcm_inverse_difference",
        "ngtdm_coarseness",
        "ngtdm_contrast",
        "ngtdm_busyness",
        "ngtdm_complexity",
        "ngtdm_strength",
        "glzsm_small_zone_emphasis",
        "glzsm_large_zone_emphasis",
        "glzsm_low_gray_zone_emphasis",
        "glzsm_high_gray_zone_emphasis",
        "glzsm_small_zone_low_gray_emphasis",
        "glzsm_small_zone_high_gray_emphasis",
        "glzsm_large_zone_low_gray_emphasis",
        "glzsm_large_zone_high_gray_emphasis",
        "glzsm_gray_level_nonuniformity",
        "glzsm_zone_size_nonuniformity",
        "glzsm_zone_size_percentage",
    };
    return names;
}

const std::array<Dim3, 13>& glcm_directions() {
    static const std::array<Dim3, 13> dirs{{{1, 0, 0},
                                            {0, 1, 0},
                                            {0, 0, 1},
                                            {1, 1, 0},
                                            {1, -1, 0},
                                            {1, 0, 1},
                                            {1, 0, -1},
                                            {0, 1, 1},
                                            {0, 1, -1},
                                            {1, 1, 1},
                                            {1, -1, 1},
                                            {1, 1, -1},
                                            {1, -1, -1}}};
    return dirs;
}

QuantizedGrid quantize(std::span<const float> values, const Dim3& dims, const RoiMask& mask,
                       int levels) {
    if (dims != mask.dims) throw ShapeError("quantize: grid and mask dims differ");
    if (values.size() != voxel_count(dims)) throw ShapeError("quantize: value count mismatch");
    if (levels < 2) throw ArgumentError("quantize: levels must be >= 2");

    double mn = std::numeric_limits<double>::infinity();
    double mx = -std::numeric_limits<double>::infinity();
    std::size_t in_mask = 0;
    Dim3 lo{dims[0], dims[1], dims[2]};
    Dim3 hi{-1, -1, -1};
    for (int z = 0; z < dims[2]; ++z) {
        for (int y = 0; y < dims[1]; ++y) {
            for (int x = 0; x < dims[0]; ++x) {
                const std::size_t i = flat_index(dims, x, y, z);
                if (!mask.bits[i]) continue;
                ++in_mask;
                mn = std::min(mn, static_cast<double>(values[i]));
                mx = std::max(mx, static_cast<double>(values[i]));
                lo = {std::min(lo[0], x), std::min(lo[1], y), std::min(lo[2], z)};
                hi = {std::max(hi[0], x), std::max(hi[1], y), std::max(hi[2], z)};
            }
        }
    }
    if (in_mask == 0) throw RegionError("quantize: empty mask");

    QuantizedGrid q;
    q.dims = dims;
    q.levels = levels;
    q.mask = &mask;
    q.bbox_lo = lo;
    q.bbox_hi = hi;
    q.values.assign(values.size(), 0);

    if (mx == mn) {
        for (std::size_t i = 0; i < values.size(); ++i)
            if (mask.bits[i]) q.values[i] = 1;
        return q;
    }
    const double scale = levels / (mx - mn);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!mask.bits[i]) continue;
        int level = 1 + static_cast<int>(std::floor((values[i] - mn) * scale));
        if (level < 1) level = 1;
        if (level > levels) level = levels;
        q.values[i] = static_cast<std::uint16_t>(level);
    }
    return q;
}

std::array<double, kHistogramFeatures> histogram_features(std::span<const float> values,
                                                          const Dim3& dims, const RoiMask& mask) {
    if (dims != mask.dims) throw ShapeError("histogram_features: grid and mask dims differ");
    if (values.size() != voxel_count(dims))
        throw ShapeError("histogram_features: value count mismatch");

    double sum = 0.0;
    double mn = std::numeric_limits<double>::infinity();
    double mx = -std::numeric_limits<double>::infinity();
    std::size_t n = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!mask.bits[i]) continue;
        const double v = values[i];
        sum += v;
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        ++n;
    }
    if (n == 0) throw RegionError("histogram_features: empty mask");

    const double mean = sum / static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!mask.bits[i]) continue;
        const double d = values[i] - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);

    const double variance = m2;
    double skewness = 0.0, kurtosis = 0.0;
    if (variance > 0.0) {
        const double sd = std::sqrt(variance);
        skewness = m3 / (sd * sd * sd);
        kurtosis = m4 / (variance * variance);
    }

    // Energy/entropy over a 256-bin min-max histogram of the raw values.
    constexpr int kBins = 256;
    std::array<std::size_t, kBins> hist{};
    if (mx == mn) {
        hist[0] = n;
    } else {
        const double scale = kBins / (mx - mn);
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!mask.bits[i]) continue;
            int b = static_cast<int>(std::floor((values[i] - mn) * scale));
            if (b < 0) b = 0;
            if (b > kBins - 1) b = kBins - 1;
            ++hist[b];
        }
    }
    double energy = 0.0, entropy = 0.0;
    for (std::size_t c : hist) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(n);
        energy += p * p;
        entropy -= p * log2_safe(p);
    }
    return {mean, variance, skewness, kurtosis, energy, entropy};
}

Glcm compute_glcm(const QuantizedGrid& q, const Dim3& direction, int distance) {
    if (distance < 1) throw ArgumentError("compute_glcm: distance must be >= 1");
    const RoiMask& mask = *q.mask;
    const Dim3& d = q.dims;
    const int ox = direction[0] * distance;
    const int oy = direction[1] * distance;
    const int oz = direction[2] * distance;

    Glcm m;
    m.levels = q.levels;
    m.p.assign(static_cast<std::size_t>(q.levels) * q.levels, 0.0);

    // Clip the voxel loop so p + offset stays in bounds without a per-voxel
    // test, then tighten to the mask bounding box (both pair endpoints must
    // be in-mask, so the partner's box applies shifted by -offset).
    const Bbox box = effective_bbox(q);
    const int x_begin = std::max({0, -ox, box.lo[0], box.lo[0] - ox});
    const int x_end = std::min({d[0], d[0] - ox, box.hi[0] + 1, box.hi[0] + 1 - ox});
    const int y_begin = std::max({0, -oy, box.lo[1], box.lo[1] - oy});
    const int y_end = std::min({d[1], d[1] - oy, box.hi[1] + 1, box.hi[1] + 1 - oy});
    const int z_begin = std::max({0, -oz, box.lo[2], box.lo[2] - oz});
    const int z_end = std::min({d[2], d[2] - oz, box.hi[2] + 1, box.hi[2] + 1 - oz});

    const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(ox) +
                                 static_cast<std::ptrdiff_t>(d[0]) *
                                     (static_cast<std::ptrdiff_t>(oy) +
                                      static_cast<std::ptrdiff_t>(d[1]) * oz);

    std::size_t pairs = 0;
    for (int z = z_begin; z < z_end; ++z) {
        for (int y = y_begin; y < y_end; ++y) {
            std::size_t idx = flat_index(d, x_begin, y, z);
            for (int x = x_begin; x < x_end; ++x, ++idx) {
                if (!mask.bits[idx]) continue;
                const std::size_t jdx = static_cast<std::size_t>(
                    static_cast<std::ptrdiff_t>(idx) + shift);
                if (!mask.bits[jdx]) continue;
                const int a = q.values[idx] - 1;
                const int b = q.values[jdx] - 1;
                m.p[static_cast<std::size_t>(a) * q.levels + b] += 1.0;
                m.p[static_cast<std::size_t>(b) * q.levels + a] += 1.0;
                ++pairs;
            }
        }
    }
    m.pair_count = pairs;
    if (pairs > 0) {
        const double norm = 1.0 / (2.0 * static_cast<double>(pairs));
        for (auto& v : m.p) v *= norm;
    }
    return m;
}

std::array<double, kGlcmFeatures> glcm_features(const Glcm& m) {
    const int G = m.levels;
    std::vector<double> px(G, 0.0);
    std::vector<double> p_sum(2 * G - 1, 0.0); // 0-based index i+j; level sum = i+j+2
    std::vector<double> p_diff(G, 0.0);        // index |i-j|

    double asm_ = 0.0, contrast = 0.0, homogeneity = 0.0, entropy = 0.0;
    double autocorr = 0.0, dissimilarity = 0.0, max_prob = 0.0, inv_diff = 0.0;

    for (int i = 0; i < G; ++i) {
        for (int j = 0; j < G; ++j) {
            const double p = m.at(i, j);
            if (p == 0.0) continue;
            px[i] += p;
            p_sum[i + j] += p;
            p_diff[std::abs(i - j)] += p;
            const int li = i + 1, lj = j + 1;
            const int diff = li - lj;
            asm_ += p * p;
            contrast += p * diff * diff;
            homogeneity += p / (1.0 + diff * diff);
            inv_diff += p / (1.0 + std::abs(diff));
            entropy -= p * log2_safe(p);
            autocorr += p * li * lj;
            dissimilarity += p * std::abs(diff);
            max_prob = std::max(max_prob, p);
        }
    }

    double mu_x = 0.0;
    for (int i = 0; i < G; ++i) mu_x += (i + 1) * px[i];
    double var_x = 0.0;
    for (int i = 0; i < G; ++i) var_x += (i + 1 - mu_x) * (i + 1 - mu_x) * px[i];

    // Symmetric matrix: x and y marginals coincide.
    double correlation = 0.0;
    if (var_x > 0.0) correlation = (autocorr - mu_x * mu_x) / var_x;

    double ssv = 0.0, shade = 0.0, prominence = 0.0;
    const double two_mu = 2.0 * mu_x;
    for (int i = 0; i < G; ++i) {
        for (int j = 0; j < G; ++j) {
            const double p = m.at(i, j);
            if (p == 0.0) continue;
            const double di = (i + 1) - mu_x;
            ssv += di * di * p;
            const double c = (i + 1) + (j + 1) - two_mu;
            const double c2 = c * c;
            shade += c2 * c * p;
            prominence += c2 * c2 * p;
        }
    }

    double sum_avg = 0.0, sum_entropy = 0.0;
    for (int k = 0; k < 2 * G - 1; ++k) {
        const double p = p_sum[k];
        if (p == 0.0) continue;
        sum_avg += (k + 2) * p;
        sum_entropy -= p * log2_safe(p);
    }
    double sum_var = 0.0;
    for (int k = 0; k < 2 * G - 1; ++k) {
        const double p = p_sum[k];
        if (p == 0.0) continue;
        sum_var += (k + 2 - sum_avg) * (k + 2 - sum_avg) * p;
    }

    double diff_avg = 0.0, diff_entropy = 0.0;
    for (int k = 0; k < G; ++k) {
        const double p = p_diff[k];
        if (p == 0.0) continue;
        diff_avg += k * p;
        diff_entropy -= p * log2_safe(p);
    }
    double diff_var = 0.0;
    for (int k = 0; k < G; ++k) {
        const double p = p_diff[k];
        if (p == 0.0) continue;
        diff_var += (k - diff_avg) * (k - diff_avg) * p;
    }

    // Information measures of correlation; logs base 2, 0 log 0 = 0.
    double hx = 0.0, hxy1 = 0.0, hxy2 = 0.0;
    for (int i = 0; i < G; ++i) {
        if (px[i] > 0.0) hx -= px[i] * log2_safe(px[i]);
        for (int j = 0; j < G; ++j) {
            const double pp = px[i] * px[j];
            if (pp > 0.0) {
                hxy2 -= pp * log2_safe(pp);
                const double p = m.at(i, j);
                if (p > 0.0) hxy1 -= p * log2_safe(pp);
            }
        }
    }
    double imc1 = 0.0;
    if (hx > 0.0) imc1 = (entropy - hxy1) / hx;
    double imc2_arg = 1.0 - std::exp(-2.0 * kLog2 * (hxy2 - entropy));
    imc2_arg = std::clamp(imc2_arg, 0.0, 1.0);
    const double imc2 = std::sqrt(imc2_arg);

    return {asm_,       contrast,   correlation, ssv,          homogeneity,
            sum_avg,    sum_var,    sum_entropy, entropy,      diff_var,
            diff_entropy, imc1,     imc2,        autocorr,     dissimilarity,
            shade,      prominence, max_prob,    inv_diff};
}

std::array<double, kGlcmFeatures> aggregate_glcm_features(const QuantizedGrid& q) {
    std::array<double, kGlcmFeatures> acc{};
    int used = 0;
    for (const Dim3& dir : glcm_directions()) {
        for (int dist : kGlcmDistances) {
            const Glcm m = compute_glcm(q, dir, dist);
            if (m.pair_count == 0) continue;
            const auto f = glcm_features(m);
            for (int i = 0; i < kGlcmFeatures; ++i) acc[i] += f[i];
            ++used;
        }
    }
    if (used == 0) throw RegionError("aggregate_glcm_features: no direction yields a voxel pair");
    for (auto& v : acc) v /= used;
    return acc;
}

Ngtdm compute_ngtdm(const QuantizedGrid& q) {
    const RoiMask& mask = *q.mask;
    const Dim3& d = q.dims;

    Ngtdm n;
    n.levels = q.levels;
    n.s.assign(q.levels, 0.0);
    n.n.assign(q.levels, 0);

    const auto& offsets = neighbour_offsets();
    std::array<std::ptrdiff_t, 26> flat_offsets;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        const auto& o = offsets[i];
        flat_offsets[i] = static_cast<std::ptrdiff_t>(o[0]) +
                          static_cast<std::ptrdiff_t>(d[0]) *
                              (static_cast<std::ptrdiff_t>(o[1]) +
                               static_cast<std::ptrdiff_t>(d[1]) * o[2]);
    }

    const Bbox box = effective_bbox(q);
    for (int z = box.lo[2]; z <= box.hi[2]; ++z) {
        const bool z_border = (z == 0 || z == d[2] - 1);
        for (int y = box.lo[1]; y <= box.hi[1]; ++y) {
            const bool yz_border = z_border || y == 0 || y == d[1] - 1;
            for (int x = box.lo[0]; x <= box.hi[0]; ++x) {
                const std::size_t idx = flat_index(d, x, y, z);
                if (!mask.bits[idx]) continue;
                double neighbour_sum = 0.0;
                int neighbour_count = 0;
                if (!yz_border && x > 0 && x < d[0] - 1) {
                    // interior: all 26 neighbours in bounds, no per-voxel check
                    for (const std::ptrdiff_t off : flat_offsets) {
                        const std::size_t nidx =
                            static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + off);
                        if (!mask.bits[nidx]) continue;
                        neighbour_sum += q.values[nidx];
                        ++neighbour_count;
                    }
                } else {
                    for (const Dim3& o : offsets) {
                        const int nx = x + o[0], ny = y + o[1], nz = z + o[2];
                        if (!in_bounds(d, nx, ny, nz)) continue;
                        const std::size_t nidx = flat_index(d, nx, ny, nz);
                        if (!mask.bits[nidx]) continue;
                        neighbour_sum += q.values[nidx];
                        ++neighbour_count;
                    }
                }
                if (neighbour_count == 0) continue;
                const double mean = neighbour_sum / neighbour_count;
                const int level = q.values[idx] - 1;
                n.s[level] += std::abs(q.values[idx] - mean);
                n.n[level] += 1;
                ++n.total;
            }
        }
    }
    if (n.total == 0) throw RegionError("compute_ngtdm: no voxel has an in-mask neighbour");
    return n;
}

std::array<double, kNgtdmFeatures> ngtdm_features(const Ngtdm& n) {
    const double N = static_cast<double>(n.total);
    std::vector<int> levels;
    for (int i = 0; i < n.levels; ++i)
        if (n.n[i] > 0) levels.push_back(i);
    const std::size_t ng = levels.size();

    double ps_sum = 0.0; // sum p_i s_i
    double s_sum = 0.0;  // sum s_i
    for (int i : levels) {
        const double p = static_cast<double>(n.n[i]) / N;
        ps_sum += p * n.s[i];
        s_sum += n.s[i];
    }

    double coarseness = 1.0 / (kCoarsenessEps + ps_sum);
    coarseness = std::min(coarseness, kCoarsenessCap);

    if (ng <= 1) return {coarseness, 0.0, 0.0, 0.0, 0.0};

    double contrast_pairs = 0.0;  // sum_i sum_j p_i p_j (i-j)^2
    double busy_den = 0.0;        // sum |i p_i - j p_j|
    double complexity = 0.0;
    double strength_num = 0.0;
    for (int i : levels) {
        const double pi = static_cast<double>(n.n[i]) / N;
        const double vi = i + 1;
        for (int j : levels) {
            const double pj = static_cast<double>(n.n[j]) / N;
            const double vj = j + 1;
            const double dv = vi - vj;
            contrast_pairs += pi * pj * dv * dv;
            busy_den += std::abs(vi * pi - vj * pj);
            complexity += std::abs(dv) * (pi * n.s[i] + pj * n.s[j]) / (N * (pi + pj));
            strength_num += (pi + pj) * dv * dv;
        }
    }

    const double contrast =
        (contrast_pairs / (static_cast<double>(ng) * (static_cast<double>(ng) - 1.0))) *
        (s_sum / N);
    const double busyness = busy_den > 0.0 ? ps_sum / busy_den : 0.0;
    const double strength = strength_num / (kCoarsenessEps + s_sum);

    return {coarseness, contrast, busyness, complexity, strength};
}

Glzsm compute_glzsm(const QuantizedGrid& q) {
    const RoiMask& mask = *q.mask;
    const Dim3& d = q.dims;
    const std::size_t total = voxel_count(d);

    std::vector<std::uint8_t> visited(total, 0);
    std::vector<std::size_t> stack;
    std::vector<std::pair<int, std::size_t>> zones; // (level, size)
    std::size_t in_mask = 0;
    std::size_t max_size = 0;

    const auto& offsets = neighbour_offsets();
    const Bbox box = effective_bbox(q);
    for (int z = box.lo[2]; z <= box.hi[2]; ++z) {
        for (int y = box.lo[1]; y <= box.hi[1]; ++y) {
            for (int x = box.lo[0]; x <= box.hi[0]; ++x) {
                const std::size_t idx = flat_index(d, x, y, z);
                if (!mask.bits[idx]) continue;
                ++in_mask;
                if (visited[idx]) continue;

                // Flood-fill one zone of equal gray level.
                const std::uint16_t level = q.values[idx];
                std::size_t size = 0;
                visited[idx] = 1;
                stack.push_back(idx);
                while (!stack.empty()) {
                    const std::size_t cur = stack.back();
                    stack.pop_back();
                    ++size;
                    const int cz = static_cast<int>(cur / (static_cast<std::size_t>(d[0]) * d[1]));
                    const std::size_t rem = cur % (static_cast<std::size_t>(d[0]) * d[1]);
                    const int cy = static_cast<int>(rem / d[0]);
                    const int cx = static_cast<int>(rem % d[0]);
                    for (const Dim3& o : offsets) {
                        const int nx = cx + o[0], ny = cy + o[1], nz = cz + o[2];
                        if (!in_bounds(d, nx, ny, nz)) continue;
                        const std::size_t nidx = flat_index(d, nx, ny, nz);
                        if (visited[nidx] || !mask.bits[nidx]) continue;
                        if (q.values[nidx] != level) continue;
                        visited[nidx] = 1;
                        stack.push_back(nidx);
                    }
                }
                zones.emplace_back(level, size);
                max_size = std::max(max_size, size);
            }
        }
    }
    if (in_mask == 0) throw RegionError("compute_glzsm: empty mask");

    Glzsm g;
    g.levels = q.levels;
    g.max_size = max_size;
    g.voxel_count = in_mask;
    g.zone_count = zones.size();
    g.z.assign(static_cast<std::size_t>(q.levels) * max_size, 0.0);
    for (const auto& [level, size] : zones)
        g.z[static_cast<std::size_t>(level - 1) * max_size + (size - 1)] += 1.0;
    return g;
}

std::array<double, kGlzsmFeatures> glzsm_features(const Glzsm& g) {
    const double nz = static_cast<double>(g.zone_count);
    std::vector<double> by_level(g.levels, 0.0);
    std::vector<double> by_size(g.max_size, 0.0);

    double sze = 0.0, lze = 0.0, lgze = 0.0, hgze = 0.0;
    double szlge = 0.0, szhge = 0.0, lzlge = 0.0, lzhge = 0.0;

    for (int i = 1; i <= g.levels; ++i) {
        const double i2 = static_cast<double>(i) * i;
        for (std::size_t s = 1; s <= g.max_size; ++s) {
            const double c = g.at(i, s);
            if (c == 0.0) continue;
            const double s2 = static_cast<double>(s) * static_cast<double>(s);
            by_level[i - 1] += c;
            by_size[s - 1] += c;
            sze += c / s2;
            lze += c * s2;
            lgze += c / i2;
            hgze += c * i2;
            szlge += c / (s2 * i2);
            szhge += c * i2 / s2;
            lzlge += c * s2 / i2;
            lzhge += c * s2 * i2;
        }
    }

    double gln = 0.0;
    for (double v : by_level) gln += v * v;
    double zsn = 0.0;
    for (double v : by_size) zsn += v * v;

    return {sze / nz,   lze / nz,   lgze / nz,  hgze / nz,
            szlge / nz, szhge / nz, lzlge / nz, lzhge / nz,
            gln / nz,   zsn / nz,
            nz / static_cast<double>(g.voxel_count)};
}

FeatureVector41 feature_vector(std::span<const float> values, const Dim3& dims,
                               const RoiMask& mask, int levels) {
    const auto hist = histogram_features(values, dims, mask);
    const QuantizedGrid q = quantize(values, dims, mask, levels);
    const auto glcm = aggregate_glcm_features(q);
    const auto ngtdm = ngtdm_features(compute_ngtdm(q));
    const auto glzsm = glzsm_features(compute_glzsm(q));

    FeatureVector41 out{};
    std::size_t k = 0;
    for (double v : hist) out[k++] = v;
    for (double v : glcm) out[k++] = v;
    for (double v : ngtdm) out[k++] = v;
    for (double v : glzsm) out[k++] = v;
    return out;
}

FeatureVector41 feature_vector(const Volume& vol, const RoiMask& mask, int levels) {
    return feature_vector(std::span<const float>(vol.data), vol.dims, mask, levels);
}

FeatureVector41 compute_drf(const FeatureMapStack& layer1, const FeatureMapStack& layer2,
                            const RoiMask& mask1, const RoiMask& mask2, int levels) {
    if (layer1.dims != mask1.dims) throw ShapeError("compute_drf: layer 1 mask dims differ");
    if (layer2.dims != mask2.dims) throw ShapeError("compute_drf: layer 2 mask dims differ");
    if (mask1.count() == 0) throw RegionError("compute_drf: layer 1 mask is empty");
    if (mask2.count() == 0) throw RegionError("compute_drf: layer 2 mask is empty");

    FeatureVector41 acc{};
    int n = 0;
    auto add_stack = [&](const FeatureMapStack& stack, const RoiMask& mask) {
        const std::size_t cs = stack.channel_size();
        for (int c = 0; c < stack.channels; ++c) {
            const auto fv = feature_vector(std::span<const float>(stack.channel(c), cs),
                                           stack.dims, mask, levels);
            for (int i = 0; i < kFeatureCount; ++i) acc[i] += fv[i];
            ++n;
        }
    };
    add_stack(layer1, mask1);
    add_stack(layer2, mask2);

    for (auto& v : acc) v /= n;
    return acc;
}

} // namespace drf
