#include "drf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drf/error.hpp"
#include "drf/rng.hpp"

namespace drf {

namespace {

// Separable Gaussian blur along one axis, truncated at 3 sigma.
void blur_axis(std::vector<float>& data, const Dim3& d, int axis, double sigma) {
    if (sigma <= 0.0) return;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double norm = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
        norm += kernel[k + radius];
    }
    for (auto& k : kernel) k /= norm;

    const Dim3 step_dims = d;
    std::vector<float> out(data.size());
    for (int z = 0; z < d[2]; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            for (int x = 0; x < d[0]; ++x) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    int sx = x, sy = y, sz = z;
                    (axis == 0 ? sx : axis == 1 ? sy : sz) += k;
                    sx = std::clamp(sx, 0, d[0] - 1);
                    sy = std::clamp(sy, 0, d[1] - 1);
                    sz = std::clamp(sz, 0, d[2] - 1);
                    acc += kernel[k + radius] * data[flat_index(step_dims, sx, sy, sz)];
                }
                out[flat_index(step_dims, x, y, z)] = static_cast<float>(acc);
            }
        }
    }
    data.swap(out);
}

RoiMask ellipsoid_mask(const Dim3& d, Rng& rng) {
    // Tumour stand-in: ellipsoid with jittered centre and semi-axes.
    const double cx = 0.5 * d[0] + rng.uniform(-0.04, 0.04) * d[0];
    const double cy = 0.5 * d[1] + rng.uniform(-0.04, 0.04) * d[1];
    const double cz = 0.5 * d[2] + rng.uniform(-0.04, 0.04) * d[2];
    const double ax = (0.28 + rng.uniform(-0.03, 0.03)) * d[0];
    const double ay = (0.23 + rng.uniform(-0.03, 0.03)) * d[1];
    const double az = (0.19 + rng.uniform(-0.03, 0.03)) * d[2];

    RoiMask mask(d);
    for (int z = 0; z < d[2]; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            for (int x = 0; x < d[0]; ++x) {
                const double ex = (x - cx) / ax;
                const double ey = (y - cy) / ay;
                const double ez = (z - cz) / az;
                if (ex * ex + ey * ey + ez * ez <= 1.0) mask.set(x, y, z, true);
            }
        }
    }
    return mask;
}

} // namespace

Volume gaussian_random_field(const Dim3& dims, double length_scale, std::uint64_t seed) {
    Volume vol(dims, {1.0, 1.0, 1.0});
    Rng rng(seed);
    for (auto& v : vol.data) v = static_cast<float>(rng.normal());
    for (int axis = 0; axis < 3; ++axis) blur_axis(vol.data, dims, axis, length_scale);
    return vol;
}

SynthResult generate_synthetic_cohort(const SynthSpec& spec,
                                      const std::filesystem::path& out_dir) {
    if (spec.n_patients < 1) throw ArgumentError("synthetic cohort: n_patients must be >= 1");
    if (spec.class_a_median_days == spec.class_b_median_days)
        throw ArgumentError("synthetic cohort: class survival medians must be distinct");
    if (spec.censoring_fraction < 0.0 || spec.censoring_fraction >= 1.0)
        throw ArgumentError("synthetic cohort: censoring fraction must lie in [0, 1)");

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string());

    // Deterministic censoring set: exactly round(fraction * n) patients.
    const int n_censored =
        static_cast<int>(std::lround(spec.censoring_fraction * spec.n_patients));
    std::vector<int> censor_order(spec.n_patients);
    std::iota(censor_order.begin(), censor_order.end(), 0);
    {
        Rng rng(Rng::mix(spec.seed, 0xC3A5ULL));
        rng.shuffle(censor_order);
    }
    std::vector<std::uint8_t> censored(spec.n_patients, 0);
    for (int i = 0; i < n_censored; ++i) censored[censor_order[i]] = 1;

    CohortManifest manifest;
    manifest.base_dir = out_dir;
    SynthResult result;

    for (int p = 0; p < spec.n_patients; ++p) {
        Rng rng(Rng::mix(spec.seed, static_cast<std::uint64_t>(p)));
        const int cls = rng.uniform() < 0.5 ? 0 : 1;
        const double scale = cls == 0 ? spec.class_a_scale : spec.class_b_scale;
        const double median = cls == 0 ? spec.class_a_median_days : spec.class_b_median_days;

        Volume vol =
            gaussian_random_field(spec.dims, scale, Rng::mix(spec.seed, 0xF1E1DULL, p));
        RoiMask mask = ellipsoid_mask(spec.dims, rng);

        // Exponential survival with the class median: T = -median * log2(U).
        double time = -median * std::log(std::max(rng.uniform(), 1e-300)) / std::log(2.0);
        int event = 1;
        if (censored[p]) {
            event = 0;
            time *= rng.uniform(); // observed at a uniform fraction of the true time
        }

        char name[32];
        std::snprintf(name, sizeof(name), "patient_%03d", p);
        const std::string vol_file = std::string(name) + "_vol.rawvol";
        const std::string mask_file = std::string(name) + "_mask.rawvol";
        write_raw(vol, out_dir / vol_file, RawDType::f32);

        Volume mask_vol(spec.dims, {1.0, 1.0, 1.0});
        for (std::size_t i = 0; i < mask.bits.size(); ++i)
            mask_vol.data[i] = static_cast<float>(mask.bits[i]);
        write_raw(mask_vol, out_dir / mask_file, RawDType::u8);

        manifest.rows.push_back({name, vol_file, mask_file, time, event});
        result.true_class.push_back(cls);
    }

    result.manifest_path = out_dir / "manifest.csv";
    write_manifest(manifest, result.manifest_path);
    return result;
}

} // namespace drf
