#pragma once

#include <cstdint>
#include <filesystem>

#include "drf/volume_io.hpp"

namespace drf {

/// Desk-scale cohort with a planted texture-survival link: two patient
/// classes differ in the correlation length of a Gaussian random field and in
/// the median of their exponential survival time.
struct SynthSpec {
    int n_patients = 100;
    Dim3 dims{64, 64, 64};
    double class_a_scale = 1.5;     // field correlation length, voxels
    double class_b_scale = 4.0;
    double class_a_median_days = 300.0;
    double class_b_median_days = 600.0;
    double censoring_fraction = 0.06;
    std::uint64_t seed = 0;
};

struct SynthResult {
    std::filesystem::path manifest_path;
    std::vector<int> true_class; // per patient, 0 = A, 1 = B
};

/// Writes volumes (.rawvol f32), ellipsoidal masks (.rawvol u8) and
/// manifest.csv under out_dir. Identical spec+seed produce identical bytes.
SynthResult generate_synthetic_cohort(const SynthSpec& spec, const std::filesystem::path& out_dir);

/// Zero-mean Gaussian random field: seeded white noise smoothed by a
/// separable Gaussian of the given correlation length.
Volume gaussian_random_field(const Dim3& dims, double length_scale, std::uint64_t seed);

} // namespace drf
