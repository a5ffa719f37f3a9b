#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drf/conv3d.hpp"
#include "drf/volume.hpp"

namespace drf {

/// Number of texture descriptors per region: 6 histogram + 19 GLCM + 5 NGTDM
/// + 11 GLZSM.
inline constexpr int kFeatureCount = 41;
inline constexpr int kHistogramFeatures = 6;
inline constexpr int kGlcmFeatures = 19;
inline constexpr int kNgtdmFeatures = 5;
inline constexpr int kGlzsmFeatures = 11;

using FeatureVector41 = std::array<double, kFeatureCount>;

/// Column names in the fixed output order; indices are part of the CSV
/// contract.
const std::array<std::string, kFeatureCount>& feature_names();

/// The 13 unique 3D directions used for co-occurrence accumulation.
const std::array<Dim3, 13>& glcm_directions();

/// Offsets (in direction steps) paired with every direction.
inline constexpr std::array<int, 4> kGlcmDistances{1, 2, 3, 4};

/// Gray-level grid over a mask: in-mask values lie in [1, levels].
/// bbox_lo/bbox_hi bound the mask support (inclusive) so the matrix kernels
/// never scan far outside the region.
struct QuantizedGrid {
    Dim3 dims{0, 0, 0};
    int levels = 32;
    std::vector<std::uint16_t> values; // valid at in-mask voxels only
    const RoiMask* mask = nullptr;
    Dim3 bbox_lo{0, 0, 0};
    Dim3 bbox_hi{-1, -1, -1};
};

/// Uniform min-max requantization of the masked voxels to G levels:
/// q = 1 + floor((v - min)/(max - min) * G), clamped to [1, G]. A constant
/// region maps to level 1. Throws RegionError on an empty mask.
QuantizedGrid quantize(std::span<const float> values, const Dim3& dims, const RoiMask& mask,
                       int levels = 32);

/// Symmetric gray-level co-occurrence matrix, normalized to sum 1 when any
/// pair exists. pair_count == 0 marks an empty matrix (skipped from averages).
struct Glcm {
    int levels = 0;
    std::vector<double> p; // levels x levels, row-major
    std::size_t pair_count = 0;

    double at(int i, int j) const { return p[static_cast<std::size_t>(i) * levels + j]; }
};

Glcm compute_glcm(const QuantizedGrid& q, const Dim3& direction, int distance);

/// The 19 Haralick statistics of one normalized matrix, in the fixed order
/// ASM, contrast, correlation, sum-of-squares variance, homogeneity,
/// sum average, sum variance, sum entropy, entropy, difference variance,
/// difference entropy, IMC1, IMC2, autocorrelation, dissimilarity,
/// cluster shade, cluster prominence, maximum probability, inverse difference.
/// Logs are base 2 with 0*log0 = 0; degenerate denominators yield 0.
std::array<double, kGlcmFeatures> glcm_features(const Glcm& m);

/// Unweighted mean of glcm_features over the non-empty matrices of the
/// 13-direction x 4-distance grid. Throws RegionError if all 52 are empty.
std::array<double, kGlcmFeatures> aggregate_glcm_features(const QuantizedGrid& q);

/// Neighborhood gray-tone difference accumulator (26-connected). A voxel
/// contributes only if it has at least one in-mask neighbour.
struct Ngtdm {
    int levels = 0;
    std::vector<double> s;      // per level: sum |value - neighbourhood mean|
    std::vector<std::size_t> n; // per level occurrence count
    std::size_t total = 0;      // counted voxels
};

Ngtdm compute_ngtdm(const QuantizedGrid& q);

/// Coarseness, contrast, busyness, complexity, strength. Coarseness uses a
/// 1e-12 guard and is capped at 1e12; the other four are 0 when only one gray
/// level occurs.
std::array<double, kNgtdmFeatures> ngtdm_features(const Ngtdm& n);

/// Zone-size matrix: Z[level][size] counts of maximal 26-connected
/// equal-level components inside the mask.
struct Glzsm {
    int levels = 0;
    std::size_t max_size = 0;
    std::vector<double> z; // levels x max_size, row-major; column s-1 = size s
    std::size_t zone_count = 0;
    std::size_t voxel_count = 0;

    double at(int level, std::size_t size) const {
        return z[static_cast<std::size_t>(level - 1) * max_size + (size - 1)];
    }
};

Glzsm compute_glzsm(const QuantizedGrid& q);

/// Small/large zone emphases, low/high gray emphases, their four joint
/// variants, gray-level and zone-size non-uniformity, zone size percentage.
std::array<double, kGlzsmFeatures> glzsm_features(const Glzsm& z);

/// Population mean/variance, standardized skewness and kurtosis (0 when the
/// variance is 0), and energy/entropy of a 256-bin min-max histogram, all on
/// the raw in-mask values.
std::array<double, kHistogramFeatures> histogram_features(std::span<const float> values,
                                                          const Dim3& dims, const RoiMask& mask);

/// The full 41-entry descriptor of one masked grid: histogram block on raw
/// values, matrix blocks on the G-level quantization.
FeatureVector41 feature_vector(std::span<const float> values, const Dim3& dims,
                               const RoiMask& mask, int levels = 32);

FeatureVector41 feature_vector(const Volume& vol, const RoiMask& mask, int levels = 32);

/// Deep descriptor: feature_vector on each of the 20 feature-map channels
/// over the layer's downsampled ROI support, averaged per feature. Throws
/// RegionError naming the layer whose mask is empty.
FeatureVector41 compute_drf(const FeatureMapStack& layer1, const FeatureMapStack& layer2,
                            const RoiMask& mask1, const RoiMask& mask2, int levels = 32);

} // namespace drf
