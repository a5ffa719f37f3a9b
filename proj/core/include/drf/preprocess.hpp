#pragma once

#include <utility>

#include "drf/volume.hpp"

namespace drf {

/// Resamples volume and mask onto an isotropic grid of `target` mm.
/// Output dims are ceil(dim_i * spacing_i / target) per axis; intensities are
/// interpolated trilinearly, the mask nearest-neighbour.
std::pair<Volume, RoiMask> resample_isotropic(const Volume& vol, const RoiMask& mask, double target);

/// Min-max rescale to integer gray levels: v' = floor((v-min)/(max-min)*levels),
/// clamped to [0, levels-1]. A constant volume maps to all zeros.
Volume normalize_gray_levels(const Volume& vol, int levels = 256);

/// Center-crop then zero-pad symmetrically until dims equal target_dims; the
/// mask undergoes the identical transform.
std::pair<Volume, RoiMask> conform(const Volume& vol, const RoiMask& mask,
                                   const Dim3& target_dims = {256, 256, 256});

/// Zeroes every voxel outside the mask. Throws ShapeError on dims mismatch.
Volume apply_mask(const Volume& vol, const RoiMask& mask);

} // namespace drf
