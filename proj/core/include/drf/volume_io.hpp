#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "drf/volume.hpp"

namespace drf {

enum class VolumeFormat { nifti1, raw };

enum class RawDType { f32, u8, i16 };

/// One cohort row: paths are stored as written in the manifest and resolved
/// against the manifest's directory when loaded.
struct ManifestRow {
    std::string patient_id;
    std::string volume_path;
    std::string mask_path;
    double survival_days = 0.0;
    int event = 0;
};

struct CohortManifest {
    std::vector<ManifestRow> rows;
    std::filesystem::path base_dir;

    std::filesystem::path resolve(const std::string& p) const {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base_dir / fp;
    }
};

/// Reads a medical volume from disk.
///
/// nifti1: single-file .nii, fields dim/pixdim/datatype/scl_slope/scl_inter/
/// vox_offset honoured, orientation matrices ignored, byte-swapped headers
/// handled. raw: `<name>.rawvol` little-endian payload (x fastest) described
/// by a `<name>.rawvol.hdr` text sidecar.
Volume read_volume(const std::filesystem::path& path, VolumeFormat format);

/// Format deduced from the extension (.nii -> nifti1, .rawvol -> raw).
Volume read_volume(const std::filesystem::path& path);

/// Writes volume + sidecar header in the raw format. Values are cast to the
/// requested scalar type; f32 round-trips float data bit-exactly.
void write_raw(const Volume& vol, const std::filesystem::path& path, RawDType dtype = RawDType::f32);

CohortManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const CohortManifest& manifest, const std::filesystem::path& path);

} // namespace drf
