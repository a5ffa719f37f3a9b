#include "drf/volume_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "drf/error.hpp"

namespace drf {

namespace {

template <typename T>
T bswap(T v) {
    auto bytes = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
}

// NIfTI-1 datatype codes.
constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtInt32 = 8;
constexpr std::int16_t kDtFloat32 = 16;
constexpr std::int16_t kDtFloat64 = 64;

struct HeaderReader {
    const std::vector<char>& buf;
    bool swap = false;

    template <typename T>
    T read(std::size_t offset) const {
        T v;
        std::memcpy(&v, buf.data() + offset, sizeof(T));
        return swap ? bswap(v) : v;
    }
};

template <typename T>
void decode_payload(const std::vector<char>& raw, std::size_t n, bool swap, float slope,
                    float inter, std::vector<float>& out) {
    const char* src = raw.data();
    for (std::size_t i = 0; i < n; ++i) {
        T v;
        std::memcpy(&v, src + i * sizeof(T), sizeof(T));
        if (swap) v = bswap(v);
        out[i] = static_cast<float>(static_cast<double>(v) * slope + inter);
    }
}

Volume read_nifti1(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());

    std::vector<char> hdr(348);
    if (!f.read(hdr.data(), 348)) throw FormatError("nifti header truncated: sizeof_hdr");

    HeaderReader r{hdr, false};
    std::int32_t sizeof_hdr = r.read<std::int32_t>(0);
    if (sizeof_hdr != 348) {
        r.swap = true;
        if (r.read<std::int32_t>(0) != 348)
            throw FormatError("nifti field sizeof_hdr: expected 348, got " +
                              std::to_string(sizeof_hdr));
    }

    char magic[4];
    std::memcpy(magic, hdr.data() + 344, 4);
    if (std::strncmp(magic, "n+1", 3) != 0)
        throw FormatError("nifti field magic: not a single-file n+1 image");

    std::int16_t ndim = r.read<std::int16_t>(40);
    if (ndim < 3 || ndim > 7)
        throw FormatError("nifti field dim[0]: unsupported rank " + std::to_string(ndim));
    Dim3 dims;
    for (int a = 0; a < 3; ++a) {
        std::int16_t d = r.read<std::int16_t>(40 + 2 * (a + 1));
        if (d < 1) throw FormatError("nifti field dim[" + std::to_string(a + 1) + "]: must be >= 1");
        dims[a] = d;
    }
    for (int a = 4; a <= ndim; ++a) {
        std::int16_t d = r.read<std::int16_t>(40 + 2 * a);
        if (d > 1)
            throw FormatError("nifti field dim[" + std::to_string(a) +
                              "]: time/vector axes unsupported");
    }

    std::int16_t datatype = r.read<std::int16_t>(70);
    std::int16_t bitpix = r.read<std::int16_t>(72);
    std::size_t elem_size;
    switch (datatype) {
        case kDtUint8: elem_size = 1; break;
        case kDtInt16: elem_size = 2; break;
        case kDtInt32: elem_size = 4; break;
        case kDtFloat32: elem_size = 4; break;
        case kDtFloat64: elem_size = 8; break;
        default:
            throw FormatError("nifti field datatype: unsupported code " + std::to_string(datatype));
    }
    if (bitpix != static_cast<std::int16_t>(elem_size * 8))
        throw FormatError("nifti field bitpix: disagrees with datatype");

    Spacing3 spacing;
    for (int a = 0; a < 3; ++a) {
        float p = r.read<float>(76 + 4 * (a + 1));
        if (!(p > 0.0f))
            throw FormatError("nifti field pixdim[" + std::to_string(a + 1) + "]: must be > 0");
        spacing[a] = p;
    }

    float vox_offset = r.read<float>(108);
    if (vox_offset < 348.0f) throw FormatError("nifti field vox_offset: below header size");
    float slope = r.read<float>(112);
    float inter = r.read<float>(116);
    if (slope == 0.0f) slope = 1.0f;

    const std::size_t n = voxel_count(dims);
    std::vector<char> raw(n * elem_size);
    f.seekg(static_cast<std::streamoff>(vox_offset));
    f.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(f.gcount()) != raw.size())
        throw SizeError("nifti payload: expected " + std::to_string(raw.size()) +
                        " bytes, file has " + std::to_string(f.gcount()));

    Volume vol(dims, spacing);
    switch (datatype) {
        case kDtUint8: decode_payload<std::uint8_t>(raw, n, r.swap, slope, inter, vol.data); break;
        case kDtInt16: decode_payload<std::int16_t>(raw, n, r.swap, slope, inter, vol.data); break;
        case kDtInt32: decode_payload<std::int32_t>(raw, n, r.swap, slope, inter, vol.data); break;
        case kDtFloat32: decode_payload<float>(raw, n, r.swap, slope, inter, vol.data); break;
        case kDtFloat64: decode_payload<double>(raw, n, r.swap, slope, inter, vol.data); break;
        default: break;
    }
    return vol;
}

RawDType parse_dtype(const std::string& s) {
    if (s == "f32") return RawDType::f32;
    if (s == "u8") return RawDType::u8;
    if (s == "i16") return RawDType::i16;
    throw FormatError("raw header field dtype: unknown value '" + s + "'");
}

std::size_t dtype_size(RawDType t) {
    switch (t) {
        case RawDType::f32: return 4;
        case RawDType::u8: return 1;
        case RawDType::i16: return 2;
    }
    return 4;
}

Volume read_raw(const std::filesystem::path& path) {
    const std::filesystem::path hdr_path = path.string() + ".hdr";
    std::ifstream hdr(hdr_path);
    if (!hdr) throw IoError("cannot open " + hdr_path.string());

    Dim3 dims{0, 0, 0};
    Spacing3 spacing{0.0, 0.0, 0.0};
    bool have_dims = false, have_spacing = false, have_dtype = false;
    RawDType dtype = RawDType::f32;

    std::string line;
    while (std::getline(hdr, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("raw header line without '=': " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        std::istringstream vs(value);
        char comma;
        if (key == "dims") {
            if (!(vs >> dims[0] >> comma >> dims[1] >> comma >> dims[2]) || dims[0] < 1 ||
                dims[1] < 1 || dims[2] < 1)
                throw FormatError("raw header field dims: expected three positive integers");
            have_dims = true;
        } else if (key == "spacing") {
            if (!(vs >> spacing[0] >> comma >> spacing[1] >> comma >> spacing[2]) ||
                !(spacing[0] > 0) || !(spacing[1] > 0) || !(spacing[2] > 0))
                throw FormatError("raw header field spacing: expected three positive reals");
            have_spacing = true;
        } else if (key == "dtype") {
            dtype = parse_dtype(value);
            have_dtype = true;
        } else {
            throw FormatError("raw header field " + key + ": unknown key");
        }
    }
    if (!have_dims) throw FormatError("raw header field dims: missing");
    if (!have_spacing) throw FormatError("raw header field spacing: missing");
    if (!have_dtype) throw FormatError("raw header field dtype: missing");

    const std::size_t n = voxel_count(dims);
    const std::size_t payload = n * dtype_size(dtype);

    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::vector<char> raw(payload);
    f.read(raw.data(), static_cast<std::streamsize>(payload));
    if (static_cast<std::size_t>(f.gcount()) != payload)
        throw SizeError("raw payload: expected " + std::to_string(payload) + " bytes, file has " +
                        std::to_string(f.gcount()));
    f.peek();
    if (!f.eof())
        throw SizeError("raw payload: file longer than dims declare");

    Volume vol(dims, spacing);
    switch (dtype) {
        case RawDType::f32: decode_payload<float>(raw, n, false, 1.0f, 0.0f, vol.data); break;
        case RawDType::u8: decode_payload<std::uint8_t>(raw, n, false, 1.0f, 0.0f, vol.data); break;
        case RawDType::i16: decode_payload<std::int16_t>(raw, n, false, 1.0f, 0.0f, vol.data); break;
    }
    return vol;
}

} // namespace

Volume read_volume(const std::filesystem::path& path, VolumeFormat format) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
    switch (format) {
        case VolumeFormat::nifti1: return read_nifti1(path);
        case VolumeFormat::raw: return read_raw(path);
    }
    throw ArgumentError("unknown volume format");
}

Volume read_volume(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".nii") return read_volume(path, VolumeFormat::nifti1);
    if (ext == ".rawvol") return read_volume(path, VolumeFormat::raw);
    throw ArgumentError("cannot deduce volume format from extension '" + ext + "'");
}

void write_raw(const Volume& vol, const std::filesystem::path& path, RawDType dtype) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    const std::size_t n = vol.data.size();
    switch (dtype) {
        case RawDType::f32:
            f.write(reinterpret_cast<const char*>(vol.data.data()),
                    static_cast<std::streamsize>(n * 4));
            break;
        case RawDType::u8: {
            std::vector<std::uint8_t> tmp(n);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = static_cast<std::uint8_t>(vol.data[i]);
            f.write(reinterpret_cast<const char*>(tmp.data()), static_cast<std::streamsize>(n));
            break;
        }
        case RawDType::i16: {
            std::vector<std::int16_t> tmp(n);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = static_cast<std::int16_t>(vol.data[i]);
            f.write(reinterpret_cast<const char*>(tmp.data()),
                    static_cast<std::streamsize>(n * 2));
            break;
        }
    }
    if (!f) throw IoError("short write to " + path.string());

    std::ofstream hdr(path.string() + ".hdr");
    if (!hdr) throw IoError("cannot write " + path.string() + ".hdr");
    hdr << "dims=" << vol.dims[0] << ',' << vol.dims[1] << ',' << vol.dims[2] << '\n';
    char buf[128];
    std::snprintf(buf, sizeof(buf), "spacing=%.17g,%.17g,%.17g\n", vol.spacing[0], vol.spacing[1],
                  vol.spacing[2]);
    hdr << buf;
    hdr << "dtype=" << (dtype == RawDType::f32 ? "f32" : dtype == RawDType::u8 ? "u8" : "i16")
        << '\n';
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

CohortManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());

    CohortManifest m;
    m.base_dir = path.has_parent_path() ? path.parent_path() : ".";

    std::string line;
    if (!std::getline(f, line)) throw FormatError("manifest is empty: " + path.string());
    const auto header = split_csv_line(line);
    const std::vector<std::string> expected{"patient_id", "volume_path", "mask_path",
                                            "survival_days", "event"};
    if (std::vector<std::string>(header.begin(), header.end()) != expected)
        throw FormatError("manifest header must be patient_id,volume_path,mask_path,survival_days,event");

    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 5)
            throw FormatError("manifest line " + std::to_string(line_no) + ": expected 5 fields");
        ManifestRow row;
        row.patient_id = fields[0];
        row.volume_path = fields[1];
        row.mask_path = fields[2];
        try {
            row.survival_days = std::stod(fields[3]);
            row.event = std::stoi(fields[4]);
        } catch (const std::exception&) {
            throw FormatError("manifest line " + std::to_string(line_no) + ": bad numeric field");
        }
        if (row.survival_days < 0.0)
            throw FormatError("manifest line " + std::to_string(line_no) + ": survival_days < 0");
        if (row.event != 0 && row.event != 1)
            throw FormatError("manifest line " + std::to_string(line_no) + ": event must be 0 or 1");
        for (const auto& prev : m.rows)
            if (prev.patient_id == row.patient_id)
                throw FormatError("manifest: duplicate patient_id " + row.patient_id);
        m.rows.push_back(std::move(row));
    }
    return m;
}

void write_manifest(const CohortManifest& manifest, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f << "patient_id,volume_path,mask_path,survival_days,event\n";
    char buf[64];
    for (const auto& r : manifest.rows) {
        std::snprintf(buf, sizeof(buf), "%.17g", r.survival_days);
        f << r.patient_id << ',' << r.volume_path << ',' << r.mask_path << ',' << buf << ','
          << r.event << '\n';
    }
}

} // namespace drf
