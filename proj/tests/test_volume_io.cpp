#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "drf/error.hpp"
#include "drf/rng.hpp"
#include "drf/volume_io.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace drf;
using testutil::TempDir;
namespace fs = std::filesystem;

TEST_SUITE("volume_io") {

TEST_CASE("raw round trip: zero payload") {
    TempDir tmp;
    const auto file = tmp.path / "zeros.rawvol";
    Volume vol({4, 4, 4}, {1.0, 1.0, 1.0}, 0.0f);
    write_raw(vol, file);

    const Volume back = read_volume(file, VolumeFormat::raw);
    CHECK(back.dims == Dim3{4, 4, 4});
    CHECK(back.spacing == Spacing3{1.0, 1.0, 1.0});
    for (float v : back.data) CHECK(v == 0.0f);
}

TEST_CASE("raw round trip reproduces an f32 payload bit-exactly") {
    TempDir tmp;
    const auto file = tmp.path / "noise.rawvol";
    Volume vol({5, 3, 2}, {0.75, 1.5, 2.0});
    Rng rng(42);
    for (auto& v : vol.data) v = static_cast<float>(rng.normal());
    write_raw(vol, file);

    const Volume back = read_volume(file);
    REQUIRE(back.data.size() == vol.data.size());
    CHECK(back.spacing == vol.spacing);
    for (std::size_t i = 0; i < vol.data.size(); ++i) CHECK(back.data[i] == vol.data[i]);

    // and the re-written payload is byte-identical
    const auto file2 = tmp.path / "noise2.rawvol";
    write_raw(back, file2);
    std::ifstream a(file, std::ios::binary), b(file2, std::ios::binary);
    const std::string bytes_a((std::istreambuf_iterator<char>(a)), {});
    const std::string bytes_b((std::istreambuf_iterator<char>(b)), {});
    CHECK(bytes_a == bytes_b);
}

TEST_CASE("raw payload one voxel short raises SizeError") {
    TempDir tmp;
    const auto file = tmp.path / "short.rawvol";
    Volume vol({3, 3, 3}, {1.0, 1.0, 1.0}, 1.0f);
    write_raw(vol, file);
    fs::resize_file(file, 27 * 4 - 4);
    CHECK_THROWS_AS((void)read_volume(file, VolumeFormat::raw), SizeError);
}

TEST_CASE("raw header with a bad field names the field") {
    TempDir tmp;
    const auto file = tmp.path / "bad.rawvol";
    std::ofstream(file, std::ios::binary) << "xxxx";
    std::ofstream(file.string() + ".hdr") << "dims=2,2,2\nspacing=0,1,1\ndtype=f32\n";
    CHECK_THROWS_WITH_AS((void)read_volume(file, VolumeFormat::raw),
                         doctest::Contains("spacing"), FormatError);
}

TEST_CASE("nifti written by the independent serializer reads back") {
    TempDir tmp;
    const auto file = (tmp.path / "vol.nii").string();
    const Dim3 dims{8, 8, 8};
    std::vector<float> payload(voxel_count(dims));
    Rng rng(7);
    for (auto& v : payload) v = static_cast<float>(rng.uniform(-50.0, 50.0));
    oracle::write_nifti_file(file, dims, {2.0f, 2.0f, 2.0f}, payload);

    const Volume vol = read_volume(file, VolumeFormat::nifti1);
    CHECK(vol.dims == dims);
    CHECK(vol.spacing == Spacing3{2.0, 2.0, 2.0});
    for (std::size_t i = 0; i < payload.size(); ++i) CHECK(vol.data[i] == payload[i]);
}

TEST_CASE("raw u8 and i16 payloads round trip through float exactly") {
    TempDir tmp;
    for (const RawDType dtype : {RawDType::u8, RawDType::i16}) {
        Volume vol({4, 3, 2}, {1.0, 1.0, 1.0});
        Rng rng(dtype == RawDType::u8 ? 15 : 16);
        for (auto& v : vol.data)
            v = static_cast<float>(dtype == RawDType::u8
                                       ? static_cast<int>(rng.index(256))
                                       : static_cast<int>(rng.index(65536)) - 32768);
        const auto file = tmp.path / "ints.rawvol";
        write_raw(vol, file, dtype);
        const Volume back = read_volume(file);
        CHECK(back.data == vol.data);
    }
}

TEST_CASE("byte-swapped nifti headers and payloads are handled") {
    TempDir tmp;
    const auto file = (tmp.path / "swapped.nii").string();
    const Dim3 dims{3, 2, 2};
    std::vector<float> payload(voxel_count(dims));
    for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<float>(i) - 4.5f;
    oracle::write_nifti_file(file, dims, {1.5f, 1.5f, 1.5f}, payload);

    // swap every multi-byte field the reader touches, and the payload
    auto swap_bytes = [](char* p, int n) { std::reverse(p, p + n); };
    std::vector<char> bytes;
    {
        std::ifstream f(file, std::ios::binary);
        bytes.assign((std::istreambuf_iterator<char>(f)), {});
    }
    swap_bytes(bytes.data() + 0, 4); // sizeof_hdr
    for (int i = 0; i < 8; ++i) swap_bytes(bytes.data() + 40 + 2 * i, 2); // dim
    swap_bytes(bytes.data() + 70, 2);                                     // datatype
    swap_bytes(bytes.data() + 72, 2);                                     // bitpix
    for (int i = 0; i < 8; ++i) swap_bytes(bytes.data() + 76 + 4 * i, 4); // pixdim
    swap_bytes(bytes.data() + 108, 4);                                    // vox_offset
    swap_bytes(bytes.data() + 112, 4);                                    // scl_slope
    swap_bytes(bytes.data() + 116, 4);                                    // scl_inter
    for (std::size_t i = 0; i < payload.size(); ++i) swap_bytes(bytes.data() + 352 + 4 * i, 4);
    {
        std::ofstream f(file, std::ios::binary);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }

    const Volume vol = read_volume(file, VolumeFormat::nifti1);
    CHECK(vol.dims == dims);
    CHECK(vol.spacing == Spacing3{1.5, 1.5, 1.5});
    for (std::size_t i = 0; i < payload.size(); ++i) CHECK(vol.data[i] == payload[i]);
}

TEST_CASE("nifti slope/intercept scaling applies; slope 0 means 1") {
    TempDir tmp;
    const Dim3 dims{2, 2, 2};
    std::vector<float> payload(8, 10.0f);

    const auto scaled = (tmp.path / "scaled.nii").string();
    oracle::write_nifti_file(scaled, dims, {1, 1, 1}, payload, 2.0f, 3.0f);
    const Volume v1 = read_volume(scaled, VolumeFormat::nifti1);
    for (float v : v1.data) CHECK(v == 23.0f);

    const auto zero_slope = (tmp.path / "zslope.nii").string();
    oracle::write_nifti_file(zero_slope, dims, {1, 1, 1}, payload, 0.0f, 0.0f);
    const Volume v2 = read_volume(zero_slope, VolumeFormat::nifti1);
    for (float v : v2.data) CHECK(v == 10.0f);
}

TEST_CASE("nifti malformed header names the offending field") {
    TempDir tmp;
    const Dim3 dims{2, 2, 2};
    std::vector<float> payload(8, 0.0f);

    SUBCASE("bad magic") {
        const auto file = (tmp.path / "magic.nii").string();
        oracle::write_nifti_file(file, dims, {1, 1, 1}, payload);
        std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(344);
        f.write("xxx", 3);
        f.close();
        CHECK_THROWS_WITH_AS((void)read_volume(file, VolumeFormat::nifti1),
                             doctest::Contains("magic"), FormatError);
    }
    SUBCASE("bad datatype") {
        const auto file = (tmp.path / "dtype.nii").string();
        oracle::write_nifti_file(file, dims, {1, 1, 1}, payload);
        std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
        const std::int16_t dt = 1234;
        f.seekp(70);
        f.write(reinterpret_cast<const char*>(&dt), 2);
        f.close();
        CHECK_THROWS_WITH_AS((void)read_volume(file, VolumeFormat::nifti1),
                             doctest::Contains("datatype"), FormatError);
    }
    SUBCASE("truncated payload") {
        const auto file = (tmp.path / "trunc.nii").string();
        oracle::write_nifti_file(file, dims, {1, 1, 1}, payload);
        fs::resize_file(file, 352 + 8 * 4 - 2);
        CHECK_THROWS_AS((void)read_volume(file, VolumeFormat::nifti1), SizeError);
    }
}

TEST_CASE("manifest round trip and validation") {
    TempDir tmp;
    const auto path = tmp.path / "manifest.csv";
    CohortManifest m;
    m.rows.push_back({"p1", "p1_vol.rawvol", "p1_mask.rawvol", 120.5, 1});
    m.rows.push_back({"p2", "p2_vol.rawvol", "p2_mask.rawvol", 400.0, 0});
    write_manifest(m, path);

    const CohortManifest back = read_manifest(path);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0].patient_id == "p1");
    CHECK(back.rows[1].survival_days == 400.0);
    CHECK(back.rows[1].event == 0);
    CHECK(back.resolve("p1_vol.rawvol") == tmp.path / "p1_vol.rawvol");

    SUBCASE("duplicate patient id rejected") {
        std::ofstream f(path);
        f << "patient_id,volume_path,mask_path,survival_days,event\n";
        f << "p1,a,b,1,1\np1,c,d,2,0\n";
        f.close();
        CHECK_THROWS_AS((void)read_manifest(path), FormatError);
    }
    SUBCASE("bad event value rejected") {
        std::ofstream f(path);
        f << "patient_id,volume_path,mask_path,survival_days,event\n";
        f << "p1,a,b,1,2\n";
        f.close();
        CHECK_THROWS_AS((void)read_manifest(path), FormatError);
    }
}

} // TEST_SUITE
