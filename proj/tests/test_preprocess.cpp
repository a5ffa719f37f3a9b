#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "drf/error.hpp"
#include "drf/preprocess.hpp"
#include "drf/rng.hpp"

using namespace drf;

TEST_SUITE("preprocess") {

TEST_CASE("resample at the native spacing is the identity") {
    Volume vol({4, 4, 4}, {1.0, 1.0, 1.0});
    Rng rng(11);
    for (auto& v : vol.data) v = static_cast<float>(rng.uniform());
    RoiMask mask(vol.dims);
    for (std::size_t i = 0; i < mask.bits.size(); ++i) mask.bits[i] = rng.uniform() < 0.5;

    const auto [out, out_mask] = resample_isotropic(vol, mask, 1.0);
    CHECK(out.dims == vol.dims);
    for (std::size_t i = 0; i < vol.data.size(); ++i) CHECK(out.data[i] == vol.data[i]);
    CHECK(out_mask.bits == mask.bits);
}

TEST_CASE("resample dimension arithmetic: (4,4,4) at 2mm to 1mm gives (8,8,8)") {
    Volume vol({4, 4, 4}, {2.0, 2.0, 2.0}, 1.0f);
    RoiMask mask(vol.dims, 1);
    const auto [out, out_mask] = resample_isotropic(vol, mask, 1.0);
    CHECK(out.dims == Dim3{8, 8, 8});
    CHECK(out.spacing == Spacing3{1.0, 1.0, 1.0});
    CHECK(out_mask.dims == Dim3{8, 8, 8});
}

TEST_CASE("resampling a constant volume preserves the constant exactly") {
    Volume vol({5, 3, 4}, {1.7, 0.9, 2.3}, 6.5f);
    RoiMask mask(vol.dims, 1);
    const auto [out, out_mask] = resample_isotropic(vol, mask, 1.0);
    for (float v : out.data) CHECK(v == 6.5f);
    for (auto b : out_mask.bits) CHECK(b == 1);
}

TEST_CASE("trilinear outputs stay inside the input range") {
    Volume vol({6, 6, 6}, {1.3, 0.8, 1.1});
    Rng rng(99);
    for (auto& v : vol.data) v = static_cast<float>(rng.uniform(-10.0, 10.0));
    RoiMask mask(vol.dims, 1);
    const auto [mn, mx] = std::minmax_element(vol.data.begin(), vol.data.end());

    const auto [out, out_mask] = resample_isotropic(vol, mask, 0.7);
    for (float v : out.data) {
        CHECK(v >= *mn - 1e-6f);
        CHECK(v <= *mx + 1e-6f);
    }
}

TEST_CASE("normalize_gray_levels hand values") {
    SUBCASE("0..255 already spans 256 levels") {
        Volume vol({3, 1, 1}, {1, 1, 1});
        vol.data = {0.0f, 100.0f, 255.0f};
        const Volume out = normalize_gray_levels(vol, 256);
        CHECK(out.data[0] == 0.0f);
        CHECK(out.data[1] == 100.0f);
        CHECK(out.data[2] == 255.0f);
    }
    SUBCASE("constant volume maps to zeros") {
        Volume vol({2, 2, 2}, {1, 1, 1}, 9.0f);
        const Volume out = normalize_gray_levels(vol, 256);
        for (float v : out.data) CHECK(v == 0.0f);
    }
    SUBCASE("floor rule with clamp on {-1, 0, 1} at 4 levels") {
        Volume vol({3, 1, 1}, {1, 1, 1});
        vol.data = {-1.0f, 0.0f, 1.0f};
        const Volume out = normalize_gray_levels(vol, 4);
        CHECK(out.data[0] == 0.0f);
        CHECK(out.data[1] == 2.0f);
        CHECK(out.data[2] == 3.0f);
    }
}

TEST_CASE("normalize_gray_levels is idempotent on a full 0..255 range") {
    Volume vol({16, 4, 4}, {1, 1, 1});
    for (std::size_t i = 0; i < vol.data.size(); ++i)
        vol.data[i] = static_cast<float>(i % 256);
    // force full range
    vol.data[0] = 0.0f;
    vol.data[1] = 255.0f;
    const Volume once = normalize_gray_levels(vol, 256);
    const Volume twice = normalize_gray_levels(once, 256);
    for (std::size_t i = 0; i < vol.data.size(); ++i) CHECK(once.data[i] == twice.data[i]);
}

TEST_CASE("conform identity when dims already match") {
    Volume vol({6, 6, 6}, {1, 1, 1}, 2.0f);
    RoiMask mask(vol.dims, 1);
    const auto [out, out_mask] = conform(vol, mask, {6, 6, 6});
    CHECK(out.dims == vol.dims);
    CHECK(out.data == vol.data);
}

TEST_CASE("conform center-crops: marked voxel tracks the crop") {
    // 300 -> 256 keeps [22, 278); a marker at x=150 moves to x=128.
    Volume vol({300, 4, 4}, {1, 1, 1}, 0.0f);
    RoiMask mask(vol.dims);
    vol.at(150, 2, 2) = 42.0f;
    mask.set(150, 2, 2, true);
    const auto [out, out_mask] = conform(vol, mask, {256, 4, 4});
    CHECK(out.dims == Dim3{256, 4, 4});
    CHECK(out.at(128, 2, 2) == 42.0f);
    CHECK(out_mask.at(128, 2, 2));
    CHECK(out_mask.count() == 1);
}

TEST_CASE("conform zero-pads 28 slices each side going 200 -> 256") {
    Volume vol({200, 4, 4}, {1, 1, 1}, 1.0f);
    RoiMask mask(vol.dims, 1);
    const auto [out, out_mask] = conform(vol, mask, {256, 4, 4});
    CHECK(out.dims == Dim3{256, 4, 4});
    for (int x = 0; x < 28; ++x) CHECK(out.at(x, 0, 0) == 0.0f);
    for (int x = 28; x < 228; ++x) CHECK(out.at(x, 0, 0) == 1.0f);
    for (int x = 228; x < 256; ++x) CHECK(out.at(x, 0, 0) == 0.0f);
    CHECK(out_mask.count() == mask.count());
}

TEST_CASE("conform preserves the masked sum when no mask voxel is cropped") {
    Volume vol({10, 12, 9}, {1, 1, 1});
    Rng rng(5);
    for (auto& v : vol.data) v = static_cast<float>(rng.uniform());
    RoiMask mask(vol.dims);
    // small central blob, far away from any crop boundary
    for (int z = 4; z < 6; ++z)
        for (int y = 5; y < 8; ++y)
            for (int x = 4; x < 7; ++x) mask.set(x, y, z, true);

    double sum_before = 0.0;
    for (std::size_t i = 0; i < vol.data.size(); ++i)
        if (mask.bits[i]) sum_before += vol.data[i];

    const auto [out, out_mask] = conform(vol, mask, {8, 16, 9});
    double sum_after = 0.0;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        if (out_mask.bits[i]) sum_after += out.data[i];
    CHECK(sum_after == doctest::Approx(sum_before).epsilon(1e-12));
    CHECK(out_mask.count() == mask.count());
}

TEST_CASE("apply_mask basics") {
    Volume vol({3, 3, 3}, {1, 1, 1}, 7.0f);

    SUBCASE("all-ones mask is the identity") {
        RoiMask mask(vol.dims, 1);
        const Volume out = apply_mask(vol, mask);
        CHECK(out.data == vol.data);
    }
    SUBCASE("single-voxel mask keeps exactly one voxel") {
        RoiMask mask(vol.dims);
        mask.set(1, 1, 1, true);
        const Volume out = apply_mask(vol, mask);
        double sum = 0.0;
        for (float v : out.data) sum += v;
        CHECK(sum == 7.0);
        CHECK(out.at(1, 1, 1) == 7.0f);
    }
    SUBCASE("all-zero mask zeroes the volume without raising") {
        RoiMask mask(vol.dims);
        const Volume out = apply_mask(vol, mask);
        for (float v : out.data) CHECK(v == 0.0f);
    }
    SUBCASE("dims mismatch raises ShapeError") {
        RoiMask mask({2, 2, 2});
        CHECK_THROWS_AS((void)apply_mask(vol, mask), ShapeError);
    }
}

} // TEST_SUITE
