#include <gtest/gtest.h>

#include "ssim_oracle.hpp"
#include "ulmsens/metrics.hpp"
#include "ulmsens/rng.hpp"

using namespace ulmsens;
using ulmsens::testing::brute_force_ssim;

namespace {

Grid<double> constant(std::size_t w, std::size_t h, double v) {
    return Grid<double>({w, h, 1.0, 0.0, 0.0}, v);
}

Grid<double> random_image(std::size_t w, std::size_t h, std::uint64_t seed) {
    Xoshiro256 rng(seed);
    Grid<double> g({w, h, 1.0, 0.0, 0.0}, 0.0);
    for (auto& v : g.values()) v = rng.uniform();
    return g;
}

// A test image correlated with the reference, clipped to [0, 1].
Grid<double> perturbed(const Grid<double>& ref, double noise, std::uint64_t seed) {
    Xoshiro256 rng(seed);
    Grid<double> g = ref;
    for (auto& v : g.values()) v = std::clamp(v + noise * rng.normal(), 0.0, 1.0);
    return g;
}

std::vector<double> as_vector(const Grid<double>& g) {
    return {g.values().begin(), g.values().end()};
}

}  // namespace

TEST(SsimMap, IdenticalImagesGiveOne) {
    const auto a = random_image(20, 13, 1);
    const auto map = ssim_map(a, a);
    for (double v : map.values()) EXPECT_NEAR(v, 1.0, 1e-12);
    EXPECT_NEAR(ssim_global(a, a), 1.0, 1e-12);
}

TEST(SsimMap, ConstantImagesClosedForm) {
    const double expected = (2 * 0.5 * 0.25 + 1e-4) / (0.25 + 0.0625 + 1e-4);
    EXPECT_NEAR(expected, 0.800064, 1e-6);
    const auto map = ssim_map(constant(9, 7, 0.5), constant(9, 7, 0.25));
    for (double v : map.values()) {
        EXPECT_NEAR(v, expected, 1e-12);
    }
}

TEST(SsimMap, MatchesPerWindowOracle) {
    for (const std::size_t n : {16u, 32u}) {
        const auto a = random_image(n, n, 100 + n);
        const auto b = perturbed(a, 0.2, 200 + n);
        const auto fast = ssim_map(a, b);
        const auto oracle = brute_force_ssim(as_vector(a), as_vector(b), n, n);
        for (std::size_t i = 0; i < fast.size(); ++i) {
            EXPECT_NEAR(fast[i], oracle[i], 1e-9) << "n=" << n << " i=" << i;
        }
    }
}

TEST(SsimMap, MatchesOracleOnNonSquareImageWithCustomParams) {
    const auto a = random_image(23, 17, 7);
    const auto b = random_image(23, 17, 8);
    SsimParams p;
    p.window_radius = 3;
    p.gaussian_sigma = 1.0;
    p.k1 = 0.02;
    p.k2 = 0.05;
    p.dynamic_range = 2.0;
    const auto fast = ssim_map(a, b, p);
    const auto oracle = brute_force_ssim(as_vector(a), as_vector(b), 23, 17, 3, 1.0, 0.02, 0.05, 2.0);
    for (std::size_t i = 0; i < fast.size(); ++i) EXPECT_NEAR(fast[i], oracle[i], 1e-9);
}

TEST(SsimMap, BoundedAndSymmetric) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto a = random_image(24, 24, seed);
        const auto b = random_image(24, 24, seed + 1000);
        const auto map = ssim_map(a, b);
        for (double v : map.values()) {
            EXPECT_GE(v, -1.0);
            EXPECT_LE(v, 1.0);
        }
        EXPECT_NEAR(ssim_global(a, b), ssim_global(b, a), 1e-12);
    }
}

TEST(SsimMap, RowParallelIsBitIdentical) {
    const auto a = random_image(64, 48, 3);
    const auto b = perturbed(a, 0.1, 4);
    const auto serial = ssim_map(a, b, {}, 1);
    const auto parallel = ssim_map(a, b, {}, 6);
    for (std::size_t i = 0; i < serial.size(); ++i) EXPECT_EQ(serial[i], parallel[i]);
}

TEST(SsimMap, RejectsMismatchAndBadParams) {
    EXPECT_THROW(ssim_map(constant(4, 4, 0), constant(4, 5, 0)), ValidationError);
    SsimParams p;
    p.window_radius = 0;
    EXPECT_THROW(ssim_map(constant(4, 4, 0), constant(4, 4, 0), p), ValidationError);
}

TEST(SsimMasked, OnePixelMaskGivesThatPixel) {
    const auto a = random_image(16, 16, 11);
    const auto b = perturbed(a, 0.3, 12);
    const auto map = ssim_map(a, b);
    RegionMask m{Grid<std::uint8_t>(a.geometry(), 0)};
    m.labels(5, 9) = 1;
    EXPECT_EQ(ssim_masked(a, b, {}, m), map(5, 9));
}

TEST(SsimMasked, ComplementWeightedAverageIsGlobalMean) {
    const auto a = random_image(30, 20, 21);
    const auto b = perturbed(a, 0.25, 22);
    Xoshiro256 rng(23);
    RegionMask dense{Grid<std::uint8_t>(a.geometry(), 0)};
    for (auto& l : dense.labels.values()) l = rng.below(3) == 0 ? 1 : 0;
    const auto sparse = dense.complement();
    const double cov = mask_coverage(dense);
    const double combined =
        cov * ssim_masked(a, b, {}, dense) + (1 - cov) * ssim_masked(a, b, {}, sparse);
    EXPECT_NEAR(combined, ssim_global(a, b), 1e-12);
}

TEST(SsimMasked, EmptyMaskIsAnError) {
    const auto a = constant(4, 4, 0.1);
    const auto empty = RegionMask::all(a.geometry()).complement();
    try {
        ssim_masked(a, a, {}, empty);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_STREQ(e.what(), "mask selects zero pixels");
    }
    EXPECT_THROW(psnr_masked(a, a, empty), ValidationError);
}

TEST(Psnr, ClosedFormCases) {
    const auto all = RegionMask::all(constant(8, 8, 0).geometry());
    EXPECT_EQ(psnr_masked(constant(8, 8, 0.3), constant(8, 8, 0.3), all), 100.0);
    EXPECT_NEAR(psnr_masked(constant(8, 8, 0.0), constant(8, 8, 0.1), all), 20.0, 1e-9);
    EXPECT_NEAR(psnr_masked(constant(8, 8, 0.0), constant(8, 8, 1.0), all), 0.0, 1e-12);
    EXPECT_EQ(psnr_masked(constant(8, 8, 0.3), constant(8, 8, 0.3), all, 1.0, 60.0), 60.0);
}

TEST(Psnr, MseIdentityIsExact) {
    const auto a = random_image(16, 16, 31);
    const auto b = random_image(16, 16, 32);
    const auto all = RegionMask::all(a.geometry());
    const double mse = mse_masked(a, b, all);
    EXPECT_EQ(psnr_masked(a, b, all, 2.0), 10.0 * std::log10(4.0) - 10.0 * std::log10(mse));
}

TEST(Psnr, StrictlyDecreasesWithErrorScale) {
    const auto a = constant(12, 12, 0.0);
    auto err = random_image(12, 12, 41);
    const auto all = RegionMask::all(a.geometry());
    double previous = psnr_masked(a, err, all);
    for (double s : {1.5, 2.0, 3.0, 10.0}) {
        Grid<double> scaled = err;
        for (auto& v : scaled.values()) v *= s;
        const double p = psnr_masked(a, scaled, all);
        EXPECT_LT(p, previous);
        previous = p;
    }
}

TEST(Psnr, RejectsNonPositivePeak) {
    const auto a = constant(2, 2, 0.0);
    EXPECT_THROW(psnr_masked(a, a, RegionMask::all(a.geometry()), 0.0), ValidationError);
}
