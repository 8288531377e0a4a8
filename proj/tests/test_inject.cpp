#include <gtest/gtest.h>

#include <algorithm>

#include "ulmsens/inject.hpp"

using namespace ulmsens;

namespace {

const FieldOfView kFov{-0.01, 0.01, 0.0, 0.02};
const ImagingConfig kConfig(5e6, kFov);

LocalizationFrame random_frame(std::uint64_t index, std::size_t n, Xoshiro256& rng) {
    LocalizationFrame f{index, {}};
    for (std::size_t i = 0; i < n; ++i) {
        f.points.push_back({rng.uniform(kFov.x_min, kFov.x_max), rng.uniform(kFov.z_min, kFov.z_max)});
    }
    return f;
}

// True when `sub` is an order-preserving subsequence of `full`.
bool is_subsequence(const std::vector<Point>& sub, const std::vector<Point>& full) {
    std::size_t j = 0;
    for (const auto& p : full) {
        if (j < sub.size() && sub[j] == p) ++j;
    }
    return j == sub.size();
}

}  // namespace

TEST(ErrorCount, RoundsHalfAwayFromZero) {
    EXPECT_EQ(error_count(0.1, 5), 1u);   // 0.5 -> 1
    EXPECT_EQ(error_count(0.5, 3), 2u);   // 1.5 -> 2
    EXPECT_EQ(error_count(0.25, 10), 3u); // 2.5 -> 3
    EXPECT_EQ(error_count(0.2, 50), 10u);
    EXPECT_EQ(error_count(0.0, 1000), 0u);
    EXPECT_EQ(error_count(1.0, 7), 7u);
}

TEST(InjectFalseNegatives, ZeroRateIsIdentity) {
    Xoshiro256 rng(1), data(2);
    const auto f = random_frame(3, 20, data);
    EXPECT_EQ(inject_false_negatives(f, 0.0, rng), f);
}

TEST(InjectFalseNegatives, FullRateEmptiesFrame) {
    Xoshiro256 rng(1), data(2);
    const auto out = inject_false_negatives(random_frame(3, 20, data), 1.0, rng);
    EXPECT_TRUE(out.points.empty());
    EXPECT_EQ(out.frame_index, 3u);
}

TEST(InjectFalseNegatives, KeepsSevenOfTenInOrder) {
    Xoshiro256 data(5);
    const auto f = random_frame(0, 10, data);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Xoshiro256 rng(seed);
        const auto out = inject_false_negatives(f, 0.3, rng);
        ASSERT_EQ(out.points.size(), 7u);
        for (const auto& p : out.points) {
            EXPECT_NE(std::find(f.points.begin(), f.points.end(), p), f.points.end());
        }
        EXPECT_TRUE(is_subsequence(out.points, f.points));
    }
}

TEST(InjectFalseNegatives, RemovalIsRoughlyUniform) {
    Xoshiro256 data(5);
    const auto f = random_frame(0, 10, data);
    std::vector<int> removed(10, 0);
    for (std::uint64_t seed = 0; seed < 5000; ++seed) {
        Xoshiro256 rng(seed);
        const auto out = inject_false_negatives(f, 0.3, rng);
        for (std::size_t i = 0; i < 10; ++i) {
            if (std::find(out.points.begin(), out.points.end(), f.points[i]) == out.points.end()) ++removed[i];
        }
    }
    // Each index removed with probability 0.3: 1500 expected, sd ~32.
    for (int r : removed) EXPECT_NEAR(r, 1500, 160);
}

TEST(InjectFalsePositives, ZeroRateIsIdentity) {
    Xoshiro256 rng(1), data(2);
    const auto f = random_frame(3, 20, data);
    EXPECT_EQ(inject_false_positives(f, 0.0, kFov, rng), f);
}

TEST(InjectFalsePositives, TwentyPercentOfFiftyAppendsTen) {
    Xoshiro256 rng(1), data(2);
    const auto f = random_frame(3, 50, data);
    const auto out = inject_false_positives(f, 0.2, kFov, rng);
    ASSERT_EQ(out.points.size(), 60u);
    EXPECT_TRUE(std::equal(f.points.begin(), f.points.end(), out.points.begin()));
    for (std::size_t i = 50; i < 60; ++i) EXPECT_TRUE(kFov.contains(out.points[i].x, out.points[i].z));
}

TEST(InjectFalsePositives, HalfOfThreeRoundsUpToTwo) {
    Xoshiro256 rng(1), data(2);
    EXPECT_EQ(inject_false_positives(random_frame(0, 3, data), 0.5, kFov, rng).points.size(), 5u);
}

TEST(InjectFalsePositives, CountAnchoredToSuppliedGroundTruth) {
    Xoshiro256 rng(1), data(2);
    const auto out = inject_false_positives(random_frame(0, 4, data), 0.5, kFov, rng, 10);
    EXPECT_EQ(out.points.size(), 9u);
}

TEST(InjectFalsePositives, RejectsRateOutsideUnitInterval) {
    Xoshiro256 rng(1);
    EXPECT_THROW(inject_false_positives({}, 1.5, kFov, rng), ValidationError);
    EXPECT_THROW(inject_false_negatives({}, -0.1, rng), ValidationError);
    EXPECT_THROW(ErrorProfile(0.1, 2.0, 0), ValidationError);
}

TEST(ApplyErrorProfile, ZeroProfileIsIdentity) {
    Xoshiro256 data(3);
    std::vector<LocalizationFrame> frames;
    for (std::uint64_t i = 0; i < 10; ++i) frames.push_back(random_frame(i, 1 + i, data));
    const Dataset ds(kConfig, frames);
    EXPECT_EQ(apply_error_profile(ds, ErrorProfile(0.0, 0.0, 1234)), ds);
}

TEST(ApplyErrorProfile, CountsAnchoredToOriginalGroundTruth) {
    Xoshiro256 data(3);
    std::vector<LocalizationFrame> frames;
    for (std::uint64_t i = 0; i < 100; ++i) frames.push_back(random_frame(i, 50, data));
    const Dataset ds(kConfig, frames);
    const auto out = apply_error_profile(ds, ErrorProfile(0.2, 0.2, 9));
    ASSERT_EQ(out.frames().size(), 100u);
    for (std::size_t i = 0; i < 100; ++i) {
        const auto& pts = out.frames()[i].points;
        ASSERT_EQ(pts.size(), 50u);  // 40 survivors + 10 false positives
        const std::vector<Point> survivors(pts.begin(), pts.begin() + 40);
        EXPECT_TRUE(is_subsequence(survivors, ds.frames()[i].points));
    }
}

TEST(ApplyErrorProfile, DeterministicAcrossRunsAndThreads) {
    Xoshiro256 data(3);
    std::vector<LocalizationFrame> frames;
    for (std::uint64_t i = 0; i < 64; ++i) frames.push_back(random_frame(2 * i, 30, data));
    const Dataset ds(kConfig, frames);
    const ErrorProfile profile(0.1, 0.1, 7);
    const auto a = apply_error_profile(ds, profile, 1);
    EXPECT_EQ(a, apply_error_profile(ds, profile, 1));
    EXPECT_EQ(a, apply_error_profile(ds, profile, 6));
}

TEST(ApplyErrorProfile, FrameResultIgnoresOtherFrames) {
    Xoshiro256 data(3);
    const auto f5 = random_frame(5, 30, data);
    const auto f9 = random_frame(9, 30, data);
    const ErrorProfile profile(0.15, 0.25, 77);
    const auto alone = apply_error_profile(Dataset(kConfig, {f9}), profile);
    const auto both = apply_error_profile(Dataset(kConfig, {f5, f9}), profile);
    EXPECT_EQ(alone.frames()[0], both.frames()[1]);
}

TEST(ApplyErrorProfile, StreamSeedFollowsFrameIndexMixing) {
    const LocalizationFrame frame{12, {{0.0, 0.01}, {0.001, 0.011}, {0.002, 0.012}, {0.003, 0.013}}};
    const ErrorProfile profile(0.5, 0.5, 31);
    Xoshiro256 rng(splitmix64(31 ^ (0xD1B54A32D192ED03ULL * 13)));
    const auto kept = inject_false_negatives(frame, 0.5, rng);
    const auto expected = inject_false_positives(kept, 0.5, kFov, rng, 4);
    EXPECT_EQ(apply_error_profile(frame, profile, kFov), expected);
}
