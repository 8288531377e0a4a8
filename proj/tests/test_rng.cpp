#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ulmsens/rng.hpp"

using namespace ulmsens;

TEST(Splitmix64, ReferenceOutputs) {
    EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFULL);
    EXPECT_EQ(splitmix64(42), 0xBDD732262FEB6E95ULL);
}

TEST(Xoshiro256, ReferenceSequenceFromState) {
    auto g = Xoshiro256::from_state({1, 2, 3, 4});
    EXPECT_EQ(g(), 11520ULL);
    EXPECT_EQ(g(), 0ULL);
    EXPECT_EQ(g(), 1509978240ULL);
    EXPECT_EQ(g(), 1215971899390074240ULL);
}

TEST(Xoshiro256, SameSeedSameStream) {
    Xoshiro256 a(99), b(99), c(100);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        EXPECT_EQ(x, b());
        differs |= x != c();
    }
    EXPECT_TRUE(differs);
}

TEST(Xoshiro256, UniformAndBelowStayInRange) {
    Xoshiro256 g(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = g.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        ASSERT_LT(g.below(13), 13u);
    }
}

TEST(Xoshiro256, NormalMoments) {
    Xoshiro256 g(11);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = g.normal();
        s += x;
        s2 += x * x;
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    EXPECT_NEAR(mean, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(Xoshiro256, PoissonMeanAndVarianceAcrossSplitThreshold) {
    for (const double mean : {0.3, 4.0, 40.0}) {
        Xoshiro256 g(static_cast<std::uint64_t>(mean * 1000));
        const int n = 100000;
        double s = 0, s2 = 0;
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<double>(g.poisson(mean));
            s += k;
            s2 += k * k;
        }
        const double m = s / n, v = s2 / n - m * m;
        // 5 sigma on the sample mean; loose bound on the variance.
        EXPECT_NEAR(m, mean, 5.0 * std::sqrt(mean / n)) << mean;
        EXPECT_NEAR(v / mean, 1.0, 0.05) << mean;
    }
    Xoshiro256 g(1);
    EXPECT_EQ(g.poisson(0.0), 0u);
}
