#include <gtest/gtest.h>

#include "ulmsens/commands.hpp"

using namespace ulmsens;

// One full default sweep; the dense-vs-sparse ordering on this fixture is
// reported by the acceptance run instead.
TEST(DefaultSweep, TrendsOnTheSyntheticFixture) {
    const RunConfig cfg{};
    const Dataset data = commands::generate_dataset(cfg, default_thread_count());
    const SRMap reference = rasterize(data, default_thread_count());
    const auto regions = commands::compute_regions(cfg, data, default_thread_count());
    SweepOptions options;
    options.threads = default_thread_count();
    const auto table = aggregate(run_sweep(data, cfg.sweep, regions.mask, reference, options));

    // Non-increasing along the FN axis at fp = 0.
    const auto* previous = find_cell(table, 0.0, 0.0, Region::all);
    ASSERT_NE(previous, nullptr);
    for (std::size_t j = 1; j < cfg.sweep.fn_rates.size(); ++j) {
        const auto* next = find_cell(table, 0.0, cfg.sweep.fn_rates[j], Region::all);
        ASSERT_NE(next, nullptr);
        EXPECT_GE(previous->ssim_mean - next->ssim_mean, -1e-9) << "fn=" << cfg.sweep.fn_rates[j];
        previous = next;
    }

    // The FP drop at 20% is at least three times smaller than the FN drop.
    const auto ratio = fn_fp_ssim_drop_ratio(table, 0.2, Region::all);
    ASSERT_TRUE(ratio.has_value());
    EXPECT_GE(*ratio, 3.0);
}
