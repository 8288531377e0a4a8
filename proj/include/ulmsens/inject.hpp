#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "ulmsens/dataset.hpp"
#include "ulmsens/error.hpp"
#include "ulmsens/parallel.hpp"
#include "ulmsens/rng.hpp"

namespace ulmsens {

/// Detection-error rates, each a fraction of the frame's original
/// ground-truth count.
struct ErrorProfile {
    double fp_rate = 0.0;
    double fn_rate = 0.0;
    std::uint64_t seed = 0;

    ErrorProfile() = default;
    ErrorProfile(double fp, double fn, std::uint64_t s) : fp_rate(fp), fn_rate(fn), seed(s) {
        validate();
    }

    void validate() const {
        if (!(fp_rate >= 0.0 && fp_rate <= 1.0)) throw ValidationError("fp_rate must lie in [0, 1]");
        if (!(fn_rate >= 0.0 && fn_rate <= 1.0)) throw ValidationError("fn_rate must lie in [0, 1]");
    }
};

// Error count for a rate applied to n points, rounded half away from zero.
inline std::size_t error_count(double rate, std::size_t n) noexcept {
    return static_cast<std::size_t>(std::round(rate * static_cast<double>(n)));
}

/// Drops error_count(fn_rate, n) points chosen uniformly without
/// replacement; survivors keep their input order.
inline LocalizationFrame inject_false_negatives(const LocalizationFrame& frame, double fn_rate,
                                                Xoshiro256& rng) {
    if (!(fn_rate >= 0.0 && fn_rate <= 1.0)) throw ValidationError("fn_rate must lie in [0, 1]");
    const std::size_t n = frame.points.size();
    const std::size_t k = error_count(fn_rate, n);
    LocalizationFrame out{frame.frame_index, {}};
    if (k == 0) {
        out.points = frame.points;
        return out;
    }
    // Partial Fisher-Yates: the first k slots become the removed set.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(order[i], order[j]);
    }
    std::vector<char> removed(n, 0);
    for (std::size_t i = 0; i < k; ++i) removed[order[i]] = 1;
    out.points.reserve(n - k);
    for (std::size_t i = 0; i < n; ++i) {
        if (!removed[i]) out.points.push_back(frame.points[i]);
    }
    return out;
}

/// Appends error_count(fp_rate, gt_count) points uniform over the field of
/// view. gt_count defaults to the frame's own size.
inline LocalizationFrame inject_false_positives(const LocalizationFrame& frame, double fp_rate,
                                                const FieldOfView& fov, Xoshiro256& rng,
                                                std::optional<std::size_t> gt_count = {}) {
    if (!(fp_rate >= 0.0 && fp_rate <= 1.0)) throw ValidationError("fp_rate must lie in [0, 1]");
    const std::size_t k = error_count(fp_rate, gt_count.value_or(frame.points.size()));
    LocalizationFrame out = frame;
    out.points.reserve(frame.points.size() + k);
    for (std::size_t i = 0; i < k; ++i) {
        const double x = rng.uniform(fov.x_min, fov.x_max);
        const double z = rng.uniform(fov.z_min, fov.z_max);
        out.points.push_back({x, z});
    }
    return out;
}

inline constexpr std::uint64_t kInjectStreamMultiplier = 0xD1B54A32D192ED03ULL;

inline std::uint64_t inject_stream_seed(std::uint64_t seed, std::uint64_t frame_index) noexcept {
    return splitmix64(seed ^ (kInjectStreamMultiplier * (frame_index + 1)));
}

inline LocalizationFrame apply_error_profile(const LocalizationFrame& frame,
                                             const ErrorProfile& profile, const FieldOfView& fov) {
    Xoshiro256 rng(inject_stream_seed(profile.seed, frame.frame_index));
    const std::size_t gt = frame.points.size();
    const auto kept = inject_false_negatives(frame, profile.fn_rate, rng);
    return inject_false_positives(kept, profile.fp_rate, fov, rng, gt);
}

/// FN removal then FP insertion on every frame, each frame with its own
/// stream so results are independent of frame order and thread count.
inline Dataset apply_error_profile(const Dataset& dataset, const ErrorProfile& profile,
                                   unsigned threads = 1) {
    profile.validate();
    const auto& src = dataset.frames();
    std::vector<LocalizationFrame> frames(src.size());
    const FieldOfView& fov = dataset.config().fov();
    parallel_for(src.size(), threads,
                 [&](std::size_t i) { frames[i] = apply_error_profile(src[i], profile, fov); });
    return Dataset(dataset.config(), std::move(frames));
}

}  // namespace ulmsens
