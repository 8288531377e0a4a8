#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string_view>
#include <vector>

#include "ulmsens/density.hpp"
#include "ulmsens/error.hpp"
#include "ulmsens/grid.hpp"
#include "ulmsens/parallel.hpp"

namespace ulmsens {

struct SsimParams {
    int window_radius = 5;  // 11x11 window
    double gaussian_sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;

    void validate() const {
        if (window_radius < 1) throw ValidationError("SSIM window_radius must be >= 1");
        if (!(gaussian_sigma > 0.0)) throw ValidationError("SSIM gaussian_sigma must be positive");
        if (!(k1 > 0.0) || !(k2 > 0.0)) throw ValidationError("SSIM k1 and k2 must be positive");
        if (!(dynamic_range > 0.0)) throw ValidationError("SSIM dynamic range must be positive");
    }
    double c1() const noexcept { return (k1 * dynamic_range) * (k1 * dynamic_range); }
    double c2() const noexcept { return (k2 * dynamic_range) * (k2 * dynamic_range); }
};

inline constexpr double kDefaultPsnrCapDb = 100.0;

enum class Region { all, dense, sparse };

inline constexpr Region kRegions[] = {Region::all, Region::dense, Region::sparse};

inline std::string_view region_name(Region r) noexcept {
    switch (r) {
        case Region::all: return "all";
        case Region::dense: return "dense";
        case Region::sparse: return "sparse";
    }
    return "?";
}

struct MetricRecord {
    double ssim = 0.0;
    double psnr = 0.0;
    Region region = Region::all;
};

// Normalized 1-D Gaussian taps for offsets -radius..radius.
inline std::vector<double> gaussian_taps(int radius, double sigma) {
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double w = std::exp(-(k * k) / (2.0 * sigma * sigma));
        taps[static_cast<std::size_t>(k + radius)] = w;
        sum += w;
    }
    for (double& w : taps) w /= sum;
    return taps;
}

// Half-sample symmetric reflection: ... 1 0 | 0 1 ... n-1 | n-1 n-2 ...
inline std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) noexcept {
    const auto period = static_cast<std::ptrdiff_t>(2 * n);
    std::ptrdiff_t m = i % period;
    if (m < 0) m += period;
    if (m >= static_cast<std::ptrdiff_t>(n)) m = period - 1 - m;
    return static_cast<std::size_t>(m);
}

namespace detail {

// Separable Gaussian filter with reflected borders; horizontal pass first.
inline std::vector<double> gaussian_filter(std::span<const double> image, std::size_t width,
                                           std::size_t height, const std::vector<double>& taps,
                                           unsigned threads) {
    const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
    std::vector<double> horizontal(image.size()), out(image.size());
    parallel_for_chunks(height, threads, [&](std::size_t rb, std::size_t re) {
        for (std::size_t r = rb; r < re; ++r) {
            const double* src = image.data() + r * width;
            for (std::size_t c = 0; c < width; ++c) {
                double acc = 0.0;
                for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                    acc += taps[static_cast<std::size_t>(k + radius)] *
                           src[reflect_index(static_cast<std::ptrdiff_t>(c) + k, width)];
                }
                horizontal[r * width + c] = acc;
            }
        }
    });
    parallel_for_chunks(height, threads, [&](std::size_t rb, std::size_t re) {
        for (std::size_t r = rb; r < re; ++r) {
            for (std::size_t c = 0; c < width; ++c) {
                double acc = 0.0;
                for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                    acc += taps[static_cast<std::size_t>(k + radius)] *
                           horizontal[reflect_index(static_cast<std::ptrdiff_t>(r) + k, height) * width + c];
                }
                out[r * width + c] = acc;
            }
        }
    });
    return out;
}

}  // namespace detail

/// Per-pixel SSIM with Gaussian-weighted local statistics:
///
///   SSIM = (2 mu_x mu_y + C1)(2 s_xy + C2) / ((mu_x^2 + mu_y^2 + C1)(s_x^2 + s_y^2 + C2))
///
/// Moments use weights summing to one (population convention); borders
/// are reflected so the output has the input geometry.
inline Grid<double> ssim_map(const Grid<double>& reference, const Grid<double>& test,
                             const SsimParams& params = {}, unsigned threads = 1) {
    params.validate();
    require_same_geometry(reference.geometry(), test.geometry(), "ssim_map");
    const std::size_t w = reference.width(), h = reference.height(), n = reference.size();
    const auto taps = gaussian_taps(params.window_radius, params.gaussian_sigma);

    std::vector<double> xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        xx[i] = reference[i] * reference[i];
        yy[i] = test[i] * test[i];
        xy[i] = reference[i] * test[i];
    }
    const auto mu_x = detail::gaussian_filter(reference.values(), w, h, taps, threads);
    const auto mu_y = detail::gaussian_filter(test.values(), w, h, taps, threads);
    const auto e_xx = detail::gaussian_filter(xx, w, h, taps, threads);
    const auto e_yy = detail::gaussian_filter(yy, w, h, taps, threads);
    const auto e_xy = detail::gaussian_filter(xy, w, h, taps, threads);

    const double c1 = params.c1(), c2 = params.c2();
    Grid<double> out(reference.geometry(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double mx = mu_x[i], my = mu_y[i];
        const double sxx = e_xx[i] - mx * mx;
        const double syy = e_yy[i] - my * my;
        const double sxy = e_xy[i] - mx * my;
        const double num = (2.0 * mx * my + c1) * (2.0 * sxy + c2);
        const double den = (mx * mx + my * my + c1) * (sxx + syy + c2);
        out[i] = std::clamp(num / den, -1.0, 1.0);
    }
    return out;
}

/// Mean of a per-pixel SSIM map over the pixels a mask selects.
inline double masked_mean(const Grid<double>& values, const RegionMask& mask) {
    require_same_geometry(values.geometry(), mask.geometry(), "masked_mean");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (mask.dense(i)) {
            sum += values[i];
            ++count;
        }
    }
    if (count == 0) throw ValidationError("mask selects zero pixels");
    return sum / static_cast<double>(count);
}

inline double ssim_masked(const Grid<double>& reference, const Grid<double>& test,
                          const SsimParams& params, const RegionMask& mask, unsigned threads = 1) {
    return masked_mean(ssim_map(reference, test, params, threads), mask);
}

inline double ssim_global(const Grid<double>& reference, const Grid<double>& test,
                          const SsimParams& params = {}, unsigned threads = 1) {
    return ssim_masked(reference, test, params, RegionMask::all(reference.geometry()), threads);
}

inline double mse_masked(const Grid<double>& reference, const Grid<double>& test,
                         const RegionMask& mask) {
    require_same_geometry(reference.geometry(), test.geometry(), "mse");
    require_same_geometry(reference.geometry(), mask.geometry(), "mse");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        if (mask.dense(i)) {
            const double d = test[i] - reference[i];
            sum += d * d;
            ++count;
        }
    }
    if (count == 0) throw ValidationError("mask selects zero pixels");
    return sum / static_cast<double>(count);
}

// 10*log10(peak^2) - 10*log10(MSE); MSE == 0 or a value above the cap gives cap_db.
inline double psnr_from_mse(double mse, double peak, double cap_db = kDefaultPsnrCapDb) {
    if (!(peak > 0.0)) throw ValidationError("PSNR peak must be positive");
    if (mse <= 0.0) return cap_db;
    return std::min(10.0 * std::log10(peak * peak) - 10.0 * std::log10(mse), cap_db);
}

inline double psnr_masked(const Grid<double>& reference, const Grid<double>& test,
                          const RegionMask& mask, double peak = 1.0,
                          double cap_db = kDefaultPsnrCapDb) {
    if (!(peak > 0.0)) throw ValidationError("PSNR peak must be positive");
    return psnr_from_mse(mse_masked(reference, test, mask), peak, cap_db);
}

}  // namespace ulmsens
