#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "ulmsens/density.hpp"
#include "ulmsens/error.hpp"
#include "ulmsens/metrics.hpp"
#include "ulmsens/pgm.hpp"
#include "ulmsens/render.hpp"
#include "ulmsens/sweep.hpp"

namespace ulmsens {

enum class Metric { ssim, psnr };

inline std::string_view metric_name(Metric m) noexcept { return m == Metric::ssim ? "ssim" : "psnr"; }

inline constexpr std::size_t kHeatmapBlock = 32;

struct HeatmapScale {
    bool fixed = true;  // fixed per-metric range, else data range
    double psnr_cap_db = kDefaultPsnrCapDb;
};

/// Metric means laid out with fn rows (ascending downward) and fp columns
/// (ascending rightward).
struct Heatmap {
    std::vector<double> fp_rates;
    std::vector<double> fn_rates;
    std::vector<double> cells;  // row-major, fn-major
    double vmin = 0.0;
    double vmax = 1.0;

    double at(std::size_t fn_index, std::size_t fp_index) const {
        return cells[fn_index * fp_rates.size() + fp_index];
    }
};

inline Heatmap build_heatmap(const std::vector<AggregateRow>& table, Metric metric, Region region,
                             HeatmapScale scale = {}) {
    std::vector<double> fp_rates, fn_rates;
    for (const auto& row : table) {
        if (row.region != region) continue;
        if (std::find(fp_rates.begin(), fp_rates.end(), row.fp_rate) == fp_rates.end()) fp_rates.push_back(row.fp_rate);
        if (std::find(fn_rates.begin(), fn_rates.end(), row.fn_rate) == fn_rates.end()) fn_rates.push_back(row.fn_rate);
    }
    if (fp_rates.empty()) {
        throw ValidationError("aggregate has no rows for region " + std::string(region_name(region)));
    }
    std::sort(fp_rates.begin(), fp_rates.end());
    std::sort(fn_rates.begin(), fn_rates.end());

    Heatmap map{fp_rates, fn_rates, std::vector<double>(fp_rates.size() * fn_rates.size()), 0.0, 1.0};
    for (std::size_t r = 0; r < fn_rates.size(); ++r) {
        for (std::size_t c = 0; c < fp_rates.size(); ++c) {
            const auto* row = find_cell(table, fp_rates[c], fn_rates[r], region);
            if (!row) {
                throw ValidationError("aggregate is missing cell (fp=" + detail::format_rate(fp_rates[c]) +
                                      ", fn=" + detail::format_rate(fn_rates[r]) + ")");
            }
            const double v = metric == Metric::ssim ? row->ssim_mean : row->psnr_mean;
            if (!std::isfinite(v)) throw ValidationError("heatmap values must be finite");
            map.cells[r * fp_rates.size() + c] = v;
        }
    }
    if (scale.fixed) {
        map.vmin = 0.0;
        map.vmax = metric == Metric::ssim ? 1.0 : scale.psnr_cap_db;
    } else {
        const auto [lo, hi] = std::minmax_element(map.cells.begin(), map.cells.end());
        map.vmin = *lo;
        map.vmax = *hi;
    }
    return map;
}

// round(255 * (v - vmin) / (vmax - vmin)) clipped to [0, 255]; 128 when the range is empty.
inline std::uint8_t gray_level(double v, double vmin, double vmax) noexcept {
    if (!(vmax > vmin)) return 128;
    const double g = std::round(255.0 * (v - vmin) / (vmax - vmin));
    return static_cast<std::uint8_t>(std::clamp(g, 0.0, 255.0));
}

inline GrayImage render_heatmap(const Heatmap& map) {
    const std::size_t cols = map.fp_rates.size(), rows = map.fn_rates.size();
    GrayImage image{cols * kHeatmapBlock, rows * kHeatmapBlock,
                    std::vector<std::uint8_t>(cols * rows * kHeatmapBlock * kHeatmapBlock)};
    for (std::size_t y = 0; y < image.height; ++y) {
        for (std::size_t x = 0; x < image.width; ++x) {
            image.pixels[y * image.width + x] =
                gray_level(map.at(y / kHeatmapBlock, x / kHeatmapBlock), map.vmin, map.vmax);
        }
    }
    return image;
}

inline GrayImage render_heatmap(const std::vector<AggregateRow>& table, Metric metric, Region region,
                                HeatmapScale scale = {}) {
    return render_heatmap(build_heatmap(table, metric, region, scale));
}

// Linear [0, own max] -> [0, 255]; an all-zero grid stays black.
inline GrayImage snapshot(const Grid<double>& values) {
    double peak = 0.0;
    for (double v : values.values()) peak = std::max(peak, v);
    GrayImage image{values.width(), values.height(), std::vector<std::uint8_t>(values.size(), 0)};
    if (peak <= 0.0) return image;
    for (std::size_t i = 0; i < values.size(); ++i) {
        image.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * std::max(values[i], 0.0) / peak));
    }
    return image;
}

inline GrayImage snapshot(const DensityMap& density) { return snapshot(density.values); }

// Dense = 255 (white), sparse = 0 (black).
inline GrayImage snapshot(const RegionMask& mask) {
    GrayImage image{mask.labels.width(), mask.labels.height(), std::vector<std::uint8_t>(mask.size())};
    for (std::size_t i = 0; i < mask.size(); ++i) image.pixels[i] = mask.dense(i) ? 255 : 0;
    return image;
}

}  // namespace ulmsens
