#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "ulmsens/dataset.hpp"
#include "ulmsens/error.hpp"
#include "ulmsens/grid.hpp"
#include "ulmsens/parallel.hpp"

namespace ulmsens {

struct DensityMap {
    Grid<double> values;  // probability density per m^2 at pixel centers
    double bandwidth = 0.0;

    const GridGeometry& geometry() const noexcept { return values.geometry(); }
};

inline constexpr double kDefaultTruncationSigmas = 6.0;

/// Isotropic Gaussian KDE over all points of all frames, evaluated at pixel
/// centers:
///
///   density(g) = 1/N * sum_i 1/(2 pi h^2) * exp(-|g - x_i|^2 / (2 h^2))
///
/// Contributions from points farther than truncation_sigmas * h are
/// dropped. Rows are split across workers; every pixel accumulates its
/// contributions in point-index order, so the result does not depend on
/// the thread count.
inline DensityMap kde_density(const Dataset& dataset, double bandwidth, unsigned threads = 1,
                              double truncation_sigmas = kDefaultTruncationSigmas) {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw ValidationError("KDE bandwidth must be positive");
    }
    if (!(truncation_sigmas > 0.0)) throw ValidationError("truncation radius must be positive");
    std::vector<Point> points;
    points.reserve(dataset.total_points());
    for (const auto& f : dataset.frames()) points.insert(points.end(), f.points.begin(), f.points.end());
    if (points.empty()) throw ValidationError("cannot estimate density of zero points");

    const GridGeometry g = dataset.config().geometry();
    const double h2 = bandwidth * bandwidth;
    const double inv_two_h2 = 1.0 / (2.0 * h2);
    const double radius = truncation_sigmas * bandwidth;
    const double radius2 = radius * radius;
    const bool unbounded = !std::isfinite(radius2);
    const auto n_cols = static_cast<std::ptrdiff_t>(g.width);
    const auto n_rows = static_cast<std::ptrdiff_t>(g.height);

    // Index range of pixel centers within `radius` of coordinate c along an axis.
    const auto span_of = [&](double c, double origin, std::ptrdiff_t n) {
        if (unbounded) return std::pair<std::ptrdiff_t, std::ptrdiff_t>{0, n - 1};
        const double lo = std::ceil((c - radius - origin) / g.pixel_size - 0.5);
        const double hi = std::floor((c + radius - origin) / g.pixel_size - 0.5);
        const auto a = static_cast<std::ptrdiff_t>(std::max(lo, 0.0));
        const auto b = static_cast<std::ptrdiff_t>(std::min(hi, static_cast<double>(n - 1)));
        return std::pair<std::ptrdiff_t, std::ptrdiff_t>{a, b};
    };

    Grid<double> sums(g, 0.0);
    parallel_for_chunks(g.height, threads, [&](std::size_t row_begin, std::size_t row_end) {
        std::vector<double> dx2, wx;
        for (const Point& pt : points) {
            auto [r0, r1] = span_of(pt.z, g.z_min, n_rows);
            r0 = std::max<std::ptrdiff_t>(r0, static_cast<std::ptrdiff_t>(row_begin));
            r1 = std::min<std::ptrdiff_t>(r1, static_cast<std::ptrdiff_t>(row_end) - 1);
            if (r0 > r1) continue;
            const auto [c0, c1] = span_of(pt.x, g.x_min, n_cols);
            if (c0 > c1) continue;
            const auto nc = static_cast<std::size_t>(c1 - c0 + 1);
            dx2.resize(nc);
            wx.resize(nc);
            for (std::size_t k = 0; k < nc; ++k) {
                const double dx = g.center_x(static_cast<std::size_t>(c0) + k) - pt.x;
                dx2[k] = dx * dx;
                wx[k] = std::exp(-dx2[k] * inv_two_h2);
            }
            for (std::ptrdiff_t r = r0; r <= r1; ++r) {
                const double dz = g.center_z(static_cast<std::size_t>(r)) - pt.z;
                const double dz2 = dz * dz;
                // dx2 is convex in k, so the in-radius columns are contiguous.
                std::size_t k0 = 0, k1 = nc;
                if (!unbounded) {
                    while (k0 < k1 && dx2[k0] + dz2 > radius2) ++k0;
                    while (k1 > k0 && dx2[k1 - 1] + dz2 > radius2) --k1;
                }
                const double wz = std::exp(-dz2 * inv_two_h2);
                double* out = sums.row(static_cast<std::size_t>(r)).data() + c0;
                for (std::size_t k = k0; k < k1; ++k) out[k] += wx[k] * wz;
            }
        }
    });

    const double scale =
        1.0 / (static_cast<double>(points.size()) * 2.0 * std::numbers::pi * h2);
    for (double& v : sums.values()) v *= scale;
    return {std::move(sums), bandwidth};
}

/// Boolean per-pixel labels; 1 = dense, 0 = sparse.
struct RegionMask {
    Grid<std::uint8_t> labels;

    static RegionMask all(const GridGeometry& g) { return {Grid<std::uint8_t>(g, 1)}; }

    const GridGeometry& geometry() const noexcept { return labels.geometry(); }
    std::size_t size() const noexcept { return labels.size(); }
    bool dense(std::size_t i) const noexcept { return labels[i] != 0; }

    std::size_t dense_count() const noexcept {
        return static_cast<std::size_t>(std::count_if(labels.values().begin(), labels.values().end(),
                                                      [](std::uint8_t v) { return v != 0; }));
    }

    RegionMask complement() const {
        RegionMask out{labels};
        for (auto& v : out.labels.values()) v = v ? 0 : 1;
        return out;
    }

    friend bool operator==(const RegionMask&, const RegionMask&) = default;
};

/// Quantile with linear interpolation between order statistics, position
/// q * (n - 1) in the sorted sample.
inline double quantile_linear(std::vector<double> values, double q) {
    if (values.empty()) throw ValidationError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0) return values[lo];
    return values[lo] + (values[hi] - values[lo]) * frac;
}

// Dense where density >= the `quantile`-th quantile of all pixel values.
inline RegionMask threshold_mask(const DensityMap& density, double quantile) {
    if (!(quantile >= 0.0 && quantile <= 1.0)) throw ValidationError("quantile must lie in [0, 1]");
    const auto& vals = density.values.values();
    const double t = quantile_linear(std::vector<double>(vals.begin(), vals.end()), quantile);
    RegionMask mask{Grid<std::uint8_t>(density.geometry(), 0)};
    for (std::size_t i = 0; i < vals.size(); ++i) mask.labels[i] = vals[i] >= t ? 1 : 0;
    return mask;
}

inline double mask_coverage(const RegionMask& mask) noexcept {
    if (mask.size() == 0) return 0.0;
    return static_cast<double>(mask.dense_count()) / static_cast<double>(mask.size());
}

}  // namespace ulmsens
