#pragma once

#include <algorithm>
#include <array>
#include <tuple>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ulmsens/dataset.hpp"
#include "ulmsens/density.hpp"
#include "ulmsens/error.hpp"
#include "ulmsens/inject.hpp"
#include "ulmsens/metrics.hpp"
#include "ulmsens/parallel.hpp"
#include "ulmsens/render.hpp"
#include "ulmsens/rng.hpp"

namespace ulmsens {

struct SweepSpec {
    std::vector<double> fp_rates{0.0, 0.05, 0.10, 0.15, 0.20};
    std::vector<double> fn_rates{0.0, 0.05, 0.10, 0.15, 0.20};
    int repetitions = 3;
    std::uint64_t master_seed = 2024;

    void validate() const {
        const auto check_axis = [](const std::vector<double>& rates, const char* name) {
            if (rates.empty()) throw ValidationError(std::string(name) + " must be non-empty");
            for (std::size_t i = 0; i < rates.size(); ++i) {
                if (!(rates[i] >= 0.0 && rates[i] <= 1.0)) {
                    throw ValidationError(std::string(name) + " entries must lie in [0, 1]");
                }
                if (i > 0 && !(rates[i] > rates[i - 1])) {
                    throw ValidationError(std::string(name) + " must be strictly ascending");
                }
            }
        };
        check_axis(fp_rates, "fp_rates");
        check_axis(fn_rates, "fn_rates");
        if (repetitions < 1) throw ValidationError("repetitions must be >= 1");
    }
};

/// Everything besides the grid that shapes a sweep's numbers.
struct SweepOptions {
    SsimParams ssim{};
    double psnr_cap_db = kDefaultPsnrCapDb;
    bool log_compress = false;
    unsigned threads = 1;
};

/// Provenance snapshot stored alongside the rows.
struct SweepProvenance {
    double kde_bandwidth_m = 0.0;
    double mask_quantile = 0.0;
    SsimParams ssim{};
    double psnr_cap_db = kDefaultPsnrCapDb;
    bool log_compress = false;
    std::uint64_t master_seed = 0;
};

struct SweepRow {
    std::size_t fp_index = 0;
    std::size_t fn_index = 0;
    int rep = 0;
    Region region = Region::all;
    double fp_rate = 0.0;
    double fn_rate = 0.0;
    double ssim = 0.0;
    double psnr = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // sorted by (fp_index, fn_index, rep, region)
    SweepProvenance provenance;
};

inline constexpr std::uint64_t kCellFpMultiplier = 0x100000001B3ULL;
inline constexpr std::uint64_t kCellFnMultiplier = 0x1000193ULL;

// Seeds depend on cell indices only, so extending an axis leaves existing
// cells' draws untouched.
inline std::uint64_t cell_seed(std::uint64_t master_seed, std::uint64_t fp_index,
                               std::uint64_t fn_index, std::uint64_t rep) noexcept {
    return splitmix64(master_seed ^ (fp_index * kCellFpMultiplier + fn_index * kCellFnMultiplier + rep + 1));
}

/// Region metrics for one degraded dataset against the ground-truth map.
inline std::array<MetricRecord, 3> evaluate_regions(const SRMap& reference_raw, const SRMap& test_raw,
                                                    const RegionMask& dense,
                                                    const RegionMask& sparse,
                                                    const SweepOptions& options) {
    auto [ref, test] = normalize_pair(reference_raw, test_raw);
    if (options.log_compress) {
        ref = log_compress(ref);
        test = log_compress(test);
    }
    const Grid<double> ssim = ssim_map(ref, test, options.ssim);
    const double peak = options.ssim.dynamic_range;
    const RegionMask all = RegionMask::all(ref.geometry());
    std::array<MetricRecord, 3> out;
    for (const Region region : kRegions) {
        const RegionMask& m = region == Region::all ? all : region == Region::dense ? dense : sparse;
        out[static_cast<std::size_t>(region)] = {
            masked_mean(ssim, m), psnr_masked(ref, test, m, peak, options.psnr_cap_db), region};
    }
    return out;
}

/// Runs every (fp, fn, repetition) cell: degrade -> rasterize -> normalize
/// against the reference -> SSIM/PSNR for all, dense and sparse pixels.
/// Cells run in parallel; rows are assembled in canonical order.
inline SweepResult run_sweep(const Dataset& dataset, const SweepSpec& spec, const RegionMask& mask,
                             const SRMap& reference, const SweepOptions& options = {}) {
    spec.validate();
    options.ssim.validate();
    require_same_geometry(reference.geometry(), dataset.config().geometry(), "run_sweep reference");
    require_same_geometry(mask.geometry(), reference.geometry(), "run_sweep mask");
    const RegionMask sparse = mask.complement();
    if (mask.dense_count() == 0) throw ValidationError("region mask has no dense pixels");
    if (sparse.dense_count() == 0) throw ValidationError("region mask has no sparse pixels");

    const std::size_t n_fp = spec.fp_rates.size(), n_fn = spec.fn_rates.size();
    const auto reps = static_cast<std::size_t>(spec.repetitions);
    const std::size_t n_cells = n_fp * n_fn * reps;
    std::vector<SweepRow> rows(n_cells * 3);

    parallel_for(n_cells, options.threads, [&](std::size_t cell) {
        const std::size_t i = cell / (n_fn * reps);
        const std::size_t j = (cell / reps) % n_fn;
        const std::size_t r = cell % reps;
        try {
            const ErrorProfile profile(spec.fp_rates[i], spec.fn_rates[j],
                                       cell_seed(spec.master_seed, i, j, r));
            const SRMap test = rasterize(apply_error_profile(dataset, profile));
            const auto records = evaluate_regions(reference, test, mask, sparse, options);
            for (const auto& rec : records) {
                rows[cell * 3 + static_cast<std::size_t>(rec.region)] = {
                    i, j, static_cast<int>(r), rec.region, spec.fp_rates[i], spec.fn_rates[j],
                    rec.ssim, rec.psnr};
            }
        } catch (const ValidationError& e) {
            throw ValidationError("sweep cell (fp=" + std::to_string(spec.fp_rates[i]) +
                                  ", fn=" + std::to_string(spec.fn_rates[j]) + ", rep=" +
                                  std::to_string(r) + "): " + e.what());
        }
    });

    SweepResult result;
    result.rows = std::move(rows);
    result.provenance.ssim = options.ssim;
    result.provenance.psnr_cap_db = options.psnr_cap_db;
    result.provenance.log_compress = options.log_compress;
    result.provenance.master_seed = spec.master_seed;
    return result;
}

struct AggregateRow {
    std::size_t fp_index = 0;
    std::size_t fn_index = 0;
    Region region = Region::all;
    double fp_rate = 0.0;
    double fn_rate = 0.0;
    double ssim_mean = 0.0;
    double ssim_std = 0.0;
    double psnr_mean = 0.0;
    double psnr_std = 0.0;
};

namespace detail {

inline std::pair<double, double> mean_and_sample_std(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace detail

/// Mean and sample standard deviation over repetitions, one row per
/// (fp, fn, region), in (fp_index, fn_index, region) order.
inline std::vector<AggregateRow> aggregate(const SweepResult& result) {
    using Key = std::tuple<std::size_t, std::size_t, int>;
    std::map<Key, std::pair<std::vector<double>, std::vector<double>>> groups;
    std::map<Key, std::pair<double, double>> rates;
    for (const auto& row : result.rows) {
        const Key key{row.fp_index, row.fn_index, static_cast<int>(row.region)};
        groups[key].first.push_back(row.ssim);
        groups[key].second.push_back(row.psnr);
        rates[key] = {row.fp_rate, row.fn_rate};
    }
    std::vector<AggregateRow> out;
    out.reserve(groups.size());
    for (const auto& [key, values] : groups) {
        const auto [sm, ss] = detail::mean_and_sample_std(values.first);
        const auto [pm, ps] = detail::mean_and_sample_std(values.second);
        const auto& [fp, fn] = rates[key];
        out.push_back({std::get<0>(key), std::get<1>(key), static_cast<Region>(std::get<2>(key)), fp,
                       fn, sm, ss, pm, ps});
    }
    return out;
}

inline const AggregateRow* find_cell(const std::vector<AggregateRow>& table, double fp_rate,
                                     double fn_rate, Region region) {
    constexpr double kRateTolerance = 1e-12;
    for (const auto& row : table) {
        if (row.region == region && std::abs(row.fp_rate - fp_rate) < kRateTolerance &&
            std::abs(row.fn_rate - fn_rate) < kRateTolerance) {
            return &row;
        }
    }
    return nullptr;
}

/// (SSIM(0,0) - SSIM(fp=0, fn=rate)) / (SSIM(0,0) - SSIM(fp=rate, fn=0)) on
/// repetition means. Empty when a needed cell is missing or the FP drop is
/// not positive.
inline std::optional<double> fn_fp_ssim_drop_ratio(const std::vector<AggregateRow>& table,
                                                   double rate, Region region = Region::all) {
    const auto* base = find_cell(table, 0.0, 0.0, region);
    const auto* fp = find_cell(table, rate, 0.0, region);
    const auto* fn = find_cell(table, 0.0, rate, region);
    if (!base || !fp || !fn) return std::nullopt;
    const double fp_drop = base->ssim_mean - fp->ssim_mean;
    const double fn_drop = base->ssim_mean - fn->ssim_mean;
    if (!(fp_drop > 0.0)) return std::nullopt;
    return fn_drop / fp_drop;
}

namespace detail {

inline std::string format_rate(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

inline std::string format_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace detail

inline std::string format_results_csv(const SweepResult& result) {
    std::string out = "fp_rate,fn_rate,rep,region,ssim,psnr\n";
    for (const auto& row : result.rows) {
        out += detail::format_rate(row.fp_rate) + ',' + detail::format_rate(row.fn_rate) + ',' +
               std::to_string(row.rep) + ',' + std::string(region_name(row.region)) + ',' +
               detail::format_metric(row.ssim) + ',' + detail::format_metric(row.psnr) + '\n';
    }
    return out;
}

inline std::string format_aggregate_csv(const std::vector<AggregateRow>& table) {
    std::string out = "fp_rate,fn_rate,region,ssim_mean,ssim_std,psnr_mean,psnr_std\n";
    for (const auto& row : table) {
        out += detail::format_rate(row.fp_rate) + ',' + detail::format_rate(row.fn_rate) + ',' +
               std::string(region_name(row.region)) + ',' + detail::format_metric(row.ssim_mean) +
               ',' + detail::format_metric(row.ssim_std) + ',' +
               detail::format_metric(row.psnr_mean) + ',' + detail::format_metric(row.psnr_std) +
               '\n';
    }
    return out;
}

}  // namespace ulmsens
