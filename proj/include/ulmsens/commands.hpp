#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "ulmsens/config.hpp"
#include "ulmsens/dataset.hpp"
#include "ulmsens/density.hpp"
#include "ulmsens/inject.hpp"
#include "ulmsens/metrics.hpp"
#include "ulmsens/render.hpp"
#include "ulmsens/report.hpp"
#include "ulmsens/sweep.hpp"
#include "ulmsens/synthgen.hpp"

// Pipeline stages behind the command-line subcommands. Each takes an
// already-merged RunConfig and writes its outputs; the CLI only parses
// flags and maps exceptions to exit codes.
namespace ulmsens::commands {

inline Dataset generate_dataset(const RunConfig& cfg, unsigned threads) {
    const VesselTree tree = generate_vessels(cfg.imaging, cfg.synth.seed, cfg.synth.n_trunk,
                                             cfg.synth.branching_depth, cfg.synth.rates);
    return sample_frames(tree, cfg.synth.n_frames, cfg.synth.seed, cfg.synth.jitter_wavelengths,
                         threads);
}

inline void generate(const RunConfig& cfg, const std::filesystem::path& out, unsigned threads,
                     std::ostream& log) {
    const Dataset ds = generate_dataset(cfg, threads);
    save_csv(ds, out);
    log << "generated " << ds.frames().size() << " frames, " << ds.total_points()
        << " localizations (seed " << cfg.synth.seed << ") -> " << out.string() << '\n';
}

inline void inject(const RunConfig& cfg, const std::filesystem::path& in, double fp, double fn,
                   std::uint64_t seed, const std::filesystem::path& out, unsigned threads,
                   std::ostream& log) {
    const ErrorProfile profile(fp, fn, seed);
    const Dataset gt = load_csv(in, cfg.imaging);
    const Dataset degraded = apply_error_profile(gt, profile, threads);
    save_csv(degraded, out);
    log << "injected fp=" << fp << " fn=" << fn << ": " << gt.total_points() << " -> "
        << degraded.total_points() << " localizations -> " << out.string() << '\n';
}

// Raw count map (flat binary) plus an own-max PGM preview.
inline void render(const RunConfig& cfg, const std::filesystem::path& in,
                   const std::filesystem::path& out, std::optional<std::filesystem::path> pgm,
                   unsigned threads, std::ostream& log) {
    const SRMap map = rasterize(load_csv(in, cfg.imaging), threads);
    save_map(map, out);
    if (pgm) write_pgm(snapshot(map), *pgm);
    log << "rasterized " << static_cast<std::uint64_t>(total_value(map)) << " localizations into "
        << map.width() << "x" << map.height() << " -> " << out.string() << '\n';
}

struct RegionOutputs {
    DensityMap density;
    RegionMask mask;
};

inline RegionOutputs compute_regions(const RunConfig& cfg, const Dataset& gt, unsigned threads) {
    DensityMap density = kde_density(gt, cfg.kde_bandwidth_m(), threads);
    RegionMask mask = threshold_mask(density, cfg.kde.quantile);
    return {std::move(density), std::move(mask)};
}

inline SRMap mask_as_map(const RegionMask& mask) {
    SRMap m(mask.geometry(), 0.0);
    for (std::size_t i = 0; i < mask.size(); ++i) m[i] = mask.dense(i) ? 1.0 : 0.0;
    return m;
}

inline RegionMask mask_from_map(const SRMap& map) {
    RegionMask mask{Grid<std::uint8_t>(map.geometry(), 0)};
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (map[i] != 0.0 && map[i] != 1.0) throw ValidationError("mask file values must be 0 or 1");
        mask.labels[i] = map[i] != 0.0 ? 1 : 0;
    }
    return mask;
}

// density.pgm, mask.pgm and mask.bin (0/1 in the flat map layout).
inline void regions(const RunConfig& cfg, const std::filesystem::path& in,
                    const std::filesystem::path& out_dir, unsigned threads, std::ostream& log) {
    std::filesystem::create_directories(out_dir);
    const auto r = compute_regions(cfg, load_csv(in, cfg.imaging), threads);
    write_pgm(snapshot(r.density), out_dir / "density.pgm");
    write_pgm(snapshot(r.mask), out_dir / "mask.pgm");
    save_map(mask_as_map(r.mask), out_dir / "mask.bin");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", mask_coverage(r.mask));
    log << "dense coverage " << buf << " (quantile " << cfg.kde.quantile << ")\n";
}

/// Joint normalization then SSIM/PSNR. Without a mask only the all-pixel
/// record is produced.
inline std::vector<MetricRecord> metrics(const RunConfig& cfg, const SRMap& reference,
                                         const SRMap& test, const std::optional<RegionMask>& mask) {
    SweepOptions options{cfg.ssim, cfg.psnr_cap_db, cfg.log_compress, 1};
    require_same_geometry(reference.geometry(), test.geometry(), "metrics");
    if (mask) {
        require_same_geometry(reference.geometry(), mask->geometry(), "metrics mask");
        const auto recs = evaluate_regions(reference, test, *mask, mask->complement(), options);
        return {recs.begin(), recs.end()};
    }
    auto [ref, tst] = normalize_pair(reference, test);
    if (cfg.log_compress) {
        ref = log_compress(ref);
        tst = log_compress(tst);
    }
    const RegionMask all = RegionMask::all(ref.geometry());
    return {{ssim_masked(ref, tst, cfg.ssim, all),
             psnr_masked(ref, tst, all, cfg.ssim.dynamic_range, cfg.psnr_cap_db), Region::all}};
}

inline std::string format_record(const MetricRecord& rec) {
    return "region=" + std::string(region_name(rec.region)) + " ssim=" +
           detail::format_metric(rec.ssim) + " psnr=" + detail::format_metric(rec.psnr);
}

/// Full experiment into `out_dir`: results.csv, aggregate.csv, one heatmap
/// per metric and region, srmap/density/mask snapshots, config.echo.json
/// and summary.txt. Without `gt` the dataset comes from the synth section.
inline SweepResult sweep(const RunConfig& cfg, const std::optional<std::filesystem::path>& gt,
                         const std::filesystem::path& out_dir, unsigned threads,
                         std::ostream& log) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir / "config.echo.json", to_json(cfg).dump(2) + "\n");

    const Dataset dataset = gt ? load_csv(*gt, cfg.imaging) : generate_dataset(cfg, threads);
    const SRMap reference = rasterize(dataset, threads);
    const auto r = compute_regions(cfg, dataset, threads);

    const SweepOptions options{cfg.ssim, cfg.psnr_cap_db, cfg.log_compress, threads};
    SweepResult result = run_sweep(dataset, cfg.sweep, r.mask, reference, options);
    result.provenance.kde_bandwidth_m = cfg.kde_bandwidth_m();
    result.provenance.mask_quantile = cfg.kde.quantile;
    const auto table = aggregate(result);

    write_file(out_dir / "results.csv", format_results_csv(result));
    write_file(out_dir / "aggregate.csv", format_aggregate_csv(table));
    const HeatmapScale scale{cfg.fixed_scale, cfg.psnr_cap_db};
    for (const Metric metric : {Metric::ssim, Metric::psnr}) {
        for (const Region region : kRegions) {
            write_pgm(render_heatmap(table, metric, region, scale),
                      out_dir / (std::string(metric_name(metric)) + "_" +
                                 std::string(region_name(region)) + ".pgm"));
        }
    }
    write_pgm(snapshot(reference), out_dir / "srmap.pgm");
    write_pgm(snapshot(r.density), out_dir / "density.pgm");
    write_pgm(snapshot(r.mask), out_dir / "mask.pgm");

    std::string summary;
    const auto line = [&](const std::string& key, const std::string& value) {
        summary += key + "=" + value + "\n";
    };
    line("localizations", std::to_string(dataset.total_points()));
    line("frames", std::to_string(dataset.frames().size()));
    line("grid", std::to_string(reference.width()) + "x" + std::to_string(reference.height()));
    line("kde_bandwidth_m", detail::format_metric(result.provenance.kde_bandwidth_m));
    line("mask_quantile", detail::format_rate(cfg.kde.quantile));
    line("dense_coverage", detail::format_metric(mask_coverage(r.mask)));
    const double top_fp = cfg.sweep.fp_rates.back(), top_fn = cfg.sweep.fn_rates.back();
    const double rate = std::min(top_fp, top_fn);
    if (const auto* base = find_cell(table, 0.0, 0.0, Region::all)) {
        if (const auto* fp = find_cell(table, rate, 0.0, Region::all)) {
            line("ssim_drop_fp_" + detail::format_rate(rate), detail::format_metric(base->ssim_mean - fp->ssim_mean));
            line("psnr_drop_fp_" + detail::format_rate(rate), detail::format_metric(base->psnr_mean - fp->psnr_mean));
        }
        if (const auto* fn = find_cell(table, 0.0, rate, Region::all)) {
            line("ssim_drop_fn_" + detail::format_rate(rate), detail::format_metric(base->ssim_mean - fn->ssim_mean));
            line("psnr_drop_fn_" + detail::format_rate(rate), detail::format_metric(base->psnr_mean - fn->psnr_mean));
        }
    }
    if (const auto ratio = fn_fp_ssim_drop_ratio(table, rate)) {
        line("fn_fp_ssim_drop_ratio", detail::format_metric(*ratio));
    } else {
        line("fn_fp_ssim_drop_ratio", "n/a");
    }
    write_file(out_dir / "summary.txt", summary);
    log << summary;
    return result;
}

}  // namespace ulmsens::commands
