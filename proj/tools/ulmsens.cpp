// ulmsens: detection-error sensitivity experiments for localization SR maps.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ulmsens/commands.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

unsigned resolve_threads(std::optional<unsigned> flag) {
    if (flag) return std::max(1u, *flag);
    if (const char* env = std::getenv("ULMSENS_THREADS")) {
        try {
            const long n = std::stol(env);
            if (n >= 1) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
        throw ulmsens::ValidationError("ULMSENS_THREADS must be a positive integer");
    }
    return ulmsens::default_thread_count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sensitivity of localization super-resolution maps to detection errors"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<unsigned> threads;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--threads", threads, "worker threads (default: ULMSENS_THREADS or all cores)")
        ->check(CLI::PositiveNumber);

    std::string in, out, ref_map, test_map, mask_map, pgm;
    std::optional<std::uint64_t> seed;
    std::optional<double> fp, fn;
    bool fixed_scale = false, data_scale = false;

    auto* generate = app.add_subcommand("generate", "write a synthetic ground-truth dataset");
    generate->add_option("--out", out, "output CSV")->required();
    generate->add_option("--seed", seed, "generator seed (overrides synth.seed)");

    auto* inject = app.add_subcommand("inject", "add false positives / remove true detections");
    inject->add_option("--in", in, "input CSV")->required()->check(CLI::ExistingFile);
    inject->add_option("--out", out, "output CSV")->required();
    inject->add_option("--fp", fp, "false-positive rate in [0,1]")->required();
    inject->add_option("--fn", fn, "false-negative rate in [0,1]")->required();
    inject->add_option("--seed", seed, "injection seed")->required();

    auto* render = app.add_subcommand("render", "rasterize a dataset into a raw count map");
    render->add_option("--in", in, "input CSV")->required()->check(CLI::ExistingFile);
    render->add_option("--out", out, "output map (flat binary)")->required();
    render->add_option("--pgm", pgm, "optional PGM preview");

    auto* regions = app.add_subcommand("regions", "KDE density and dense/sparse mask");
    regions->add_option("--in", in, "ground-truth CSV")->required()->check(CLI::ExistingFile);
    regions->add_option("--out", out, "output directory")->required();

    auto* metrics = app.add_subcommand("metrics", "SSIM/PSNR between two raw maps");
    metrics->add_option("--ref", ref_map, "reference map")->required()->check(CLI::ExistingFile);
    metrics->add_option("--test", test_map, "test map")->required()->check(CLI::ExistingFile);
    metrics->add_option("--mask", mask_map, "dense/sparse mask map")->check(CLI::ExistingFile);

    auto* sweep = app.add_subcommand("sweep", "full FP x FN sensitivity sweep");
    sweep->add_option("--in", in, "ground-truth CSV (default: generate from config)")
        ->check(CLI::ExistingFile);
    sweep->add_option("--out", out, "output directory")->required();
    sweep->add_option("--seed", seed, "master seed (overrides sweep.master_seed)");
    sweep->add_flag("--fixed-scale", fixed_scale, "heatmaps on fixed metric ranges (default)");
    sweep->add_flag("--data-scale", data_scale, "heatmaps on the data range");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        ulmsens::RunConfig cfg =
            config_path.empty() ? ulmsens::RunConfig{} : ulmsens::load_run_config(config_path);
        if (fixed_scale && data_scale) {
            throw ulmsens::ValidationError("--fixed-scale and --data-scale are exclusive");
        }
        if (data_scale) cfg.fixed_scale = false;
        if (fixed_scale) cfg.fixed_scale = true;
        const unsigned n_threads = resolve_threads(threads);

        if (*generate) {
            if (seed) cfg.synth.seed = *seed;
            ulmsens::validate(cfg);
            ulmsens::commands::generate(cfg, out, n_threads, std::cout);
        } else if (*inject) {
            ulmsens::commands::inject(cfg, in, *fp, *fn, *seed, out, n_threads, std::cout);
        } else if (*render) {
            ulmsens::commands::render(cfg, in, out,
                                      pgm.empty() ? std::nullopt : std::optional<std::filesystem::path>(pgm),
                                      n_threads, std::cout);
        } else if (*regions) {
            ulmsens::commands::regions(cfg, in, out, n_threads, std::cout);
        } else if (*metrics) {
            const auto ref = ulmsens::load_map(ref_map);
            const auto test = ulmsens::load_map(test_map);
            std::optional<ulmsens::RegionMask> mask;
            if (!mask_map.empty()) mask = ulmsens::commands::mask_from_map(ulmsens::load_map(mask_map));
            for (const auto& rec : ulmsens::commands::metrics(cfg, ref, test, mask)) {
                std::cout << ulmsens::commands::format_record(rec) << '\n';
            }
        } else if (*sweep) {
            if (seed) cfg.sweep.master_seed = *seed;
            ulmsens::validate(cfg);
            ulmsens::commands::sweep(cfg, in.empty() ? std::nullopt : std::optional<std::filesystem::path>(in),
                                     out, n_threads, std::cout);
        }
    } catch (const ulmsens::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ulmsens::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
