#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ulmsens/dataset.hpp"
#include "ulmsens/error.hpp"
#include "ulmsens/metrics.hpp"
#include "ulmsens/synthgen.hpp"
#include "ulmsens/sweep.hpp"

namespace ulmsens {

struct SynthConfig {
    std::uint64_t seed = 1;
    int n_trunk = 3;
    int branching_depth = 3;
    std::size_t n_frames = 500;
    VesselRates rates{};
    double jitter_wavelengths = kDefaultJitterWavelengths;
};

struct KdeConfig {
    double bandwidth_wavelengths = 2.0;
    double quantile = 0.75;
};

/// Merged run configuration. Every section is optional in the input file;
/// absent keys keep their defaults, unknown keys are rejected.
struct RunConfig {
    // Lower-frequency simulation; 27.7 mm square FOV -> 512 x 512 pixels at lambda/10.
    ImagingConfig imaging{2.841e6, {-0.01385, 0.01385, 0.002, 0.0297}};
    SynthConfig synth{};
    KdeConfig kde{};
    SsimParams ssim{};
    SweepSpec sweep{};
    double psnr_cap_db = kDefaultPsnrCapDb;
    bool log_compress = false;
    bool fixed_scale = true;

    double kde_bandwidth_m() const { return kde.bandwidth_wavelengths * imaging.wavelength(); }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where,
                           std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ParseError("config: '" + where + "' must be an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!keys.count(key)) throw ValidationError("config: unknown key '" + where + "." + key + "'");
    }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        const json& v = obj.at(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ParseError("expected boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ParseError("expected integer");
            if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() &&
                v.get<std::int64_t>() < 0) {
                throw ParseError("expected non-negative integer");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ParseError("expected number");
        }
        out = v.get<T>();
    } catch (const std::exception& e) {
        throw ParseError("config: '" + where + "." + key + "': " + e.what());
    }
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& doc) {
    using detail::read_opt;
    using detail::reject_unknown;
    RunConfig cfg;
    reject_unknown(doc, "<root>", {"imaging", "synth", "kde", "ssim", "sweep", "output"});

    if (doc.contains("imaging")) {
        const auto& im = doc["imaging"];
        reject_unknown(im, "imaging",
                       {"center_frequency_hz", "sound_speed_m_s", "fov_m", "sr_pixels_per_wavelength"});
        double f = cfg.imaging.center_frequency(), c = cfg.imaging.sound_speed();
        int ppw = cfg.imaging.pixels_per_wavelength();
        FieldOfView fov = cfg.imaging.fov();
        read_opt(im, "center_frequency_hz", f, "imaging");
        read_opt(im, "sound_speed_m_s", c, "imaging");
        read_opt(im, "sr_pixels_per_wavelength", ppw, "imaging");
        if (im.contains("fov_m")) {
            const auto& fj = im["fov_m"];
            reject_unknown(fj, "imaging.fov_m", {"x_min", "x_max", "z_min", "z_max"});
            read_opt(fj, "x_min", fov.x_min, "imaging.fov_m");
            read_opt(fj, "x_max", fov.x_max, "imaging.fov_m");
            read_opt(fj, "z_min", fov.z_min, "imaging.fov_m");
            read_opt(fj, "z_max", fov.z_max, "imaging.fov_m");
        }
        cfg.imaging = ImagingConfig(f, fov, c, ppw);
    }
    if (doc.contains("synth")) {
        const auto& s = doc["synth"];
        reject_unknown(s, "synth", {"seed", "n_trunk", "branching_depth", "n_frames", "trunk_rate",
                                    "leaf_rate", "jitter_wavelengths"});
        read_opt(s, "seed", cfg.synth.seed, "synth");
        read_opt(s, "n_trunk", cfg.synth.n_trunk, "synth");
        read_opt(s, "branching_depth", cfg.synth.branching_depth, "synth");
        read_opt(s, "n_frames", cfg.synth.n_frames, "synth");
        read_opt(s, "trunk_rate", cfg.synth.rates.trunk_rate, "synth");
        read_opt(s, "leaf_rate", cfg.synth.rates.leaf_rate, "synth");
        read_opt(s, "jitter_wavelengths", cfg.synth.jitter_wavelengths, "synth");
    }
    if (doc.contains("kde")) {
        const auto& k = doc["kde"];
        reject_unknown(k, "kde", {"bandwidth_wavelengths", "quantile"});
        read_opt(k, "bandwidth_wavelengths", cfg.kde.bandwidth_wavelengths, "kde");
        read_opt(k, "quantile", cfg.kde.quantile, "kde");
    }
    if (doc.contains("ssim")) {
        const auto& s = doc["ssim"];
        reject_unknown(s, "ssim", {"window_radius", "gaussian_sigma", "k1", "k2", "dynamic_range"});
        read_opt(s, "window_radius", cfg.ssim.window_radius, "ssim");
        read_opt(s, "gaussian_sigma", cfg.ssim.gaussian_sigma, "ssim");
        read_opt(s, "k1", cfg.ssim.k1, "ssim");
        read_opt(s, "k2", cfg.ssim.k2, "ssim");
        read_opt(s, "dynamic_range", cfg.ssim.dynamic_range, "ssim");
    }
    if (doc.contains("sweep")) {
        const auto& s = doc["sweep"];
        reject_unknown(s, "sweep", {"fp_rates", "fn_rates", "repetitions", "master_seed",
                                    "psnr_cap_db", "log_compress"});
        read_opt(s, "fp_rates", cfg.sweep.fp_rates, "sweep");
        read_opt(s, "fn_rates", cfg.sweep.fn_rates, "sweep");
        read_opt(s, "repetitions", cfg.sweep.repetitions, "sweep");
        read_opt(s, "master_seed", cfg.sweep.master_seed, "sweep");
        read_opt(s, "psnr_cap_db", cfg.psnr_cap_db, "sweep");
        read_opt(s, "log_compress", cfg.log_compress, "sweep");
    }
    if (doc.contains("output")) {
        const auto& o = doc["output"];
        reject_unknown(o, "output", {"fixed_scale"});
        read_opt(o, "fixed_scale", cfg.fixed_scale, "output");
    }
    return cfg;
}

/// Checks every cross-field constraint before any work starts.
inline void validate(const RunConfig& cfg) {
    if (cfg.synth.n_trunk < 1) throw ValidationError("synth.n_trunk must be >= 1");
    if (cfg.synth.branching_depth < 0) throw ValidationError("synth.branching_depth must be >= 0");
    if (cfg.synth.n_frames < 1) throw ValidationError("synth.n_frames must be >= 1");
    if (!(cfg.synth.jitter_wavelengths >= 0.0)) throw ValidationError("synth.jitter_wavelengths must be >= 0");
    if (!(cfg.kde.bandwidth_wavelengths > 0.0)) throw ValidationError("kde.bandwidth_wavelengths must be > 0");
    if (!(cfg.kde.quantile >= 0.0 && cfg.kde.quantile <= 1.0)) throw ValidationError("kde.quantile must lie in [0, 1]");
    cfg.ssim.validate();
    cfg.sweep.validate();
    if (!(cfg.psnr_cap_db > 0.0)) throw ValidationError("sweep.psnr_cap_db must be > 0");
    // Rate constraints are checked by the generator itself.
    (void)generate_vessels(cfg.imaging, cfg.synth.seed, cfg.synth.n_trunk,
                           cfg.synth.branching_depth, cfg.synth.rates);
}

inline RunConfig parse_run_config_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    RunConfig cfg = parse_run_config(doc);
    validate(cfg);
    return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config_text(buf.str());
}

// Full effective configuration, every key present.
inline nlohmann::json to_json(const RunConfig& cfg) {
    const auto& fov = cfg.imaging.fov();
    nlohmann::json doc;
    doc["imaging"] = {{"center_frequency_hz", cfg.imaging.center_frequency()},
                      {"sound_speed_m_s", cfg.imaging.sound_speed()},
                      {"sr_pixels_per_wavelength", cfg.imaging.pixels_per_wavelength()},
                      {"fov_m", {{"x_min", fov.x_min}, {"x_max", fov.x_max},
                                 {"z_min", fov.z_min}, {"z_max", fov.z_max}}}};
    doc["synth"] = {{"seed", cfg.synth.seed},
                    {"n_trunk", cfg.synth.n_trunk},
                    {"branching_depth", cfg.synth.branching_depth},
                    {"n_frames", cfg.synth.n_frames},
                    {"trunk_rate", cfg.synth.rates.trunk_rate},
                    {"leaf_rate", cfg.synth.rates.leaf_rate},
                    {"jitter_wavelengths", cfg.synth.jitter_wavelengths}};
    doc["kde"] = {{"bandwidth_wavelengths", cfg.kde.bandwidth_wavelengths},
                  {"quantile", cfg.kde.quantile}};
    doc["ssim"] = {{"window_radius", cfg.ssim.window_radius},
                   {"gaussian_sigma", cfg.ssim.gaussian_sigma},
                   {"k1", cfg.ssim.k1},
                   {"k2", cfg.ssim.k2},
                   {"dynamic_range", cfg.ssim.dynamic_range}};
    doc["sweep"] = {{"fp_rates", cfg.sweep.fp_rates},
                    {"fn_rates", cfg.sweep.fn_rates},
                    {"repetitions", cfg.sweep.repetitions},
                    {"master_seed", cfg.sweep.master_seed},
                    {"psnr_cap_db", cfg.psnr_cap_db},
                    {"log_compress", cfg.log_compress}};
    doc["output"] = {{"fixed_scale", cfg.fixed_scale}};
    return doc;
}

}  // namespace ulmsens
