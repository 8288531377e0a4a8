#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "ulmsens/dataset.hpp"
#include "ulmsens/grid.hpp"
#include "ulmsens/parallel.hpp"
#include "ulmsens/pgm.hpp"

namespace ulmsens {

// Localization counts (raw) or their normalized counterpart.
using SRMap = Grid<double>;

inline std::size_t pixel_col(const GridGeometry& g, double x) noexcept {
    const double c = std::floor((x - g.x_min) / g.pixel_size);
    if (c <= 0.0) return 0;
    return std::min(static_cast<std::size_t>(c), g.width - 1);
}

inline std::size_t pixel_row(const GridGeometry& g, double z) noexcept {
    const double r = std::floor((z - g.z_min) / g.pixel_size);
    if (r <= 0.0) return 0;
    return std::min(static_cast<std::size_t>(r), g.height - 1);
}

/// Nearest-pixel count accumulation of every localization in every frame.
/// With threads > 1 frames are partitioned and per-worker count grids are
/// summed; integer counts make the result identical to the serial one.
inline SRMap rasterize(const Dataset& dataset, unsigned threads = 1) {
    const GridGeometry g = dataset.config().geometry();
    const auto& frames = dataset.frames();
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(frames.size(), 1));
    std::vector<std::vector<std::uint64_t>> partial(workers, std::vector<std::uint64_t>(g.size(), 0));
    parallel_for_chunks(workers, static_cast<unsigned>(workers), [&](std::size_t wb, std::size_t we) {
        for (std::size_t w = wb; w < we; ++w) {
            const std::size_t begin = frames.size() * w / workers;
            const std::size_t end = frames.size() * (w + 1) / workers;
            auto& counts = partial[w];
            for (std::size_t f = begin; f < end; ++f) {
                for (const auto& p : frames[f].points) {
                    ++counts[pixel_row(g, p.z) * g.width + pixel_col(g, p.x)];
                }
            }
        }
    });
    SRMap map(g, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::uint64_t total = 0;
        for (const auto& counts : partial) total += counts[i];
        map[i] = static_cast<double>(total);
    }
    return map;
}

inline double max_value(const SRMap& map) noexcept {
    double m = 0.0;
    for (double v : map.values()) m = std::max(m, v);
    return m;
}

inline double total_value(const SRMap& map) noexcept {
    double s = 0.0;
    for (double v : map.values()) s += v;
    return s;
}

/// Scales both maps by the reference maximum and clips the test map to
/// [0, 1]. A zero reference yields two all-zero maps.
inline std::pair<SRMap, SRMap> normalize_pair(const SRMap& reference, const SRMap& test) {
    require_same_geometry(reference.geometry(), test.geometry(), "normalize_pair");
    const double peak = max_value(reference);
    SRMap ref(reference.geometry(), 0.0);
    SRMap out(test.geometry(), 0.0);
    if (peak > 0.0) {
        for (std::size_t i = 0; i < ref.size(); ++i) {
            ref[i] = reference[i] / peak;
            out[i] = std::clamp(test[i] / peak, 0.0, 1.0);
        }
    }
    return {std::move(ref), std::move(out)};
}

inline constexpr double kLogCompressFloorDb = -40.0;

/// Optional amplitude compression of a normalized map: 20*log10(v) clipped
/// at `floor_db`, then rescaled so floor -> 0 and 0 dB -> 1. Zero stays 0.
inline SRMap log_compress(const SRMap& normalized, double floor_db = kLogCompressFloorDb) {
    SRMap out(normalized.geometry(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = normalized[i];
        if (v <= 0.0) continue;
        const double db = std::max(20.0 * std::log10(v), floor_db);
        out[i] = (db - floor_db) / -floor_db;
    }
    return out;
}

// P5 export of a map already in [0, 1]: gray = round(255 * v).
inline GrayImage to_gray(const SRMap& normalized) {
    GrayImage image{normalized.width(), normalized.height(),
                    std::vector<std::uint8_t>(normalized.size())};
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        image.pixels[i] = static_cast<std::uint8_t>(
            std::lround(255.0 * std::clamp(normalized[i], 0.0, 1.0)));
    }
    return image;
}

// Flat binary layout: u32 width, u32 height, then width*height f64, all
// little-endian, row-major.
namespace detail {

template <typename T>
void put_le(std::string& out, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    U bits;
    std::memcpy(&bits, &value, sizeof bits);
    for (std::size_t b = 0; b < sizeof bits; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
}

template <typename T>
T get_le(const unsigned char* p) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    U bits = 0;
    for (std::size_t b = 0; b < sizeof bits; ++b) bits |= static_cast<U>(p[b]) << (8 * b);
    T value;
    std::memcpy(&value, &bits, sizeof value);
    return value;
}

}  // namespace detail

inline std::string encode_map(const SRMap& map) {
    std::string out;
    out.reserve(8 + 8 * map.size());
    detail::put_le(out, static_cast<std::uint32_t>(map.width()));
    detail::put_le(out, static_cast<std::uint32_t>(map.height()));
    for (double v : map.values()) detail::put_le(out, v);
    return out;
}

/// Decodes the flat layout. The file carries only dimensions, so the map
/// gets unit pixel size at the origin unless a geometry is supplied.
inline SRMap decode_map(const std::string& bytes) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 8) throw ParseError("map file shorter than its 8-byte header");
    const auto w = detail::get_le<std::uint32_t>(p);
    const auto h = detail::get_le<std::uint32_t>(p + 4);
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (w == 0 || h == 0 || bytes.size() != 8 + 8 * n) {
        throw ParseError("map file size does not match its " + std::to_string(w) + "x" +
                         std::to_string(h) + " header");
    }
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = detail::get_le<double>(p + 8 + 8 * i);
    return SRMap({w, h, 1.0, 0.0, 0.0}, std::move(values));
}

inline void save_map(const SRMap& map, const std::filesystem::path& path) {
    write_file(path, encode_map(map));
}

inline SRMap load_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return decode_map(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace ulmsens
