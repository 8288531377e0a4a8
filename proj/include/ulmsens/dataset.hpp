#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ulmsens/error.hpp"
#include "ulmsens/grid.hpp"

namespace ulmsens {

struct FieldOfView {
    double x_min = 0.0;
    double x_max = 0.0;
    double z_min = 0.0;
    double z_max = 0.0;

    double width() const noexcept { return x_max - x_min; }
    double height() const noexcept { return z_max - z_min; }
    bool contains(double x, double z) const noexcept {
        return x >= x_min && x <= x_max && z >= z_min && z <= z_max;
    }

    friend bool operator==(const FieldOfView&, const FieldOfView&) = default;
};

/// Imaging geometry. Validated on construction and immutable afterwards.
class ImagingConfig {
public:
    static constexpr double kDefaultSoundSpeed = 1540.0;
    static constexpr int kDefaultPixelsPerWavelength = 10;

    ImagingConfig(double center_frequency_hz, FieldOfView fov,
                  double sound_speed_m_s = kDefaultSoundSpeed,
                  int sr_pixels_per_wavelength = kDefaultPixelsPerWavelength)
        : center_frequency_(center_frequency_hz),
          sound_speed_(sound_speed_m_s),
          fov_(fov),
          pixels_per_wavelength_(sr_pixels_per_wavelength) {
        if (!(std::isfinite(center_frequency_) && center_frequency_ > 0.0)) {
            throw ValidationError("center frequency must be positive");
        }
        if (!(std::isfinite(sound_speed_) && sound_speed_ > 0.0)) {
            throw ValidationError("sound speed must be positive");
        }
        if (!(std::isfinite(fov_.x_min) && std::isfinite(fov_.x_max) && fov_.x_min < fov_.x_max)) {
            throw ValidationError("field of view requires x_min < x_max");
        }
        if (!(std::isfinite(fov_.z_min) && std::isfinite(fov_.z_max) && fov_.z_min < fov_.z_max)) {
            throw ValidationError("field of view requires z_min < z_max");
        }
        if (pixels_per_wavelength_ < 1) {
            throw ValidationError("sr_pixels_per_wavelength must be a positive integer");
        }
    }

    double center_frequency() const noexcept { return center_frequency_; }
    double sound_speed() const noexcept { return sound_speed_; }
    const FieldOfView& fov() const noexcept { return fov_; }
    int pixels_per_wavelength() const noexcept { return pixels_per_wavelength_; }

    double wavelength() const noexcept { return sound_speed_ / center_frequency_; }
    double pixel_size() const noexcept { return wavelength() / pixels_per_wavelength_; }

    GridGeometry geometry() const {
        const double p = pixel_size();
        const auto cols = std::max(1.0, std::ceil(fov_.width() / p));
        const auto rows = std::max(1.0, std::ceil(fov_.height() / p));
        return {static_cast<std::size_t>(cols), static_cast<std::size_t>(rows), p,
                fov_.x_min, fov_.z_min};
    }

    friend bool operator==(const ImagingConfig&, const ImagingConfig&) = default;

private:
    double center_frequency_;
    double sound_speed_;
    FieldOfView fov_;
    int pixels_per_wavelength_;
};

inline double wavelength(const ImagingConfig& config) noexcept { return config.wavelength(); }

struct Point {
    double x = 0.0;
    double z = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
    friend auto operator<=>(const Point&, const Point&) = default;
};

struct LocalizationFrame {
    std::uint64_t frame_index = 0;
    std::vector<Point> points;
    friend bool operator==(const LocalizationFrame&, const LocalizationFrame&) = default;
};

/// Ground-truth or degraded localizations for one acquisition.
class Dataset {
public:
    explicit Dataset(ImagingConfig config, std::vector<LocalizationFrame> frames = {})
        : config_(std::move(config)), frames_(std::move(frames)) {
        validate();
    }

    const ImagingConfig& config() const noexcept { return config_; }
    const std::vector<LocalizationFrame>& frames() const noexcept { return frames_; }

    std::size_t total_points() const noexcept {
        std::size_t n = 0;
        for (const auto& f : frames_) n += f.points.size();
        return n;
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    void validate() const {
        for (std::size_t i = 0; i < frames_.size(); ++i) {
            if (i > 0 && frames_[i].frame_index <= frames_[i - 1].frame_index) {
                throw ValidationError("frames must have strictly ascending frame_index (frame " +
                                      std::to_string(frames_[i].frame_index) + ")");
            }
            const auto& pts = frames_[i].points;
            for (std::size_t k = 0; k < pts.size(); ++k) {
                if (!config_.fov().contains(pts[k].x, pts[k].z)) {
                    std::ostringstream msg;
                    msg.precision(17);
                    msg << "frame " << frames_[i].frame_index << " point " << k << " ("
                        << pts[k].x << ", " << pts[k].z << ") lies outside the field of view";
                    throw ValidationError(msg.str());
                }
            }
        }
    }

    ImagingConfig config_;
    std::vector<LocalizationFrame> frames_;
};

namespace detail {

inline std::string_view trim_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    if (text.empty()) return false;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if constexpr (std::is_floating_point_v<T>) {
        if (*first == '+') ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) return false;
    if constexpr (std::is_floating_point_v<T>) return std::isfinite(out);
    return true;
}

inline void append_double(std::string& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    out.append(buf, ptr);
}

}  // namespace detail

inline constexpr std::string_view kCsvHeader = "frame,x,z";

/// Parses the `frame,x,z` localization table. Rows may appear in any frame
/// order; points keep file order within each frame.
inline Dataset parse_csv(std::string_view text, const ImagingConfig& config) {
    std::map<std::uint64_t, std::vector<Point>> grouped;
    std::size_t line_no = 0;
    bool seen_header = false;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        std::string_view line = detail::trim_cr(text.substr(0, eol));
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (!seen_header) {
            if (line != kCsvHeader) {
                throw ParseError("line 1: expected header '" + std::string(kCsvHeader) + "'");
            }
            seen_header = true;
            continue;
        }
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 3 fields 'frame,x,z'");
        }
        std::uint64_t frame = 0;
        Point p;
        if (!detail::parse_number(line.substr(0, c1), frame)) {
            throw ParseError("line " + std::to_string(line_no) + ": invalid frame index");
        }
        if (!detail::parse_number(line.substr(c1 + 1, c2 - c1 - 1), p.x) ||
            !detail::parse_number(line.substr(c2 + 1), p.z)) {
            throw ParseError("line " + std::to_string(line_no) + ": invalid coordinate");
        }
        grouped[frame].push_back(p);
    }
    if (!seen_header) throw ParseError("line 1: missing header");

    std::vector<LocalizationFrame> frames;
    frames.reserve(grouped.size());
    for (auto& [index, pts] : grouped) frames.push_back({index, std::move(pts)});
    return Dataset(config, std::move(frames));
}

inline Dataset load_csv(const std::filesystem::path& path, const ImagingConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_csv(buf.str(), config);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

inline std::string format_csv(const Dataset& dataset) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& frame : dataset.frames()) {
        const std::string prefix = std::to_string(frame.frame_index) + ',';
        for (const auto& p : frame.points) {
            out += prefix;
            detail::append_double(out, p.x);
            out += ',';
            detail::append_double(out, p.z);
            out += '\n';
        }
    }
    return out;
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

inline void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
    write_file(path, format_csv(dataset));
}

}  // namespace ulmsens
