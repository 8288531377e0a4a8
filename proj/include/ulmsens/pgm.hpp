#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ulmsens/dataset.hpp"
#include "ulmsens/error.hpp"

namespace ulmsens {

/// 8-bit grayscale raster, row-major, top row first.
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(std::size_t col, std::size_t row) const { return pixels[row * width + col]; }
    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

// Binary P5, maxval 255.
inline std::string encode_pgm(const GrayImage& image) {
    std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                      "\n255\n";
    out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
    return out;
}

inline void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
    write_file(path, encode_pgm(image));
}

inline GrayImage decode_pgm(const std::string& bytes) {
    std::istringstream in(bytes);
    std::string magic;
    std::size_t w = 0, h = 0;
    int maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (!in || magic != "P5" || maxval != 255) throw ParseError("not an 8-bit P5 PGM");
    in.get();
    GrayImage image{w, h, std::vector<std::uint8_t>(w * h)};
    in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(w * h));
    if (in.gcount() != static_cast<std::streamsize>(w * h)) throw ParseError("truncated PGM data");
    return image;
}

inline GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return decode_pgm(buf.str());
}

}  // namespace ulmsens
