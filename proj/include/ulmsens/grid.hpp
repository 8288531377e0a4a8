#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ulmsens/error.hpp"

namespace ulmsens {

/// Pixel lattice over the field of view. Pixel (col, row) covers
/// [x_min + col*p, x_min + (col+1)*p) x [z_min + row*p, z_min + (row+1)*p).
struct GridGeometry {
    std::size_t width = 0;
    std::size_t height = 0;
    double pixel_size = 0.0;
    double x_min = 0.0;
    double z_min = 0.0;

    std::size_t size() const noexcept { return width * height; }
    double pixel_area() const noexcept { return pixel_size * pixel_size; }
    double center_x(std::size_t col) const noexcept {
        return x_min + (static_cast<double>(col) + 0.5) * pixel_size;
    }
    double center_z(std::size_t row) const noexcept {
        return z_min + (static_cast<double>(row) + 0.5) * pixel_size;
    }

    friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// Row-major 2-D array bound to a geometry.
template <typename T>
class Grid {
public:
    using value_type = T;

    Grid() = default;
    explicit Grid(GridGeometry geometry, T fill = T{})
        : geometry_(geometry), values_(geometry.size(), fill) {}
    Grid(GridGeometry geometry, std::vector<T> values)
        : geometry_(geometry), values_(std::move(values)) {
        if (values_.size() != geometry_.size()) {
            throw ValidationError("grid value count does not match geometry");
        }
    }

    const GridGeometry& geometry() const noexcept { return geometry_; }
    std::size_t width() const noexcept { return geometry_.width; }
    std::size_t height() const noexcept { return geometry_.height; }
    std::size_t size() const noexcept { return values_.size(); }

    T& operator()(std::size_t col, std::size_t row) noexcept {
        return values_[row * geometry_.width + col];
    }
    const T& operator()(std::size_t col, std::size_t row) const noexcept {
        return values_[row * geometry_.width + col];
    }
    T& operator[](std::size_t i) noexcept { return values_[i]; }
    const T& operator[](std::size_t i) const noexcept { return values_[i]; }

    std::span<T> values() noexcept { return values_; }
    std::span<const T> values() const noexcept { return values_; }

    std::span<T> row(std::size_t r) noexcept {
        return std::span<T>(values_).subspan(r * geometry_.width, geometry_.width);
    }
    std::span<const T> row(std::size_t r) const noexcept {
        return std::span<const T>(values_).subspan(r * geometry_.width, geometry_.width);
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    GridGeometry geometry_{};
    std::vector<T> values_;
};

inline void require_same_geometry(const GridGeometry& a, const GridGeometry& b,
                                  const char* what) {
    if (!(a == b)) {
        throw ValidationError(std::string(what) + ": grid geometry mismatch (" +
                              std::to_string(a.width) + "x" + std::to_string(a.height) +
                              " vs " + std::to_string(b.width) + "x" +
                              std::to_string(b.height) + ")");
    }
}

}  // namespace ulmsens
