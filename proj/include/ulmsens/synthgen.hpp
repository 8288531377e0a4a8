#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "ulmsens/dataset.hpp"
#include "ulmsens/error.hpp"
#include "ulmsens/parallel.hpp"
#include "ulmsens/rng.hpp"

namespace ulmsens {

struct QuadBezier {
    Point p0, p1, p2;

    Point at(double t) const noexcept {
        const double s = 1.0 - t;
        const double a = s * s, b = 2.0 * s * t, c = t * t;
        return {a * p0.x + b * p1.x + c * p2.x, a * p0.z + b * p1.z + c * p2.z};
    }
    friend bool operator==(const QuadBezier&, const QuadBezier&) = default;
};

struct VesselSegment {
    QuadBezier curve;
    double emission_rate = 0.0;  // expected microbubbles per frame
    int generation = 0;          // 0 = trunk
    friend bool operator==(const VesselSegment&, const VesselSegment&) = default;
};

class VesselTree {
public:
    VesselTree(ImagingConfig config, std::vector<VesselSegment> segments)
        : config_(std::move(config)), segments_(std::move(segments)) {
        for (const auto& s : segments_) {
            if (!(s.emission_rate >= 0.0) || !std::isfinite(s.emission_rate)) {
                throw ValidationError("segment emission_rate must be finite and non-negative");
            }
            for (const Point& p : {s.curve.p0, s.curve.p1, s.curve.p2}) {
                if (!config_.fov().contains(p.x, p.z)) {
                    throw ValidationError("vessel control point outside the field of view");
                }
            }
        }
    }

    const ImagingConfig& config() const noexcept { return config_; }
    const std::vector<VesselSegment>& segments() const noexcept { return segments_; }

    friend bool operator==(const VesselTree&, const VesselTree&) = default;

private:
    ImagingConfig config_;
    std::vector<VesselSegment> segments_;
};

/// Emission rates for the generated tree. Rates decay geometrically from
/// trunk to leaf generation.
struct VesselRates {
    double trunk_rate = 60.0;
    double leaf_rate = 6.0;
};

inline constexpr double kMinTrunkToLeafRatio = 5.0;

/// Builds `n_trunk` trunks radiating from the middle of the field of view,
/// each split into binary branches `branching_depth` times. Trunks sit in
/// the core and carry the highest rate; leaves reach toward the periphery.
inline VesselTree generate_vessels(const ImagingConfig& config, std::uint64_t seed, int n_trunk,
                                   int branching_depth, VesselRates rates = {}) {
    if (n_trunk < 1) throw ValidationError("n_trunk must be >= 1");
    if (branching_depth < 0) throw ValidationError("branching_depth must be >= 0");
    if (branching_depth > 12) throw ValidationError("branching_depth must be <= 12");
    if (!(rates.trunk_rate >= 0.0) || !(rates.leaf_rate >= 0.0)) {
        throw ValidationError("emission rates must be non-negative");
    }
    if (branching_depth > 0 && rates.trunk_rate < kMinTrunkToLeafRatio * rates.leaf_rate) {
        throw ValidationError("trunk_rate must be at least 5x leaf_rate");
    }

    const FieldOfView& fov = config.fov();
    const double cx = 0.5 * (fov.x_min + fov.x_max);
    const double cz = 0.5 * (fov.z_min + fov.z_max);
    const double radius = 0.5 * std::min(fov.width(), fov.height());
    const auto clamp_point = [&](Point p) {
        return Point{std::clamp(p.x, fov.x_min, fov.x_max), std::clamp(p.z, fov.z_min, fov.z_max)};
    };
    const double decay =
        branching_depth == 0 || rates.trunk_rate == 0.0
            ? 1.0
            : std::pow(rates.leaf_rate / rates.trunk_rate, 1.0 / branching_depth);

    Xoshiro256 rng(splitmix64(seed));
    std::vector<VesselSegment> segments;

    struct Pending {
        Point start;
        double heading;
        double length;
        double rate;
        int generation;
    };
    std::vector<Pending> queue;
    for (int k = 0; k < n_trunk; ++k) {
        const double heading =
            2.0 * std::numbers::pi * (k + 0.25 + 0.5 * rng.uniform()) / n_trunk;
        const double offset = 0.08 * radius * rng.uniform();
        const double offset_angle = 2.0 * std::numbers::pi * rng.uniform();
        queue.push_back({{cx + offset * std::cos(offset_angle), cz + offset * std::sin(offset_angle)},
                         heading,
                         radius * (0.40 + 0.10 * rng.uniform()),
                         rates.trunk_rate,
                         0});
    }

    // Breadth-first so segment order is generation-major.
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const Pending cur = queue[head];
        const double bend = (rng.uniform() - 0.5) * 0.6;
        const Point start = clamp_point(cur.start);
        const Point end = clamp_point({start.x + cur.length * std::cos(cur.heading),
                                       start.z + cur.length * std::sin(cur.heading)});
        const Point mid{0.5 * (start.x + end.x), 0.5 * (start.z + end.z)};
        const double normal = cur.heading + std::numbers::pi / 2.0;
        const Point control = clamp_point({mid.x + bend * cur.length * std::cos(normal),
                                           mid.z + bend * cur.length * std::sin(normal)});
        segments.push_back({{start, control, end}, cur.rate, cur.generation});

        if (cur.generation < branching_depth) {
            // Tangent at t = 1 is (end - control).
            const double tangent = std::atan2(end.z - control.z, end.x - control.x);
            for (const double side : {-1.0, 1.0}) {
                const double spread = 0.35 + 0.35 * rng.uniform();
                queue.push_back({end, tangent + side * spread,
                                 cur.length * (0.70 + 0.15 * rng.uniform()), cur.rate * decay,
                                 cur.generation + 1});
            }
        }
    }
    if (branching_depth > 0) {
        // Pin the leaf generation to the exact configured rate.
        for (auto& s : segments) {
            if (s.generation == branching_depth) s.emission_rate = rates.leaf_rate;
        }
    }
    return VesselTree(config, std::move(segments));
}

inline constexpr std::uint64_t kFrameStreamMultiplier = kGoldenGamma;

inline std::uint64_t frame_stream_seed(std::uint64_t seed, std::uint64_t frame_index) noexcept {
    return splitmix64(seed ^ (kFrameStreamMultiplier * (frame_index + 1)));
}

inline constexpr double kDefaultJitterWavelengths = 1.0 / 20.0;

/// Draws `n_frames` frames (indices 0..n_frames-1, empty frames included).
/// Per frame and segment: Poisson count, uniform curve parameter, isotropic
/// Gaussian jitter resampled until inside the field of view (clamped after
/// 64 rejected draws).
inline Dataset sample_frames(const VesselTree& tree, std::size_t n_frames, std::uint64_t seed,
                             double jitter_wavelengths = kDefaultJitterWavelengths,
                             unsigned threads = 1) {
    if (n_frames < 1) throw ValidationError("n_frames must be >= 1");
    if (!(jitter_wavelengths >= 0.0) || !std::isfinite(jitter_wavelengths)) {
        throw ValidationError("jitter must be finite and non-negative");
    }
    const ImagingConfig& config = tree.config();
    const FieldOfView& fov = config.fov();
    const double sigma = jitter_wavelengths * config.wavelength();

    std::vector<LocalizationFrame> frames(n_frames);
    parallel_for(n_frames, threads, [&](std::size_t f) {
        Xoshiro256 rng(frame_stream_seed(seed, f));
        auto& frame = frames[f];
        frame.frame_index = f;
        for (const auto& segment : tree.segments()) {
            const auto count = rng.poisson(segment.emission_rate);
            for (std::uint64_t m = 0; m < count; ++m) {
                const Point on_curve = segment.curve.at(rng.uniform());
                Point p = on_curve;
                if (sigma > 0.0) {
                    bool inside = false;
                    for (int attempt = 0; attempt < 64 && !inside; ++attempt) {
                        p = {on_curve.x + sigma * rng.normal(), on_curve.z + sigma * rng.normal()};
                        inside = fov.contains(p.x, p.z);
                    }
                    if (!inside) {
                        p = {std::clamp(p.x, fov.x_min, fov.x_max),
                             std::clamp(p.z, fov.z_min, fov.z_max)};
                    }
                }
                frame.points.push_back(p);
            }
        }
    });
    return Dataset(config, std::move(frames));
}

}  // namespace ulmsens
