// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splatcolor/scene.hpp"
#include "splatcolor/sh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace splatcolor {

struct RasterConfig {
    int tile_size = 16;
    double alpha_min = 1.0 / 255.0;
    double alpha_max = 0.99;
    double transmittance_floor = 1e-4;
    double near_plane = 0.01;
    double footprint_sigma = 3.0;

    /// Throws InputError on non-positive thresholds or alpha_min >= alpha_max.
    void validate() const;
};

/// Low-pass term added to every screen-space covariance diagonal (pixels^2).
inline constexpr double kLowPassVariance = 0.3;

struct ProjectedSplat {
    int gaussian_index = 0;
    Vec2 mean2d = Vec2::Zero();
    Mat2 cov2d = Mat2::Identity();
    /// Upper triangle of cov2d^-1: (xx, xy, yy).
    Vec3 conic = Vec3::Zero();
    double depth = 0.0;
    double opacity = 0.0;
    Vec3 view_dir = Vec3::UnitZ();
    ShBasis basis;
    /// Half-extents of the footprint ellipse's bounding box, pixels.
    Vec2 extent = Vec2::Zero();
};

/// EWA projection of every Gaussian that lies beyond the near plane and whose
/// footprint ellipse overlaps the image. The result is sorted by ascending
/// depth, ties broken by ascending Gaussian index.
std::vector<ProjectedSplat> project(const GaussianScene &scene, const CameraView &view,
                                    const RasterConfig &config);

/// Geometry-only state of one view: the depth-sorted projected splats and the
/// per-tile lists that index into them. Colors are not part of the plan, so a
/// plan stays valid while SH coefficients change.
class RasterPlan {
public:
    RasterPlan(const GaussianScene &scene, const CameraView &view, const RasterConfig &config);

    const CameraView &view() const { return view_; }
    const RasterConfig &config() const { return config_; }
    std::span<const ProjectedSplat> splats() const { return splats_; }
    std::size_t gaussian_count() const { return gaussian_count_; }
    int sh_order() const { return sh_order_; }

    int tiles_x() const { return tiles_x_; }
    int tiles_y() const { return tiles_y_; }
    int tile_count() const { return tiles_x_ * tiles_y_; }
    /// Slots into splats(), in blend order.
    std::span<const int> tile_slots(int tile) const {
        return {tile_slots_.data() + tile_offsets_[tile],
                static_cast<std::size_t>(tile_offsets_[tile + 1] - tile_offsets_[tile])};
    }
    std::int64_t tile_list_offset(int tile) const { return tile_offsets_[tile]; }
    std::int64_t total_tile_entries() const { return tile_offsets_.back(); }

private:
    CameraView view_;
    RasterConfig config_;
    std::size_t gaussian_count_ = 0;
    int sh_order_ = 0;
    std::vector<ProjectedSplat> splats_;
    int tiles_x_ = 0;
    int tiles_y_ = 0;
    std::vector<std::int64_t> tile_offsets_;
    std::vector<int> tile_slots_;
};

/// Front-to-back blend of one pixel. Calls visit(position, weight) for every
/// contributing splat, where position indexes `slots` and weight is T * alpha.
template <class Visit>
void blend_pixel(std::span<const ProjectedSplat> splats, std::span<const int> slots, double px,
                 double py, const RasterConfig &config, Visit &&visit) {
    const double cutoff = config.footprint_sigma * config.footprint_sigma;
    double transmittance = 1.0;
    for (std::size_t n = 0; n < slots.size(); ++n) {
        const ProjectedSplat &s = splats[slots[n]];
        const double dx = px - s.mean2d.x();
        const double dy = py - s.mean2d.y();
        const double maha = s.conic[0] * dx * dx + 2.0 * s.conic[1] * dx * dy + s.conic[2] * dy * dy;
        if (maha > cutoff) {
            continue;
        }
        const double alpha = std::min(config.alpha_max, s.opacity * std::exp(-0.5 * maha));
        if (alpha < config.alpha_min) {
            continue;
        }
        visit(n, transmittance * alpha);
        transmittance *= 1.0 - alpha;
        if (transmittance < config.transmittance_floor) {
            break;
        }
    }
}

/// Calls fn(tile, x0, y0, x1, y1) over the tiles of a plan in parallel, with
/// the half-open pixel rectangle each tile covers.
template <class Fn>
void for_each_tile(const RasterPlan &plan, Fn &&fn);

/// Alpha-blended image of the scene's current coefficients. Background is 0.
ChannelImage render(const RasterPlan &plan, const GaussianScene &scene);
ChannelImage render(const GaussianScene &scene, const CameraView &view, const RasterConfig &config);

/// Per-channel sum over pixels of weights * rendered image.
std::vector<double> render_sum_weighted(const GaussianScene &scene, const CameraView &view,
                                        const RasterConfig &config, const ChannelImage &weights);

} // namespace splatcolor

#include "splatcolor/parallel.hpp"

namespace splatcolor {

template <class Fn>
void for_each_tile(const RasterPlan &plan, Fn &&fn) {
    const int ts = plan.config().tile_size;
    const int w = plan.view().width;
    const int h = plan.view().height;
    const int tx = plan.tiles_x();
    parallel_for(0, plan.tile_count(), [&](std::int64_t t) {
        const int tile = static_cast<int>(t);
        const int x0 = (tile % tx) * ts;
        const int y0 = (tile / tx) * ts;
        fn(tile, x0, y0, std::min(x0 + ts, w), std::min(y0 + ts, h));
    });
}

} // namespace splatcolor
