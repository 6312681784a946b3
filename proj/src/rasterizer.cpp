// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#include "splatcolor/rasterizer.hpp"

#include "splatcolor/errors.hpp"
#include "splatcolor/parallel.hpp"

#include <optional>
#include <sstream>

namespace splatcolor {

void RasterConfig::validate() const {
    if (tile_size < 1) {
        throw InputError("RasterConfig: tile_size must be positive");
    }
    if (!(alpha_min > 0.0 && alpha_max > 0.0 && transmittance_floor > 0.0 && near_plane > 0.0 &&
          footprint_sigma > 0.0)) {
        throw InputError("RasterConfig: thresholds must be positive");
    }
    if (!(alpha_min < alpha_max && alpha_max <= 1.0)) {
        throw InputError("RasterConfig: require alpha_min < alpha_max <= 1");
    }
}

namespace {

std::optional<ProjectedSplat> project_one(const GaussianScene &scene, std::size_t i,
                                          const CameraView &view, const Mat3 &w,
                                          const Vec3 &t, const Vec3 &camera_position,
                                          const RasterConfig &config) {
    const Vec3 p = w * scene.means[i] + t;
    const double z = p.z();
    if (!(z > config.near_plane)) {
        return std::nullopt;
    }

    ProjectedSplat s;
    s.gaussian_index = static_cast<int>(i);
    s.depth = z;
    s.mean2d = Vec2(view.fx * p.x() / z + view.cx, view.fy * p.y() / z + view.cy);

    Eigen::Matrix<double, 2, 3> jac;
    jac << view.fx / z, 0.0, -view.fx * p.x() / (z * z),
        0.0, view.fy / z, -view.fy * p.y() / (z * z);
    const Mat3 cov3 = covariance_from_scale_rotation(scene.scales[i], scene.rotations[i]);
    const Eigen::Matrix<double, 2, 3> m = jac * w;
    Mat2 cov2 = m * cov3 * m.transpose();
    cov2(0, 0) += kLowPassVariance;
    cov2(1, 1) += kLowPassVariance;
    cov2(1, 0) = cov2(0, 1);
    s.cov2d = cov2;

    const double det = cov2(0, 0) * cov2(1, 1) - cov2(0, 1) * cov2(0, 1);
    if (!(det > 0.0)) {
        return std::nullopt;
    }
    s.conic = Vec3(cov2(1, 1) / det, -cov2(0, 1) / det, cov2(0, 0) / det);
    s.extent = Vec2(config.footprint_sigma * std::sqrt(cov2(0, 0)),
                    config.footprint_sigma * std::sqrt(cov2(1, 1)));

    if (s.mean2d.x() + s.extent.x() < 0.0 || s.mean2d.x() - s.extent.x() > view.width - 1 ||
        s.mean2d.y() + s.extent.y() < 0.0 || s.mean2d.y() - s.extent.y() > view.height - 1) {
        return std::nullopt;
    }

    s.opacity = scene.opacities[i];
    s.view_dir = (scene.means[i] - camera_position).normalized();
    s.basis = sh_basis(scene.sh_order, s.view_dir);
    return s;
}

} // namespace

std::vector<ProjectedSplat> project(const GaussianScene &scene, const CameraView &view,
                                    const RasterConfig &config) {
    const Mat3 w = view.rotation();
    const Vec3 t = view.translation();
    const Vec3 camera_position = view.position();

    std::vector<std::optional<ProjectedSplat>> slots(scene.size());
    parallel_for(0, static_cast<std::int64_t>(scene.size()), [&](std::int64_t i) {
        slots[i] = project_one(scene, static_cast<std::size_t>(i), view, w, t, camera_position, config);
    });

    std::vector<ProjectedSplat> out;
    for (auto &s : slots) {
        if (s) {
            out.push_back(std::move(*s));
        }
    }
    std::sort(out.begin(), out.end(), [](const ProjectedSplat &a, const ProjectedSplat &b) {
        if (a.depth != b.depth) {
            return a.depth < b.depth;
        }
        return a.gaussian_index < b.gaussian_index;
    });
    return out;
}

RasterPlan::RasterPlan(const GaussianScene &scene, const CameraView &view, const RasterConfig &config)
    : view_(view), config_(config), gaussian_count_(scene.size()), sh_order_(scene.sh_order) {
    config_.validate();
    if (const auto issues = validate_camera(view); !issues.empty()) {
        throw InputError("invalid camera: " + issues.front());
    }
    if (const auto issues = validate_scene(scene); !issues.empty()) {
        std::ostringstream msg;
        msg << "invalid scene: ";
        if (issues.front().gaussian >= 0) {
            msg << "Gaussian " << issues.front().gaussian << ": ";
        }
        msg << issues.front().what;
        throw InputError(msg.str());
    }
    if (scene.sh_order > kMaxShOrder) {
        throw InputError("render: SH orders above 3 are not supported");
    }
    splats_ = project(scene, view, config_);

    const int ts = config_.tile_size;
    tiles_x_ = (view.width + ts - 1) / ts;
    tiles_y_ = (view.height + ts - 1) / ts;

    // Tile ranges are padded by one pixel so that every pixel passing the
    // per-pixel footprint test lies in a tile that lists the splat.
    struct Range {
        int x0, x1, y0, y1;
    };
    std::vector<Range> ranges(splats_.size());
    std::vector<std::int64_t> counts(static_cast<std::size_t>(tile_count()) + 1, 0);
    for (std::size_t s = 0; s < splats_.size(); ++s) {
        const auto &p = splats_[s];
        auto tile_of = [ts](double v, int limit) {
            const double f = std::floor(v / ts);
            return static_cast<int>(std::clamp(f, 0.0, static_cast<double>(limit - 1)));
        };
        Range r{tile_of(p.mean2d.x() - p.extent.x() - 1.0, tiles_x_),
                tile_of(p.mean2d.x() + p.extent.x() + 1.0, tiles_x_),
                tile_of(p.mean2d.y() - p.extent.y() - 1.0, tiles_y_),
                tile_of(p.mean2d.y() + p.extent.y() + 1.0, tiles_y_)};
        ranges[s] = r;
        for (int ty = r.y0; ty <= r.y1; ++ty) {
            for (int tx = r.x0; tx <= r.x1; ++tx) {
                ++counts[static_cast<std::size_t>(ty) * tiles_x_ + tx + 1];
            }
        }
    }
    tile_offsets_.assign(counts.size(), 0);
    for (std::size_t i = 1; i < counts.size(); ++i) {
        tile_offsets_[i] = tile_offsets_[i - 1] + counts[i];
    }
    tile_slots_.resize(static_cast<std::size_t>(tile_offsets_.back()));
    std::vector<std::int64_t> cursor(tile_offsets_.begin(), tile_offsets_.end() - 1);
    for (std::size_t s = 0; s < splats_.size(); ++s) {
        const Range &r = ranges[s];
        for (int ty = r.y0; ty <= r.y1; ++ty) {
            for (int tx = r.x0; tx <= r.x1; ++tx) {
                tile_slots_[cursor[static_cast<std::size_t>(ty) * tiles_x_ + tx]++] = static_cast<int>(s);
            }
        }
    }
}

ChannelImage render(const RasterPlan &plan, const GaussianScene &scene) {
    if (scene.size() != plan.gaussian_count() || scene.sh_order != plan.sh_order()) {
        throw InputError("render: scene does not match the raster plan");
    }
    const auto splats = plan.splats();
    const int channels = scene.channels;
    std::vector<double> colors(splats.size() * channels);
    parallel_for(0, static_cast<std::int64_t>(splats.size()), [&](std::int64_t s) {
        const auto &p = splats[s];
        eval_color(scene.coeffs(p.gaussian_index), p.basis,
                   std::span<double>(colors.data() + s * channels, channels));
    });

    const CameraView &view = plan.view();
    ChannelImage image(view.width, view.height, channels);
    for_each_tile(plan, [&](int tile, int x0, int y0, int x1, int y1) {
        const auto slots = plan.tile_slots(tile);
        if (slots.empty()) {
            return;
        }
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
                double *out = &image.data[image.index(x, y)];
                blend_pixel(splats, slots, x, y, plan.config(), [&](std::size_t n, double weight) {
                    const double *c = &colors[static_cast<std::size_t>(slots[n]) * channels];
                    for (int k = 0; k < channels; ++k) {
                        out[k] += weight * c[k];
                    }
                });
            }
        }
    });
    return image;
}

ChannelImage render(const GaussianScene &scene, const CameraView &view, const RasterConfig &config) {
    return render(RasterPlan(scene, view, config), scene);
}

std::vector<double> render_sum_weighted(const GaussianScene &scene, const CameraView &view,
                                        const RasterConfig &config, const ChannelImage &weights) {
    check_image_matches(weights, view, "render_sum_weighted weights");
    if (weights.channels != scene.channels) {
        std::ostringstream msg;
        msg << "render_sum_weighted: weights have " << weights.channels << " channels, scene has "
            << scene.channels;
        throw InputError(msg.str());
    }
    const ChannelImage image = render(scene, view, config);
    std::vector<double> out(scene.channels, 0.0);
    for (std::size_t p = 0; p < image.pixel_count(); ++p) {
        for (int k = 0; k < scene.channels; ++k) {
            const std::size_t idx = p * scene.channels + k;
            out[k] += weights.data[idx] * image.data[idx];
        }
    }
    return out;
}

} // namespace splatcolor
