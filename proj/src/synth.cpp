// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#include "splatcolor/synth.hpp"

#include "splatcolor/errors.hpp"
#include "splatcolor/sh.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

namespace splatcolor {

GaussianScene random_scene(const SynthConfig &config, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> log_scale(std::log(config.scale_min), std::log(config.scale_max));
    std::uniform_real_distribution<double> opacity(config.opacity_min, config.opacity_max);
    std::uniform_real_distribution<double> color(config.color_min, config.color_max);
    std::normal_distribution<double> normal(0.0, 1.0);

    GaussianScene scene(config.sh_order, config.channels);
    const int m = scene.coeffs_per_channel();
    for (int i = 0; i < config.splats; ++i) {
        Vec3 p;
        do {
            p = Vec3(unit(rng), unit(rng), unit(rng));
        } while (p.squaredNorm() > 1.0 || p.squaredNorm() < 1e-6);
        Quat q(normal(rng), normal(rng), normal(rng), normal(rng));
        q.normalize();
        Vec3 s(std::exp(log_scale(rng)), std::exp(log_scale(rng)), std::exp(log_scale(rng)));
        if (config.layout == SynthLayout::Surface) {
            // Local frame (t1, t2, n) with a random twist about the normal n.
            const Vec3 n = p.normalized();
            p = n;
            const Vec3 helper = std::abs(n.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
            const Vec3 t1 = n.cross(helper).normalized();
            const Vec3 t2 = n.cross(t1);
            const double twist = std::numbers::pi * unit(rng);
            Mat3 frame;
            frame.col(0) = std::cos(twist) * t1 + std::sin(twist) * t2;
            frame.col(1) = -std::sin(twist) * t1 + std::cos(twist) * t2;
            frame.col(2) = n;
            const Eigen::Quaterniond rq(frame);
            q = Quat(rq.w(), rq.x(), rq.y(), rq.z()).normalized();
            s.z() = config.thickness;
        }
        scene.add(config.scene_radius * p, s, q, opacity(rng));
        for (int k = 0; k < config.channels; ++k) {
            auto c = scene.coeffs(scene.size() - 1, k);
            c[0] = color(rng) / kShC0;
            for (int j = 1; j < m; ++j) {
                const int band = static_cast<int>(std::sqrt(static_cast<double>(j)));
                c[j] = std::pow(config.band_falloff, band) * normal(rng);
            }
        }
    }
    return scene;
}

std::vector<CameraView> sphere_cameras(const SynthConfig &config, int count) {
    const double r = config.scene_radius * 1.15;
    const double d = config.camera_distance;
    if (!(d > r)) {
        throw InputError("sphere_cameras: cameras must sit outside the scene ball");
    }
    const double tan_half = r / std::sqrt(d * d - r * r);
    const double fx = 0.5 * config.width / tan_half;
    const double fy = 0.5 * config.height / tan_half;

    std::vector<CameraView> out;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int n = 0; n < count; ++n) {
        const double z = 1.0 - (2.0 * n + 1.0) / count;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * n;
        const Vec3 eye = d * Vec3(rho * std::cos(phi), rho * std::sin(phi), z);
        const Vec3 up = std::abs(z) > 0.99 ? Vec3::UnitY() : Vec3::UnitZ();
        out.push_back(look_at(eye, Vec3::Zero(), up, fx, fy, config.width, config.height));
    }
    return out;
}

SynthFixture make_synthetic_fixture(const SynthConfig &config, const RasterConfig &raster) {
    std::mt19937_64 rng(config.seed);
    SynthFixture f;
    f.scene = random_scene(config, rng);

    const int total = config.train_views + config.test_views;
    const auto cameras = sphere_cameras(config, total);
    // Spread held-out views evenly through the Fibonacci ordering.
    const int stride = config.test_views > 0 ? total / config.test_views : total + 1;
    for (int n = 0; n < total; ++n) {
        const bool held_out = config.test_views > 0 && n % stride == stride / 2 &&
                              static_cast<int>(f.test.size()) < config.test_views;
        auto &list = held_out ? f.test : f.train;
        CameraEntry e;
        e.id = (held_out ? "test_" : "train_") + std::to_string(list.size());
        e.view = cameras[n];
        e.image = e.id + ".fimg";
        list.push_back(std::move(e));
    }
    for (const auto &e : f.train) {
        f.train_targets.push_back(render(f.scene, e.view, raster));
    }
    for (const auto &e : f.test) {
        f.test_targets.push_back(render(f.scene, e.view, raster));
    }
    return f;
}

} // namespace splatcolor
