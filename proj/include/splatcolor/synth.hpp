// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splatcolor/cameras.hpp"
#include "splatcolor/rasterizer.hpp"
#include "splatcolor/scene.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace splatcolor {

enum class SynthLayout {
    /// Means uniform in a ball, arbitrary orientations.
    Volume,
    /// Flat splats tangent to a sphere of radius scene_radius, like a surface.
    Surface,
};

/// Random scenes with cameras on a sphere looking at the origin.
struct SynthConfig {
    SynthLayout layout = SynthLayout::Surface;
    int splats = 200;
    int train_views = 32;
    int test_views = 8;
    int width = 64;
    int height = 64;
    int sh_order = 3;
    int channels = 3;
    std::uint64_t seed = 1;
    /// Radius of the ball (Volume) or shell (Surface) holding the means.
    double scene_radius = 1.0;
    double camera_distance = 4.0;
    double scale_min = 0.03;
    double scale_max = 0.06;
    /// Surface layout: scale along the normal.
    double thickness = 0.01;
    double opacity_min = 0.5;
    double opacity_max = 0.95;
    /// Band-0 colors are uniform in [color_min, color_max].
    double color_min = 0.2;
    double color_max = 0.8;
    /// Standard deviation of band-l coefficients is band_falloff^l.
    double band_falloff = 0.25;
};

struct SynthFixture {
    GaussianScene scene;
    std::vector<CameraEntry> train;
    std::vector<CameraEntry> test;
    std::vector<ChannelImage> train_targets;
    std::vector<ChannelImage> test_targets;
};

GaussianScene random_scene(const SynthConfig &config, std::mt19937_64 &rng);

/// `count` cameras on a Fibonacci sphere around the origin, sized so the
/// scene ball fills most of the frame.
std::vector<CameraView> sphere_cameras(const SynthConfig &config, int count);

/// Scene, cameras, and rendered targets. Test views interleave with training
/// views on the same sphere.
SynthFixture make_synthetic_fixture(const SynthConfig &config, const RasterConfig &raster = {});

} // namespace splatcolor
