// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#include "oracle.hpp"

#include "splatcolor/errors.hpp"
#include "splatcolor/parallel.hpp"
#include "splatcolor/rasterizer.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace splatcolor;

namespace {

const double kSqrt4Pi = std::sqrt(4.0 * std::numbers::pi);

/// Camera at the origin looking down +z.
CameraView axis_view(int w, int h, double f = 100.0) {
    CameraView v;
    v.fx = v.fy = f;
    v.width = w;
    v.height = h;
    v.cx = (w - 1) / 2.0;
    v.cy = (h - 1) / 2.0;
    return v;
}

void add_constant(GaussianScene &scene, const Vec3 &mean, double scale, double opacity, double color) {
    scene.add(mean, Vec3::Constant(scale), Quat(1, 0, 0, 0), opacity);
    for (int k = 0; k < scene.channels; ++k) {
        scene.coeffs(scene.size() - 1, k)[0] = color * kSqrt4Pi;
    }
}

} // namespace

TEST(Render, EmptySceneIsBlack) {
    const ChannelImage img = render(GaussianScene(3, 3), axis_view(17, 9), {});
    EXPECT_EQ(img.data, std::vector<double>(17 * 9 * 3, 0.0));
}

TEST(Render, SingleSplatCenterIsOpacityTimesColor) {
    GaussianScene scene(0, 1);
    add_constant(scene, Vec3(0, 0, 2), 0.05, 0.6, 0.8);
    const ChannelImage img = render(scene, axis_view(11, 11), {});
    EXPECT_NEAR(img.at(5, 5), 0.6 * 0.8, 1e-15);
}

TEST(Render, TwoCoaxialSplats) {
    GaussianScene scene(0, 1);
    add_constant(scene, Vec3(0, 0, 2), 0.05, 1.0, 0.0);
    add_constant(scene, Vec3(0, 0, 1), 0.05, 0.5, 1.0);
    const ChannelImage img = render(scene, axis_view(11, 11), {});
    EXPECT_NEAR(img.at(5, 5), 0.5, 1e-15);
}

TEST(Project, ExcludesGaussiansBehindCamera) {
    GaussianScene scene(0, 1);
    add_constant(scene, Vec3(0, 0, -2), 0.1, 0.9, 1.0);
    add_constant(scene, Vec3(0, 0, 0.005), 0.1, 0.9, 1.0);
    EXPECT_TRUE(project(scene, axis_view(11, 11), {}).empty());
}

TEST(Project, OnAxisCovarianceClosedForm) {
    GaussianScene scene(0, 1);
    const double s = 0.07, z = 3.0;
    add_constant(scene, Vec3(0, 0, z), s, 0.9, 1.0);
    CameraView v = axis_view(40, 30, 80.0);
    v.fy = 95.0;
    const auto splats = project(scene, v, {});
    ASSERT_EQ(splats.size(), 1u);
    EXPECT_NEAR(splats[0].mean2d.x(), v.cx, 1e-12);
    EXPECT_NEAR(splats[0].mean2d.y(), v.cy, 1e-12);
    EXPECT_NEAR(splats[0].cov2d(0, 0), std::pow(v.fx * s / z, 2) + 0.3, 1e-12);
    EXPECT_NEAR(splats[0].cov2d(1, 1), std::pow(v.fy * s / z, 2) + 0.3, 1e-12);
    EXPECT_NEAR(splats[0].cov2d(0, 1), 0.0, 1e-12);
    EXPECT_NEAR(splats[0].depth, z, 1e-15);
}

TEST(Project, ExcludesFootprintOutsideImage) {
    GaussianScene scene(0, 1);
    const double s = 0.05, z = 2.0, f = 100.0;
    // Projected std-dev is about f*s/z = 2.5 px; put the center 10 sigma-extents off-image.
    const double sigma_px = std::sqrt(std::pow(f * s / z, 2) + 0.3);
    const double offset_px = 10.0 + 10.0 * 3.0 * sigma_px;
    add_constant(scene, Vec3(-(offset_px + 5.0) * z / f, 0, z), s, 0.9, 1.0);
    EXPECT_TRUE(project(scene, axis_view(11, 11, f), {}).empty());
}

TEST(Project, DepthTiesBreakByIndex) {
    GaussianScene scene(0, 1);
    add_constant(scene, Vec3(0.01, 0, 2), 0.05, 0.5, 1.0);
    add_constant(scene, Vec3(0, 0, 1), 0.05, 0.5, 1.0);
    add_constant(scene, Vec3(-0.01, 0, 2), 0.05, 0.5, 0.0);
    add_constant(scene, Vec3(0, 0.01, 2), 0.05, 0.5, 0.0);
    const auto splats = project(scene, axis_view(11, 11), {});
    ASSERT_EQ(splats.size(), 4u);
    EXPECT_EQ(splats[0].gaussian_index, 1);
    EXPECT_EQ(splats[1].gaussian_index, 0);
    EXPECT_EQ(splats[2].gaussian_index, 2);
    EXPECT_EQ(splats[3].gaussian_index, 3);
}

TEST(Render, MatchesBruteForceOracle) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const GaussianScene scene = oracle::random_scene(seed, 20, 3, 3);
        const CameraView view = oracle::random_view(seed + 100, 32, 32);
        const ChannelImage img = render(scene, view, {});
        const ChannelImage ref = oracle::render(scene, view, {});
        EXPECT_LE(oracle::max_relative_error(img.data, ref.data), 1e-10) << "seed " << seed;
    }
}

TEST(Render, TiledEqualsSingleTileBitExact) {
    RasterConfig one_tile;
    one_tile.tile_size = 1024;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const GaussianScene scene = oracle::random_scene(seed, 100, 3, 3);
        const CameraView view = oracle::random_view(seed + 200, 64, 64);
        for (int ts : {1, 7, 16}) {
            RasterConfig tiled;
            tiled.tile_size = ts;
            EXPECT_EQ(render(scene, view, tiled).data, render(scene, view, one_tile).data);
        }
    }
}

TEST(Render, IndependentOfThreadCount) {
    const GaussianScene scene = oracle::random_scene(9, 100, 3, 3);
    const CameraView view = oracle::random_view(9, 64, 48);
    const int before = thread_count();
    set_thread_count(1);
    const ChannelImage serial = render(scene, view, {});
    set_thread_count(0);
    const ChannelImage parallel = render(scene, view, {});
    set_thread_count(before);
    EXPECT_EQ(serial.data, parallel.data);
}

TEST(Render, EnergyBoundForColorsInUnitInterval) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        GaussianScene scene = oracle::random_scene(seed, 100, 0, 3);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (double &c : scene.sh_coeffs) {
            c = u(rng) * kSqrt4Pi;
        }
        const ChannelImage img = render(scene, oracle::random_view(seed, 48, 48), {});
        for (double v : img.data) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(Render, ColorsAreNotClamped) {
    GaussianScene scene(0, 1);
    add_constant(scene, Vec3(0, 0, 2), 0.05, 0.5, -1.0);
    EXPECT_NEAR(render(scene, axis_view(11, 11), {}).at(5, 5), -0.5, 1e-15);
}

TEST(RenderSumWeighted, EmptySceneIsZero) {
    const CameraView v = axis_view(8, 8);
    EXPECT_EQ(render_sum_weighted(GaussianScene(1, 2), v, {}, ChannelImage(8, 8, 2, 1.0)),
              std::vector<double>(2, 0.0));
}

TEST(RenderSumWeighted, MatchesDotProductWithRender) {
    const GaussianScene scene = oracle::random_scene(3, 40, 3, 3);
    const CameraView view = oracle::random_view(3, 40, 40);
    const ChannelImage weights = oracle::random_image(4, 40, 40, 3, -1.0, 1.0);
    const auto sums = render_sum_weighted(scene, view, {}, weights);
    const ChannelImage img = render(scene, view, {});
    for (int k = 0; k < 3; ++k) {
        double dot = 0.0;
        for (std::size_t p = 0; p < img.pixel_count(); ++p) {
            dot += img.data[p * 3 + k] * weights.data[p * 3 + k];
        }
        EXPECT_NEAR(sums[k], dot, 1e-12 * std::max(1.0, std::abs(dot)));
    }

    const auto self = render_sum_weighted(scene, view, {}, img);
    double sq = 0.0;
    for (double v : img.data) {
        sq += v * v;
    }
    EXPECT_NEAR(self[0] + self[1] + self[2], sq, 1e-12 * sq);
}

TEST(RenderSumWeighted, RejectsDimensionMismatch) {
    EXPECT_THROW(render_sum_weighted(GaussianScene(0, 1), axis_view(8, 8), {}, ChannelImage(8, 7, 1)),
                 InputError);
    EXPECT_THROW(render_sum_weighted(GaussianScene(0, 1), axis_view(8, 8), {}, ChannelImage(8, 8, 2)),
                 InputError);
}

TEST(RasterConfig, RejectsInvalidThresholds) {
    RasterConfig c;
    c.alpha_min = 0.995;
    EXPECT_THROW(c.validate(), InputError);
    c = {};
    c.transmittance_floor = 0.0;
    EXPECT_THROW(c.validate(), InputError);
    c = {};
    c.tile_size = 0;
    EXPECT_THROW(c.validate(), InputError);
}
