// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace splatcolor {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
/// Quaternion stored as (w, x, y, z), the rot_0..rot_3 order of splat PLY files.
using Quat = Eigen::Vector4d;

constexpr int sh_coeff_count(int order) { return (order + 1) * (order + 1); }

/// Frozen splat geometry plus a mutable bank of per-channel SH coefficients.
///
/// Covariances are kept factored as scale + rotation. Opacity is the
/// post-sigmoid value in [0, 1]. Coefficients are laid out Gaussian-major,
/// then channel, then SH index: sh_coeffs[(i * channels + k) * M + m] with
/// M = (sh_order + 1)^2.
struct GaussianScene {
    int sh_order = 0;
    int channels = 1;
    std::vector<Vec3> means;
    std::vector<Vec3> scales;
    std::vector<Quat> rotations;
    std::vector<double> opacities;
    std::vector<double> sh_coeffs;

    GaussianScene() = default;
    GaussianScene(int order, int num_channels) : sh_order(order), channels(num_channels) {}

    std::size_t size() const { return means.size(); }
    int coeffs_per_channel() const { return sh_coeff_count(sh_order); }
    std::size_t coeffs_per_gaussian() const {
        return static_cast<std::size_t>(channels) * coeffs_per_channel();
    }

    /// Appends one Gaussian with zeroed coefficients.
    void add(const Vec3 &mean, const Vec3 &scale, const Quat &rotation, double opacity);

    std::span<double> coeffs(std::size_t i) {
        return {sh_coeffs.data() + i * coeffs_per_gaussian(), coeffs_per_gaussian()};
    }
    std::span<const double> coeffs(std::size_t i) const {
        return {sh_coeffs.data() + i * coeffs_per_gaussian(), coeffs_per_gaussian()};
    }
    std::span<double> coeffs(std::size_t i, int k) {
        return coeffs(i).subspan(static_cast<std::size_t>(k) * coeffs_per_channel(),
                                 coeffs_per_channel());
    }
    std::span<const double> coeffs(std::size_t i, int k) const {
        return coeffs(i).subspan(static_cast<std::size_t>(k) * coeffs_per_channel(),
                                 coeffs_per_channel());
    }
};

/// Returns a copy of the geometry with a zeroed coefficient bank of the given
/// order and channel count.
GaussianScene with_color_layout(const GaussianScene &scene, int sh_order, int channels);

/// Rescales every quaternion to unit length. Checkpoints written by training
/// code usually carry unnormalized rotations.
void normalize_rotations(GaussianScene &scene);

/// Keeps the Gaussians listed in `indices` (in that order).
GaussianScene select(const GaussianScene &scene, std::span<const int> indices);

/// One violated invariant of a scene; gaussian is -1 for scene-level issues.
struct SceneViolation {
    int gaussian = -1;
    std::string what;
};

std::vector<SceneViolation> validate_scene(const GaussianScene &scene);

/// Sigma = R S S^T R^T. The quaternion is normalized before use; non-positive
/// scales throw InputError.
Mat3 covariance_from_scale_rotation(const Vec3 &scale, const Quat &rotation);

Mat3 rotation_from_quaternion(const Quat &rotation);

/// Pinhole camera with an OpenCV-style frame (x right, y down, z forward).
/// Pixel (x, y) samples the image plane at integer coordinates (x, y).
struct CameraView {
    Mat4 world_to_camera = Mat4::Identity();
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 1;
    int height = 1;

    Mat3 rotation() const { return world_to_camera.topLeftCorner<3, 3>(); }
    Vec3 translation() const { return world_to_camera.topRightCorner<3, 1>(); }
    Vec3 position() const { return -rotation().transpose() * translation(); }
};

/// Builds a camera at `eye` looking at `target`. `up` only needs to be
/// non-parallel to the viewing direction.
CameraView look_at(const Vec3 &eye, const Vec3 &target, const Vec3 &up, double fx, double fy,
                   int width, int height);

std::vector<std::string> validate_camera(const CameraView &view);

/// H x W x K raster, row-major with interleaved channels.
struct ChannelImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;

    ChannelImage() = default;
    ChannelImage(int w, int h, int k, double fill = 0.0)
        : width(w), height(h), channels(k),
          data(static_cast<std::size_t>(w) * h * k, fill) {}

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    std::size_t index(int x, int y, int k = 0) const {
        return (static_cast<std::size_t>(y) * width + x) * channels + k;
    }
    double &at(int x, int y, int k = 0) { return data[index(x, y, k)]; }
    double at(int x, int y, int k = 0) const { return data[index(x, y, k)]; }
    bool same_shape(const ChannelImage &other) const {
        return width == other.width && height == other.height && channels == other.channels;
    }
};

/// Throws InputError unless the image is well-formed and matches the view size.
void check_image_matches(const ChannelImage &image, const CameraView &view, const std::string &what);

} // namespace splatcolor
