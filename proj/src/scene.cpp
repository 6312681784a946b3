// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#include "splatcolor/scene.hpp"

#include "splatcolor/errors.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <sstream>

namespace splatcolor {

void GaussianScene::add(const Vec3 &mean, const Vec3 &scale, const Quat &rotation, double opacity) {
    means.push_back(mean);
    scales.push_back(scale);
    rotations.push_back(rotation);
    opacities.push_back(opacity);
    sh_coeffs.resize(sh_coeffs.size() + coeffs_per_gaussian(), 0.0);
}

GaussianScene with_color_layout(const GaussianScene &scene, int sh_order, int channels) {
    GaussianScene out(sh_order, channels);
    out.means = scene.means;
    out.scales = scene.scales;
    out.rotations = scene.rotations;
    out.opacities = scene.opacities;
    out.sh_coeffs.assign(scene.size() * out.coeffs_per_gaussian(), 0.0);
    return out;
}

void normalize_rotations(GaussianScene &scene) {
    for (auto &q : scene.rotations) {
        const double n = q.norm();
        if (n > 0.0) {
            q /= n;
        }
    }
}

GaussianScene select(const GaussianScene &scene, std::span<const int> indices) {
    GaussianScene out(scene.sh_order, scene.channels);
    const std::size_t stride = scene.coeffs_per_gaussian();
    out.sh_coeffs.reserve(indices.size() * stride);
    for (const int i : indices) {
        out.means.push_back(scene.means[i]);
        out.scales.push_back(scene.scales[i]);
        out.rotations.push_back(scene.rotations[i]);
        out.opacities.push_back(scene.opacities[i]);
        const auto c = scene.coeffs(i);
        out.sh_coeffs.insert(out.sh_coeffs.end(), c.begin(), c.end());
    }
    return out;
}

std::vector<SceneViolation> validate_scene(const GaussianScene &scene) {
    std::vector<SceneViolation> out;
    if (scene.sh_order < 0) {
        out.push_back({-1, "sh_order must be non-negative"});
    }
    if (scene.channels < 1) {
        out.push_back({-1, "channels must be at least 1"});
    }
    const std::size_t n = scene.means.size();
    if (scene.scales.size() != n || scene.rotations.size() != n || scene.opacities.size() != n) {
        out.push_back({-1, "per-Gaussian arrays have different lengths"});
        return out;
    }
    if (!out.empty()) {
        return out;
    }
    if (scene.sh_coeffs.size() != n * scene.coeffs_per_gaussian()) {
        std::ostringstream msg;
        msg << "sh_coeffs holds " << scene.sh_coeffs.size() << " values, expected " << n << " x "
            << scene.channels << " x " << scene.coeffs_per_channel();
        out.push_back({-1, msg.str()});
    }
    for (std::size_t i = 0; i < n; ++i) {
        const int gi = static_cast<int>(i);
        if (!scene.means[i].allFinite()) {
            out.push_back({gi, "mean is not finite"});
        }
        const Vec3 &s = scene.scales[i];
        if (!(s.x() > 0.0 && s.y() > 0.0 && s.z() > 0.0) || !s.allFinite()) {
            out.push_back({gi, "scale must be strictly positive"});
        }
        const double qn = scene.rotations[i].norm();
        if (!(std::abs(qn - 1.0) <= 1e-6)) {
            std::ostringstream msg;
            msg << "quaternion norm " << qn << " is not 1";
            out.push_back({gi, msg.str()});
        }
        const double a = scene.opacities[i];
        if (!(a >= 0.0 && a <= 1.0)) {
            std::ostringstream msg;
            msg << "opacity " << a << " outside [0, 1]";
            out.push_back({gi, msg.str()});
        }
    }
    return out;
}

Mat3 rotation_from_quaternion(const Quat &rotation) {
    const Quat q = rotation.normalized();
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Mat3 r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

Mat3 covariance_from_scale_rotation(const Vec3 &scale, const Quat &rotation) {
    if (!(scale.x() > 0.0 && scale.y() > 0.0 && scale.z() > 0.0)) {
        throw InputError("covariance_from_scale_rotation: scales must be strictly positive");
    }
    if (!(rotation.norm() > 0.0)) {
        throw InputError("covariance_from_scale_rotation: zero quaternion");
    }
    const Mat3 m = rotation_from_quaternion(rotation) * scale.asDiagonal();
    Mat3 cov = m * m.transpose();
    // Exact symmetry; the product above can differ in the last bit.
    cov(1, 0) = cov(0, 1);
    cov(2, 0) = cov(0, 2);
    cov(2, 1) = cov(1, 2);
    return cov;
}

CameraView look_at(const Vec3 &eye, const Vec3 &target, const Vec3 &up, double fx, double fy,
                   int width, int height) {
    const Vec3 forward = (target - eye).normalized();
    Vec3 right = forward.cross(up);
    if (right.norm() < 1e-9) {
        throw InputError("look_at: up vector is parallel to the viewing direction");
    }
    right.normalize();
    const Vec3 down = forward.cross(right);

    CameraView view;
    Mat3 r;
    r.row(0) = right.transpose();
    r.row(1) = down.transpose();
    r.row(2) = forward.transpose();
    view.world_to_camera.setIdentity();
    view.world_to_camera.topLeftCorner<3, 3>() = r;
    view.world_to_camera.topRightCorner<3, 1>() = -r * eye;
    view.fx = fx;
    view.fy = fy;
    view.width = width;
    view.height = height;
    view.cx = 0.5 * (width - 1);
    view.cy = 0.5 * (height - 1);
    return view;
}

std::vector<std::string> validate_camera(const CameraView &view) {
    std::vector<std::string> out;
    const Mat3 r = view.rotation();
    if (!((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-6)) {
        out.emplace_back("rotation block of world_to_camera is not orthonormal");
    }
    if (!view.world_to_camera.allFinite()) {
        out.emplace_back("world_to_camera is not finite");
    }
    if (view.width < 1 || view.height < 1) {
        out.emplace_back("image dimensions must be positive");
    }
    if (!(view.fx > 0.0 && view.fy > 0.0)) {
        out.emplace_back("focal lengths must be positive");
    }
    if (!(view.cx >= 0.0 && view.cx < view.width && view.cy >= 0.0 && view.cy < view.height)) {
        out.emplace_back("principal point outside the image");
    }
    return out;
}

void check_image_matches(const ChannelImage &image, const CameraView &view, const std::string &what) {
    if (image.width != view.width || image.height != view.height) {
        std::ostringstream msg;
        msg << what << ": image is " << image.width << "x" << image.height << ", view expects "
            << view.width << "x" << view.height;
        throw InputError(msg.str());
    }
    if (image.channels < 1 || image.data.size() != image.pixel_count() * image.channels) {
        throw InputError(what + ": image data length does not match its dimensions");
    }
    for (const double v : image.data) {
        if (!std::isfinite(v)) {
            throw InputError(what + ": image contains non-finite values");
        }
    }
}

} // namespace splatcolor
