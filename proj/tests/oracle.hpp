// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0
//
// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the library's projection, SH or blending
// code; the oracles are deliberately slow and straightforward.

#pragma once

#include "splatcolor/rasterizer.hpp"
#include "splatcolor/scene.hpp"
#include "splatcolor/synth.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace splatcolor::oracle {

/// Real SH with the Condon-Shortley phase, band-major, m = -l..l, via the
/// associated Legendre functions of the standard library.
inline std::vector<double> sh_values(int order, const Vec3 &d) {
    const double theta = std::acos(std::clamp(d.z(), -1.0, 1.0));
    const double phi = std::atan2(d.y(), d.x());
    std::vector<double> out;
    for (int l = 0; l <= order; ++l) {
        for (int m = -l; m <= l; ++m) {
            const int am = std::abs(m);
            double ratio = 1.0;
            for (int f = l - am + 1; f <= l + am; ++f) {
                ratio /= f;
            }
            const double k = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * ratio);
            // std::assoc_legendre omits the (-1)^m phase.
            const double p = ((am % 2) ? -1.0 : 1.0) * std::assoc_legendre(l, am, std::cos(theta));
            if (m == 0) {
                out.push_back(k * p);
            } else if (m > 0) {
                out.push_back(std::numbers::sqrt2 * k * p * std::cos(m * phi));
            } else {
                out.push_back(std::numbers::sqrt2 * k * p * std::sin(am * phi));
            }
        }
    }
    return out;
}

struct Splat {
    int index = 0;
    double depth = 0.0;
    Vec2 mean = Vec2::Zero();
    Mat2 cov_inv = Mat2::Identity();
    double opacity = 0.0;
    std::vector<double> basis;
    /// Per-channel color at the splat's view direction.
    std::vector<double> color;
};

/// Every Gaussian in front of the near plane, sorted by (depth, index).
inline std::vector<Splat> splats(const GaussianScene &scene, const CameraView &view,
                                 const RasterConfig &config) {
    const Mat3 w = view.world_to_camera.topLeftCorner<3, 3>();
    const Vec3 t = view.world_to_camera.topRightCorner<3, 1>();
    const Vec3 eye = -w.transpose() * t;
    const int nb = sh_coeff_count(scene.sh_order);
    std::vector<Splat> out;
    for (std::size_t i = 0; i < scene.size(); ++i) {
        const Vec3 p = w * scene.means[i] + t;
        if (p.z() <= config.near_plane) {
            continue;
        }
        const Quat &q = scene.rotations[i];
        const Mat3 r = Eigen::Quaterniond(q[0], q[1], q[2], q[3]).normalized().toRotationMatrix();
        const Mat3 s2 = scene.scales[i].array().square().matrix().asDiagonal();
        const Mat3 cov3 = r * s2 * r.transpose();
        Eigen::Matrix<double, 2, 3> jac;
        jac << view.fx / p.z(), 0.0, -view.fx * p.x() / (p.z() * p.z()), 0.0, view.fy / p.z(),
            -view.fy * p.y() / (p.z() * p.z());
        Mat2 cov2 = jac * w * cov3 * w.transpose() * jac.transpose();
        cov2 += 0.3 * Mat2::Identity();

        Splat s;
        s.index = static_cast<int>(i);
        s.depth = p.z();
        s.mean = Vec2(view.fx * p.x() / p.z() + view.cx, view.fy * p.y() / p.z() + view.cy);
        s.cov_inv = cov2.inverse();
        s.opacity = scene.opacities[i];
        s.basis = sh_values(scene.sh_order, (scene.means[i] - eye).normalized());
        for (int k = 0; k < scene.channels; ++k) {
            double c = 0.0;
            for (int m = 0; m < nb; ++m) {
                c += scene.sh_coeffs[(i * scene.channels + k) * nb + m] * s.basis[m];
            }
            s.color.push_back(c);
        }
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(), [](const Splat &a, const Splat &b) {
        return a.depth < b.depth || (a.depth == b.depth && a.index < b.index);
    });
    return out;
}

/// Calls visit(splat, T * alpha) for each contributor of pixel (x, y).
template <class Visit>
void blend(const std::vector<Splat> &list, int x, int y, const RasterConfig &config, Visit &&visit) {
    double transmittance = 1.0;
    for (const Splat &s : list) {
        const Vec2 delta = Vec2(x, y) - s.mean;
        const double maha = delta.dot(s.cov_inv * delta);
        if (maha > config.footprint_sigma * config.footprint_sigma) {
            continue;
        }
        const double alpha = std::min(config.alpha_max, s.opacity * std::exp(-0.5 * maha));
        if (alpha < config.alpha_min) {
            continue;
        }
        visit(s, transmittance * alpha);
        transmittance *= 1.0 - alpha;
        if (transmittance < config.transmittance_floor) {
            break;
        }
    }
}

inline ChannelImage render(const GaussianScene &scene, const CameraView &view,
                           const RasterConfig &config) {
    const auto list = splats(scene, view, config);
    ChannelImage img(view.width, view.height, scene.channels);
    for (int y = 0; y < view.height; ++y) {
        for (int x = 0; x < view.width; ++x) {
            blend(list, x, y, config, [&](const Splat &s, double weight) {
                for (int k = 0; k < scene.channels; ++k) {
                    img.at(x, y, k) += weight * s.color[k];
                }
            });
        }
    }
    return img;
}

struct Accumulation {
    std::vector<double> visibility;
    /// Gaussian-major, then channel.
    std::vector<double> weighted_target;
};

inline Accumulation accumulate(const GaussianScene &scene, const CameraView &view,
                               const RasterConfig &config, const ChannelImage &target) {
    const auto list = splats(scene, view, config);
    Accumulation acc;
    acc.visibility.assign(scene.size(), 0.0);
    acc.weighted_target.assign(scene.size() * target.channels, 0.0);
    for (int y = 0; y < view.height; ++y) {
        for (int x = 0; x < view.width; ++x) {
            blend(list, x, y, config, [&](const Splat &s, double weight) {
                acc.visibility[s.index] += weight;
                for (int k = 0; k < target.channels; ++k) {
                    acc.weighted_target[s.index * target.channels + k] += weight * target.at(x, y, k);
                }
            });
        }
    }
    return acc;
}

/// d/dc of sum((render - target)^2) given residual = render - target.
inline std::vector<double> gradient(const GaussianScene &scene, const CameraView &view,
                                    const RasterConfig &config, const ChannelImage &residual) {
    const auto list = splats(scene, view, config);
    const int nb = sh_coeff_count(scene.sh_order);
    std::vector<double> grad(scene.size() * scene.channels * nb, 0.0);
    for (int y = 0; y < view.height; ++y) {
        for (int x = 0; x < view.width; ++x) {
            blend(list, x, y, config, [&](const Splat &s, double weight) {
                for (int k = 0; k < scene.channels; ++k) {
                    for (int m = 0; m < nb; ++m) {
                        grad[(s.index * scene.channels + k) * nb + m] +=
                            2.0 * residual.at(x, y, k) * weight * s.basis[m];
                    }
                }
            });
        }
    }
    return grad;
}

/// Random scene of `n` Gaussians filling a ball, with random coefficients.
inline GaussianScene random_scene(std::uint64_t seed, int n, int order, int channels,
                                  double scale_max = 0.25) {
    SynthConfig sc;
    sc.layout = SynthLayout::Volume;
    sc.splats = n;
    sc.sh_order = order;
    sc.channels = channels;
    sc.scale_min = 0.05;
    sc.scale_max = scale_max;
    sc.opacity_min = 0.3;
    sc.opacity_max = 0.95;
    std::mt19937_64 rng(seed);
    return splatcolor::random_scene(sc, rng);
}

/// Camera at distance 4 from the origin along a random direction.
inline CameraView random_view(std::uint64_t seed, int width, int height) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Vec3 eye;
    do {
        eye = Vec3(normal(rng), normal(rng), normal(rng));
    } while (eye.norm() < 1e-3);
    eye = 4.0 * eye.normalized();
    const Vec3 up = std::abs(eye.normalized().z()) > 0.9 ? Vec3::UnitX() : Vec3::UnitZ();
    const double f = 1.6 * width;
    return look_at(eye, Vec3::Zero(), up, f, f, width, height);
}

inline ChannelImage random_image(std::uint64_t seed, int width, int height, int channels,
                                 double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    ChannelImage img(width, height, channels);
    for (double &v : img.data) {
        v = u(rng);
    }
    return img;
}

/// max over entries of |a - b| / max(|a|, |b|); entries equal to zero in both are skipped.
inline double max_relative_error(const std::vector<double> &a, const std::vector<double> &b) {
    double worst = a.size() == b.size() ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        const double scale = std::max(std::abs(a[i]), std::abs(b[i]));
        if (scale > 0.0) {
            worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
        }
    }
    return worst;
}

} // namespace splatcolor::oracle
