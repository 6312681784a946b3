// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splatcolor/rasterizer.hpp"
#include "splatcolor/scene.hpp"

#include <optional>
#include <span>
#include <vector>

namespace splatcolor {

/// Below this a Gaussian counts as not seen by a view.
inline constexpr double kVisibilityEpsilon = 1e-8;

/// Per-view derivative quantities of the image functionals, one entry per
/// Gaussian of the scene (zero for Gaussians the view does not see).
struct ViewAccumulators {
    int channels = 0;
    int basis_size = 0;
    /// Sum over pixels of T * alpha.
    std::vector<double> visibility;
    /// Sum over pixels of T * alpha * target, Gaussian-major then channel.
    std::vector<double> weighted_target;
    /// SH basis at the Gaussian's view direction, Gaussian-major.
    std::vector<double> basis_rows;

    std::size_t size() const { return visibility.size(); }
    std::span<const double> target_row(std::size_t i) const {
        return {weighted_target.data() + i * channels, static_cast<std::size_t>(channels)};
    }
    std::span<const double> basis_row(std::size_t i) const {
        return {basis_rows.data() + i * basis_size, static_cast<std::size_t>(basis_size)};
    }
};

/// Per-Gaussian sums of blend weights, and of blend weights times `weights`,
/// over every pixel of the plan's view. Reductions run in a fixed tile order,
/// so the result does not depend on the thread count.
struct BlendSums {
    std::vector<double> weight;
    std::vector<double> weighted;
};
BlendSums blend_sums(const RasterPlan &plan, const ChannelImage &weights);

/// Visibility, visibility-weighted target, and basis rows of one view.
ViewAccumulators accumulate_view(const RasterPlan &plan, const ChannelImage &target);
ViewAccumulators accumulate_view(const GaussianScene &scene, const CameraView &view,
                                 const RasterConfig &config, const ChannelImage &target);

/// Visibility-weighted mean target color of Gaussian i, or nullopt when the
/// Gaussian is invisible in this view.
std::optional<std::vector<double>> target_color(const ViewAccumulators &acc, std::size_t i,
                                                double visibility_epsilon = kVisibilityEpsilon);

/// Gradient of sum((img - gt)^2) with respect to every SH coefficient, given
/// residual = img - gt. Layout matches GaussianScene::sh_coeffs.
std::vector<double> gradient_pass(const RasterPlan &plan, const ChannelImage &residual);
std::vector<double> gradient_pass(const GaussianScene &scene, const CameraView &view,
                                  const RasterConfig &config, const ChannelImage &residual);

} // namespace splatcolor
