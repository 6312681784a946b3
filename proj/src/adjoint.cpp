// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#include "splatcolor/adjoint.hpp"

#include "splatcolor/errors.hpp"
#include "splatcolor/parallel.hpp"

#include <sstream>

namespace splatcolor {

BlendSums blend_sums(const RasterPlan &plan, const ChannelImage &weights) {
    check_image_matches(weights, plan.view(), "blend weights");
    const int channels = weights.channels;
    const auto splats = plan.splats();

    // One private slot per tile-list entry, reduced afterwards in tile order.
    const auto entries = static_cast<std::size_t>(plan.total_tile_entries());
    std::vector<double> local_weight(entries, 0.0);
    std::vector<double> local_weighted(entries * channels, 0.0);

    for_each_tile(plan, [&](int tile, int x0, int y0, int x1, int y1) {
        const auto slots = plan.tile_slots(tile);
        if (slots.empty()) {
            return;
        }
        const auto base = static_cast<std::size_t>(plan.tile_list_offset(tile));
        double *lw = local_weight.data() + base;
        double *lt = local_weighted.data() + base * channels;
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
                const double *g = &weights.data[weights.index(x, y)];
                blend_pixel(splats, slots, x, y, plan.config(), [&](std::size_t n, double w) {
                    lw[n] += w;
                    for (int k = 0; k < channels; ++k) {
                        lt[n * channels + k] += w * g[k];
                    }
                });
            }
        }
    });

    BlendSums out;
    out.weight.assign(plan.gaussian_count(), 0.0);
    out.weighted.assign(plan.gaussian_count() * channels, 0.0);
    for (int tile = 0; tile < plan.tile_count(); ++tile) {
        const auto slots = plan.tile_slots(tile);
        const auto base = static_cast<std::size_t>(plan.tile_list_offset(tile));
        for (std::size_t n = 0; n < slots.size(); ++n) {
            const auto gid = static_cast<std::size_t>(splats[slots[n]].gaussian_index);
            out.weight[gid] += local_weight[base + n];
            for (int k = 0; k < channels; ++k) {
                out.weighted[gid * channels + k] += local_weighted[(base + n) * channels + k];
            }
        }
    }
    return out;
}

ViewAccumulators accumulate_view(const RasterPlan &plan, const ChannelImage &target) {
    BlendSums sums = blend_sums(plan, target);

    ViewAccumulators acc;
    acc.channels = target.channels;
    acc.basis_size = sh_coeff_count(plan.sh_order());
    acc.visibility = std::move(sums.weight);
    acc.weighted_target = std::move(sums.weighted);
    acc.basis_rows.assign(plan.gaussian_count() * acc.basis_size, 0.0);
    for (const auto &s : plan.splats()) {
        const auto b = s.basis.span();
        std::copy(b.begin(), b.end(),
                  acc.basis_rows.begin() + static_cast<std::ptrdiff_t>(s.gaussian_index) * acc.basis_size);
    }
    return acc;
}

ViewAccumulators accumulate_view(const GaussianScene &scene, const CameraView &view,
                                 const RasterConfig &config, const ChannelImage &target) {
    return accumulate_view(RasterPlan(scene, view, config), target);
}

std::optional<std::vector<double>> target_color(const ViewAccumulators &acc, std::size_t i,
                                                double visibility_epsilon) {
    if (i >= acc.size()) {
        throw InputError("target_color: Gaussian index out of range");
    }
    const double v = acc.visibility[i];
    if (!(v > visibility_epsilon)) {
        return std::nullopt;
    }
    const auto row = acc.target_row(i);
    std::vector<double> out(row.begin(), row.end());
    for (double &c : out) {
        c /= v;
    }
    return out;
}

std::vector<double> gradient_pass(const RasterPlan &plan, const ChannelImage &residual) {
    const BlendSums sums = blend_sums(plan, residual);
    const int channels = residual.channels;
    const int m = sh_coeff_count(plan.sh_order());
    std::vector<double> grad(plan.gaussian_count() * channels * m, 0.0);
    for (const auto &s : plan.splats()) {
        const auto gid = static_cast<std::size_t>(s.gaussian_index);
        for (int k = 0; k < channels; ++k) {
            const double r = 2.0 * sums.weighted[gid * channels + k];
            double *g = grad.data() + (gid * channels + k) * m;
            for (int j = 0; j < m; ++j) {
                g[j] = r * s.basis[j];
            }
        }
    }
    return grad;
}

std::vector<double> gradient_pass(const GaussianScene &scene, const CameraView &view,
                                  const RasterConfig &config, const ChannelImage &residual) {
    if (residual.channels != scene.channels) {
        std::ostringstream msg;
        msg << "gradient_pass: residual has " << residual.channels << " channels, scene has "
            << scene.channels;
        throw InputError(msg.str());
    }
    return gradient_pass(RasterPlan(scene, view, config), residual);
}

} // namespace splatcolor
