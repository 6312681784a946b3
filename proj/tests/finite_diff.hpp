// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0
//
// Central finite differences of rendered functionals with respect to SH
// coefficients. Differences are taken pixel by pixel before summing so that
// pixels a coefficient does not touch cancel exactly.

#pragma once

#include "splatcolor/rasterizer.hpp"
#include "splatcolor/scene.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace splatcolor::fd {

struct Derivatives {
    int channels = 0;
    int basis_size = 0;
    /// sqrt(4 pi) * d(sum img_0)/dc_{i,0,0}.
    std::vector<double> visibility;
    /// d(sum img_0)/dc_{i,0,m} divided by the finite-difference visibility.
    std::vector<double> basis_rows;
    /// sqrt(4 pi) * d(sum img_k * target_k)/dc_{i,k,0}.
    std::vector<double> weighted_target;
    /// d(sum (img - target)^2)/dc_{i,k,m}.
    std::vector<double> gradient;
};

inline Derivatives central_differences(const GaussianScene &scene, const CameraView &view,
                                       const RasterConfig &config, const ChannelImage &target,
                                       double eps) {
    const int nk = scene.channels;
    const int nb = scene.coeffs_per_channel();
    const std::size_t n = scene.size();
    const double sqrt4pi = std::sqrt(4.0 * std::numbers::pi);

    Derivatives out;
    out.channels = nk;
    out.basis_size = nb;
    out.visibility.assign(n, 0.0);
    out.basis_rows.assign(n * nb, 0.0);
    out.weighted_target.assign(n * nk, 0.0);
    out.gradient.assign(n * nk * nb, 0.0);
    std::vector<double> d_sum(n * nk * nb, 0.0);

#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        GaussianScene probe = scene;
        for (int k = 0; k < nk; ++k) {
            for (int m = 0; m < nb; ++m) {
                double &c = probe.coeffs(i, k)[m];
                const double c0 = c;
                c = c0 + eps;
                const ChannelImage plus = render(probe, view, config);
                c = c0 - eps;
                const ChannelImage minus = render(probe, view, config);
                c = c0;

                double s = 0.0, sw = 0.0, sl = 0.0;
                for (std::size_t p = 0; p < plus.pixel_count(); ++p) {
                    const std::size_t at = p * nk + k;
                    const double diff = plus.data[at] - minus.data[at];
                    if (diff == 0.0) {
                        continue;
                    }
                    const double rp = plus.data[at] - target.data[at];
                    const double rm = minus.data[at] - target.data[at];
                    s += diff;
                    sw += diff * target.data[at];
                    sl += rp * rp - rm * rm;
                }
                const std::size_t idx = (i * nk + k) * nb + m;
                d_sum[idx] = s / (2.0 * eps);
                out.gradient[idx] = sl / (2.0 * eps);
                if (m == 0) {
                    out.weighted_target[i * nk + k] = sqrt4pi * sw / (2.0 * eps);
                }
            }
        }
        out.visibility[i] = sqrt4pi * d_sum[i * nk * nb];
        for (int m = 0; m < nb; ++m) {
            out.basis_rows[i * nb + m] =
                out.visibility[i] > 0.0 ? d_sum[i * nk * nb + m] / out.visibility[i] : 0.0;
        }
    }
    return out;
}

} // namespace splatcolor::fd
