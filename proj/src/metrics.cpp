// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#include "splatcolor/metrics.hpp"

#include "splatcolor/errors.hpp"

#include <cmath>
#include <limits>

namespace splatcolor {

double psnr_from_mse(double mse) {
    if (mse <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return -10.0 * std::log10(mse);
}

ImageMetrics compare_images(const ChannelImage &image, const ChannelImage &reference) {
    if (!image.same_shape(reference) || image.data.size() != reference.data.size()) {
        throw InputError("compare_images: image shapes differ");
    }
    if (image.data.empty()) {
        throw InputError("compare_images: empty image");
    }
    double l1 = 0.0;
    double l2 = 0.0;
    for (std::size_t i = 0; i < image.data.size(); ++i) {
        const double d = image.data[i] - reference.data[i];
        l1 += std::abs(d);
        l2 += d * d;
    }
    const auto n = static_cast<double>(image.data.size());
    ImageMetrics m;
    m.l1 = l1 / n;
    m.l2 = l2 / n;
    m.psnr = psnr_from_mse(m.l2);
    return m;
}

ImageMetrics mean_metrics(std::span<const ImageMetrics> metrics) {
    ImageMetrics out;
    if (metrics.empty()) {
        return out;
    }
    for (const auto &m : metrics) {
        out.l1 += m.l1;
        out.l2 += m.l2;
        out.psnr += m.psnr;
    }
    const auto n = static_cast<double>(metrics.size());
    out.l1 /= n;
    out.l2 /= n;
    out.psnr /= n;
    return out;
}

} // namespace splatcolor
