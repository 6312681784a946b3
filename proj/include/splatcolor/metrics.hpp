// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splatcolor/scene.hpp"

#include <span>

namespace splatcolor {

/// Image error against a reference with peak value 1. l1 and l2 are means
/// over all pixels and channels; psnr is +infinity for identical images.
struct ImageMetrics {
    double l1 = 0.0;
    double l2 = 0.0;
    double psnr = 0.0;
};

double psnr_from_mse(double mse);

/// Throws InputError when the shapes differ.
ImageMetrics compare_images(const ChannelImage &image, const ChannelImage &reference);

/// Mean of each column; PSNR is averaged per image (infinite if any is).
ImageMetrics mean_metrics(std::span<const ImageMetrics> metrics);

} // namespace splatcolor
