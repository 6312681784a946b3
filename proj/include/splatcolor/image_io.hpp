// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splatcolor/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace splatcolor {

/// Raw float container (.fimg) for signed or many-channel rasters:
///   8 bytes  magic "SPLTFIMG"
///   u32      version (1)
///   u32      width, height, channels
///   u32      sample type (1 = float32, 2 = float64)
///   payload  height x width x channels samples, row-major, little-endian
enum class FloatSampleType : std::uint32_t { Float32 = 1, Float64 = 2 };

std::vector<std::uint8_t> encode_float_image(const ChannelImage &image,
                                             FloatSampleType type = FloatSampleType::Float32);
ChannelImage decode_float_image(std::span<const std::uint8_t> bytes);

/// PNG (8 or 16 bit, 1-4 channels) mapped linearly to [0, 1]; no gamma handling.
ChannelImage read_png(const std::filesystem::path &path);
/// Values outside [0, 1] are clipped when clamp is set and rejected otherwise.
void write_png(const ChannelImage &image, const std::filesystem::path &path, bool clamp,
               int bit_depth = 8);

/// Dispatches on the extension: .png or .fimg.
ChannelImage read_image(const std::filesystem::path &path);
void write_image(const ChannelImage &image, const std::filesystem::path &path, bool clamp = false);

} // namespace splatcolor
