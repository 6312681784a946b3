// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splatcolor/scene.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace splatcolor {

/// One registered view of a camera manifest.
struct CameraEntry {
    std::string id;
    CameraView view;
    /// Image file name, relative to the directory holding the view images.
    std::string image;
};

/// JSON manifest:
///   {"version": 1, "views": [{"id": "...", "width": W, "height": H,
///     "fx": .., "fy": .., "cx": .., "cy": ..,
///     "world_to_camera": [[4 x 4 row-major]], "image": "name.png"}, ...]}
/// Parsing validates ids (unique, non-empty) and every camera invariant.
std::vector<CameraEntry> parse_camera_manifest(const std::string &text);
std::string format_camera_manifest(std::span<const CameraEntry> views);

std::vector<CameraEntry> read_camera_manifest(const std::filesystem::path &path);
void write_camera_manifest(std::span<const CameraEntry> views, const std::filesystem::path &path);

/// Loads each entry's image from `dir`. A missing or mismatched image raises
/// InputError naming the view id.
std::vector<ChannelImage> load_view_images(std::span<const CameraEntry> views,
                                           const std::filesystem::path &dir);

std::vector<CameraView> views_of(std::span<const CameraEntry> entries);

} // namespace splatcolor
