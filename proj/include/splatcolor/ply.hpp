// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splatcolor/errors.hpp"
#include "splatcolor/scene.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace splatcolor {

/// Malformed or inconsistent PLY data. `byte_offset` points at the header
/// line or payload position where decoding stopped; `property` names the
/// offending vertex property when there is one.
class PlyError : public InputError {
public:
    PlyError(const std::string &message, std::size_t byte_offset, std::string property = {});

    std::size_t byte_offset() const { return byte_offset_; }
    const std::string &property() const { return property_; }

private:
    std::size_t byte_offset_;
    std::string property_;
};

/// Binary little-endian splat PLY: x y z, f_dc_0..K-1, f_rest_* (channel-major),
/// opacity (logit), scale_0..2 (log), rot_0..3 (w x y z), all float32.
/// Decoding applies sigmoid/exp; encoding inverts them. Unknown scalar
/// properties (e.g. normals) are skipped on read.
GaussianScene decode_ply(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ply(const GaussianScene &scene);

GaussianScene read_ply(const std::filesystem::path &path);
void write_ply(const GaussianScene &scene, const std::filesystem::path &path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path &path);
void write_file_bytes(const std::filesystem::path &path, std::span<const std::uint8_t> bytes);

} // namespace splatcolor
