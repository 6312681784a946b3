// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splatcolor/scene.hpp"

#include <array>
#include <span>
#include <vector>

namespace splatcolor {

inline constexpr int kMaxShOrder = 3;
/// Y_0 = 1 / sqrt(4 pi), the constant band-0 basis function.
inline constexpr double kShC0 = 0.28209479177387814;

/// Real SH values at one direction, band-major (l = 0, then l = 1 with
/// m = -1, 0, 1, ...), using the fixed constants of splatting renderers.
struct ShBasis {
    int order = 0;
    std::array<double, 16> values{};

    int size() const { return sh_coeff_count(order); }
    double operator[](int m) const { return values[m]; }
    std::span<const double> span() const { return {values.data(), static_cast<std::size_t>(size())}; }
};

/// Throws InputError for |direction| != 1 (tolerance 1e-6) or order > 3.
ShBasis sh_basis(int order, const Vec3 &direction);

/// Per-channel dot product of `coeffs` (K blocks of basis.size() values) with
/// the basis. Linear: no offset and no clamping.
void eval_color(std::span<const double> coeffs, const ShBasis &basis, std::span<double> out);
std::vector<double> eval_color(std::span<const double> coeffs, const ShBasis &basis);

} // namespace splatcolor
