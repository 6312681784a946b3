// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#include "splatcolor/sh.hpp"

#include "splatcolor/errors.hpp"

#include <cmath>
#include <sstream>

namespace splatcolor {

namespace {

constexpr double kC1 = 0.4886025119029199;
constexpr std::array<double, 5> kC2 = {1.0925484305920792, -1.0925484305920792,
                                       0.31539156525252005, -1.0925484305920792,
                                       0.5462742152960396};
constexpr std::array<double, 7> kC3 = {-0.5900435899266435, 2.890611442640554,
                                       -0.4570457994644658, 0.3731763325901154,
                                       -0.4570457994644658, 1.445305721320277,
                                       -0.5900435899266435};

} // namespace

ShBasis sh_basis(int order, const Vec3 &direction) {
    if (order < 0 || order > kMaxShOrder) {
        std::ostringstream msg;
        msg << "sh_basis: order " << order << " outside [0, " << kMaxShOrder << "]";
        throw InputError(msg.str());
    }
    const double norm = direction.norm();
    if (!(std::abs(norm - 1.0) <= 1e-6)) {
        std::ostringstream msg;
        msg << "sh_basis: direction has norm " << norm;
        throw InputError(msg.str());
    }

    ShBasis b;
    b.order = order;
    auto &y = b.values;
    y[0] = kShC0;
    if (order < 1) {
        return b;
    }
    const double x = direction.x(), yy = direction.y(), z = direction.z();
    y[1] = -kC1 * yy;
    y[2] = kC1 * z;
    y[3] = -kC1 * x;
    if (order < 2) {
        return b;
    }
    const double xx = x * x, y2 = yy * yy, zz = z * z;
    const double xy = x * yy, yz = yy * z, xz = x * z;
    y[4] = kC2[0] * xy;
    y[5] = kC2[1] * yz;
    y[6] = kC2[2] * (2.0 * zz - xx - y2);
    y[7] = kC2[3] * xz;
    y[8] = kC2[4] * (xx - y2);
    if (order < 3) {
        return b;
    }
    y[9] = kC3[0] * yy * (3.0 * xx - y2);
    y[10] = kC3[1] * xy * z;
    y[11] = kC3[2] * yy * (4.0 * zz - xx - y2);
    y[12] = kC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * y2);
    y[13] = kC3[4] * x * (4.0 * zz - xx - y2);
    y[14] = kC3[5] * z * (xx - y2);
    y[15] = kC3[6] * x * (xx - 3.0 * y2);
    return b;
}

void eval_color(std::span<const double> coeffs, const ShBasis &basis, std::span<double> out) {
    const std::size_t m = static_cast<std::size_t>(basis.size());
    if (coeffs.size() != out.size() * m) {
        std::ostringstream msg;
        msg << "eval_color: " << coeffs.size() << " coefficients do not match " << out.size()
            << " channels of " << m << " basis functions";
        throw InputError(msg.str());
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            acc += coeffs[k * m + j] * basis.values[j];
        }
        out[k] = acc;
    }
}

std::vector<double> eval_color(std::span<const double> coeffs, const ShBasis &basis) {
    const std::size_t m = static_cast<std::size_t>(basis.size());
    if (coeffs.empty() || coeffs.size() % m != 0) {
        std::ostringstream msg;
        msg << "eval_color: " << coeffs.size() << " coefficients is not a multiple of " << m;
        throw InputError(msg.str());
    }
    std::vector<double> out(coeffs.size() / m);
    eval_color(coeffs, basis, out);
    return out;
}

} // namespace splatcolor
