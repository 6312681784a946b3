// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#include "oracle.hpp"

#include "splatcolor/errors.hpp"
#include "splatcolor/sh.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace splatcolor;

namespace {

Vec3 random_direction(std::mt19937_64 &rng) {
    std::normal_distribution<double> n;
    return Vec3(n(rng), n(rng), n(rng)).normalized();
}

} // namespace

TEST(ShBasis, ConstantTermIsInverseSqrtFourPi) {
    std::mt19937_64 rng(1);
    const double expected = 1.0 / std::sqrt(4.0 * std::numbers::pi);
    EXPECT_NEAR(kShC0, 0.2820947917, 1e-10);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec3 d = random_direction(rng);
        EXPECT_NEAR(sh_basis(0, d)[0], expected, 1e-16);
        EXPECT_NEAR(sh_basis(3, d)[0], expected, 1e-16);
    }
    EXPECT_EQ(sh_basis(0, Vec3::UnitX()).size(), 1);
    EXPECT_EQ(sh_basis(3, Vec3::UnitX()).size(), 16);
}

TEST(ShBasis, OddBandOneTermsVanishOnZAxis) {
    const ShBasis b = sh_basis(1, Vec3::UnitZ());
    EXPECT_EQ(b[1], 0.0);
    EXPECT_EQ(b[3], 0.0);
    EXPECT_NE(b[2], 0.0);
}

TEST(ShBasis, MatchesLegendreOracle) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec3 d = random_direction(rng);
        const ShBasis b = sh_basis(3, d);
        const auto ref = oracle::sh_values(3, d);
        for (int m = 0; m < 16; ++m) {
            EXPECT_NEAR(b[m], ref[m], 1e-12) << "m=" << m;
        }
    }
}

TEST(ShBasis, OrthonormalOverSphere) {
    // Fibonacci lattice quadrature with 10k equal-area points.
    constexpr int n = 10000;
    Eigen::Matrix<double, 16, 16> gram = Eigen::Matrix<double, 16, 16>::Zero();
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / n;
        const double r = std::sqrt(1.0 - z * z);
        const Vec3 d = Vec3(r * std::cos(golden * i), r * std::sin(golden * i), z).normalized();
        const ShBasis b = sh_basis(3, d);
        Eigen::Map<const Eigen::Matrix<double, 16, 1>> y(b.values.data());
        gram += y * y.transpose();
    }
    gram *= 4.0 * std::numbers::pi / n;
    const double err = (gram - Eigen::Matrix<double, 16, 16>::Identity()).cwiseAbs().maxCoeff();
    EXPECT_LT(err, 2e-2);
}

TEST(ShBasis, RejectsBadInput) {
    EXPECT_THROW(sh_basis(1, Vec3(1, 1, 0)), InputError);
    EXPECT_THROW(sh_basis(4, Vec3::UnitZ()), InputError);
    EXPECT_THROW(sh_basis(-1, Vec3::UnitZ()), InputError);
    EXPECT_NO_THROW(sh_basis(3, Vec3(1.0 + 5e-7, 0, 0)));
}

TEST(EvalColor, ConstantTermGivesOne) {
    std::vector<double> c(16, 0.0);
    c[0] = std::sqrt(4.0 * std::numbers::pi);
    std::mt19937_64 rng(3);
    const auto out = eval_color(c, sh_basis(3, random_direction(rng)));
    ASSERT_EQ(out.size(), 1u);
    EXPECT_NEAR(out[0], 1.0, 1e-15);
}

TEST(EvalColor, ZeroAndUnitCoefficients) {
    std::mt19937_64 rng(4);
    const ShBasis b = sh_basis(3, random_direction(rng));
    EXPECT_EQ(eval_color(std::vector<double>(48, 0.0), b), std::vector<double>(3, 0.0));
    for (int m = 0; m < 16; ++m) {
        std::vector<double> e(16, 0.0);
        e[m] = 1.0;
        EXPECT_EQ(eval_color(e, b)[0], b[m]);
    }
}

TEST(EvalColor, LinearInCoefficients) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 100; ++trial) {
        const ShBasis b = sh_basis(3, random_direction(rng));
        std::vector<double> u(48), v(48), w(48);
        const double a = n(rng), c = n(rng);
        for (int j = 0; j < 48; ++j) {
            u[j] = n(rng);
            v[j] = n(rng);
            w[j] = a * u[j] + c * v[j];
        }
        const auto cu = eval_color(u, b), cv = eval_color(v, b), cw = eval_color(w, b);
        for (int k = 0; k < 3; ++k) {
            EXPECT_NEAR(cw[k], a * cu[k] + c * cv[k], 1e-12);
        }
    }
}

TEST(EvalColor, OrderZeroIsDirectionIndependent) {
    const std::vector<double> c{0.7, -0.2};
    EXPECT_EQ(eval_color(c, sh_basis(0, Vec3::UnitX())), eval_color(c, sh_basis(0, -Vec3::UnitY())));
}

TEST(EvalColor, RejectsDimensionMismatch) {
    EXPECT_THROW(eval_color(std::vector<double>(5, 0.0), sh_basis(1, Vec3::UnitZ())), InputError);
    EXPECT_THROW(eval_color(std::vector<double>(), sh_basis(1, Vec3::UnitZ())), InputError);
}
