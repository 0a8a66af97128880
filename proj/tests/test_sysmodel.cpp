/*
 Copyright 2026 The hsnorm Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace hsn;
using hsn::test::rel;

TEST(StateSpace, DimensionErrors) {
    const auto expect_dim = [](Matrix A, Matrix B, Matrix C) {
        try {
            StateSpaceSystem s(std::move(A), std::move(B), std::move(C));
            ADD_FAILURE() << "expected a dimension error";
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::dimension);
        }
    };
    expect_dim(Matrix::Zero(2, 3), Matrix::Zero(2, 1), Matrix::Zero(1, 2));
    expect_dim(Matrix::Zero(2, 2), Matrix::Zero(3, 1), Matrix::Zero(1, 2));
    expect_dim(Matrix::Zero(2, 2), Matrix::Zero(2, 1), Matrix::Zero(1, 3));
}

TEST(StateSpace, Oscillatory4Spectrum) {
    const auto ev = eig_general(test::oscillatory4_system().A());
    const std::vector<Complex> expected{{-1.9875, 0.0}, {-0.6748, 0.0}, {-0.5409, -1.2631}, {-0.5409, 1.2631}};
    ASSERT_EQ(ev.size(), 4u);
    for (const auto& z : expected) {
        double best = 1e300;
        for (const auto& w : ev) best = std::min(best, std::abs(z - w));
        EXPECT_LT(best, 2e-3) << z;
    }
}

TEST(StateSpace, ValidationFlags) {
    const auto rep = validate(test::oscillatory4_system());
    EXPECT_TRUE(rep.hurwitz);
    EXPECT_TRUE(rep.cascade_ready());
    const auto zero = validate(test::zero_input_system());
    EXPECT_FALSE(zero.controllable);
    EXPECT_FALSE(zero.cascade_ready());
    Matrix A = Matrix::Identity(1, 1);
    EXPECT_FALSE(validate({A, A, A}).hurwitz);
}

TEST(Gramians, ScalarValues) {
    const auto sys = test::scalar_system(2.0, 3.0, 0.5);
    EXPECT_NEAR(controllability_gramian(sys)(0, 0), 9.0 / 4.0, 1e-15);
    EXPECT_NEAR(observability_gramian(sys)(0, 0), 0.25 / 4.0, 1e-15);
    // |F|_2^2 = (cb)^2 / (2a)
    EXPECT_NEAR(h2_norm(sys) * h2_norm(sys), 2.25 / 4.0, 1e-14);
}

TEST(Gramians, DualH2Agrees) {
    for (const auto& sys : {test::oscillatory4_system(), test::random8_system()}) {
        const double primal = frobenius_inner(sys.output_weight(), controllability_gramian(sys));
        const double dual = frobenius_inner(sys.input_weight(), observability_gramian(sys));
        EXPECT_LT(rel(primal, dual), 1e-10);
    }
}

TEST(Transfer, ScalarValueAndPole) {
    const auto sys = test::scalar_system();
    const CMatrix F = transfer(sys, Complex(0.0, 2.0));
    EXPECT_NEAR(std::abs(F(0, 0) - 1.0 / Complex(1.0, 2.0)), 0.0, 1e-15);
    try {
        (void)transfer(sys, Complex(-1.0, 0.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::domain);
    }
}

TEST(Transfer, SpectralDensityRealization) {
    const auto sys = test::oscillatory4_system();
    const auto sd = spectral_density_realization(sys);
    for (double w : {0.0, 0.3, 1.2, 7.0}) {
        const CMatrix S = spectral_density(sys, w);
        const CMatrix R = transfer(sd, Complex(0.0, w));
        EXPECT_LT((S - R).norm() / S.norm(), 1e-10) << "w = " << w;
    }
}

TEST(Transfer, ConjugateRealization) {
    const auto sys = test::oscillatory4_system();
    const auto conj = conjugate_realization(sys);
    const Complex s(0.0, 0.8);
    const CMatrix lhs = transfer(conj, s);
    const CMatrix rhs = transfer(sys, -std::conj(s)).adjoint();
    EXPECT_LT((lhs - rhs).norm(), 1e-12);
}

TEST(Covariance, ScalarKernel) {
    const auto sys = test::scalar_system();
    for (double t : {0.0, 0.5, 2.0}) {
        EXPECT_NEAR(covariance_kernel(sys, t)(0, 0), 0.5 * std::exp(-t), 1e-14);
        EXPECT_NEAR(covariance_kernel(sys, -t)(0, 0), 0.5 * std::exp(-t), 1e-14);
    }
}

TEST(Covariance, TransposeSymmetry) {
    const auto sys = test::oscillatory4_system();
    EXPECT_LT((covariance_kernel(sys, -0.7) - covariance_kernel(sys, 0.7).transpose()).norm(), 1e-14);
}

// ---------------------------------------------------------------------------
// H-infinity
// ---------------------------------------------------------------------------

TEST(Hinf, ScalarPeakAtZero) {
    const auto br = hinf_norm(test::scalar_system(2.0, 3.0, 1.0));
    EXPECT_NEAR(br.lo, 1.5, 1e-12);
    EXPECT_LE(br.lo, br.hi);
    EXPECT_LE(br.hi - br.lo, 1e-9 * br.hi);
}

TEST(Hinf, BracketDominatesDenseGrid) {
    for (const auto& sys : {test::oscillatory4_system(), test::random8_system()}) {
        const auto br = hinf_norm(sys);
        double grid = 0.0;
        for (double w : detail::log_grid(1e-4, 1e4, 5000)) grid = std::max(grid, gain_at(sys, w));
        EXPECT_LE(grid, br.hi * (1.0 + 1e-12));
        EXPECT_GE(br.lo, grid * (1.0 - 1e-6));
        EXPECT_NEAR(gain_at(sys, br.peak_frequency), br.lo, 1e-12 * br.lo);
    }
}

TEST(Hinf, ZeroSystemAndNonHurwitz) {
    const auto br = hinf_norm(test::zero_input_system());
    EXPECT_EQ(br.hi, 0.0);
    const Matrix one = Matrix::Identity(1, 1);
    try {
        (void)hinf_norm({one, one, one});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::precondition);
    }
}

TEST(Hinf, OutputScalingIsLinear) {
    const auto sys = test::oscillatory4_system();
    const double base = hinf_norm(sys).lo;
    EXPECT_NEAR(hinf_norm(scale_output(sys, 3.0)).lo, 3.0 * base, 1e-9 * base);
    EXPECT_NEAR(h2_norm(scale_output(sys, 3.0)), 3.0 * h2_norm(sys), 1e-12);
}

TEST(Hinf, RandomSystemsBoundH2Density) {
    // The H2 norm squared is the average of tr S(w) <= min(p, m) hinf^2 over frequency; check pointwise gains.
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 15; ++trial) {
        const auto sys = test::random_case(rng);
        const auto br = hinf_norm(sys);
        for (double w : {0.0, 0.1, 1.0, 10.0}) EXPECT_LE(gain_at(sys, w), br.hi * (1.0 + 1e-12));
    }
}
