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
using hsn::test::gaussian;
using hsn::test::rel;

namespace {

Matrix stable_matrix(int n, std::mt19937_64& rng, double margin = 0.5) {
    Matrix A = gaussian(n, n, rng);
    double abscissa = -1e300;
    for (const auto& z : eig_general(A)) abscissa = std::max(abscissa, z.real());
    A.diagonal().array() -= abscissa + margin;
    return A;
}

}  // namespace

// ---------------------------------------------------------------------------
// Lyapunov
// ---------------------------------------------------------------------------

TEST(Lyapunov, ScalarClosedForm) {
    // -2a v + u = 0
    const Matrix V = solve_lyapunov(Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 1.0));
    EXPECT_NEAR(V(0, 0), 0.5, 1e-15);
}

TEST(Lyapunov, MatchesKroneckerOracleOnRandomSystems) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + trial % 7;
        const Matrix A = stable_matrix(n, rng);
        const Matrix G = gaussian(n, n, rng);
        const Matrix U = G * G.transpose();
        const Matrix V = solve_lyapunov(A, U);
        EXPECT_LT(rel(V, solve_lyapunov_kronecker(A, U)), 1e-10) << "trial " << trial;
        EXPECT_LT((A * V + V * A.transpose() + U).norm(), 1e-10 * std::max(1.0, U.norm()));
    }
}

TEST(Lyapunov, NonsymmetricRightHandSide) {
    std::mt19937_64 rng(11);
    const Matrix A = stable_matrix(5, rng);
    const Matrix U = gaussian(5, 5, rng);
    LyapunovSolver L(A);
    EXPECT_LT(rel(L.solve(U), solve_lyapunov_kronecker(A, U)), 1e-10);
}

TEST(Lyapunov, SolutionIsPsdForPsdInput) {
    std::mt19937_64 rng(13);
    const Matrix A = stable_matrix(6, rng);
    const Matrix B = gaussian(6, 2, rng);
    const auto [lo, hi] = symmetric_eig_range(solve_lyapunov(A, B * B.transpose()));
    EXPECT_GE(lo, -1e-12 * hi);
}

TEST(Lyapunov, RejectsNonHurwitz) {
    Matrix A(2, 2);
    A << 0.1, 1.0, 0.0, -1.0;
    try {
        LyapunovSolver L(A);
        FAIL() << "expected a precondition error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::precondition);
    }
}

TEST(Lyapunov, RejectsShapeMismatch) {
    LyapunovSolver L(-Matrix::Identity(3, 3));
    try {
        (void)L.solve(Matrix::Identity(2, 2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::dimension);
    }
}

TEST(Lyapunov, RejectsAsymmetricSymmetricContract) {
    Matrix U(2, 2);
    U << 1.0, 0.5, 0.0, 1.0;
    try {
        (void)solve_lyapunov(-Matrix::Identity(2, 2), U);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::precondition);
    }
}

TEST(Lyapunov, BackwardErrorIsRoundoffSized) {
    std::mt19937_64 rng(17);
    const Matrix A = stable_matrix(8, rng, 0.05);
    const Matrix U = Matrix::Identity(8, 8);
    LyapunovSolver L(A);
    EXPECT_LT(L.backward_error(U, L.solve_unchecked(U)), 1e-13);
}

// ---------------------------------------------------------------------------
// Matrix exponential and functions
// ---------------------------------------------------------------------------

TEST(Expm, DiagonalAndNilpotent) {
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = -1.0;
    D(1, 1) = 2.0;
    const Matrix E = expm(D);
    EXPECT_NEAR(E(0, 0), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(E(1, 1), std::exp(2.0), 1e-13);
    Matrix N = Matrix::Zero(2, 2);
    N(0, 1) = 3.0;
    const Matrix EN = expm(N);
    EXPECT_NEAR(EN(0, 1), 3.0, 1e-15);
    EXPECT_NEAR(EN(0, 0), 1.0, 1e-15);
}

TEST(Expm, GroupProperty) {
    std::mt19937_64 rng(19);
    const Matrix M = 0.5 * gaussian(4, 4, rng);
    EXPECT_LT(rel(expm(M) * expm(-M), Matrix::Identity(4, 4)), 1e-13);
    EXPECT_LT(rel(expm(M) * expm(M), expm(2.0 * M)), 1e-12);
}

TEST(Expm, OverflowIsNumericError) {
    try {
        (void)expm(Matrix::Constant(1, 1, 1000.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::numeric);
    }
}

TEST(HermFunction, SquareRootSquares) {
    std::mt19937_64 rng(23);
    const Matrix G = gaussian(4, 4, rng);
    const CMatrix H = (G * G.transpose()).cast<Complex>();
    const CMatrix S = herm_function(H, [](double x) { return std::sqrt(x); });
    EXPECT_LT((S * S - H).norm() / H.norm(), 1e-12);
    EXPECT_NEAR(herm_trace_function(H, [](double x) { return x; }), H.trace().real(), 1e-10 * H.norm());
}

TEST(HermFunction, DomainAndPsdErrors) {
    CMatrix H = CMatrix::Identity(2, 2);
    try {
        (void)herm_function(H, [](double x) { return std::log(1.0 - x); });
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::domain);
    }
    H(1, 1) = -1.0;
    try {
        (void)herm_function(H, [](double x) { return x; });
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::not_psd);
    }
}

TEST(PsdFactor, ReconstructsAndDropsRank) {
    std::mt19937_64 rng(29);
    const Matrix G = gaussian(5, 2, rng);
    const Matrix M = G * G.transpose();
    const Matrix rho = psd_sqrt_factor(M);
    EXPECT_EQ(rho.cols(), 2);
    EXPECT_LT(rel(rho * rho.transpose(), M), 1e-12);
}

TEST(Controllability, RankTest) {
    Matrix A(2, 2);
    A << -1.0, 0.0, 0.0, -2.0;
    EXPECT_TRUE(is_controllable(A, Matrix::Ones(2, 1)));
    Matrix B(2, 1);
    B << 1.0, 0.0;
    EXPECT_FALSE(is_controllable(A, B));
    EXPECT_FALSE(is_controllable(A, Matrix(2, 0)));
}

TEST(Eigen, SortedAndHurwitz) {
    Matrix A(3, 3);
    A << -3.0, 0.0, 0.0, 0.0, -1.0, 2.0, 0.0, -2.0, -1.0;
    const auto ev = eig_general(A);
    ASSERT_EQ(ev.size(), 3u);
    EXPECT_TRUE(is_hurwitz(A));
    EXPECT_FALSE(is_hurwitz(A, 1.5));
    EXPECT_NEAR(frobenius_inner(A, Matrix::Identity(3, 3)), A.trace(), 0.0);
}
