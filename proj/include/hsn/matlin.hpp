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
#ifndef HSN_MATLIN_HPP
#define HSN_MATLIN_HPP

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "hsn/common.hpp"

// Dense matrix kernel: spectra, Lyapunov equations, matrix exponential and
// spectral functions of Hermitian matrices.

namespace hsn {

namespace detail {

inline void require_square(const Eigen::Ref<const Matrix>& M, const char* who) {
    if (M.rows() != M.cols()) {
        std::ostringstream os;
        os << who << ": expected a square matrix, got " << M.rows() << "x" << M.cols();
        throw Error(ErrorKind::dimension, os.str());
    }
}

inline bool complex_less(const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

}  // namespace detail

inline Matrix symmetrize(const Eigen::Ref<const Matrix>& M) { return 0.5 * (M + M.transpose()); }

/// Frobenius inner product <X, Y> = Tr(X^T Y).
inline double frobenius_inner(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Matrix>& Y) {
    return (X.array() * Y.array()).sum();
}

inline double relative_asymmetry(const Eigen::Ref<const Matrix>& M) {
    const double scale = M.norm();
    if (scale == 0.0) return 0.0;
    return (M - M.transpose()).norm() / scale;
}

/// Extreme eigenvalues of a symmetric matrix (after symmetrization).
inline std::pair<double, double> symmetric_eig_range(const Eigen::Ref<const Matrix>& M) {
    if (M.rows() == 0) return {0.0, 0.0};
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(M), Eigen::EigenvaluesOnly);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

/// All eigenvalues with multiplicity, ordered by real part then imaginary part.
inline std::vector<Complex> eig_general(const Eigen::Ref<const Matrix>& M) {
    detail::require_square(M, "eig_general");
    std::vector<Complex> out;
    if (M.rows() == 0) return out;
    Eigen::EigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::numeric, "eig_general: real Schur (QR iteration) did not converge");
    }
    const CVector& ev = es.eigenvalues();
    out.assign(ev.data(), ev.data() + ev.size());
    std::sort(out.begin(), out.end(), detail::complex_less);
    return out;
}

inline bool is_hurwitz(const Eigen::Ref<const Matrix>& M, double margin = 0.0) {
    const auto ev = eig_general(M);
    return std::all_of(ev.begin(), ev.end(), [margin](const Complex& z) { return z.real() < -margin; });
}

/**
 * Solver for A V + V A^T + U = 0 with a Hurwitz A.
 *
 * The complex Schur form of A is computed once, so repeated solves against the
 * same dynamics matrix (as in the cascade and Schattenian recurrences) cost
 * O(n^3) each without refactorization.
 */
class LyapunovSolver {
public:
    explicit LyapunovSolver(const Eigen::Ref<const Matrix>& A,
                            const NumericSettings& settings = default_settings())
        : A_(A), settings_(settings) {
        detail::require_square(A, "LyapunovSolver");
        const Eigen::Index n = A.rows();
        if (n == 0) return;
        Eigen::ComplexSchur<CMatrix> schur(A.cast<Complex>());
        if (schur.info() != Eigen::Success) {
            throw Error(ErrorKind::numeric, "LyapunovSolver: complex Schur iteration did not converge");
        }
        T_ = schur.matrixT();
        Z_ = schur.matrixU();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!(T_(i, i).real() < 0.0)) {
                std::ostringstream os;
                os << "Lyapunov operator requires a Hurwitz matrix; eigenvalue " << T_(i, i)
                   << " has nonnegative real part";
                throw Error(ErrorKind::precondition, os.str());
            }
        }
    }

    [[nodiscard]] Eigen::Index order() const { return A_.rows(); }
    [[nodiscard]] const Matrix& dynamics() const { return A_; }

    /// Returns V with A V + V A^T + U = 0 for an arbitrary (not necessarily symmetric) U.
    [[nodiscard]] Matrix solve(const Eigen::Ref<const Matrix>& U) const {
        Matrix V = solve_unchecked(U);
        check_residual(U, V);
        return V;
    }

    /// solve() without the residual check; pair with backward_error() for badly scaled A.
    [[nodiscard]] Matrix solve_unchecked(const Eigen::Ref<const Matrix>& U) const {
        const Eigen::Index n = A_.rows();
        if (U.rows() != n || U.cols() != n) {
            std::ostringstream os;
            os << "Lyapunov right-hand side is " << U.rows() << "x" << U.cols() << ", expected " << n << "x" << n;
            throw Error(ErrorKind::dimension, os.str());
        }
        if (n == 0) return Matrix(0, 0);
        // T Y + Y T^* + Z^* U Z = 0, solved column by column from the right.
        const CMatrix Ut = Z_.adjoint() * U.cast<Complex>() * Z_;
        CMatrix Y(n, n);
        CMatrix shifted = T_;
        for (Eigen::Index j = n - 1; j >= 0; --j) {
            CVector rhs = -Ut.col(j);
            for (Eigen::Index k = j + 1; k < n; ++k) rhs -= std::conj(T_(j, k)) * Y.col(k);
            const Complex shift = std::conj(T_(j, j));
            for (Eigen::Index i = 0; i < n; ++i) shifted(i, i) = T_(i, i) + shift;
            Y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
        }
        return (Z_ * Y * Z_.adjoint()).real();
    }

    /// Symmetric contract: U must be symmetric, the result is symmetrized.
    [[nodiscard]] Matrix solve_symmetric(const Eigen::Ref<const Matrix>& U) const {
        const double asym = relative_asymmetry(U);
        if (asym > settings_.symmetry_tol) {
            std::ostringstream os;
            os << "Lyapunov right-hand side is not symmetric (relative asymmetry " << asym << ")";
            throw Error(ErrorKind::precondition, os.str());
        }
        return symmetrize(solve(symmetrize(U)));
    }

    [[nodiscard]] double residual(const Eigen::Ref<const Matrix>& U, const Eigen::Ref<const Matrix>& V) const {
        return (A_ * V + V * A_.transpose() + U).norm();
    }

    /// Residual relative to 2|A||V| + |U|, the scale of rounding errors in any backward stable solver.
    [[nodiscard]] double backward_error(const Eigen::Ref<const Matrix>& U, const Eigen::Ref<const Matrix>& V) const {
        const double scale = 2.0 * A_.norm() * V.norm() + U.norm();
        return scale > 0.0 ? residual(U, V) / scale : 0.0;
    }

private:
    void check_residual(const Eigen::Ref<const Matrix>& U, const Matrix& V) const {
        const double res = residual(U, V);
        const double bound = settings_.lyapunov_residual_tol * std::max(1.0, U.norm());
        if (!(res <= bound)) {
            std::ostringstream os;
            os << "Lyapunov residual " << res << " exceeds " << bound;
            throw Error(ErrorKind::numeric, os.str());
        }
    }

    Matrix A_;
    CMatrix T_;
    CMatrix Z_;
    NumericSettings settings_;
};

/// V = L_A(U): the unique symmetric solution of A V + V A^T + U = 0.
inline Matrix solve_lyapunov(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& U,
                             const NumericSettings& settings = default_settings()) {
    return LyapunovSolver(A, settings).solve_symmetric(U);
}

/// Kronecker-vectorized reference solve (I (x) A + A (x) I) vec V = -vec U.
/// O(n^6); meant as an independent oracle for small orders.
inline Matrix solve_lyapunov_kronecker(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& U) {
    detail::require_square(A, "solve_lyapunov_kronecker");
    const Eigen::Index n = A.rows();
    if (U.rows() != n || U.cols() != n) throw Error(ErrorKind::dimension, "solve_lyapunov_kronecker: shape mismatch");
    if (!is_hurwitz(A)) throw Error(ErrorKind::precondition, "solve_lyapunov_kronecker: A is not Hurwitz");
    const Eigen::Index N = n * n;
    Matrix K = Matrix::Zero(N, N);
    // vec is column-major: vec(AV) = (I (x) A) vec V, vec(V A^T) = (A (x) I) vec V.
    for (Eigen::Index b = 0; b < n; ++b) {
        K.block(b * n, b * n, n, n) += A;
        for (Eigen::Index a = 0; a < n; ++a) {
            K.block(b * n, a * n, n, n).diagonal().array() += A(b, a);
        }
    }
    const Vector rhs = -Eigen::Map<const Vector>(Matrix(U).data(), N);
    const Vector v = K.partialPivLu().solve(rhs);
    return Eigen::Map<const Matrix>(v.data(), n, n);
}

/// Matrix exponential by scaling and squaring with a [13/13] Pade approximant.
inline Matrix expm(const Eigen::Ref<const Matrix>& M) {
    detail::require_square(M, "expm");
    if (M.rows() == 0) return Matrix(0, 0);
    Matrix E = Matrix(M).exp();
    if (!E.allFinite()) throw Error(ErrorKind::numeric, "expm: overflow (norm too large)");
    return E;
}

namespace detail {

inline void require_hermitian(const Eigen::Ref<const CMatrix>& H, const char* who) {
    if (H.rows() != H.cols()) throw Error(ErrorKind::dimension, std::string(who) + ": matrix not square");
    const double scale = H.norm();
    if (scale > 0.0 && (H - H.adjoint()).norm() > 1e-12 * scale) {
        throw Error(ErrorKind::precondition, std::string(who) + ": matrix is not Hermitian");
    }
}

/// Eigenvalues of a PSD Hermitian matrix with roundoff negatives clipped to zero.
inline Vector psd_eigenvalues(const Eigen::Ref<const CMatrix>& H, double psd_tol, const char* who) {
    if (H.rows() == 0) return Vector(0);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H, Eigen::EigenvaluesOnly);
    Vector lam = es.eigenvalues();
    const double scale = std::max(std::abs(lam.minCoeff()), std::abs(lam.maxCoeff()));
    if (lam.minCoeff() < -psd_tol * scale) {
        std::ostringstream os;
        os << who << ": eigenvalue " << lam.minCoeff() << " is significantly negative";
        throw Error(ErrorKind::not_psd, os.str());
    }
    return lam.cwiseMax(0.0);
}

template <typename Fn>
double checked_apply(const Fn& f, double lambda, const char* who) {
    const double y = f(lambda);
    if (!std::isfinite(y)) {
        std::ostringstream os;
        os << who << ": function undefined at eigenvalue " << lambda;
        throw Error(ErrorKind::domain, os.str());
    }
    return y;
}

}  // namespace detail

/// f(H) = U f(Lambda) U^* for a Hermitian positive semi-definite H.
template <typename Fn>
CMatrix herm_function(const Eigen::Ref<const CMatrix>& H, const Fn& f,
                      const NumericSettings& settings = default_settings()) {
    detail::require_hermitian(H, "herm_function");
    if (H.rows() == 0) return CMatrix(0, 0);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
    Vector lam = es.eigenvalues();
    const double scale = std::max(std::abs(lam.minCoeff()), std::abs(lam.maxCoeff()));
    if (lam.minCoeff() < -settings.psd_tol * scale) {
        std::ostringstream os;
        os << "herm_function: eigenvalue " << lam.minCoeff() << " is significantly negative";
        throw Error(ErrorKind::not_psd, os.str());
    }
    Vector flam(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        flam(i) = detail::checked_apply(f, std::max(lam(i), 0.0), "herm_function");
    }
    const CMatrix& U = es.eigenvectors();
    CMatrix out = U * flam.cast<Complex>().asDiagonal() * U.adjoint();
    return 0.5 * (out + out.adjoint());
}

/// Tr f(H) for a Hermitian PSD matrix; eigenvalues only.
template <typename Fn>
double herm_trace_function(const Eigen::Ref<const CMatrix>& H, const Fn& f,
                           const NumericSettings& settings = default_settings()) {
    const Vector lam = detail::psd_eigenvalues(H, settings.psd_tol, "herm_trace_function");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) acc += detail::checked_apply(f, lam(i), "herm_trace_function");
    return acc;
}

/**
 * Factor rho (n x r) with rho rho^T = M for a symmetric PSD M, r the numerical
 * rank. Eigenvalues at or below rank_tol * lambda_max are dropped.
 */
inline Matrix psd_sqrt_factor(const Eigen::Ref<const Matrix>& M, const NumericSettings& settings = default_settings()) {
    detail::require_square(M, "psd_sqrt_factor");
    const Eigen::Index n = M.rows();
    if (n == 0) return Matrix(0, 0);
    if (relative_asymmetry(M) > settings.symmetry_tol) {
        throw Error(ErrorKind::precondition, "psd_sqrt_factor: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(M));
    const Vector& lam = es.eigenvalues();
    const double scale = std::max(std::abs(lam.minCoeff()), std::abs(lam.maxCoeff()));
    if (lam.minCoeff() < -settings.psd_tol * scale) {
        std::ostringstream os;
        os << "psd_sqrt_factor: eigenvalue " << lam.minCoeff() << " is significantly negative";
        throw Error(ErrorKind::not_psd, os.str());
    }
    const double cut = settings.rank_tol * lam.maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        if (lam(i) > cut && lam(i) > 0.0) keep.push_back(i);
    }
    Matrix rho(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        rho.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]) * std::sqrt(lam(keep[c]));
    }
    return rho;
}

/// Rank of [B, AB, ..., A^{n-1}B] with singular values above tol * sigma_max.
inline bool is_controllable(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
                            const NumericSettings& settings = default_settings()) {
    detail::require_square(A, "is_controllable");
    const Eigen::Index n = A.rows();
    if (B.rows() != n) throw Error(ErrorKind::dimension, "is_controllable: B row count differs from A");
    if (n == 0) return true;
    if (B.cols() == 0) return false;
    Matrix K(n, n * B.cols());
    Matrix block = B;
    for (Eigen::Index i = 0; i < n; ++i) {
        K.middleCols(i * B.cols(), B.cols()) = block;
        block = A * block;
    }
    Eigen::JacobiSVD<Matrix> svd(K);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return false;
    const double cut = settings.controllability_tol * s(0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) rank += s(i) > cut ? 1 : 0;
    return rank == n;
}

}  // namespace hsn

#endif  // HSN_MATLIN_HPP
