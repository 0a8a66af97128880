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
#ifndef HSN_RICCATI_HPP
#define HSN_RICCATI_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hsn/matlin.hpp"
#include "hsn/sysmodel.hpp"

namespace hsn {

/// Stabilising solution of A^T Psi + Psi A + theta C^T C + Psi BB^T Psi = 0.
struct RiccatiSolution {
    double theta = 0.0;
    Matrix Psi;
    Matrix closed_loop;       // A + BB^T Psi, Hurwitz
    double residual = 0.0;    // relative Frobenius residual
    int polish_steps = 0;
    std::vector<std::string> warnings;
};

namespace detail {

/// Swaps diagonal entries k, k+1 of the upper triangular T, updating U so that U T U^* is invariant.
inline void swap_schur_pair(CMatrix& T, CMatrix& U, Eigen::Index k) {
    const Complex t11 = T(k, k);
    const Complex t22 = T(k + 1, k + 1);
    // Eigenvector of the 2x2 block for t22 becomes the first basis vector.
    Complex x1 = T(k, k + 1);
    Complex x2 = t22 - t11;
    const double nrm = std::hypot(std::abs(x1), std::abs(x2));
    if (nrm == 0.0) return;  // equal eigenvalues, nothing to do
    x1 /= nrm;
    x2 /= nrm;
    Eigen::Matrix2cd G;
    G << x1, -std::conj(x2), x2, std::conj(x1);
    T.middleCols(k, 2) = T.middleCols(k, 2) * G;
    T.middleRows(k, 2) = G.adjoint() * T.middleRows(k, 2);
    T(k + 1, k) = 0.0;
    T(k, k) = t22;
    T(k + 1, k + 1) = t11;
    U.middleCols(k, 2) = U.middleCols(k, 2) * G;
}

/// Orthonormal basis of the invariant subspace of H for eigenvalues with negative real part.
inline CMatrix stable_subspace(const Matrix& H, double axis_tol, Eigen::Index expected) {
    Eigen::ComplexSchur<CMatrix> schur(H.cast<Complex>());
    if (schur.info() != Eigen::Success) throw Error(ErrorKind::numeric, "Hamiltonian Schur iteration did not converge");
    CMatrix T = schur.matrixT();
    CMatrix U = schur.matrixU();
    const Eigen::Index m = T.rows();
    Eigen::Index placed = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double re = T(i, i).real();
        if (std::abs(re) <= axis_tol) {
            std::ostringstream os;
            os << "Hamiltonian has an eigenvalue " << T(i, i)
               << " on the imaginary axis; theta is at or beyond 1/|F|_inf^2";
            throw Error(ErrorKind::domain, os.str());
        }
        if (re < 0.0) {
            for (Eigen::Index j = i; j > placed; --j) swap_schur_pair(T, U, j - 1);
            ++placed;
        }
    }
    if (placed != expected) {
        std::ostringstream os;
        os << "Hamiltonian has " << placed << " stable eigenvalues, expected " << expected;
        throw Error(ErrorKind::numeric, os.str());
    }
    return U.leftCols(expected);
}

inline double riccati_residual(const StateSpaceSystem& sys, double theta, const Matrix& Psi, const Matrix& W,
                               const Matrix& Om, Matrix* R) {
    const Matrix APsi = sys.A().transpose() * Psi;
    const Matrix quad = Psi * W * Psi;
    *R = APsi + APsi.transpose() + theta * Om + quad;
    const double scale = 2.0 * APsi.norm() + theta * Om.norm() + quad.norm();
    return scale > 0.0 ? R->norm() / scale : R->norm();
}

}  // namespace detail

/**
 * Stabilising ARE solution from the ordered complex Schur form of the
 * Hamiltonian [[A, BB^T], [-theta C^T C, -A^T]], followed by Newton-Kleinman
 * polishing. Requires 0 <= theta < 1/hinf^2 with hinf the certified upper
 * bracket (computed here unless supplied).
 */
inline RiccatiSolution stabilizing_are(const StateSpaceSystem& sys, double theta,
                                       const NumericSettings& settings = default_settings(),
                                       const HinfBracket* hinf = nullptr) {
    if (!std::isfinite(theta) || theta < 0.0) {
        std::ostringstream os;
        os << "stabilizing_are: theta = " << theta << " must be >= 0";
        throw Error(ErrorKind::domain, os.str());
    }
    if (!is_hurwitz(sys.A())) throw Error(ErrorKind::precondition, "stabilizing_are: A is not Hurwitz");
    const Eigen::Index n = sys.states();
    RiccatiSolution sol;
    sol.theta = theta;
    const Matrix W = sys.input_weight();
    const Matrix Om = sys.output_weight();
    if (theta == 0.0 || sys.is_trivially_zero()) {
        sol.Psi = Matrix::Zero(n, n);
        sol.closed_loop = sys.A();
        return sol;
    }
    const HinfBracket hb = hinf ? *hinf : hinf_norm(sys, settings.hinf_rel_tol, settings);
    const double limit = 1.0 / (hb.hi * hb.hi);
    if (!(theta < limit)) {
        std::ostringstream os;
        os << "stabilizing_are: theta = " << theta << " violates theta < 1/|F|_inf^2 = " << limit
           << " (|F|_inf <= " << hb.hi << ")";
        throw Error(ErrorKind::domain, os.str());
    }
    if (theta > 0.95 * limit) {
        sol.warnings.emplace_back("theta exceeds 0.95/|F|_inf^2; the stable subspace may be ill-conditioned");
    }

    Matrix H(2 * n, 2 * n);
    H << sys.A(), W, -theta * Om, -sys.A().transpose();
    const double axis_tol = 1e-13 * std::max(1.0, H.norm());
    const CMatrix V = detail::stable_subspace(H, axis_tol, n);
    const CMatrix U1 = V.topRows(n);
    const CMatrix U2 = V.bottomRows(n);
    const Eigen::PartialPivLU<CMatrix> lu(U1.transpose());
    const double rcond = lu.rcond();
    if (!(rcond > 1e-12)) {
        std::ostringstream os;
        os << "stabilizing_are: stable subspace is not a graph (rcond " << rcond << ")";
        throw Error(ErrorKind::numeric, os.str());
    }
    // Psi = U2 U1^{-1}, computed as (U1^{-T} U2^T)^T.
    const CMatrix PsiC = lu.solve(U2.transpose()).transpose();
    Matrix Psi = symmetrize(PsiC.real());

    Matrix R;
    double res = detail::riccati_residual(sys, theta, Psi, W, Om, &R);
    for (int it = 0; it < 4 && res > 1e-15; ++it) {
        const Matrix Ups = sys.A() + W * Psi;
        if (!is_hurwitz(Ups)) break;
        const Matrix delta = LyapunovSolver(Ups.transpose(), settings).solve_symmetric(symmetrize(R));
        const Matrix cand = symmetrize(Psi + delta);
        Matrix Rc;
        const double rc = detail::riccati_residual(sys, theta, cand, W, Om, &Rc);
        if (!(rc < res)) break;
        Psi = cand;
        R = Rc;
        res = rc;
        ++sol.polish_steps;
    }
    sol.Psi = Psi;
    sol.closed_loop = sys.A() + W * Psi;
    sol.residual = res;
    if (!(res <= settings.riccati_residual_tol)) {
        std::ostringstream os;
        os << "stabilizing_are: relative residual " << res << " exceeds " << settings.riccati_residual_tol;
        throw Error(ErrorKind::numeric, os.str());
    }
    if (!is_hurwitz(sol.closed_loop)) {
        throw Error(ErrorKind::numeric, "stabilizing_are: closed-loop matrix A + BB^T Psi is not Hurwitz");
    }
    return sol;
}

/// Xi(theta) = <BB^T, Psi(theta)>_F / 2.
inline double risk_sensitive_cost(const StateSpaceSystem& sys, double theta,
                                  const NumericSettings& settings = default_settings(),
                                  const HinfBracket* hinf = nullptr) {
    const RiccatiSolution sol = stabilizing_are(sys, theta, settings, hinf);
    return 0.5 * frobenius_inner(sys.input_weight(), sol.Psi);
}

/// Exact binomial coefficient; throws when the result does not fit in 64 bits.
inline std::uint64_t binomial(int n, int k) {
    if (n < 0 || k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        if (r > UINT64_MAX) throw Error(ErrorKind::domain, "binomial: result exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(r);
}

enum class SchattenianSide { observability, controllability };

/**
 * Schattenians as theta-derivatives of the ARE solution (observability side)
 * or of its dual (controllability side). Stored normalized by (k-1)! so that
 * <weight, normalized(k)> is |F|_{2k}^{2k} directly and no factorial is formed.
 */
class SchattenianSequence {
public:
    SchattenianSequence() = default;
    SchattenianSequence(SchattenianSide side, std::vector<Matrix> normalized)
        : side_(side), m_(std::move(normalized)) {}

    [[nodiscard]] SchattenianSide side() const { return side_; }
    [[nodiscard]] int order() const { return static_cast<int>(m_.size()); }

    /// Psi_k / (k-1)! (or Phi_k / (k-1)!).
    [[nodiscard]] const Matrix& normalized(int k) const {
        if (k < 1 || k > order()) throw Error(ErrorKind::domain, "SchattenianSequence: order out of range");
        return m_[static_cast<std::size_t>(k - 1)];
    }

    /// Psi_k itself (may overflow to infinity for large k).
    [[nodiscard]] Matrix raw(int k) const { return normalized(k) * std::exp(std::lgamma(static_cast<double>(k))); }

private:
    SchattenianSide side_ = SchattenianSide::observability;
    std::vector<Matrix> m_;
};

namespace detail {

// With M_k = X_k/(k-1)! the recursion X_k = L(delta_k1 R + sum_j C(k,j) X_j W X_{k-j})
// becomes M_k = L(delta_k1 R + sum_j k/(j(k-j)) M_j W M_{k-j}).
inline std::vector<Matrix> schattenian_recursion(const LyapunovSolver& L, const Matrix& R, const Matrix& W, int N) {
    std::vector<Matrix> M;
    M.reserve(static_cast<std::size_t>(N));
    M.push_back(L.solve_symmetric(R));
    for (int k = 2; k <= N; ++k) {
        Matrix rhs = Matrix::Zero(R.rows(), R.cols());
        for (int j = 1; j <= k / 2; ++j) {
            const Matrix& a = M[static_cast<std::size_t>(j - 1)];
            const Matrix& b = M[static_cast<std::size_t>(k - j - 1)];
            const double w = static_cast<double>(k) / (static_cast<double>(j) * (k - j));
            const Matrix t = a * W * b;
            // Terms j and k-j are transposes of each other.
            if (2 * j == k) rhs += w * t;
            else rhs += w * (t + t.transpose());
        }
        M.push_back(L.solve_symmetric(symmetrize(rhs)));
    }
    return M;
}

}  // namespace detail

/// Psi_k = L_{A^T}(delta_k1 C^T C + sum_j C(k,j) Psi_j BB^T Psi_{k-j}); Psi_1 = Q.
inline SchattenianSequence observability_schattenians(const StateSpaceSystem& sys, int N,
                                                      const NumericSettings& settings = default_settings()) {
    if (N < 1) throw Error(ErrorKind::domain, "observability_schattenians: N must be >= 1");
    const LyapunovSolver L(sys.A().transpose(), settings);
    return {SchattenianSide::observability,
            detail::schattenian_recursion(L, sys.output_weight(), sys.input_weight(), N)};
}

/// Phi_k = L_A(delta_k1 BB^T + sum_j C(k,j) Phi_j C^T C Phi_{k-j}); Phi_1 = P.
inline SchattenianSequence controllability_schattenians(const StateSpaceSystem& sys, int N,
                                                        const NumericSettings& settings = default_settings()) {
    if (N < 1) throw Error(ErrorKind::domain, "controllability_schattenians: N must be >= 1");
    const LyapunovSolver L(sys.A(), settings);
    return {SchattenianSide::controllability,
            detail::schattenian_recursion(L, sys.input_weight(), sys.output_weight(), N)};
}

/**
 * |F|_{2k}^{2k} = <BB^T, Psi_k>/(k-1)! = <C^T C, Phi_k>/(k-1)!. Both sides are
 * computed; the report carries their mean and the relative gap as residual.
 */
inline NormReport hs_norms_riccati(const StateSpaceSystem& sys, int N,
                                   const NumericSettings& settings = default_settings()) {
    if (N < 1) throw Error(ErrorKind::domain, "hs_norms_riccati: N must be >= 1");
    if (!is_hurwitz(sys.A())) throw Error(ErrorKind::precondition, "hs_norms_riccati: A is not Hurwitz");
    NormReport rep;
    rep.method = NormMethod::riccati;
    const SchattenianSequence obs = observability_schattenians(sys, N, settings);
    const SchattenianSequence ctr = controllability_schattenians(sys, N, settings);
    const Matrix W = sys.input_weight();
    const Matrix Om = sys.output_weight();
    for (int k = 1; k <= N; ++k) {
        const double primal = frobenius_inner(W, obs.normalized(k));
        const double dual = frobenius_inner(Om, ctr.normalized(k));
        const double scale = std::max(std::abs(primal), std::abs(dual));
        const double gap = scale > 0.0 ? std::abs(primal - dual) / scale : 0.0;
        if (gap > settings.primal_dual_fail_tol) {
            std::ostringstream os;
            os << "hs_norms_riccati: primal " << primal << " and dual " << dual << " disagree at k = " << k
               << " (relative gap " << gap << ")";
            throw Error(ErrorKind::consistency, os.str());
        }
        if (gap > settings.primal_dual_warn_tol) {
            std::ostringstream os;
            os << "k = " << k << ": primal/dual relative gap " << gap;
            rep.diagnostics.push_back(os.str());
        }
        rep.push(k, std::max(0.5 * (primal + dual), 0.0), gap);
    }
    return rep;
}

struct RiskSeries {
    std::vector<double> partial_sums;  // after 1..N terms
    double value = 0.0;
    double tail_bound = 0.0;
    double ratio = 0.0;  // theta |F|_inf^2 with the upper bracket
};

/**
 * Partial sums of Xi(theta) = sum_k theta^k/(2k) |F|_{2k}^{2k} with the
 * geometric tail bound from |F|_{2k}^{2k} <= |F|_2^2 |F|_inf^{2k-2}.
 */
inline RiskSeries risk_sensitive_series(const StateSpaceSystem& sys, double theta, int N,
                                        const NormReport& norms, const HinfBracket& hinf) {
    if (N < 1) throw Error(ErrorKind::domain, "risk_sensitive_series: N must be >= 1");
    if (theta < 0.0) throw Error(ErrorKind::domain, "risk_sensitive_series: theta must be >= 0");
    RiskSeries out;
    double sum = 0.0;
    double tk = 1.0;
    for (int k = 1; k <= N; ++k) {
        if (!norms.has_order(k)) throw Error(ErrorKind::domain, "risk_sensitive_series: norm report lacks order " + std::to_string(k));
        tk *= theta;
        sum += tk / (2.0 * k) * norms.power(k);
        out.partial_sums.push_back(sum);
    }
    out.value = sum;
    const double g2sq = norms.power(1);
    if (g2sq == 0.0 || hinf.hi == 0.0) return out;
    const double x = theta * hinf.hi * hinf.hi;
    out.ratio = x;
    if (!(x < 1.0)) {
        out.tail_bound = std::numeric_limits<double>::infinity();
        return out;
    }
    out.tail_bound = 0.5 * g2sq / (hinf.hi * hinf.hi) * std::pow(x, N + 1) / ((N + 1) * (1.0 - x));
    return out;
}

inline RiskSeries risk_sensitive_series(const StateSpaceSystem& sys, double theta, int N,
                                        const NumericSettings& settings = default_settings()) {
    const HinfBracket hb = hinf_norm(sys, settings.hinf_rel_tol, settings);
    return risk_sensitive_series(sys, theta, N, hs_norms_riccati(sys, N, settings), hb);
}

}  // namespace hsn

#endif  // HSN_RICCATI_HPP
