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
#ifndef HSN_WICK_HPP
#define HSN_WICK_HPP

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hsn/costshape.hpp"
#include "hsn/sysmodel.hpp"

// Cascade ("Wick-ordered") spectral factorization S^k = G_k~ G_k.
//
// Repeatedly moving every factor E = (sI - A)^{-1} to the right of its
// conjugate E~ in S^k = (C E BB^T E~ C^T)^k produces the recurrences
//
//   alpha_{j+1} = gamma_j beta_j
//   beta_{j+1}  = gamma_j^{-1} alpha_j W_j gamma_{j-1} gamma_j^{-1}
//   gamma_j     = L_A(alpha_j W_j gamma_{j-1}),  W_1 = C^T C, W_j = I (j >= 2)
//
// with alpha_1 = gamma_0 = P, beta_0 = I, beta_1 = P^{-1} BB^T P^{-1}, and
// square roots beta_j = rho_j rho_j^T. The cascade
//
//   G_k = rho_k^T (E alpha_k) ... (E alpha_1) C^T
//
// then satisfies |F|_{2k}^{2k} = |G_k|_2^2 = <beta_k, P_kk>_F where P_kk are
// diagonal blocks of the controllability Gramian of the stacked cascade.

namespace hsn {

class WickSequences {
public:
    /// Number of orders for which alpha_k, beta_k, rho_k are available.
    [[nodiscard]] int order() const { return static_cast<int>(alpha_.size()) - 1; }
    [[nodiscard]] int requested_order() const { return requested_; }
    [[nodiscard]] bool truncated() const { return order() < requested_; }
    [[nodiscard]] const std::optional<std::string>& stop_reason() const { return stop_reason_; }

    [[nodiscard]] const Matrix& alpha(int j) const { return at(alpha_, j, 1, "alpha"); }
    [[nodiscard]] const Matrix& beta(int j) const { return at(beta_, j, 0, "beta"); }
    [[nodiscard]] const Matrix& gamma(int j) const { return at(gamma_, j, 0, "gamma"); }
    [[nodiscard]] const Matrix& rho(int j) const { return at(rho_, j, 1, "rho"); }
    /// Spectral condition number of gamma_j.
    [[nodiscard]] double gamma_condition(int j) const { return gamma_cond_.at(static_cast<std::size_t>(j)); }
    [[nodiscard]] int gamma_count() const { return static_cast<int>(gamma_.size()); }

    /// Cumulative products prod_{j<=k} sigma_j applied by `rescaled` (all ones when unbalanced).
    [[nodiscard]] double scale_product(int k) const { return scale_prod_.at(static_cast<std::size_t>(k)); }

    /**
     * The factorization-preserving rescaling alpha_k -> alpha_k / sigma_k,
     * rho_k -> rho_k prod_{j<=k} sigma_j (beta_k follows rho_k).
     * sigma[k-1] is the factor for order k.
     */
    [[nodiscard]] WickSequences rescaled(const std::vector<double>& sigma) const {
        if (static_cast<int>(sigma.size()) < order()) {
            throw Error(ErrorKind::dimension, "rescaled: need one factor per order");
        }
        WickSequences out = *this;
        double prod = 1.0;
        for (int k = 1; k <= order(); ++k) {
            const double s = sigma[static_cast<std::size_t>(k - 1)];
            if (s == 0.0) throw Error(ErrorKind::domain, "rescaled: zero scale factor");
            prod *= s;
            out.alpha_[k] = alpha_[k] / s;
            out.rho_[k] = rho_[k] * prod;
            out.beta_[k] = beta_[k] * (prod * prod);
            out.scale_prod_[k] = scale_prod_[k] * prod;
        }
        return out;
    }

private:
    friend WickSequences wick_sequences(const StateSpaceSystem&, int, bool, const NumericSettings&);

    template <typename V>
    static const Matrix& at(const V& v, int j, int first, const char* name) {
        if (j < first || j >= static_cast<int>(v.size())) {
            std::ostringstream os;
            os << name << "_" << j << " is not available (valid range " << first << ".." << v.size() - 1 << ")";
            throw Error(ErrorKind::domain, os.str());
        }
        return v[static_cast<std::size_t>(j)];
    }

    int requested_ = 0;
    std::vector<Matrix> alpha_;  // index 0 unused
    std::vector<Matrix> beta_;
    std::vector<Matrix> gamma_;
    std::vector<Matrix> rho_;    // index 0 unused
    std::vector<double> gamma_cond_;
    std::vector<double> scale_prod_;
    std::optional<std::string> stop_reason_;
};

namespace detail {

inline std::optional<std::string> gamma_singularity(const Matrix& gamma, int j, double tol, double* cond) {
    const auto [lmin, lmax] = symmetric_eig_range(gamma);
    *cond = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
    if (lmax > 0.0 && lmin > tol * lmax) return std::nullopt;
    std::ostringstream os;
    os << "gamma_" << j << " is numerically singular (min eigenvalue " << lmin << ", max " << lmax << "): ";
    if (j == 0) os << "(A, B) is not controllable";
    else if (j == 1) os << "(A, P C^T) is not controllable";
    else os << "(A, gamma_" << j - 1 << " rho_" << j - 1 << ") is not controllable";
    return os.str();
}

}  // namespace detail

/**
 * Sequences alpha_1..alpha_N, beta_0..beta_N, gamma_0..gamma_N, rho_1..rho_N.
 *
 * The inverse of gamma_j is only ever applied through a Cholesky solve. When
 * some gamma_j with j < N is numerically singular the sequences stop at order
 * j and `stop_reason()` names the broken controllability link. With `balance`
 * the result is rescaled by sigma_k = |alpha_k|_F.
 */
inline WickSequences wick_sequences(const StateSpaceSystem& sys, int N, bool balance = false,
                                    const NumericSettings& settings = default_settings()) {
    if (N < 1) throw Error(ErrorKind::domain, "wick_sequences: order must be >= 1");
    const Eigen::Index n = sys.states();
    const LyapunovSolver L(sys.A(), settings);
    WickSequences s;
    s.requested_ = N;
    s.alpha_.emplace_back();
    s.rho_.emplace_back();
    s.scale_prod_.push_back(1.0);

    const Matrix P = L.solve_symmetric(sys.input_weight());
    double cond = 0.0;
    s.gamma_.push_back(P);
    s.beta_.push_back(Matrix::Identity(n, n));
    if (auto bad = detail::gamma_singularity(P, 0, settings.gamma_singularity_tol, &cond)) {
        s.gamma_cond_.push_back(cond);
        s.stop_reason_ = *bad;
        return s;
    }
    s.gamma_cond_.push_back(cond);
    Eigen::LLT<Matrix> chol_prev(P);

    s.alpha_.push_back(P);
    s.rho_.push_back(chol_prev.solve(sys.B()));
    s.beta_.push_back(symmetrize(chol_prev.solve(chol_prev.solve(sys.input_weight()).transpose())));
    s.scale_prod_.push_back(1.0);

    Eigen::LLT<Matrix> chol_prev2;
    for (int j = 1; j <= N; ++j) {
        // alpha_j W_j gamma_{j-1}, written in manifestly symmetric form.
        Matrix M;
        if (j == 1) {
            const Matrix PCt = P * sys.C().transpose();
            M = PCt * PCt.transpose();
        } else {
            const Matrix& g = s.gamma_[static_cast<std::size_t>(j - 1)];
            M = symmetrize(g * s.beta_[static_cast<std::size_t>(j - 1)] * g);
        }
        const Matrix gamma = L.solve_symmetric(M);
        s.gamma_.push_back(gamma);
        auto bad = detail::gamma_singularity(gamma, j, settings.gamma_singularity_tol, &cond);
        s.gamma_cond_.push_back(cond);
        if (j == N) break;  // gamma_N is recorded but only needed beyond order N
        if (bad) {
            s.stop_reason_ = *bad;
            break;
        }
        Eigen::LLT<Matrix> chol(gamma);
        s.alpha_.push_back(gamma * s.beta_[static_cast<std::size_t>(j)]);
        s.beta_.push_back(symmetrize(chol.solve(chol.solve(M).transpose())));
        if (j == 1) {
            s.rho_.push_back(chol.solve(P * sys.C().transpose()));
        } else {
            const Matrix& g_prev = s.gamma_[static_cast<std::size_t>(j - 1)];
            s.rho_.push_back(chol.solve(g_prev * s.rho_[static_cast<std::size_t>(j - 1)]));
        }
        s.scale_prod_.push_back(1.0);
        chol_prev2 = chol_prev;
        chol_prev = chol;
    }
    if (balance && s.order() > 0) {
        std::vector<double> sigma;
        for (int k = 1; k <= s.order(); ++k) sigma.push_back(s.alpha(k).norm());
        return s.rescaled(sigma);
    }
    return s;
}

/// Same as wick_sequences but a truncated result is an error naming the failing link.
inline WickSequences wick_sequences_strict(const StateSpaceSystem& sys, int N, bool balance = false,
                                           const NumericSettings& settings = default_settings()) {
    WickSequences s = wick_sequences(sys, N, balance, settings);
    if (s.truncated()) throw Error(ErrorKind::controllability, *s.stop_reason());
    return s;
}

/// Blocks P_jk (1 <= j <= k <= N) of the cascade controllability Gramian.
class GramianGrid {
public:
    [[nodiscard]] int order() const { return static_cast<int>(blocks_.size()); }

    /// P_jk for any 1 <= j, k <= N (P_kj = P_jk^T).
    [[nodiscard]] Matrix block(int j, int k) const {
        if (j > k) return block(k, j).transpose();
        if (j < 1 || k > order()) throw Error(ErrorKind::domain, "GramianGrid: block index out of range");
        return blocks_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j - 1)];
    }

    [[nodiscard]] double max_check_mismatch() const { return max_mismatch_; }
    [[nodiscard]] bool cross_checked() const { return checked_; }

private:
    friend GramianGrid gramian_blocks(const StateSpaceSystem&, const WickSequences&, int, const NumericSettings&);
    std::vector<std::vector<Matrix>> blocks_;  // blocks_[k-1][j-1], j <= k
    double max_mismatch_ = 0.0;
    bool checked_ = false;
};

namespace detail {

/// Dynamics and input of the stacked cascade: block lower bidiagonal A_N, B_N = [alpha_1 C^T; 0; ...].
inline std::pair<Matrix, Matrix> cascade_dynamics(const StateSpaceSystem& sys, const WickSequences& seqs, int N) {
    const Eigen::Index n = sys.states();
    Matrix AN = Matrix::Zero(n * N, n * N);
    for (int k = 0; k < N; ++k) {
        AN.block(k * n, k * n, n, n) = sys.A();
        if (k > 0) AN.block(k * n, (k - 1) * n, n, n) = seqs.alpha(k + 1);
    }
    Matrix BN = Matrix::Zero(n * N, sys.outputs());
    BN.topRows(n) = seqs.alpha(1) * sys.C().transpose();
    return {AN, BN};
}

}  // namespace detail

/**
 * Gramian blocks from the order-n recurrence
 *
 *   P_11 = gamma_1
 *   P_1k = L_A(P_{1,k-1} alpha_k^T)
 *   P_jk = L_A(alpha_j P_{j-1,k} + P_{j,k-1} alpha_k^T),   1 < j < k
 *   P_kk = L_A(alpha_k P_{k-1,k} + P_{k-1,k}^T alpha_k^T)
 *
 * For N <= gramian_check_order the full nN-order Lyapunov equation of the
 * stacked cascade is also solved and every block must agree.
 */
inline GramianGrid gramian_blocks(const StateSpaceSystem& sys, const WickSequences& seqs, int N,
                                  const NumericSettings& settings = default_settings()) {
    if (N < 1 || N > seqs.order()) {
        std::ostringstream os;
        os << "gramian_blocks: order " << N << " not covered by sequences of order " << seqs.order();
        throw Error(ErrorKind::domain, os.str());
    }
    const LyapunovSolver L(sys.A(), settings);
    GramianGrid grid;
    // P_11 = L_A(P C^T C P) = gamma_1 of the unscaled sequences; computing it from
    // alpha_1 keeps the grid consistent with a rescaled alpha_1.
    const Matrix a1Ct = seqs.alpha(1) * sys.C().transpose();
    grid.blocks_.push_back({L.solve_symmetric(a1Ct * a1Ct.transpose())});
    for (int k = 2; k <= N; ++k) {
        const Matrix& ak = seqs.alpha(k);
        std::vector<Matrix> col;
        col.reserve(static_cast<std::size_t>(k));
        const auto& prev = grid.blocks_[static_cast<std::size_t>(k - 2)];
        col.push_back(L.solve(prev[0] * ak.transpose()));
        for (int j = 2; j < k; ++j) {
            const Matrix rhs = seqs.alpha(j) * col[static_cast<std::size_t>(j - 2)] +
                               prev[static_cast<std::size_t>(j - 1)] * ak.transpose();
            col.push_back(L.solve(rhs));
        }
        const Matrix X = ak * col[static_cast<std::size_t>(k - 2)];
        col.push_back(L.solve_symmetric(X + X.transpose()));
        grid.blocks_.push_back(std::move(col));
    }

    if (N <= settings.gramian_check_order) {
        const auto [AN, BN] = detail::cascade_dynamics(sys, seqs, N);
        const LyapunovSolver LN(AN, settings);
        const Matrix UN = BN * BN.transpose();
        const Matrix PN = symmetrize(LN.solve_unchecked(UN));
        const double berr = LN.backward_error(UN, PN);
        if (!(berr <= settings.lyapunov_residual_tol)) {
            std::ostringstream os;
            os << "gramian_blocks: full cascade Lyapunov solve has backward error " << berr;
            throw Error(ErrorKind::numeric, os.str());
        }
        const Eigen::Index n = sys.states();
        const double floor = 1e-13 * PN.norm();
        for (int k = 1; k <= N; ++k) {
            for (int j = 1; j <= k; ++j) {
                const Matrix full = PN.block((j - 1) * n, (k - 1) * n, n, n);
                const Matrix rec = grid.block(j, k);
                const double scale = std::max(full.norm(), rec.norm());
                const double diff = (full - rec).norm();
                const double rel = scale > 0.0 ? diff / scale : 0.0;
                if (diff > floor) grid.max_mismatch_ = std::max(grid.max_mismatch_, rel);
                if (diff > floor && rel > settings.gramian_check_tol) {
                    std::ostringstream os;
                    os << "gramian_blocks: recurrence block P_" << j << k << " differs from the full cascade Gramian by "
                       << rel << " (relative)";
                    throw Error(ErrorKind::consistency, os.str());
                }
            }
        }
        grid.checked_ = true;
    }
    return grid;
}

/**
 * |F|_{2k} = <beta_k, P_kk>_F^{1/(2k)} for k = 1..N (fewer when the
 * controllability chain breaks; the report then carries the reason).
 */
inline NormReport hs_norms_wick(const StateSpaceSystem& sys, int N, const NumericSettings& settings = default_settings()) {
    if (N < 1) throw Error(ErrorKind::domain, "hs_norms_wick: N must be >= 1");
    NormReport rep;
    rep.method = NormMethod::wick;
    if (!is_hurwitz(sys.A())) throw Error(ErrorKind::precondition, "hs_norms_wick: A is not Hurwitz");
    if (sys.is_trivially_zero()) {
        for (int k = 1; k <= N; ++k) rep.push(k, 0.0);
        rep.diagnostics.emplace_back("transfer function is identically zero (B = 0 or C = 0)");
        return rep;
    }
    const WickSequences seqs = wick_sequences(sys, N, true, settings);
    if (seqs.truncated()) rep.diagnostics.push_back("truncated at order " + std::to_string(seqs.order()) + ": " + *seqs.stop_reason());
    if (seqs.order() == 0) return rep;
    const GramianGrid grid = gramian_blocks(sys, seqs, seqs.order(), settings);
    for (int k = 1; k <= seqs.order(); ++k) {
        const Matrix Pkk = grid.block(k, k);
        double v = frobenius_inner(seqs.beta(k), Pkk);
        const double scale = seqs.beta(k).norm() * Pkk.norm();
        if (v < -1e-10 * scale) {
            std::ostringstream os;
            os << "hs_norms_wick: <beta_" << k << ", P_" << k << k << "> = " << v << " is negative";
            throw Error(ErrorKind::numeric, os.str());
        }
        rep.push(k, std::max(v, 0.0), static_cast<double>(k) <= settings.gramian_check_order ? grid.max_check_mismatch() : 0.0);
    }
    const double h2sq = std::pow(h2_norm(sys, settings), 2);
    if (std::abs(rep.power(1) - h2sq) > 1e-10 * std::max(h2sq, 1e-300)) {
        std::ostringstream os;
        os << "hs_norms_wick: order-1 value " << rep.power(1) << " differs from |F|_2^2 = " << h2sq;
        throw Error(ErrorKind::consistency, os.str());
    }
    return rep;
}

struct CascadeRealization {
    std::vector<StateSpaceSystem> G;  // G_1..G_N, G_k with kn states
    StateSpaceSystem stacked;         // [G_1; ...; G_N] with nN states
};

/// Realizations of G_k = rho_k^T (E alpha_k) ... (E alpha_1) C^T and of their stack.
inline CascadeRealization build_cascade_G(const StateSpaceSystem& sys, const WickSequences& seqs, int N) {
    if (N < 1 || N > seqs.order()) throw Error(ErrorKind::domain, "build_cascade_G: order not covered by sequences");
    const Eigen::Index n = sys.states();
    const auto [AN, BN] = detail::cascade_dynamics(sys, seqs, N);
    CascadeRealization out;
    Eigen::Index rows = 0;
    for (int k = 1; k <= N; ++k) rows += seqs.rho(k).cols();
    Matrix CN = Matrix::Zero(rows, n * N);
    Eigen::Index r = 0;
    for (int k = 1; k <= N; ++k) {
        const Matrix rt = seqs.rho(k).transpose();
        Matrix Ck = Matrix::Zero(rt.rows(), n * k);
        Ck.rightCols(n) = rt;
        out.G.emplace_back(AN.topLeftCorner(n * k, n * k), BN.topRows(n * k), Ck);
        CN.block(r, (k - 1) * n, rt.rows(), n) = rt;
        r += rt.rows();
    }
    out.stacked = StateSpaceSystem(AN, BN, CN);
    return out;
}

/// G_k(iw) evaluated as the ordered product rho_k^T E alpha_k ... E alpha_1 C^T.
inline CMatrix cascade_transfer(const StateSpaceSystem& sys, const WickSequences& seqs, int k, double omega) {
    const Eigen::Index n = sys.states();
    CMatrix M = -sys.A().cast<Complex>();
    M.diagonal().array() += Complex(0.0, omega);
    const Eigen::PartialPivLU<CMatrix> E(M);
    CMatrix Y = sys.C().transpose().cast<Complex>();
    for (int j = 1; j <= k; ++j) Y = E.solve(seqs.alpha(j).cast<Complex>() * Y);
    (void)n;
    return seqs.rho(k).transpose().cast<Complex>() * Y;
}

/// |S(w)^k - G_k(iw)^* G_k(iw)|_F / max(1, |S(w)^k|_F).
inline double verify_factorization(const StateSpaceSystem& sys, const WickSequences& seqs, int k, double omega) {
    const CMatrix S = spectral_density(sys, omega);
    CMatrix Sk = CMatrix::Identity(S.rows(), S.cols());
    for (int i = 0; i < k; ++i) Sk = Sk * S;
    const CMatrix G = cascade_transfer(sys, seqs, k, omega);
    return (Sk - G.adjoint() * G).norm() / std::max(1.0, Sk.norm());
}

struct WeightedCascade {
    StateSpaceSystem H;  // [sqrt(phi_1) G_1; ...; sqrt(phi_N) G_N]
    double h2_squared = 0.0;
};

/**
 * Stacked cascade with outputs weighted by sqrt(phi_k), whose squared H2 norm
 * is the truncated cost sum_{k<=N} phi_k |F|_{2k}^{2k}. Requires phi_k >= 0.
 */
inline WeightedCascade build_weighted_cascade_H(const StateSpaceSystem& sys, const WickSequences& seqs,
                                                const CostShape& shape, int N,
                                                const NumericSettings& settings = default_settings()) {
    if (N < 1 || N > seqs.order()) throw Error(ErrorKind::domain, "build_weighted_cascade_H: order not covered by sequences");
    std::vector<double> w;
    for (int k = 1; k <= N; ++k) {
        const double phi = shape.coeff(k);
        if (phi < 0.0) {
            std::ostringstream os;
            os << "build_weighted_cascade_H: coefficient phi_" << k << " = " << phi
               << " is negative, so the cost is not a sum of squares; use cost_series instead";
            throw Error(ErrorKind::domain, os.str());
        }
        w.push_back(std::sqrt(phi));
    }
    const CascadeRealization casc = build_cascade_G(sys, seqs, N);
    const Eigen::Index n = sys.states();
    Matrix C = casc.stacked.C();
    Eigen::Index r = 0;
    for (int k = 1; k <= N; ++k) {
        const Eigen::Index rk = seqs.rho(k).cols();
        C.block(r, (k - 1) * n, rk, n) *= w[static_cast<std::size_t>(k - 1)];
        r += rk;
    }
    WeightedCascade out{StateSpaceSystem(casc.stacked.A(), casc.stacked.B(), C), 0.0};
    out.h2_squared = std::pow(h2_norm(out.H, settings), 2);
    return out;
}

}  // namespace hsn

#endif  // HSN_WICK_HPP
