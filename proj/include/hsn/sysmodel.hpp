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
#ifndef HSN_SYSMODEL_HPP
#define HSN_SYSMODEL_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hsn/matlin.hpp"

namespace hsn {

/**
 * Strictly proper linear system dX = A X dt + B dW, Z = C X driven by a
 * standard Wiener process W. Transfer function F(s) = C (sI - A)^{-1} B.
 */
class StateSpaceSystem {
public:
    StateSpaceSystem() = default;

    StateSpaceSystem(Matrix A, Matrix B, Matrix C) : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)) {
        std::ostringstream os;
        if (A_.rows() != A_.cols()) {
            os << "A must be square, got " << A_.rows() << "x" << A_.cols();
        } else if (B_.rows() != A_.rows()) {
            os << "B has " << B_.rows() << " rows, expected " << A_.rows();
        } else if (C_.cols() != A_.rows()) {
            os << "C has " << C_.cols() << " columns, expected " << A_.rows();
        }
        if (!os.str().empty()) throw Error(ErrorKind::dimension, os.str());
    }

    [[nodiscard]] const Matrix& A() const { return A_; }
    [[nodiscard]] const Matrix& B() const { return B_; }
    [[nodiscard]] const Matrix& C() const { return C_; }

    [[nodiscard]] Eigen::Index states() const { return A_.rows(); }
    [[nodiscard]] Eigen::Index inputs() const { return B_.cols(); }
    [[nodiscard]] Eigen::Index outputs() const { return C_.rows(); }

    /// BB^T, the state noise intensity.
    [[nodiscard]] Matrix input_weight() const { return B_ * B_.transpose(); }
    /// C^T C.
    [[nodiscard]] Matrix output_weight() const { return C_.transpose() * C_; }

    /// True when the transfer function vanishes identically because B or C is zero.
    [[nodiscard]] bool is_trivially_zero() const { return B_.isZero(0.0) || C_.isZero(0.0); }

private:
    Matrix A_;
    Matrix B_;
    Matrix C_;
};

enum class NormMethod { wick, riccati, quadrature };

inline const char* to_string(NormMethod m) {
    switch (m) {
        case NormMethod::wick: return "wick";
        case NormMethod::riccati: return "riccati";
        case NormMethod::quadrature: return "quadrature";
    }
    return "unknown";
}

/// Hardy-Schatten norms |F|_{2k} for k in `orders` as produced by one method.
struct NormReport {
    NormMethod method = NormMethod::wick;
    std::vector<int> orders;
    std::vector<double> values;     // |F|_{2k}
    std::vector<double> powers;     // |F|_{2k}^{2k}
    std::vector<double> residuals;  // method-specific per-order diagnostic
    std::vector<std::string> diagnostics;

    [[nodiscard]] std::size_t size() const { return orders.size(); }

    [[nodiscard]] bool has_order(int k) const {
        return std::find(orders.begin(), orders.end(), k) != orders.end();
    }

    /// |F|_{2k}^{2k}.
    [[nodiscard]] double power(int k) const { return powers.at(index_of(k)); }
    [[nodiscard]] double value(int k) const { return values.at(index_of(k)); }

    void push(int k, double power_2k, double residual = 0.0) {
        orders.push_back(k);
        powers.push_back(power_2k);
        values.push_back(power_2k > 0.0 ? std::pow(power_2k, 1.0 / (2.0 * k)) : 0.0);
        residuals.push_back(residual);
    }

private:
    [[nodiscard]] std::size_t index_of(int k) const {
        const auto it = std::find(orders.begin(), orders.end(), k);
        if (it == orders.end()) {
            throw Error(ErrorKind::domain, "norm report has no order " + std::to_string(k));
        }
        return static_cast<std::size_t>(it - orders.begin());
    }
};

struct ValidationReport {
    bool hurwitz = false;
    bool controllable = false;           // (A, B)
    bool output_chain_controllable = false;  // (A, P C^T)
    bool observable = false;             // (A, C); reported, never gated on
    std::vector<std::string> notes;

    /// Preconditions of the cascade (Wick) construction at its first two links.
    [[nodiscard]] bool cascade_ready() const { return hurwitz && controllable && output_chain_controllable; }
};

inline Matrix controllability_gramian(const StateSpaceSystem& sys, const NumericSettings& settings = default_settings()) {
    return solve_lyapunov(sys.A(), sys.input_weight(), settings);
}

inline Matrix observability_gramian(const StateSpaceSystem& sys, const NumericSettings& settings = default_settings()) {
    return solve_lyapunov(sys.A().transpose(), sys.output_weight(), settings);
}

inline ValidationReport validate(const StateSpaceSystem& sys, const NumericSettings& settings = default_settings()) {
    ValidationReport rep;
    rep.hurwitz = is_hurwitz(sys.A());
    rep.controllable = is_controllable(sys.A(), sys.B(), settings);
    rep.observable = is_controllable(sys.A().transpose(), sys.C().transpose(), settings);
    if (!rep.hurwitz) {
        rep.notes.emplace_back("A is not Hurwitz: Gramians and norms are undefined");
        return rep;
    }
    const Matrix P = controllability_gramian(sys, settings);
    rep.output_chain_controllable = is_controllable(sys.A(), P * sys.C().transpose(), settings);
    if (!rep.controllable) rep.notes.emplace_back("(A, B) is not controllable");
    if (!rep.output_chain_controllable) rep.notes.emplace_back("(A, P C^T) is not controllable");
    if (!rep.observable) rep.notes.emplace_back("(A, C) is not observable");
    return rep;
}

/// F(s) = C (sI - A)^{-1} B.
inline CMatrix transfer(const StateSpaceSystem& sys, Complex s) {
    const Eigen::Index n = sys.states();
    if (n == 0) return CMatrix::Zero(sys.outputs(), sys.inputs());
    CMatrix M = -sys.A().cast<Complex>();
    M.diagonal().array() += s;
    Eigen::PartialPivLU<CMatrix> lu(M);
    if (!(lu.rcond() > 1e-14)) {
        std::ostringstream os;
        os << "transfer: s = " << s << " is (numerically) a pole of the system";
        throw Error(ErrorKind::domain, os.str());
    }
    return sys.C().cast<Complex>() * lu.solve(sys.B().cast<Complex>());
}

/// S(w) = F(iw) F(iw)^*.
inline CMatrix spectral_density(const StateSpaceSystem& sys, double omega) {
    const CMatrix F = transfer(sys, Complex(0.0, omega));
    const CMatrix S = F * F.adjoint();
    return 0.5 * (S + S.adjoint());
}

/// Largest singular value of F(iw).
inline double gain_at(const StateSpaceSystem& sys, double omega) {
    const CMatrix F = transfer(sys, Complex(0.0, omega));
    if (F.size() == 0) return 0.0;
    // The smaller Gram matrix has the same nonzero spectrum.
    const CMatrix G = F.rows() <= F.cols() ? CMatrix(F * F.adjoint()) : CMatrix(F.adjoint() * F);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(G, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// K(t) = C e^{tA} P C^T for t >= 0 and K(-t) = K(t)^T.
inline Matrix covariance_kernel(const StateSpaceSystem& sys, double t, const Matrix& gramian) {
    if (t < 0.0) return covariance_kernel(sys, -t, gramian).transpose();
    return sys.C() * expm(t * sys.A()) * gramian * sys.C().transpose();
}

inline Matrix covariance_kernel(const StateSpaceSystem& sys, double t,
                                const NumericSettings& settings = default_settings()) {
    return covariance_kernel(sys, t, controllability_gramian(sys, settings));
}

/// |F|_2 = sqrt(<C^T C, P>_F).
inline double h2_norm(const StateSpaceSystem& sys, const NumericSettings& settings = default_settings()) {
    if (sys.states() == 0) return 0.0;
    const double v = frobenius_inner(sys.output_weight(), controllability_gramian(sys, settings));
    return std::sqrt(std::max(0.0, v));
}

struct HinfBracket {
    double lo = 0.0;
    double hi = 0.0;
    double peak_frequency = 0.0;
    int iterations = 0;
};

namespace detail {

/// Frequencies |Im z| of eigenvalues of the Hamiltonian that sit (nearly) on the imaginary axis.
inline std::vector<double> hamiltonian_axis_frequencies(const StateSpaceSystem& sys, double gamma) {
    const Eigen::Index n = sys.states();
    Matrix H(2 * n, 2 * n);
    H << sys.A(), sys.input_weight() / (gamma * gamma), -sys.output_weight(), -sys.A().transpose();
    Eigen::EigenSolver<Matrix> es(H, false);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::numeric, "hinf_norm: Hamiltonian eigenvalues did not converge");
    std::vector<double> out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const Complex z = es.eigenvalues()(i);
        // Loose on purpose: every candidate is confirmed by an actual gain evaluation.
        if (std::abs(z.real()) <= 1e-6 * (1.0 + std::abs(z))) out.push_back(std::abs(z.imag()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> g(static_cast<std::size_t>(count));
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (count - 1));
    return g;
}

}  // namespace detail

/**
 * Certified bracket [lo, hi] on sup_w |F(iw)| with hi - lo <= rel_tol * hi.
 *
 * lo is always an attained gain value. hi is a level at which the Hamiltonian
 * [[A, BB^T/g^2], [-C^T C, -A^T]] has no imaginary-axis eigenvalue whose gain
 * evaluation exceeds lo; the lower bound is raised from the midpoints between
 * imaginary-axis crossings (two-step bisection). A dense refined grid must
 * agree with hi.
 */
inline HinfBracket hinf_norm(const StateSpaceSystem& sys, double rel_tol = default_settings().hinf_rel_tol,
                             const NumericSettings& settings = default_settings()) {
    (void)settings;
    if (!is_hurwitz(sys.A())) throw Error(ErrorKind::precondition, "hinf_norm: A is not Hurwitz");
    HinfBracket br;
    if (sys.is_trivially_zero() || sys.states() == 0) return br;

    // Initial lower bound from the origin, the modal frequencies and a log grid around them.
    const auto ev = eig_general(sys.A());
    double wmin = 1e300;
    double wmax = 0.0;
    std::vector<double> cand{0.0};
    for (const auto& z : ev) {
        wmin = std::min(wmin, std::abs(z));
        wmax = std::max(wmax, std::abs(z));
        cand.push_back(std::abs(z.imag()));
    }
    for (double w : detail::log_grid(1e-3 * wmin, 1e3 * wmax, 400)) cand.push_back(w);
    for (double w : cand) {
        const double g = gain_at(sys, w);
        if (g > br.lo) {
            br.lo = g;
            br.peak_frequency = w;
        }
    }
    if (br.lo == 0.0) return br;

    for (int it = 0; it < 200; ++it) {
        br.iterations = it + 1;
        const double gamma = br.lo * (1.0 + rel_tol);
        const auto freqs = detail::hamiltonian_axis_frequencies(sys, gamma);
        std::vector<double> probes = freqs;
        for (std::size_t i = 0; i + 1 < freqs.size(); ++i) probes.push_back(0.5 * (freqs[i] + freqs[i + 1]));
        double best = br.lo;
        double best_w = br.peak_frequency;
        for (double w : probes) {
            const double g = gain_at(sys, w);
            if (g > best) {
                best = g;
                best_w = w;
            }
        }
        if (best <= br.lo * (1.0 + 1e-3 * rel_tol)) {
            br.hi = gamma;
            break;
        }
        br.lo = best;
        br.peak_frequency = best_w;
    }
    if (br.hi == 0.0) throw Error(ErrorKind::numeric, "hinf_norm: two-step bisection did not converge");

    // Grid cross-check: a golden-section refinement around the best grid point.
    const auto grid = detail::log_grid(1e-3 * wmin, 1e3 * wmax, 2000);
    std::size_t best_i = 0;
    double grid_best = -1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double g = gain_at(sys, grid[i]);
        if (g > grid_best) {
            grid_best = g;
            best_i = i;
        }
    }
    double a = grid[best_i == 0 ? 0 : best_i - 1];
    double b = grid[std::min(best_i + 1, grid.size() - 1)];
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i < 80; ++i) {
        const double x1 = b - phi * (b - a);
        const double x2 = a + phi * (b - a);
        if (gain_at(sys, x1) > gain_at(sys, x2)) b = x2; else a = x1;
    }
    const double refined = std::max(grid_best, gain_at(sys, 0.5 * (a + b)));
    if (refined > br.hi * (1.0 + 1e-9)) {
        std::ostringstream os;
        os << "hinf_norm: grid refinement found gain " << refined << " above certified upper bound " << br.hi;
        throw Error(ErrorKind::numeric, os.str());
    }
    return br;
}

/// Realization (-A^T, C^T, -B^T) of the para-Hermitian conjugate F~(s) = F(-conj(s))^*.
inline StateSpaceSystem conjugate_realization(const StateSpaceSystem& sys) {
    return {-sys.A().transpose(), sys.C().transpose(), -sys.B().transpose()};
}

/**
 * 2n-state realization of S = F F~ with block-diagonal dynamics
 * a = diag(-A^T, A), b = [C^T; P C^T], c = [-C P, C].
 */
inline StateSpaceSystem spectral_density_realization(const StateSpaceSystem& sys,
                                                     const NumericSettings& settings = default_settings()) {
    const Eigen::Index n = sys.states();
    const Eigen::Index p = sys.outputs();
    const Matrix P = controllability_gramian(sys, settings);
    Matrix a = Matrix::Zero(2 * n, 2 * n);
    a.topLeftCorner(n, n) = -sys.A().transpose();
    a.bottomRightCorner(n, n) = sys.A();
    Matrix b(2 * n, p);
    b << sys.C().transpose(), P * sys.C().transpose();
    Matrix c(p, 2 * n);
    c << -sys.C() * P, sys.C();
    return {a, b, c};
}

/// The system factor * F realized by scaling C; BB^T and P are unchanged.
inline StateSpaceSystem scale_output(const StateSpaceSystem& sys, double factor) {
    if (!(factor > 0.0)) throw Error(ErrorKind::domain, "scale_output: factor must be positive");
    return {sys.A(), sys.B(), factor * sys.C()};
}

}  // namespace hsn

#endif  // HSN_SYSMODEL_HPP
