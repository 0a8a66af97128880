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
#ifndef HSN_SIMCHECK_HPP
#define HSN_SIMCHECK_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hsn/costshape.hpp"
#include "hsn/matlin.hpp"
#include "hsn/sysmodel.hpp"

namespace hsn {

/// Exact sampling of dX = A X dt + B dW on a uniform grid: X_{i+1} = A_d X_i + N(0, Q_d).
struct DiscreteModel {
    double step = 0.0;
    Matrix Ad;
    Matrix Qd;
    double stationarity_error = 0.0;  // |A_d P A_d^T + Q_d - P|_F / max(1, |P|_F)
};

/// Van Loan: exp(h [[A, BB^T], [0, -A^T]]) = [[F11, F12], [0, F22]], A_d = F11, Q_d = F12 F11^T.
inline DiscreteModel discretize(const StateSpaceSystem& sys, double h,
                                const NumericSettings& settings = default_settings()) {
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorKind::domain, "discretize: step must be positive");
    const Eigen::Index n = sys.states();
    Matrix M = Matrix::Zero(2 * n, 2 * n);
    M.topLeftCorner(n, n) = sys.A() * h;
    M.topRightCorner(n, n) = sys.input_weight() * h;
    M.bottomRightCorner(n, n) = -sys.A().transpose() * h;
    const Matrix E = expm(M);
    DiscreteModel d;
    d.step = h;
    d.Ad = E.topLeftCorner(n, n);
    d.Qd = symmetrize(E.topRightCorner(n, n) * d.Ad.transpose());
    const Matrix P = controllability_gramian(sys, settings);
    d.stationarity_error = (d.Ad * P * d.Ad.transpose() + d.Qd - P).norm() / std::max(1.0, P.norm());
    if (!(d.stationarity_error <= 1e-9)) {
        std::ostringstream os;
        os << "discretize: stationarity identity violated by " << d.stationarity_error;
        throw Error(ErrorKind::numeric, os.str());
    }
    return d;
}

/// 64-bit finalizer used to derive independent per-path seeds from one master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct SimulationOptions {
    bool stationary_start = true;  // X(0) ~ N(0, P); otherwise X(0) = 0
};

/**
 * Samples of the output energy int_0^T |C X(t)|^2 dt, accumulated with the
 * trapezoidal rule on the step-h grid. Path i uses mt19937_64 seeded with
 * splitmix64(seed + i), so results do not depend on evaluation order.
 */
inline std::vector<double> simulate_energy(const StateSpaceSystem& sys, double T, double h, int n_paths,
                                           std::uint64_t seed, const SimulationOptions& opts = {},
                                           const NumericSettings& settings = default_settings()) {
    if (!(T > 0.0) || n_paths < 1) throw Error(ErrorKind::domain, "simulate_energy: need T > 0 and at least one path");
    const double a_norm = sys.A().operatorNorm();
    if (a_norm > 0.0 && h > 0.02 / a_norm * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "simulate_energy: step " << h << " exceeds 0.02/|A| = " << 0.02 / a_norm;
        throw Error(ErrorKind::precondition, os.str());
    }
    const auto steps = static_cast<long>(std::llround(T / h));
    if (steps < 1) throw Error(ErrorKind::domain, "simulate_energy: horizon shorter than one step");
    const DiscreteModel d = discretize(sys, h, settings);
    const Matrix Lq = psd_sqrt_factor(d.Qd, settings);
    const Matrix Lp = psd_sqrt_factor(controllability_gramian(sys, settings), settings);
    const Matrix& C = sys.C();

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n_paths));
    Vector x(sys.states()), xn(sys.states()), xi_q(Lq.cols()), xi_p(Lp.cols()), z(sys.outputs());
    for (int path = 0; path < n_paths; ++path) {
        std::mt19937_64 rng(splitmix64(seed + static_cast<std::uint64_t>(path)));
        std::normal_distribution<double> normal;
        if (opts.stationary_start && Lp.cols() > 0) {
            for (Eigen::Index i = 0; i < xi_p.size(); ++i) xi_p(i) = normal(rng);
            x.noalias() = Lp * xi_p;
        } else {
            x.setZero();
        }
        z.noalias() = C * x;
        double prev = z.squaredNorm();
        double energy = 0.0;
        for (long s = 0; s < steps; ++s) {
            xn.noalias() = d.Ad * x;
            if (Lq.cols() > 0) {
                for (Eigen::Index i = 0; i < xi_q.size(); ++i) xi_q(i) = normal(rng);
                xn.noalias() += Lq * xi_q;
            }
            x.swap(xn);
            z.noalias() = C * x;
            const double cur = z.squaredNorm();
            energy += 0.5 * h * (prev + cur);
            prev = cur;
        }
        out.push_back(energy);
    }
    return out;
}

/// Cumulants from raw moments mu_1..mu_k, k <= 3.
inline std::vector<double> cumulants_from_moments(const std::vector<double>& mu) {
    if (mu.empty() || mu.size() > 3) {
        std::ostringstream os;
        os << "cumulants_from_moments: unsupported order " << mu.size() << " (1..3 supported)";
        throw Error(ErrorKind::domain, os.str());
    }
    std::vector<double> c{mu[0]};
    if (mu.size() >= 2) c.push_back(mu[1] - mu[0] * mu[0]);
    if (mu.size() >= 3) c.push_back(mu[2] - 3.0 * mu[0] * mu[1] + 2.0 * mu[0] * mu[0] * mu[0]);
    return c;
}

/// (2k-2)!!
inline double double_factorial_even(int k) {
    double r = 1.0;
    for (int j = 2; j <= 2 * k - 2; j += 2) r *= j;
    return r;
}

struct CumulantEstimate {
    int order = 1;
    double horizon = 0.0;
    double rate = 0.0;       // C_{k,T}/T from all samples
    double std_error = 0.0;  // batch means
    double target = 0.0;     // (2k-2)!! |F|_{2k}^{2k}
    double rel_error = 0.0;
    double z_score = 0.0;
};

namespace detail {

/// k-th cumulant estimate (central-moment form, numerically stabler than raw moments).
inline double sample_cumulant(const double* x, std::size_t m, int k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += x[i];
    mean /= static_cast<double>(m);
    if (k == 1) return mean;
    double c2 = 0.0, c3 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double d = x[i] - mean;
        c2 += d * d;
        c3 += d * d * d;
    }
    c2 /= static_cast<double>(m);
    c3 /= static_cast<double>(m);
    // Central moments: mu = (0, c2, c3) relative to the mean, so Pi_2 = c2 and Pi_3 = c3.
    return cumulants_from_moments({0.0, c2, c3})[static_cast<std::size_t>(k - 1)];
}

}  // namespace detail

/// Monte-Carlo C_{k,T}/T from energy samples with a 20-batch standard error.
inline CumulantEstimate cumulant_rate(const std::vector<double>& samples, int k, double T, double target) {
    if (k < 1 || k > 3) throw Error(ErrorKind::domain, "cumulant_rate: unsupported order (1..3 supported)");
    constexpr std::size_t kBatches = 20;
    if (samples.size() < 2 * kBatches) throw Error(ErrorKind::domain, "cumulant_rate: need at least 40 samples");
    CumulantEstimate e;
    e.order = k;
    e.horizon = T;
    e.target = target;
    e.rate = detail::sample_cumulant(samples.data(), samples.size(), k) / T;
    const std::size_t per = samples.size() / kBatches;
    std::vector<double> b;
    for (std::size_t i = 0; i < kBatches; ++i) b.push_back(detail::sample_cumulant(samples.data() + i * per, per, k) / T);
    double bm = 0.0;
    for (double v : b) bm += v;
    bm /= kBatches;
    double var = 0.0;
    for (double v : b) var += (v - bm) * (v - bm);
    var /= (kBatches - 1);
    e.std_error = std::sqrt(var / kBatches);
    e.rel_error = target != 0.0 ? std::abs(e.rate - target) / std::abs(target) : std::abs(e.rate);
    e.z_score = e.std_error > 0.0 ? (e.rate - target) / e.std_error : 0.0;
    return e;
}

/// Simulates and compares C_{k,T}/T with (2k-2)!! |F|_{2k}^{2k} for the given norms.
inline CumulantEstimate cumulant_rate_check(const StateSpaceSystem& sys, int k, double T, double h, int n_paths,
                                            std::uint64_t seed, const NormReport& norms,
                                            const NumericSettings& settings = default_settings()) {
    if (k < 1 || k > 3) throw Error(ErrorKind::domain, "cumulant_rate_check: unsupported order (1..3 supported)");
    const auto samples = simulate_energy(sys, T, h, n_paths, seed, {}, settings);
    return cumulant_rate(samples, k, T, double_factorial_even(k) * norms.power(k));
}

struct ToeplitzTrace {
    double value = 0.0;           // (1/T) Tr phi(K_T)
    double max_eigenvalue = 0.0;  // operator norm of the discretized K_T
    double min_eigenvalue = 0.0;  // before clipping
    int grid = 0;
};

/**
 * (1/T) Tr phi(K_T) for the covariance operator on [0, T], discretized by the
 * midpoint rule into the symmetric block Toeplitz matrix [h K(t_i - t_j)].
 * Negative eigenvalues (round-off; the sampled kernel is positive definite)
 * are clipped to 0.
 */
inline ToeplitzTrace toeplitz_trace(const StateSpaceSystem& sys, const CostShape& shape, double T, double h,
                                    const NumericSettings& settings = default_settings()) {
    if (!shape.has_closed_form()) throw Error(ErrorKind::domain, "toeplitz_trace: shape has no closed form");
    if (!(T > 0.0) || !(h > 0.0)) throw Error(ErrorKind::domain, "toeplitz_trace: need T > 0 and h > 0");
    const auto N = static_cast<Eigen::Index>(std::llround(T / h));
    const Eigen::Index p = sys.outputs();
    if (N < 1) throw Error(ErrorKind::domain, "toeplitz_trace: horizon shorter than one step");
    if (p * N > 6000) {
        std::ostringstream os;
        os << "toeplitz_trace: grid size " << p * N << " exceeds 6000";
        throw Error(ErrorKind::resource, os.str());
    }
    ToeplitzTrace out;
    out.grid = static_cast<int>(N);
    if (sys.is_trivially_zero() || p == 0) return out;
    const Matrix P = controllability_gramian(sys, settings);
    const Matrix Eh = expm(sys.A() * h);
    // K(l h) = C e^{A l h} P C^T for l >= 0.
    std::vector<Matrix> lag;
    lag.reserve(static_cast<std::size_t>(N));
    Matrix X = P * sys.C().transpose();
    for (Eigen::Index l = 0; l < N; ++l) {
        lag.push_back(h * (sys.C() * X));
        X = Eh * X;
    }
    Matrix K(p * N, p * N);
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const Matrix& b = lag[static_cast<std::size_t>(i - j)];
            K.block(i * p, j * p, p, p) = b;
            if (i != j) K.block(j * p, i * p, p, p) = b.transpose();
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(K), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::numeric, "toeplitz_trace: eigensolver failed");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        double lam = es.eigenvalues()(i);
        out.min_eigenvalue = std::min(out.min_eigenvalue, lam);
        lam = std::max(lam, 0.0);
        out.max_eigenvalue = std::max(out.max_eigenvalue, lam);
        if (lam >= shape.closed_form_hi) {
            std::ostringstream os;
            os << "toeplitz_trace: eigenvalue " << lam << " outside the shape's domain [0, " << shape.closed_form_hi << ")";
            throw Error(ErrorKind::domain, os.str());
        }
        sum += shape.closed_form(lam);
    }
    out.value = sum / (static_cast<double>(N) * h);
    return out;
}

}  // namespace hsn

#endif  // HSN_SIMCHECK_HPP
