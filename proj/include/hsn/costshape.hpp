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
#ifndef HSN_COSTSHAPE_HPP
#define HSN_COSTSHAPE_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hsn/quadrature.hpp"
#include "hsn/sysmodel.hpp"

namespace hsn {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/**
 * Cost-shaping function phi(z) = sum_{k>=1} phi_k z^k, analytic on |z| < radius.
 *
 * Either representation may be absent: a shape built from a Legendre conjugate
 * has only a closed form, a user coefficient list has only the series (its
 * closed form is the polynomial itself).
 */
struct CostShape {
    std::string name;
    std::function<double(int)> coefficient;      // phi_k for k >= 1
    std::function<double(double)> closed_form;   // phi(z) on [0, closed_form_hi)
    double radius = kInf;
    double closed_form_hi = kInf;

    [[nodiscard]] bool has_coefficients() const { return static_cast<bool>(coefficient); }
    [[nodiscard]] bool has_closed_form() const { return static_cast<bool>(closed_form); }

    [[nodiscard]] double coeff(int k) const {
        if (!has_coefficients()) throw Error(ErrorKind::domain, "shape '" + name + "' has no series coefficients");
        return coefficient(k);
    }
};

/// phi(z) = -1/2 ln(1 - theta z), coefficients theta^k / (2k), radius 1/theta.
inline CostShape risk_sensitive_shape(double theta) {
    if (!(theta > 0.0)) throw Error(ErrorKind::domain, "risk_sensitive_shape: theta must be positive");
    CostShape s;
    s.name = "risk-sensitive:" + std::to_string(theta);
    s.coefficient = [theta](int k) { return std::pow(theta, k) / (2.0 * k); };
    s.closed_form = [theta](double z) { return -0.5 * std::log1p(-theta * z); };
    s.radius = 1.0 / theta;
    s.closed_form_hi = 1.0 / theta;
    return s;
}

/// phi(z) = z^k.
inline CostShape power_shape(int k) {
    if (k < 1) throw Error(ErrorKind::domain, "power_shape: order must be >= 1");
    CostShape s;
    s.name = "power:" + std::to_string(k);
    s.coefficient = [k](int j) { return j == k ? 1.0 : 0.0; };
    s.closed_form = [k](double z) { return std::pow(z, k); };
    return s;
}

/// Polynomial (or truncated series) shape from phi_1, phi_2, ... with a declared radius.
inline CostShape coefficient_shape(std::vector<double> coeffs, double radius = kInf) {
    if (coeffs.empty()) throw Error(ErrorKind::domain, "coefficient_shape: empty coefficient list");
    if (!(radius > 0.0)) throw Error(ErrorKind::domain, "coefficient_shape: radius must be positive");
    CostShape s;
    s.name = "coeffs";
    s.radius = radius;
    s.closed_form_hi = radius;
    s.coefficient = [coeffs](int k) {
        return k >= 1 && static_cast<std::size_t>(k) <= coeffs.size() ? coeffs[static_cast<std::size_t>(k - 1)] : 0.0;
    };
    s.closed_form = [coeffs](double z) {
        double acc = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = (acc + *it) * z;
        return acc;
    };
    return s;
}

/// Sum of phi_k z^k until the terms are negligible; requires |z| < radius.
inline double shape_series_value(const CostShape& shape, double z, int max_terms = 100000) {
    double acc = 0.0;
    double zk = 1.0;
    int small = 0;
    for (int k = 1; k <= max_terms; ++k) {
        zk *= z;
        const double term = shape.coeff(k) * zk;
        acc += term;
        small = std::abs(term) <= 1e-18 * std::max(1.0, std::abs(acc)) ? small + 1 : 0;
        if (small >= 8 || zk == 0.0) break;
    }
    return acc;
}

/// Closed form against series at 10 points of [0, R/2] (or [0, 1] for an entire shape).
inline void check_shape(const CostShape& shape, double tol = 1e-10) {
    if (!(shape.radius > 0.0)) throw Error(ErrorKind::domain, "shape radius must be positive");
    if (!shape.has_closed_form() || !shape.has_coefficients()) return;
    const double top = std::isfinite(shape.radius) ? 0.5 * shape.radius : 1.0;
    for (int i = 0; i < 10; ++i) {
        const double z = top * i / 9.0;
        const double a = shape.closed_form(z);
        const double b = shape_series_value(shape, z);
        if (std::abs(a - b) > tol * std::max(1.0, std::abs(a))) {
            std::ostringstream os;
            os << "shape '" << shape.name << "': closed form " << a << " and series " << b << " disagree at z = " << z;
            throw Error(ErrorKind::consistency, os.str());
        }
    }
}

struct SeriesCost {
    double value = 0.0;       // sum_{k<=N} phi_k |F|_{2k}^{2k}
    double tail_bound = 0.0;  // sum_{k>N} |phi_k| |F|_inf^{2k-2} |F|_2^2
    int terms = 0;
};

/**
 * J_phi(F) truncated to N terms of sum_k phi_k |F|_{2k}^{2k}, with the tail
 * bounded through |F|_{2k}^{2k} <= |F|_inf^{2k-2} |F|_2^2 and the certified
 * upper H-infinity bracket.
 */
inline SeriesCost cost_series(const CostShape& shape, const NormReport& norms, int N, const HinfBracket& hinf) {
    if (N < 1) throw Error(ErrorKind::domain, "cost_series: N must be >= 1");
    const double g2 = hinf.hi * hinf.hi;
    if (!(g2 < shape.radius)) {
        std::ostringstream os;
        os << "cost_series: |F|_inf^2 <= " << g2 << " is not inside the radius of convergence " << shape.radius
           << " of shape '" << shape.name << "'";
        throw Error(ErrorKind::domain, os.str());
    }
    SeriesCost out;
    out.terms = N;
    for (int k = 1; k <= N; ++k) {
        if (!norms.has_order(k)) {
            throw Error(ErrorKind::domain, "cost_series: norm report lacks order " + std::to_string(k));
        }
        out.value += shape.coeff(k) * norms.power(k);
    }
    const double h2sq = norms.power(1);
    if (h2sq == 0.0 || g2 == 0.0) return out;
    double tail = 0.0;
    double gk = std::pow(g2, N);  // |F|_inf^{2k-2} at k = N + 1
    int small = 0;
    for (int k = N + 1; k <= N + 1000000; ++k) {
        const double term = std::abs(shape.coeff(k)) * gk * h2sq;
        tail += term;
        small = term <= 1e-18 * std::max(tail, 1e-300) ? small + 1 : 0;
        if (small >= 8 || gk == 0.0) break;
        gk *= g2;
    }
    out.tail_bound = tail;
    return out;
}

inline SeriesCost cost_series(const StateSpaceSystem& sys, const CostShape& shape, const NormReport& norms, int N,
                              const NumericSettings& settings = default_settings()) {
    return cost_series(shape, norms, N, hinf_norm(sys, settings.hinf_rel_tol, settings));
}

namespace detail {

/// Nonzero spectrum of S(w) = F F^*, read off the smaller Gram matrix.
inline Vector spectral_density_eigenvalues(const StateSpaceSystem& sys, double omega, double psd_tol) {
    const CMatrix F = transfer(sys, Complex(0.0, omega));
    const CMatrix G = F.rows() <= F.cols() ? CMatrix(F * F.adjoint()) : CMatrix(F.adjoint() * F);
    return psd_eigenvalues(0.5 * (G + G.adjoint()), psd_tol, "spectral density");
}

}  // namespace detail

/// J_phi(F) = (1/2pi) int Tr phi(S(w)) dw with the shape's closed form.
inline FrequencyIntegral cost_quadrature(const StateSpaceSystem& sys, const CostShape& shape,
                                         const NumericSettings& settings = default_settings(),
                                         const HinfBracket* hinf = nullptr) {
    if (!shape.has_closed_form()) {
        throw Error(ErrorKind::domain, "cost_quadrature: shape '" + shape.name + "' has no closed form");
    }
    if (sys.is_trivially_zero()) return {};
    const HinfBracket br = hinf ? *hinf : hinf_norm(sys, settings.hinf_rel_tol, settings);
    if (!(br.hi * br.hi < shape.closed_form_hi)) {
        std::ostringstream os;
        os << "cost_quadrature: spectrum of S reaches " << br.hi * br.hi << ", outside the closed-form domain [0, "
           << shape.closed_form_hi << ") of shape '" << shape.name << "'";
        throw Error(ErrorKind::domain, os.str());
    }
    auto integrand = [&](double w) {
        const Vector lam = detail::spectral_density_eigenvalues(sys, w, settings.psd_tol);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < lam.size(); ++i) acc += detail::checked_apply(shape.closed_form, lam(i), "cost_quadrature");
        return acc;
    };
    return frequency_integral(integrand, settings);
}

/// Hardy-Schatten norms from (1/2pi) int Tr S(w)^k dw.
inline NormReport hs_norms_quadrature(const StateSpaceSystem& sys, int N,
                                      const NumericSettings& settings = default_settings()) {
    if (N < 1) throw Error(ErrorKind::domain, "hs_norms_quadrature: N must be >= 1");
    if (!is_hurwitz(sys.A())) throw Error(ErrorKind::precondition, "hs_norms_quadrature: A is not Hurwitz");
    NormReport rep;
    rep.method = NormMethod::quadrature;
    for (int k = 1; k <= N; ++k) {
        if (sys.is_trivially_zero()) {
            rep.push(k, 0.0);
            continue;
        }
        auto integrand = [&](double w) {
            const Vector lam = detail::spectral_density_eigenvalues(sys, w, settings.psd_tol);
            return lam.array().pow(static_cast<double>(k)).sum();
        };
        const FrequencyIntegral q = frequency_integral(integrand, settings);
        rep.push(k, q.value, q.error_estimate);
    }
    return rep;
}

/// -(1/4pi) int ln det(I - theta S(w)) dw.
inline FrequencyIntegral risk_sensitive_quadrature(const StateSpaceSystem& sys, double theta,
                                                   const NumericSettings& settings = default_settings()) {
    if (theta == 0.0 || sys.is_trivially_zero()) return {};
    return cost_quadrature(sys, risk_sensitive_shape(theta), settings);
}

// ---------------------------------------------------------------------------
// Convex shapes and Legendre conjugation
// ---------------------------------------------------------------------------

/// Strictly convex psi on an open interval (lo, hi), endpoints possibly infinite.
struct ConvexShape {
    std::string name;
    double lo = -kInf;
    double hi = kInf;
    std::function<double(double)> psi;
    std::function<double(double)> dpsi;
    std::function<double(double)> d2psi;
};

/// psi(z) = (z - 1 - ln z) / 2 on (0, inf); psi(1) = 0 is its minimum.
inline ConvexShape kl_shape() {
    ConvexShape s;
    s.name = "kl";
    s.lo = 0.0;
    s.hi = kInf;
    s.psi = [](double z) { return 0.5 * (z - 1.0 - std::log(z)); };
    s.dpsi = [](double z) { return 0.5 * (1.0 - 1.0 / z); };
    s.d2psi = [](double z) { return 0.5 / (z * z); };
    return s;
}

/// psi(z) = z^2 / 2 on the real line (self-conjugate).
inline ConvexShape quadratic_shape() {
    ConvexShape s;
    s.name = "quadratic";
    s.psi = [](double z) { return 0.5 * z * z; };
    s.dpsi = [](double z) { return z; };
    s.d2psi = [](double) { return 1.0; };
    return s;
}

/// Throws unless psi'' > 0 on a sampled grid of the domain.
inline void check_convex(const ConvexShape& shape, int samples = 64) {
    const double a = std::isfinite(shape.lo) ? shape.lo : (std::isfinite(shape.hi) ? shape.hi - 100.0 : -100.0);
    const double b = std::isfinite(shape.hi) ? shape.hi : a + 100.0 + (std::isfinite(shape.lo) ? 0.0 : 100.0);
    for (int i = 1; i <= samples; ++i) {
        const double z = a + (b - a) * i / (samples + 1.0);
        if (!(shape.d2psi(z) > 0.0)) {
            std::ostringstream os;
            os << "convex shape '" << shape.name << "': second derivative is not positive at z = " << z;
            throw Error(ErrorKind::domain, os.str());
        }
    }
}

namespace detail {

inline double probe_inside(double end, double toward) {
    if (!std::isfinite(end)) return end > 0 ? 1e12 : -1e12;
    const double delta = 1e-12 * std::max(1.0, std::abs(end));
    return toward > end ? end + delta : end - delta;
}

}  // namespace detail

/// (psi'(lo+), psi'(hi-)), probed numerically; magnitudes past 1e11 read as infinite.
inline std::pair<double, double> derivative_range(const ConvexShape& shape) {
    const double mid = std::isfinite(shape.lo) && std::isfinite(shape.hi) ? 0.5 * (shape.lo + shape.hi) : 0.0;
    double a = shape.dpsi(detail::probe_inside(shape.lo, mid));
    double b = shape.dpsi(detail::probe_inside(shape.hi, mid));
    if (std::abs(a) > 1e11 || !std::isfinite(a)) a = -kInf;
    if (std::abs(b) > 1e11 || !std::isfinite(b)) b = kInf;
    return {a, b};
}

struct LegendrePoint {
    double value = 0.0;      // psi_*(z)
    double argmax = 0.0;     // v(z) = (psi')^{-1}(z)
    double curvature = 0.0;  // psi_*''(z) = 1 / psi''(v(z))
};

/**
 * psi_*(z) = z v - psi(v) with psi'(v) = z, found by Newton's method safeguarded
 * by a bisection bracket inside the domain.
 */
inline LegendrePoint legendre_conjugate(const ConvexShape& shape, double z) {
    const auto [zlo, zhi] = derivative_range(shape);
    if (!(z > zlo && z < zhi)) {
        std::ostringstream os;
        os << "legendre_conjugate: z = " << z << " lies outside the derivative range (" << zlo << ", " << zhi
           << ") of shape '" << shape.name << "'";
        throw Error(ErrorKind::domain, os.str());
    }
    double start;
    if (std::isfinite(shape.lo) && std::isfinite(shape.hi)) start = 0.5 * (shape.lo + shape.hi);
    else if (std::isfinite(shape.lo)) start = shape.lo + std::max(1.0, std::abs(shape.lo));
    else if (std::isfinite(shape.hi)) start = shape.hi - std::max(1.0, std::abs(shape.hi));
    else start = 0.0;

    // Bracket [a, b] with psi'(a) <= z <= psi'(b).
    double a = start;
    double b = start;
    for (int i = 0; shape.dpsi(a) > z; ++i) {
        if (i > 4000) throw Error(ErrorKind::numeric, "legendre_conjugate: could not bracket from below");
        a = std::isfinite(shape.lo) ? shape.lo + 0.5 * (a - shape.lo) : a - std::ldexp(1.0, std::min(i, 1000));
    }
    for (int i = 0; shape.dpsi(b) < z; ++i) {
        if (i > 4000) throw Error(ErrorKind::numeric, "legendre_conjugate: could not bracket from above");
        b = std::isfinite(shape.hi) ? shape.hi - 0.5 * (shape.hi - b) : b + std::ldexp(1.0, std::min(i, 1000));
    }

    double v = shape.dpsi(a) == z ? a : (shape.dpsi(b) == z ? b : 0.5 * (a + b));
    for (int it = 0; it < 300; ++it) {
        const double f = shape.dpsi(v) - z;
        if (f == 0.0) break;
        if (f < 0.0) a = v; else b = v;
        double next = v - f / shape.d2psi(v);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        const double step = std::abs(next - v);
        v = next;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(v) || step == 0.0) break;
    }
    const double resid = std::abs(shape.dpsi(v) - z);
    // Rounding v alone moves psi'(v) by about eps |v| psi''(v).
    const double floor = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(v) * shape.d2psi(v);
    if (resid > 1e-12 * std::max(1.0, std::abs(z)) + floor) {
        std::ostringstream os;
        os << "legendre_conjugate: derivative inversion stalled at residual " << resid << " for z = " << z;
        throw Error(ErrorKind::numeric, os.str());
    }
    return {z * v - shape.psi(v), v, 1.0 / shape.d2psi(v)};
}

/// psi_* as a ConvexShape in its own right, with v(z) as derivative.
inline ConvexShape conjugate_shape(const ConvexShape& shape) {
    const auto [zlo, zhi] = derivative_range(shape);
    ConvexShape s;
    s.name = shape.name + "*";
    s.lo = zlo;
    s.hi = zhi;
    s.psi = [shape](double z) { return legendre_conjugate(shape, z).value; };
    s.dpsi = [shape](double z) { return legendre_conjugate(shape, z).argmax; };
    s.d2psi = [shape](double z) { return legendre_conjugate(shape, z).curvature; };
    return s;
}

/// Cost shape phi(z) = psi_*(sigma z) evaluated through numerical Legendre conjugation.
inline CostShape conjugate_cost_shape(const ConvexShape& shape, double sigma = 1.0) {
    if (!(sigma > 0.0)) throw Error(ErrorKind::domain, "conjugate_cost_shape: sigma must be positive");
    const auto [zlo, zhi] = derivative_range(shape);
    if (!(zlo < 0.0 && zhi > 0.0)) {
        throw Error(ErrorKind::domain, "conjugate_cost_shape: psi_* is not defined in a neighbourhood of 0");
    }
    CostShape s;
    s.name = shape.name + "*";
    s.closed_form = [shape, sigma](double z) { return legendre_conjugate(shape, sigma * z).value; };
    s.closed_form_hi = zhi / sigma;
    s.radius = zhi / sigma;
    return s;
}

struct VarianceBound {
    bool feasible = false;
    double bound = kInf;   // inf over sigma of (J_{psi_*}(sqrt(sigma) F) + d) / sigma
    double sigma = 0.0;    // achieved minimizer
    double sigma_lo = 0.0;
    double sigma_hi = 0.0;
    std::vector<std::string> warnings;
};

/**
 * Guaranteed upper bound on the worst-case output variance over input spectra
 * Sigma with J_psi <= d:  inf_{sigma > 0} (J_{psi_*}(sqrt(sigma) F) + d) / sigma.
 *
 * sigma ranges over [1e-6, 0.95 sigma_sup] with sigma_sup |F|_inf^2 the right end
 * of psi_*'s domain. A 64-point log scan seeds a golden-section refinement;
 * several local minima in the scan are reported as a warning.
 */
inline VarianceBound worst_case_variance_bound(const StateSpaceSystem& sys, const ConvexShape& shape, double d,
                                               const NumericSettings& settings = default_settings()) {
    if (!(d >= 0.0)) throw Error(ErrorKind::domain, "worst_case_variance_bound: budget d must be nonnegative");
    check_convex(shape);
    const auto [zlo, zhi] = derivative_range(shape);
    if (!(zlo < 0.0 && zhi > 0.0)) {
        throw Error(ErrorKind::domain, "worst_case_variance_bound: psi_* must be defined around 0");
    }
    const double at0 = legendre_conjugate(shape, 0.0).value;
    if (std::abs(at0) > 1e-10) {
        std::ostringstream os;
        os << "worst_case_variance_bound: psi_*(0) = " << at0 << " != 0, the conjugate cost would diverge";
        throw Error(ErrorKind::domain, os.str());
    }

    VarianceBound out;
    const HinfBracket br = hinf_norm(sys, settings.hinf_rel_tol, settings);
    const double g2 = br.hi * br.hi;
    const double sigma_sup = (g2 > 0.0 && std::isfinite(zhi)) ? zhi / g2 : 1e6;
    out.sigma_lo = 1e-6;
    out.sigma_hi = 0.95 * sigma_sup;
    if (!(out.sigma_hi > out.sigma_lo)) {
        out.warnings.emplace_back("empty feasible sigma bracket");
        return out;
    }
    out.feasible = true;

    const CostShape phi = conjugate_cost_shape(shape, 1.0);
    auto objective = [&](double log_sigma) {
        const double sigma = std::exp(log_sigma);
        double J = 0.0;
        if (!sys.is_trivially_zero()) {
            const StateSpaceSystem scaled = scale_output(sys, std::sqrt(sigma));
            HinfBracket sb = br;
            sb.lo *= std::sqrt(sigma);
            sb.hi *= std::sqrt(sigma);
            J = cost_quadrature(scaled, phi, settings, &sb).value;
        }
        return (J + d) / sigma;
    };

    constexpr int kScan = 64;
    const double la = std::log(out.sigma_lo);
    const double lb = std::log(out.sigma_hi);
    std::vector<double> xs(kScan);
    std::vector<double> fs(kScan);
    int best = 0;
    for (int i = 0; i < kScan; ++i) {
        xs[i] = la + (lb - la) * i / (kScan - 1);
        fs[i] = objective(xs[i]);
        if (fs[i] < fs[best]) best = i;
    }
    int minima = 0;
    for (int i = 0; i < kScan; ++i) {
        const bool left = i == 0 || fs[i] < fs[i - 1];
        const bool right = i == kScan - 1 || fs[i] < fs[i + 1];
        minima += (left && right) ? 1 : 0;
    }
    if (minima > 1) out.warnings.emplace_back("objective is not unimodal on the sigma scan; refined around the scan minimum");

    double a = xs[std::max(best - 1, 0)];
    double b = xs[std::min(best + 1, kScan - 1)];
    double best_x = xs[best];
    double best_f = fs[best];
    const double phi_g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - phi_g * (b - a);
    double x2 = a + phi_g * (b - a);
    double f1 = objective(x1);
    double f2 = objective(x2);
    for (int it = 0; it < 200; ++it) {
        if (f1 < best_f) { best_f = f1; best_x = x1; }
        if (f2 < best_f) { best_f = f2; best_x = x2; }
        if (std::abs(f1 - f2) <= 1e-7 * std::abs(best_f) && (b - a) < 1e-3) break;
        if (b - a < 1e-10) break;
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - phi_g * (b - a);
            f1 = objective(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + phi_g * (b - a);
            f2 = objective(x2);
        }
    }
    out.bound = best_f;
    out.sigma = std::exp(best_x);
    return out;
}

}  // namespace hsn

#endif  // HSN_COSTSHAPE_HPP
