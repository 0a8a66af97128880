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
#ifndef HSN_COMMON_HPP
#define HSN_COMMON_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hsn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

enum class ErrorKind {
    dimension,        // inconsistent matrix shapes
    precondition,     // e.g. non-Hurwitz dynamics where stability is required
    numeric,          // convergence or residual failure
    domain,           // argument outside the admissible range
    not_psd,          // matrix expected positive semi-definite
    controllability,  // singular link in the cascade controllability chain
    consistency,      // two independent routes disagree
    quadrature,       // adaptive integration failed to converge
    resource,         // problem size over the configured ceiling
    input             // malformed file or command line input
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::dimension: return "dimension";
        case ErrorKind::precondition: return "precondition";
        case ErrorKind::numeric: return "numeric";
        case ErrorKind::domain: return "domain";
        case ErrorKind::not_psd: return "not-psd";
        case ErrorKind::controllability: return "controllability";
        case ErrorKind::consistency: return "consistency";
        case ErrorKind::quadrature: return "quadrature";
        case ErrorKind::resource: return "resource";
        case ErrorKind::input: return "input";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind), message_(what) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    /// The message without the "<kind> error: " prefix.
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
    ErrorKind kind_;
    std::string message_;
};

/**
 * Tolerances shared by every module. A single instance is threaded through the
 * call graph so that a caller can tighten or relax all checks in one place.
 */
struct NumericSettings {
    double symmetry_tol = 1e-10;          // relative asymmetry allowed on symmetric inputs
    double lyapunov_residual_tol = 1e-8;  // relative to max(1, |U|_F)
    double psd_tol = 1e-10;               // eigenvalues >= -psd_tol * |M| count as nonnegative
    double rank_tol = 1e-10;              // eigenvalues <= rank_tol * lambda_max are dropped
    double controllability_tol = 1e-8;    // singular value threshold, relative to sigma_max
    double gamma_singularity_tol = 1e-10; // min eig(gamma_j) <= tol * lambda_max => singular
    double gramian_check_tol = 1e-8;      // recurrence blocks vs full cascade Gramian
    int gramian_check_order = 6;          // full nN Lyapunov cross-check up to this N
    double riccati_residual_tol = 1e-8;
    double primal_dual_warn_tol = 1e-9;
    double primal_dual_fail_tol = 1e-6;
    double hinf_rel_tol = 1e-10;
    double quadrature_rel_tol = 1e-10;
    int quadrature_max_depth = 18;
};

inline const NumericSettings& default_settings() {
    static const NumericSettings settings{};
    return settings;
}

}  // namespace hsn

#endif  // HSN_COMMON_HPP
