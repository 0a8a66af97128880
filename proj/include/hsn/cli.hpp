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
#ifndef HSN_CLI_HPP
#define HSN_CLI_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hsn/costshape.hpp"
#include "hsn/io.hpp"
#include "hsn/riccati.hpp"
#include "hsn/simcheck.hpp"
#include "hsn/wick.hpp"

namespace hsn::cli {

enum ExitCode : int { ok = 0, input_error = 2, numeric_failure = 3, verification_failure = 4 };

struct RunConfig {
    std::string command;
    std::vector<std::string> systems;
    int max_order = 10;
    std::string method = "all";      // wick | riccati | quadrature | all
    std::string theta = "0.5/hinf2"; // absolute value, or X/hinf2 for X / |F|_inf^2
    std::string shape = "risk:0.5/hinf2";
    double budget = 0.0;
    double horizon = 200.0;
    double step = 0.01;
    int paths = 2000;
    std::uint64_t seed = 20260101;
    std::string output;
    // generate
    int states = 8;
    int inputs = 3;
    int outputs = 2;
    NumericSettings settings;
};

/// %.17g, the shortest fixed format that round-trips every double.
inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double rel_gap(double a, double b) {
    const double m = std::max(std::abs(a), std::abs(b));
    return m > 0.0 ? std::abs(a - b) / m : 0.0;
}

namespace detail {

inline double parse_double(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw Error(ErrorKind::input, what + ": cannot parse number '" + s + "'");
    return v;
}

/// "X" or "X/hinf2" (X times 1/|F|_inf^2; a zero system uses 1 as the scale).
inline double parse_theta(const std::string& s, const HinfBracket& hb) {
    const std::string suffix = "/hinf2";
    if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
        const double x = parse_double(s.substr(0, s.size() - suffix.size()), "theta");
        return hb.hi > 0.0 ? x / (hb.hi * hb.hi) : x;
    }
    return parse_double(s, "theta");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

/// Output stream: the --output file when given, stdout otherwise.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw Error(ErrorKind::input, "cannot open output file " + path);
            os_ = &file_;
        }
    }
    std::ostream& operator*() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_;
};

inline const std::string& single_system(const RunConfig& cfg) {
    if (cfg.systems.size() != 1) throw Error(ErrorKind::input, cfg.command + ": exactly one --system is required");
    return cfg.systems.front();
}

}  // namespace detail

/**
 * Cost shapes for `cost`: risk:THETA, power:K, coeffs:P1,P2,..., and the
 * Legendre conjugates kl and quadratic (psi_* at sigma = 1).
 */
inline CostShape parse_cost_shape(const std::string& spec, const HinfBracket& hb) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "risk") return risk_sensitive_shape(detail::parse_theta(arg, hb));
    if (kind == "power") return power_shape(static_cast<int>(detail::parse_double(arg, "power")));
    if (kind == "coeffs") {
        std::vector<double> c;
        for (const auto& s : detail::split(arg, ',')) c.push_back(detail::parse_double(s, "coeffs"));
        if (c.empty()) throw Error(ErrorKind::input, "coeffs: at least one coefficient is required");
        return coefficient_shape(c);
    }
    if (kind == "kl") return conjugate_cost_shape(kl_shape());
    if (kind == "quadratic") return conjugate_cost_shape(quadratic_shape());
    throw Error(ErrorKind::input, "unknown cost shape '" + spec + "' (risk:T, power:K, coeffs:..., kl, quadratic)");
}

inline ConvexShape parse_convex_shape(const std::string& spec) {
    if (spec == "kl") return kl_shape();
    if (spec == "quadratic") return quadratic_shape();
    throw Error(ErrorKind::input, "unknown convex shape '" + spec + "' (kl, quadratic)");
}

struct NormTable {
    std::vector<std::string> methods;
    std::vector<std::vector<std::optional<double>>> cells;  // [method][k-1], |F|_{2k}
    std::vector<std::string> errors;
};

/// Runs the selected methods; a failing method leaves empty cells and an error entry.
inline NormTable compute_norm_table(const StateSpaceSystem& sys, int N, const std::string& method,
                                    const NumericSettings& settings) {
    NormTable t;
    if (method == "all") t.methods = {"wick", "riccati", "quadrature"};
    else if (method == "wick" || method == "riccati" || method == "quadrature") t.methods = {method};
    else throw Error(ErrorKind::input, "unknown method '" + method + "' (wick, riccati, quadrature, all)");
    for (const auto& m : t.methods) {
        std::vector<std::optional<double>> col(static_cast<std::size_t>(N));
        try {
            NormReport r;
            if (m == "wick") r = hs_norms_wick(sys, N, settings);
            else if (m == "riccati") r = hs_norms_riccati(sys, N, settings);
            else r = hs_norms_quadrature(sys, N, settings);
            for (int k = 1; k <= N; ++k)
                if (r.has_order(k)) col[static_cast<std::size_t>(k - 1)] = r.value(k);
            for (const auto& d : r.diagnostics) t.errors.push_back(m + ": " + d);
        } catch (const Error& e) {
            t.errors.push_back(m + ": " + e.what());
        }
        t.cells.push_back(std::move(col));
    }
    return t;
}

inline void write_norm_csv(const NormTable& t, int N, std::ostream& os) {
    os << "k";
    for (const auto& m : t.methods) os << "," << m;
    for (std::size_t a = 0; a < t.methods.size(); ++a)
        for (std::size_t b = a + 1; b < t.methods.size(); ++b) os << ",gap_" << t.methods[a] << "_" << t.methods[b];
    os << "\n";
    const auto cell = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
    for (int k = 1; k <= N; ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        os << k;
        for (const auto& col : t.cells) os << "," << cell(col[i]);
        for (std::size_t a = 0; a < t.cells.size(); ++a)
            for (std::size_t b = a + 1; b < t.cells.size(); ++b) {
                os << ",";
                if (t.cells[a][i] && t.cells[b][i]) os << num(rel_gap(*t.cells[a][i], *t.cells[b][i]));
            }
        os << "\n";
    }
}

inline int cmd_norms(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const StateSpaceSystem sys = load_system(detail::single_system(cfg));
    const NormTable t = compute_norm_table(sys, cfg.max_order, cfg.method, cfg.settings);
    detail::Sink sink(cfg.output, out);
    write_norm_csv(t, cfg.max_order, *sink);
    for (const auto& e : t.errors) err << e << "\n";
    bool any_error = false;
    for (const auto& col : t.cells)
        for (const auto& v : col) any_error = any_error || !v;
    return any_error ? numeric_failure : ok;
}

inline int cmd_cost(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const StateSpaceSystem sys = load_system(detail::single_system(cfg));
    const HinfBracket hb = hinf_norm(sys, cfg.settings.hinf_rel_tol, cfg.settings);
    const CostShape shape = parse_cost_shape(cfg.shape, hb);
    detail::Sink sink(cfg.output, out);
    std::ostream& os = *sink;
    os << "quantity,value\n";
    os << "shape," << shape.name << "\n";
    os << "hinf_upper," << num(hb.hi) << "\n";
    int status = ok;
    std::optional<double> series, quad;
    if (shape.has_coefficients()) {
        try {
            const std::string m = cfg.method == "all" ? "riccati" : cfg.method;
            const NormReport r = m == "wick" ? hs_norms_wick(sys, cfg.max_order, cfg.settings)
                               : m == "quadrature" ? hs_norms_quadrature(sys, cfg.max_order, cfg.settings)
                                                   : hs_norms_riccati(sys, cfg.max_order, cfg.settings);
            const SeriesCost s = cost_series(shape, r, cfg.max_order, hb);
            series = s.value;
            os << "series_terms," << s.terms << "\n";
            os << "series," << num(s.value) << "\n";
            os << "series_tail_bound," << num(s.tail_bound) << "\n";
        } catch (const Error& e) {
            err << "series: " << e.what() << "\n";
            status = numeric_failure;
        }
    }
    if (shape.has_closed_form()) {
        try {
            const FrequencyIntegral q = cost_quadrature(sys, shape, cfg.settings, &hb);
            quad = q.value;
            os << "quadrature," << num(q.value) << "\n";
            os << "quadrature_error_estimate," << num(q.error_estimate) << "\n";
        } catch (const Error& e) {
            err << "quadrature: " << e.what() << "\n";
            status = numeric_failure;
        }
    }
    if (series && quad) os << "gap_series_quadrature," << num(rel_gap(*series, *quad)) << "\n";
    return status;
}

inline int cmd_risk(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const StateSpaceSystem sys = load_system(detail::single_system(cfg));
    const HinfBracket hb = hinf_norm(sys, cfg.settings.hinf_rel_tol, cfg.settings);
    const double theta = detail::parse_theta(cfg.theta, hb);
    const RiccatiSolution sol = stabilizing_are(sys, theta, cfg.settings, &hb);
    const double xi = 0.5 * frobenius_inner(sys.input_weight(), sol.Psi);
    const RiskSeries rs = risk_sensitive_series(sys, theta, cfg.max_order,
                                                hs_norms_riccati(sys, cfg.max_order, cfg.settings), hb);
    const FrequencyIntegral q = risk_sensitive_quadrature(sys, theta, cfg.settings);
    detail::Sink sink(cfg.output, out);
    std::ostream& os = *sink;
    os << "quantity,value\n";
    os << "theta," << num(theta) << "\n";
    os << "hinf_upper," << num(hb.hi) << "\n";
    os << "are," << num(xi) << "\n";
    os << "are_residual," << num(sol.residual) << "\n";
    os << "series_terms," << cfg.max_order << "\n";
    os << "series," << num(rs.value) << "\n";
    os << "series_tail_bound," << num(rs.tail_bound) << "\n";
    os << "quadrature," << num(q.value) << "\n";
    os << "gap_are_quadrature," << num(rel_gap(xi, q.value)) << "\n";
    for (const auto& w : sol.warnings) err << "warning: " << w << "\n";
    const bool series_ok = std::abs(xi - rs.value) <= rs.tail_bound * (1.0 + 1e-6) + 1e-12 * std::abs(xi);
    if (!series_ok) err << "ARE value and series partial sum differ by more than the tail bound\n";
    return series_ok ? ok : verification_failure;
}

inline int cmd_bound(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const StateSpaceSystem sys = load_system(detail::single_system(cfg));
    const ConvexShape shape = parse_convex_shape(cfg.shape);
    const VarianceBound b = worst_case_variance_bound(sys, shape, cfg.budget, cfg.settings);
    detail::Sink sink(cfg.output, out);
    std::ostream& os = *sink;
    os << "quantity,value\n";
    os << "shape," << shape.name << "\n";
    os << "budget," << num(cfg.budget) << "\n";
    os << "feasible," << (b.feasible ? 1 : 0) << "\n";
    os << "bound," << num(b.bound) << "\n";
    os << "sigma," << num(b.sigma) << "\n";
    os << "h2_squared," << num(std::pow(h2_norm(sys, cfg.settings), 2)) << "\n";
    for (const auto& w : b.warnings) err << "warning: " << w << "\n";
    return b.feasible ? ok : numeric_failure;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
    const StateSpaceSystem sys = load_system(detail::single_system(cfg));
    const int kmax = std::min(cfg.max_order, 3);
    const NormReport norms = hs_norms_riccati(sys, kmax, cfg.settings);
    const auto samples = simulate_energy(sys, cfg.horizon, cfg.step, cfg.paths, cfg.seed, {}, cfg.settings);
    out << "k,rate,std_error,target,rel_error,z_score\n";
    for (int k = 1; k <= kmax; ++k) {
        const CumulantEstimate e = cumulant_rate(samples, k, cfg.horizon, double_factorial_even(k) * norms.power(k));
        out << k << "," << num(e.rate) << "," << num(e.std_error) << "," << num(e.target) << ","
            << num(e.rel_error) << "," << num(e.z_score) << "\n";
    }
    if (!cfg.output.empty()) {
        detail::Sink sink(cfg.output, out);
        *sink << "path,energy\n";
        for (std::size_t i = 0; i < samples.size(); ++i) *sink << i << "," << num(samples[i]) << "\n";
    }
    return ok;
}

inline int cmd_generate(const RunConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
    const StateSpaceSystem sys = random_stable_system(cfg.states, cfg.inputs, cfg.outputs, cfg.seed);
    detail::Sink sink(cfg.output, out);
    *sink << format_system(sys);
    return ok;
}

// ---------------------------------------------------------------------------
// verify: invariant suite over one or more systems
// ---------------------------------------------------------------------------

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/**
 * Highest order k such that every gamma_j, j < k, has eps * cond(gamma_j) <= 1e-8.
 * Beyond it the cascade cannot represent S^k to 1e-8, so verify compares
 * Wick results only up to this order.
 */
inline int wick_reliable_order(const StateSpaceSystem& sys, int N, const NumericSettings& settings) {
    if (sys.is_trivially_zero()) return N;
    const double cond_limit = 1e-8 / std::numeric_limits<double>::epsilon();
    const WickSequences seqs = wick_sequences(sys, N, false, settings);
    int reliable = 0;
    while (reliable < seqs.order() && seqs.gamma_condition(reliable) <= cond_limit) ++reliable;
    return reliable;
}

inline std::vector<CheckResult> verify_system(const StateSpaceSystem& sys, int N, const NumericSettings& settings) {
    std::vector<CheckResult> res;
    const auto run = [&](const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
        try {
            auto [pass, detail] = fn();
            res.push_back({name, pass, detail});
        } catch (const Error& e) {
            res.push_back({name, false, e.what()});
        }
    };
    const HinfBracket hb = hinf_norm(sys, settings.hinf_rel_tol, settings);
    const NormReport wk = hs_norms_wick(sys, N, settings);
    const NormReport rc = hs_norms_riccati(sys, N, settings);
    const NormReport qd = hs_norms_quadrature(sys, N, settings);
    const int reliable = wick_reliable_order(sys, N, settings);

    run("three-method agreement", [&]() {
        double wr = 0.0, wq = 0.0, rq = 0.0;
        for (int k = 1; k <= N; ++k) {
            rq = std::max(rq, rel_gap(rc.power(k), qd.power(k)));
            if (k > reliable || !wk.has_order(k)) continue;
            wr = std::max(wr, rel_gap(wk.power(k), rc.power(k)));
            wq = std::max(wq, rel_gap(wk.power(k), qd.power(k)));
        }
        std::ostringstream os;
        os << "max gaps wick/riccati " << wr << ", wick/quadrature " << wq << ", riccati/quadrature " << rq
           << " (wick compared on k <= " << std::min(reliable, N) << ")";
        return std::pair{wr <= 1e-8 && wq <= 1e-5 && rq <= 1e-5, os.str()};
    });

    run("norm inequality chain", [&]() {
        if (hb.hi == 0.0) return std::pair{rc.power(1) == 0.0, std::string("zero transfer function")};
        const double g2 = rc.value(1);
        double worst = 0.0;
        for (int k = 1; k <= N; ++k) {
            const double rhs = hb.hi * std::pow(g2 / hb.hi, 1.0 / k);
            worst = std::max(worst, rc.value(k) / rhs);
        }
        return std::pair{worst <= 1.0 + 1e-8, "max ratio " + num(worst)};
    });

    run("spectral factorization", [&]() {
        const WickSequences seqs = wick_sequences(sys, std::min(N, 5), false, settings);
        if (seqs.order() == 0) return std::pair{sys.is_trivially_zero(), std::string("no cascade (") + seqs.stop_reason().value_or("") + ")"};
        const int kmax = std::min(seqs.order(), reliable);
        double worst = 0.0;
        for (int k = 1; k <= kmax; ++k)
            for (double w : hsn::detail::log_grid(1e-2, 1e2, 20)) worst = std::max(worst, verify_factorization(sys, seqs, k, w));
        return std::pair{worst <= 1e-8, "max residual " + num(worst) + " over k <= " + std::to_string(kmax)};
    });

    run("risk-sensitive consistency", [&]() {
        const int terms = 60;
        const NormReport many = hs_norms_riccati(sys, terms, settings);
        double worst_q = 0.0;
        bool series_ok = true;
        for (double f : {0.2, 0.5, 0.8}) {
            const double theta = hb.hi > 0.0 ? f / (hb.hi * hb.hi) : f;
            const double xi = risk_sensitive_cost(sys, theta, settings, &hb);
            const RiskSeries rs = risk_sensitive_series(sys, theta, terms, many, hb);
            series_ok = series_ok && std::abs(xi - rs.value) <= rs.tail_bound + 1e-12 * std::abs(xi);
            const double q = risk_sensitive_quadrature(sys, theta, settings).value;
            worst_q = std::max(worst_q, rel_gap(xi, q));
        }
        return std::pair{series_ok && worst_q <= 1e-5, "max ARE/quadrature gap " + num(worst_q)};
    });

    run("gramian and schattenian identities", [&]() {
        const Matrix P = controllability_gramian(sys, settings);
        const Matrix Q = observability_gramian(sys, settings);
        const SchattenianSequence obs = observability_schattenians(sys, 2, settings);
        const SchattenianSequence ctr = controllability_schattenians(sys, 2, settings);
        const auto rel = [](const Matrix& a, const Matrix& b) {
            const double m = std::max(a.norm(), b.norm());
            return m > 0.0 ? (a - b).norm() / m : 0.0;
        };
        double worst = std::max(rel(obs.raw(1), Q), rel(ctr.raw(1), P));
        std::string note;
        const WickSequences seqs = wick_sequences(sys, 1, false, settings);
        if (seqs.gamma_count() > 1) worst = std::max(worst, rel(0.5 * ctr.raw(2), seqs.gamma(1)));
        else note = " (gamma_1 unavailable: " + seqs.stop_reason().value_or("") + ")";
        return std::pair{worst <= 1e-10, "max relative mismatch " + num(worst) + note};
    });

    run("worst-case bound sanity", [&]() {
        const VarianceBound b = worst_case_variance_bound(sys, kl_shape(), 0.0, settings);
        const double h2 = rc.power(1);
        return std::pair{b.feasible && b.bound >= h2 * (1.0 - 1e-6), "bound " + num(b.bound) + " vs |F|_2^2 " + num(h2)};
    });
    return res;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
    if (cfg.systems.empty()) throw Error(ErrorKind::input, "verify: at least one --system is required");
    bool all = true;
    for (const auto& path : cfg.systems) {
        const StateSpaceSystem sys = load_system(path);
        std::vector<CheckResult> res;
        try {
            res = verify_system(sys, cfg.max_order, cfg.settings);
        } catch (const Error& e) {
            res.push_back({"setup", false, e.what()});
        }
        for (const auto& r : res) {
            out << (r.pass ? "PASS " : "FAIL ") << path << " | " << r.name << " | " << r.detail << "\n";
            all = all && r.pass;
        }
    }
    out << (all ? "verify: all checks passed" : "verify: FAILURES") << "\n";
    return all ? ok : verification_failure;
}

/// Dispatches on cfg.command and maps errors to exit codes.
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        if (cfg.max_order < 1) throw Error(ErrorKind::input, "--max-order must be >= 1");
        if (cfg.command == "norms") return cmd_norms(cfg, out, err);
        if (cfg.command == "cost") return cmd_cost(cfg, out, err);
        if (cfg.command == "risk") return cmd_risk(cfg, out, err);
        if (cfg.command == "bound") return cmd_bound(cfg, out, err);
        if (cfg.command == "simulate") return cmd_simulate(cfg, out, err);
        if (cfg.command == "verify") return cmd_verify(cfg, out, err);
        if (cfg.command == "generate") return cmd_generate(cfg, out, err);
        throw Error(ErrorKind::input, "unknown command '" + cfg.command + "'");
    } catch (const Error& e) {
        err << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::input:
            case ErrorKind::dimension: return input_error;
            case ErrorKind::consistency: return verification_failure;
            default: return numeric_failure;
        }
    }
}

}  // namespace hsn::cli

#endif  // HSN_CLI_HPP
