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
#ifndef HSN_IO_HPP
#define HSN_IO_HPP

#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hsn/matlin.hpp"
#include "hsn/sysmodel.hpp"

// System files are JSON objects {"n", "m", "p", "A", "B", "C"} with row-major
// nested arrays. Doubles are written in shortest round-trip form, so a
// written and re-read system is bit-identical.

namespace hsn {

namespace detail {

inline std::string line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline Matrix read_matrix(const nlohmann::json& j, const char* name, long rows, long cols) {
    if (!j.contains(name)) throw Error(ErrorKind::input, std::string("system file: missing field \"") + name + "\"");
    const auto& a = j.at(name);
    const auto fail = [&](const std::string& msg) {
        throw Error(ErrorKind::input, std::string("system file: field \"") + name + "\" " + msg);
    };
    if (!a.is_array()) fail("must be a nested array");
    if (static_cast<long>(a.size()) != rows) fail("has " + std::to_string(a.size()) + " rows, expected " + std::to_string(rows));
    Matrix M(rows, cols);
    for (long r = 0; r < rows; ++r) {
        const auto& row = a[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<long>(row.size()) != cols) {
            fail("row " + std::to_string(r) + " must have " + std::to_string(cols) + " entries");
        }
        for (long c = 0; c < cols; ++c) {
            const auto& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) fail("entry (" + std::to_string(r) + ", " + std::to_string(c) + ") is not a number");
            M(r, c) = v.get<double>();
        }
    }
    return M;
}

inline long read_dim(const nlohmann::json& j, const char* name) {
    if (!j.contains(name) || !j.at(name).is_number_integer() || j.at(name).get<long>() < 0) {
        throw Error(ErrorKind::input, std::string("system file: \"") + name + "\" must be a nonnegative integer");
    }
    return j.at(name).get<long>();
}

inline nlohmann::json write_matrix(const Matrix& M) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        a.push_back(std::move(row));
    }
    return a;
}

}  // namespace detail

inline StateSpaceSystem parse_system(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::input, "system file: JSON syntax error at " + detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0));
    }
    if (!j.is_object()) throw Error(ErrorKind::input, "system file: top level must be an object");
    const long n = detail::read_dim(j, "n");
    const long m = detail::read_dim(j, "m");
    const long p = detail::read_dim(j, "p");
    return {detail::read_matrix(j, "A", n, n), detail::read_matrix(j, "B", n, m), detail::read_matrix(j, "C", p, n)};
}

inline StateSpaceSystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::input, "cannot open system file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_system(ss.str());
    } catch (const Error& e) {
        throw Error(e.kind(), path + ": " + e.message());
    }
}

/// One matrix row per line; numbers in nlohmann's shortest round-trip form.
inline std::string format_system(const StateSpaceSystem& sys) {
    std::ostringstream os;
    os << "{\n  \"n\": " << sys.states() << ",\n  \"m\": " << sys.inputs() << ",\n  \"p\": " << sys.outputs();
    const auto put = [&](const char* name, const Matrix& M) {
        const nlohmann::json rows = detail::write_matrix(M);
        os << ",\n  \"" << name << "\": [";
        for (std::size_t r = 0; r < rows.size(); ++r) os << (r ? ",\n    " : "\n    ") << rows[r].dump();
        os << (rows.empty() ? "]" : "\n  ]");
    };
    put("A", sys.A());
    put("B", sys.B());
    put("C", sys.C());
    os << "\n}\n";
    return os.str();
}

inline void save_system(const StateSpaceSystem& sys, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::input, "cannot write system file " + path);
    out << format_system(sys);
}

/**
 * Gaussian A, B, C with A shifted to spectral abscissa -margin. Entries come
 * from mt19937_64 with standard normal draws, so the output is fixed for a
 * given standard library.
 */
inline StateSpaceSystem random_stable_system(int n, int m, int p, std::uint64_t seed, double margin = 0.3) {
    if (n < 1 || m < 0 || p < 0) throw Error(ErrorKind::domain, "random_stable_system: invalid dimensions");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const auto draw = [&](int r, int c) {
        Matrix M(r, c);
        for (int i = 0; i < r; ++i)
            for (int k = 0; k < c; ++k) M(i, k) = normal(rng);
        return M;
    };
    Matrix A = draw(n, n);
    const Matrix B = draw(n, m);
    const Matrix C = draw(p, n);
    double abscissa = -std::numeric_limits<double>::infinity();
    for (const Complex& z : eig_general(A)) abscissa = std::max(abscissa, z.real());
    A.diagonal().array() -= abscissa + margin;
    return {A, B, C};
}

}  // namespace hsn

#endif  // HSN_IO_HPP
