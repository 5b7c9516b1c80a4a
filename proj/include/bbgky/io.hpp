// io.hpp - JSON (de)serialization of operators, sequences, system
// specifications and scenarios; CSV output for sweeps and trajectories.
//
// Complex numbers are [re, im]; a bare number is read as a real entry.
// Matrices are row-major nested arrays over the lexicographic product basis.

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bbgky/dynamics.hpp"
#include "bbgky/sequence.hpp"

namespace bbgky {

using Json = nlohmann::ordered_json;

/// Malformed input: JSON syntax, missing fields, wrong types.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& path, const std::string& what) : std::runtime_error(path + ": " + what), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Well-formed input violating a semantic constraint.
class ValidationError : public std::runtime_error {
public:
    ValidationError(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// ---------------------------------------------------------------------------
// primitives

inline Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw ParseError(path, "expected a number or an [re, im] pair");
}

inline Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ParseError(path, "expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array()) throw ParseError(path + "[0]", "expected an array");
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::string rp = path + "[" + std::to_string(r) + "]";
        const Json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array()) throw ParseError(rp, "expected an array");
        if (static_cast<Eigen::Index>(row.size()) != cols) throw ParseError(rp, "ragged matrix row");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)], rp + "[" + std::to_string(c) + "]");
    }
    return m;
}

/// Operator on n particles of dimension d from a matrix; shape checked.
inline Operator operator_from_json(const Json& j, int n, int d, const std::string& path) {
    const Matrix m = matrix_from_json(j, path);
    const auto side = static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(d), n));
    if (m.rows() != side || m.cols() != side)
        throw ValidationError(path, "expected a " + std::to_string(side) + " x " + std::to_string(side) + " matrix");
    return {n, d, m};
}

inline Json to_json(const OperatorSequence& s) {
    Json entries = Json::object();
    for (int n = 0; n <= s.max_n(); ++n) entries[std::to_string(n)] = to_json(s[n].matrix());
    return Json{{"kind", std::string(to_string(s.kind()))}, {"d", s.d()}, {"finite", s.finite()}, {"entries", entries}};
}

namespace detail {

inline const Json& require(const Json& j, const char* key, const std::string& path) {
    if (!j.is_object()) throw ParseError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(path + "." + key, "missing field");
    return *it;
}

inline double number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path, "expected a number");
    return j.get<double>();
}

inline int integer(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ParseError(path, "expected an integer");
    return j.get<int>();
}

inline std::vector<double> numbers(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

/// Entries keyed by particle number: {"0": m0, "1": m1, ...}; contiguous from 0
/// or 1 (a missing "0" is filled with the kind's vacuum value).
inline std::vector<Operator> entries_from_json(const Json& j, int d, SequenceKind kind, const std::string& path) {
    if (!j.is_object()) throw ParseError(path, "expected an object keyed by particle number");
    std::map<int, const Json*> by_n;
    for (auto it = j.begin(); it != j.end(); ++it) {
        int n = -1;
        try {
            std::size_t used = 0;
            n = std::stoi(it.key(), &used);
            if (used != it.key().size()) n = -1;
        } catch (const std::exception&) {
            n = -1;
        }
        if (n < 0) throw ParseError(path + "." + it.key(), "key must be a non-negative integer");
        by_n[n] = &it.value();
    }
    std::vector<Operator> e;
    if (!by_n.count(0)) e.push_back(Operator::scalar(OperatorSequence::default_vacuum(kind), d));
    int expected = by_n.count(0) ? 0 : 1;
    for (const auto& [n, v] : by_n) {
        if (n != expected) throw ValidationError(path + "." + std::to_string(expected), "missing entry");
        e.push_back(operator_from_json(*v, n, d, path + "." + std::to_string(n)));
        ++expected;
    }
    return e;
}

}  // namespace detail

inline OperatorSequence sequence_from_json(const Json& j, const std::string& path) {
    const Json& kind_j = detail::require(j, "kind", path);
    if (!kind_j.is_string()) throw ParseError(path + ".kind", "expected a string");
    SequenceKind kind;
    try {
        kind = sequence_kind_from_string(kind_j.get<std::string>());
    } catch (const std::exception& ex) {
        throw ValidationError(path + ".kind", ex.what());
    }
    const int d = detail::integer(detail::require(j, "d", path), path + ".d");
    if (d < 1) throw ValidationError(path + ".d", "must be >= 1");
    bool finite = true;
    if (j.contains("finite")) {
        if (!j["finite"].is_boolean()) throw ParseError(path + ".finite", "expected a boolean");
        finite = j["finite"].get<bool>();
    }
    auto e = detail::entries_from_json(detail::require(j, "entries", path), d, kind, path + ".entries");
    return {kind, d, std::move(e), finite};
}

// ---------------------------------------------------------------------------
// system specification

inline Json to_json(const SystemSpec& s) {
    return Json{{"d", s.d},           {"K", to_json(s.K)},     {"Phi", to_json(s.Phi)},
                {"epsilon", s.epsilon}, {"N_max", s.N_max}, {"n_max", s.n_max}};
}

/// Parses and validates; field paths are prefixed with `path` ("system").
inline SystemSpec system_from_json(const Json& j, const std::string& path = "system") {
    SystemSpec s;
    s.d = detail::integer(detail::require(j, "d", path), path + ".d");
    s.K = matrix_from_json(detail::require(j, "K", path), path + ".K");
    s.Phi = matrix_from_json(detail::require(j, "Phi", path), path + ".Phi");
    s.epsilon = detail::number(detail::require(j, "epsilon", path), path + ".epsilon");
    s.N_max = detail::integer(detail::require(j, "N_max", path), path + ".N_max");
    s.n_max = j.contains("n_max") ? detail::integer(j["n_max"], path + ".n_max") : s.N_max;
    try {
        s.validate();
    } catch (const std::invalid_argument& ex) {
        // messages are "system.<field>: ..."; re-root the path
        std::string msg = ex.what();
        const auto colon = msg.find(": ");
        std::string field = colon == std::string::npos ? path : msg.substr(0, colon);
        if (field.rfind("system", 0) == 0) field = path + field.substr(6);
        throw ValidationError(field, colon == std::string::npos ? msg : msg.substr(colon + 2));
    }
    return s;
}

// ---------------------------------------------------------------------------
// CSV

/// Shortest round-trip representation with 17 significant digits.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace bbgky
