#pragma once

/**
 * @file io.hpp
 * @brief Text formats: generating-vector files and sequence specifiers.
 *
 * Vector file:
 *
 *     n s
 *     z_1
 *     ...
 *     z_s
 *     # gamma_1 = 1
 *     ...
 */

#include "latcbc/wce.hpp"
#include "latcbc/weights.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace latcbc {

/// Malformed input file or specifier.
class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_vector(std::ostream& os, const GeneratingVector& gv, std::span<const double> gamma = {}) {
    os << gv.n << ' ' << gv.dimension() << '\n';
    for (auto z : gv.z) os << z << '\n';
    for (std::size_t j = 0; j < gamma.size(); ++j) os << "# gamma_" << j + 1 << " = " << format_g17(gamma[j]) << '\n';
}

struct VectorFile {
    GeneratingVector gv;
    std::vector<double> gamma;
};

[[nodiscard]] inline VectorFile read_vector(std::istream& is) {
    VectorFile out;
    std::string line;
    std::size_t s = 0;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::size_t idx = 0;
            double g = 0.0;
            char eq = 0;
            std::istringstream ls(line.substr(1));
            std::string key;
            ls >> key >> eq >> g;
            if (key.rfind("gamma_", 0) != 0 || eq != '=' || ls.fail()) continue;
            idx = std::stoul(key.substr(6));
            if (idx != out.gamma.size() + 1) throw parse_error("vector file: weights out of order at " + key);
            out.gamma.push_back(g);
            continue;
        }
        std::istringstream ls(line);
        if (!header) {
            if (!(ls >> out.gv.n >> s)) throw parse_error("vector file: expected header 'n s'");
            header = true;
            continue;
        }
        std::uint64_t z = 0;
        if (!(ls >> z)) throw parse_error("vector file: bad component line '" + line + "'");
        out.gv.z.push_back(z);
    }
    if (!header) throw parse_error("vector file: empty");
    if (out.gv.z.size() != s)
        throw parse_error("vector file: header says s = " + std::to_string(s) + " but " +
                          std::to_string(out.gv.z.size()) + " components follow");
    out.gv.validate();
    return out;
}

inline void save_vector(const std::string& path, const GeneratingVector& gv, std::span<const double> gamma = {}) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open " + path + " for writing");
    write_vector(os, gv, gamma);
    if (!os) throw io_error("write failed: " + path);
}

[[nodiscard]] inline VectorFile load_vector(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open " + path);
    return read_vector(is);
}

/// Whitespace- or comma-separated reals from a file.
[[nodiscard]] inline std::vector<double> load_reals(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open " + path);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) {
        if (tok[0] == '#') {
            std::getline(is, tok);
            continue;
        }
        std::istringstream ts(tok);
        std::string part;
        while (std::getline(ts, part, ',')) {
            if (part.empty()) continue;
            try {
                std::size_t used = 0;
                out.push_back(std::stod(part, &used));
                if (used != part.size()) throw std::invalid_argument(part);
            } catch (const std::exception&) {
                throw parse_error(path + ": not a number: '" + part + "'");
            }
        }
    }
    return out;
}

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

inline double parse_real(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw parse_error(what + ": not a number: '" + s + "'");
    }
}

} // namespace detail

/// "poly c" | "geo r" | "const v" | "file <path>"
[[nodiscard]] inline CoordinateSequence parse_coordinate_sequence(const std::string& spec) {
    const auto t = detail::split_ws(spec);
    if (t.size() != 2) throw parse_error("coordinate sequence: expected '<poly|geo|const|file> <value>', got '" + spec + "'");
    if (t[0] == "poly") return CoordinateSequence::polynomial(detail::parse_real(t[1], "poly exponent"));
    if (t[0] == "geo") return CoordinateSequence::geometric(detail::parse_real(t[1], "geo ratio"));
    if (t[0] == "const") return CoordinateSequence::constant(detail::parse_real(t[1], "const value"));
    if (t[0] == "file") return CoordinateSequence::explicit_list(load_reals(t[1]));
    throw parse_error("coordinate sequence: unknown family '" + t[0] + "'");
}

/// "one" | "linear" | "factorial" | "file <path>" (values B_1, B_2, ...)
[[nodiscard]] inline OrderSequence parse_order_sequence(const std::string& spec) {
    const auto t = detail::split_ws(spec);
    if (t.size() == 1) {
        if (t[0] == "one") return OrderSequence::ones();
        if (t[0] == "linear") return OrderSequence::linear();
        if (t[0] == "factorial") return OrderSequence::factorial();
    }
    if (t.size() == 2 && t[0] == "file") {
        const auto v = load_reals(t[1]);
        return OrderSequence::explicit_list(v);
    }
    throw parse_error("order sequence: expected 'one', 'linear', 'factorial' or 'file <path>', got '" + spec + "'");
}

} // namespace latcbc
