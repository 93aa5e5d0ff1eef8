#pragma once

/**
 * @file config.hpp
 * @brief Run configuration: INI-style sections of key = value lines.
 *
 *     [run]
 *     algorithm = dcbc          ; cbc | dcbc | icbc
 *     n = 251, 499, 997
 *     s = 100
 *     threads = 1
 *
 *     [bounds]
 *     b = poly 2                ; poly c | geo r | const v | file <path>
 *     B = one                   ; one | linear | factorial | file <path>
 *
 *     [weights]
 *     weights = product-poly 2  ; cbc only: product-poly c | product-geo r | lambda l | file <path>
 *     Gamma = equal-B           ; dcbc with B != one: equal-B | linear | factorial | file <path>
 *     gamma1 = default          ; default | lambda1 | <real>
 *
 *     [icbc]
 *     lambda0 = 0.75
 *     tau = 1e-3
 *     k_max = 10
 *
 *     [output]
 *     vector = out/z_{n}.txt    ; {n} is replaced by the modulus
 *     table = out/table.csv
 *     history = out/history_{n}.csv
 */

#include "latcbc/construct.hpp"
#include "latcbc/io.hpp"
#include "latcbc/numerics.hpp"
#include "latcbc/weights.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace latcbc {

/// Invalid or inconsistent configuration; what() names the offending field.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Algorithm { cbc, dcbc, icbc };

[[nodiscard]] inline const char* to_string(Algorithm a) noexcept {
    switch (a) {
    case Algorithm::cbc: return "cbc";
    case Algorithm::dcbc: return "dcbc";
    case Algorithm::icbc: return "icbc";
    }
    return "?";
}

struct RunConfig {
    Algorithm algorithm = Algorithm::dcbc;
    std::vector<std::uint64_t> n;
    std::size_t s = 100;
    unsigned threads = 1;

    std::string b_family = "poly 2";
    std::string B_family = "one";
    std::string weights;
    std::string Gamma_source;
    std::string gamma1 = "default";

    IcbcOptions icbc;

    std::string vector_path;
    std::string table_path;
    std::string history_path;

    /// Non-fatal findings from validate(), e.g. composite moduli.
    std::vector<std::string> warnings;

    [[nodiscard]] NormBoundSpec bound_spec() const {
        return NormBoundSpec{parse_coordinate_sequence(b_family), parse_order_sequence(B_family)};
    }

    /// gamma_1 for DCBC.
    [[nodiscard]] double resolve_gamma1(const NormBoundSpec& spec) const {
        if (gamma1 == "default") return default_gamma1;
        if (gamma1 == "lambda1") return lambda_one_gamma1(spec);
        return detail::parse_real(gamma1, "weights.gamma1");
    }

    /// Order factors for POD DCBC; equal-B reuses the bound factors.
    [[nodiscard]] OrderSequence resolve_Gamma(const NormBoundSpec& spec) const {
        if (Gamma_source == "equal-B") return spec.B;
        return parse_order_sequence(Gamma_source);
    }

    /// CBC weight scheme of dimension s.
    [[nodiscard]] WeightScheme resolve_weights(const NormBoundSpec& spec) const {
        const auto t = detail::split_ws(weights);
        if (t.size() != 2) throw config_error("weights.weights: expected '<family> <value>', got '" + weights + "'");
        if (t[0] == "lambda") return lambda_weights(spec, detail::parse_real(t[1], "weights.weights"), s);
        std::vector<double> g;
        if (t[0] == "product-poly" || t[0] == "product-geo") {
            const double p = detail::parse_real(t[1], "weights.weights");
            const auto seq = t[0] == "product-poly" ? CoordinateSequence::polynomial(p) : CoordinateSequence::geometric(p);
            for (std::size_t i = 1; i <= s; ++i) g.push_back(seq(i));
        } else if (t[0] == "file") {
            g = load_reals(t[1]);
            if (g.size() < s) throw config_error("weights.weights: file has fewer than s weights");
            g.resize(s);
        } else {
            throw config_error("weights.weights: unknown family '" + t[0] + "'");
        }
        return WeightScheme::product(std::move(g));
    }

    /// Throws config_error naming the offending field.
    void validate() {
        warnings.clear();
        if (n.empty()) throw config_error("run.n: at least one modulus is required");
        for (auto m : n) {
            if (m < 2) throw config_error("run.n: modulus " + std::to_string(m) + " is below 2");
            if (!is_prime(m)) warnings.push_back("run.n: " + std::to_string(m) + " is composite; the O(n^2) scan is used");
        }
        if (s < 1) throw config_error("run.s: dimension must be positive");
        if (threads < 1) throw config_error("run.threads: must be at least 1");

        NormBoundSpec spec;
        try {
            spec = bound_spec();
        } catch (const std::exception& e) {
            throw config_error(std::string("bounds: ") + e.what());
        }
        if (spec.b.available() < s) throw config_error("bounds.b: fewer than s values");
        if (spec.B.available() < s) throw config_error("bounds.B: fewer than s values");
        for (std::size_t i = 1; i <= s; ++i)
            if (!(spec.b(i) > 0.0)) throw config_error("bounds.b: values must be positive");

        switch (algorithm) {
        case Algorithm::cbc:
            if (weights.empty()) throw config_error("weights.weights: required for algorithm = cbc");
            try {
                (void)resolve_weights(spec);
            } catch (const config_error&) {
                throw;
            } catch (const std::exception& e) {
                throw config_error(std::string("weights.weights: ") + e.what());
            }
            break;
        case Algorithm::dcbc:
            if (!spec.product_form() && Gamma_source.empty())
                throw config_error("weights.Gamma: required for dcbc when bounds.B is not 'one'");
            if (!Gamma_source.empty()) {
                try {
                    if (resolve_Gamma(spec).available() < s) throw config_error("weights.Gamma: fewer than s values");
                } catch (const config_error&) {
                    throw;
                } catch (const std::exception& e) {
                    throw config_error(std::string("weights.Gamma: ") + e.what());
                }
            }
            try {
                if (!(resolve_gamma1(spec) > 0.0)) throw config_error("weights.gamma1: must be positive");
            } catch (const config_error&) {
                throw;
            } catch (const std::exception& e) {
                throw config_error(std::string("weights.gamma1: ") + e.what());
            }
            break;
        case Algorithm::icbc:
            if (!(icbc.lambda0 > 0.5 && icbc.lambda0 <= 1.0)) throw config_error("icbc.lambda0: must lie in (1/2, 1]");
            if (!(icbc.tau > 0.0)) throw config_error("icbc.tau: must be positive");
            if (icbc.k_max < 1) throw config_error("icbc.k_max: must be at least 1");
            break;
        }
    }
};

namespace detail {

inline std::vector<std::uint64_t> parse_moduli(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::string t = text;
    for (auto& c : t)
        if (c == ',') c = ' ';
    std::istringstream is(t);
    std::string tok;
    while (is >> tok) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(tok, &used);
            if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
            out.push_back(static_cast<std::uint64_t>(v));
        } catch (const std::exception&) {
            throw config_error("run.n: not an integer: '" + tok + "'");
        }
    }
    return out;
}

template <typename T>
T get_as(const boost::property_tree::ptree& pt, const std::string& key, T fallback) {
    const auto v = pt.get_optional<std::string>(key);
    if (!v) return fallback;
    std::istringstream is(*v);
    T out{};
    if (!(is >> out) || !(is >> std::ws).eof()) throw config_error(key + ": cannot parse '" + *v + "'");
    return out;
}

inline std::string strip_comment(std::string v) {
    const auto pos = v.find(';');
    if (pos != std::string::npos) v.erase(pos);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.pop_back();
    return v;
}

} // namespace detail

/// Parse and validate; throws config_error.
[[nodiscard]] inline RunConfig parse_config(std::istream& is) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw config_error(std::string("config syntax: ") + e.what());
    }
    for (auto& [section, body] : tree)
        for (auto& [key, val] : body) val.put_value(detail::strip_comment(val.get_value<std::string>()));

    static const std::vector<std::pair<std::string, std::vector<std::string>>> known = {
        {"run", {"algorithm", "n", "s", "threads"}},
        {"bounds", {"b", "B"}},
        {"weights", {"weights", "Gamma", "gamma1"}},
        {"icbc", {"lambda0", "tau", "k_max"}},
        {"output", {"vector", "table", "history"}},
    };
    for (auto& [section, body] : tree) {
        auto it = std::find_if(known.begin(), known.end(), [&](auto& k) { return k.first == section; });
        if (it == known.end()) throw config_error(section + ": unknown section");
        for (auto& [key, val] : body)
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                throw config_error(section + "." + key + ": unknown key");
    }

    RunConfig c;
    const auto algo = tree.get<std::string>("run.algorithm", "dcbc");
    if (algo == "cbc")
        c.algorithm = Algorithm::cbc;
    else if (algo == "dcbc")
        c.algorithm = Algorithm::dcbc;
    else if (algo == "icbc")
        c.algorithm = Algorithm::icbc;
    else
        throw config_error("run.algorithm: expected cbc, dcbc or icbc, got '" + algo + "'");
    c.n = detail::parse_moduli(tree.get<std::string>("run.n", ""));
    c.s = detail::get_as<std::size_t>(tree, "run.s", 100);
    c.threads = detail::get_as<unsigned>(tree, "run.threads", 1);
    c.b_family = tree.get<std::string>("bounds.b", c.b_family);
    c.B_family = tree.get<std::string>("bounds.B", c.B_family);
    c.weights = tree.get<std::string>("weights.weights", "");
    c.Gamma_source = tree.get<std::string>("weights.Gamma", "");
    c.gamma1 = tree.get<std::string>("weights.gamma1", c.gamma1);
    c.icbc.lambda0 = detail::get_as<double>(tree, "icbc.lambda0", c.icbc.lambda0);
    c.icbc.tau = detail::get_as<double>(tree, "icbc.tau", c.icbc.tau);
    c.icbc.k_max = detail::get_as<int>(tree, "icbc.k_max", c.icbc.k_max);
    c.vector_path = tree.get<std::string>("output.vector", "");
    c.table_path = tree.get<std::string>("output.table", "");
    c.history_path = tree.get<std::string>("output.history", "");
    c.validate();
    return c;
}

[[nodiscard]] inline RunConfig parse_config_string(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

} // namespace latcbc
