#pragma once

/**
 * @file run.hpp
 * @brief Execute a RunConfig over its grid of moduli and write the outputs.
 */

#include "latcbc/cbc.hpp"
#include "latcbc/config.hpp"
#include "latcbc/construct.hpp"
#include "latcbc/io.hpp"
#include "latcbc/pool.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace latcbc {

struct RunRow {
    std::uint64_t n = 0;
    ConstructionResult result;
    std::optional<IcbcTrace> trace;
    double seconds = 0.0;
};

/// One construction as described by `c` at modulus n.
[[nodiscard]] inline RunRow run_single(const RunConfig& c, std::uint64_t n) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto spec = c.bound_spec();
    RunRow row;
    row.n = n;
    switch (c.algorithm) {
    case Algorithm::cbc: {
        const auto w = c.resolve_weights(spec);
        row.result = cbc_pod(n, c.s, w);
        attach_norm_bound(row.result, spec);
        row.result.meta.b_family = spec.b.describe();
        row.result.meta.B_family = spec.B.describe();
        break;
    }
    case Algorithm::dcbc: {
        const double g1 = c.resolve_gamma1(spec);
        if (spec.product_form() && c.Gamma_source.empty())
            row.result = dcbc_product(n, c.s, spec, g1);
        else
            row.result = dcbc_pod(n, c.s, spec, c.resolve_Gamma(spec), g1);
        break;
    }
    case Algorithm::icbc: {
        auto [res, trace] = icbc(n, c.s, spec, c.icbc);
        row.result = std::move(res);
        row.trace = std::move(trace);
        break;
    }
    }
    for (double e : row.result.E_history)
        if (!std::isfinite(e)) throw numerical_error("non-finite error bound at n = " + std::to_string(n));
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

[[nodiscard]] inline std::string expand_n(const std::string& pattern, std::uint64_t n) {
    std::string out = pattern;
    const auto pos = out.find("{n}");
    if (pos != std::string::npos) out.replace(pos, 3, std::to_string(n));
    return out;
}

[[nodiscard]] inline std::string format_sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4e", x);
    return buf;
}

[[nodiscard]] inline std::string format_fixed(double x, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

/// Table: "n,E[,lambda]" per row, then "rate,<fitted exponent>".
inline void write_run_table(std::ostream& os, const std::vector<RunRow>& rows) {
    const bool lam = !rows.empty() && rows.front().trace.has_value();
    os << "n,E" << (lam ? ",lambda" : "") << '\n';
    std::vector<std::pair<std::uint64_t, double>> pts;
    for (const auto& r : rows) {
        os << r.n << ',' << format_sci(r.result.E());
        if (lam) os << ',' << format_fixed(r.trace->lambda_star, 5);
        os << '\n';
        pts.emplace_back(r.n, r.result.E());
    }
    if (pts.size() >= 2) os << "rate," << format_fixed(fit_power_law(pts).exponent, 4) << (lam ? "," : "") << '\n';
}

/// Per-dimension history: "i,z,gamma,e2,M,E".
inline void write_history(std::ostream& os, const ConstructionResult& r) {
    os << "i,z,gamma,e2,M,E\n";
    for (std::size_t i = 0; i < r.gv.dimension(); ++i) {
        os << i + 1 << ',' << r.gv.z[i] << ',' << format_g17(r.scheme.product_part(i + 1)) << ','
           << format_g17(r.e2_history[i]) << ',' << format_g17(r.M_history[i]) << ',' << format_g17(r.E_history[i])
           << '\n';
    }
}

namespace detail {

/// Files created during a run; removed unless commit() is called.
class OutputGuard {
public:
    OutputGuard() = default;
    OutputGuard(const OutputGuard&) = delete;
    OutputGuard& operator=(const OutputGuard&) = delete;
    ~OutputGuard() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& p : paths_) std::filesystem::remove(p, ec);
    }

    std::ofstream open(const std::string& path) {
        const auto parent = std::filesystem::path(path).parent_path();
        std::error_code ec;
        if (!parent.empty()) std::filesystem::create_directories(parent, ec);
        std::ofstream os(path);
        if (!os) throw io_error("cannot open " + path + " for writing");
        paths_.push_back(path);
        return os;
    }

    void commit() noexcept { committed_ = true; }

private:
    std::vector<std::string> paths_;
    bool committed_ = false;
};

inline void close_checked(std::ofstream& os, const std::string& path) {
    os.close();
    if (!os) throw io_error("write failed: " + path);
}

} // namespace detail

/// Execute the whole grid; rows are returned in grid order.
[[nodiscard]] inline std::vector<RunRow> run(const RunConfig& c) {
    std::vector<RunRow> rows(c.n.size());
    parallel_for(c.n.size(), c.threads, [&](std::size_t i) { rows[i] = run_single(c, c.n[i]); });

    detail::OutputGuard guard;
    for (const auto& r : rows) {
        if (!c.vector_path.empty()) {
            const auto path = expand_n(c.vector_path, r.n);
            auto os = guard.open(path);
            std::vector<double> g(r.result.gv.dimension());
            for (std::size_t j = 0; j < g.size(); ++j) g[j] = r.result.scheme.product_part(j + 1);
            write_vector(os, r.result.gv, g);
            detail::close_checked(os, path);
        }
        if (!c.history_path.empty()) {
            const auto path = expand_n(c.history_path, r.n);
            auto os = guard.open(path);
            write_history(os, r.result);
            detail::close_checked(os, path);
        }
    }
    if (!c.table_path.empty()) {
        auto os = guard.open(c.table_path);
        write_run_table(os, rows);
        detail::close_checked(os, c.table_path);
        const auto tpath = c.table_path + ".timing.csv";
        auto ts = guard.open(tpath);
        ts << "n,seconds\n";
        for (const auto& r : rows) ts << r.n << ',' << format_fixed(r.seconds, 3) << '\n';
        detail::close_checked(ts, tpath);
    }
    guard.commit();
    return rows;
}

} // namespace latcbc
