#pragma once

/**
 * @file tables.hpp
 * @brief Reproduction of the eight published result tables.
 *
 * Every table uses s = 100 and the moduli in table_moduli. Columns are either
 * RMS bounds E (reported with a fitted rate) or ICBC lambda* values. Reference
 * values are stored for comparison only and never enter a computation.
 */

#include "latcbc/cbc.hpp"
#include "latcbc/construct.hpp"
#include "latcbc/io.hpp"
#include "latcbc/pool.hpp"
#include "latcbc/run.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace latcbc {

inline constexpr std::array<std::uint64_t, 8> table_moduli = {251, 499, 997, 1999, 4001, 7993, 16001, 32003};
inline constexpr std::size_t table_dimension = 100;

/// What produces a column's values.
struct ColumnJob {
    enum class Kind { cbc_product_poly, cbc_lambda, dcbc, icbc };
    Kind kind = Kind::cbc_product_poly;
    double param = 0.0;   // exponent for cbc_product_poly, lambda for cbc_lambda
    std::string Gamma;    // dcbc order factors: "" (product), "linear", "factorial"

    [[nodiscard]] std::string key(const std::string& b, const std::string& B) const {
        std::string k = b + "|" + B + "|";
        switch (kind) {
        case Kind::cbc_product_poly: return k + "cbc-poly " + format_g17(param);
        case Kind::cbc_lambda: return k + "cbc-lambda " + format_g17(param);
        case Kind::dcbc: return k + "dcbc " + Gamma;
        case Kind::icbc: return k + "icbc";
        }
        return k;
    }
};

struct ColumnDef {
    std::string name;
    ColumnJob job;
    bool lambda_column = false;  // report lambda* instead of E
    bool deterministic = false;  // fully specified weights: classic CBC
    std::array<double, 8> reference{};
    std::optional<double> reference_rate;
};

struct TableDef {
    int id = 0;
    std::string b_family;
    std::string B_family;
    std::vector<ColumnDef> columns;

    /// Bound spec of a column (Table 4 mixes b-families, so per column).
    std::string column_b(std::size_t c) const {
        if (id == 4) return c == 0 ? "poly 2" : c == 1 ? "geo 0.5" : "geo 0.8";
        return b_family;
    }
};

namespace detail {

inline ColumnDef e_col(std::string name, ColumnJob job, bool det, std::array<double, 8> ref, double rate) {
    return ColumnDef{std::move(name), std::move(job), false, det, ref, rate};
}

inline ColumnDef lam_col(std::string name, std::array<double, 8> ref) {
    return ColumnDef{std::move(name), ColumnJob{ColumnJob::Kind::icbc, 0.0, ""}, true, false, ref, std::nullopt};
}

inline std::vector<ColumnDef> product_table_columns(const std::array<std::array<double, 8>, 6>& v,
                                                    const std::array<double, 6>& rates) {
    using K = ColumnJob::Kind;
    return {
        e_col("DCBC", {K::dcbc, 0.0, ""}, false, v[0], rates[0]),
        e_col("ICBC", {K::icbc, 0.0, ""}, false, v[1], rates[1]),
        e_col("gamma=i^-1.1", {K::cbc_product_poly, 1.1, ""}, true, v[2], rates[2]),
        e_col("gamma=i^-2", {K::cbc_product_poly, 2.0, ""}, true, v[3], rates[3]),
        e_col("gamma(lambda=0.6)", {K::cbc_lambda, 0.6, ""}, true, v[4], rates[4]),
        e_col("gamma(lambda=1)", {K::cbc_lambda, 1.0, ""}, true, v[5], rates[5]),
    };
}

inline std::vector<ColumnDef> pod_table_columns(const std::string& other, const std::array<std::array<double, 8>, 4>& v,
                                                const std::array<double, 3>& rates) {
    using K = ColumnJob::Kind;
    const std::string other_name = other == "linear" ? "DCBC Gamma=l" : "DCBC Gamma=l!";
    return {
        e_col("DCBC Gamma=B", {K::dcbc, 0.0, "equal-B"}, false, v[0], rates[0]),
        e_col(other_name, {K::dcbc, 0.0, other}, false, v[1], rates[1]),
        e_col("ICBC", {K::icbc, 0.0, ""}, false, v[2], rates[2]),
        lam_col("lambda*", v[3]),
    };
}

} // namespace detail

/// Reference values of all tables, n ascending.
[[nodiscard]] inline const std::vector<TableDef>& reference_tables() {
    static const std::vector<TableDef> tables = [] {
        using detail::pod_table_columns;
        using detail::product_table_columns;
        std::vector<TableDef> t;
        t.push_back({1, "poly 2", "one",
                     product_table_columns({{{6.8e-3, 3.5e-3, 1.8e-3, 9.7e-4, 5.1e-4, 2.7e-4, 1.4e-4, 7.4e-5},
                                             {7.0e-3, 3.6e-3, 1.9e-3, 1.0e-3, 5.2e-4, 2.7e-4, 1.4e-4, 7.5e-5},
                                             {3.5e-2, 2.1e-2, 1.3e-2, 7.8e-3, 4.8e-3, 2.9e-3, 1.8e-3, 1.1e-3},
                                             {7.5e-3, 4.0e-3, 2.2e-3, 1.2e-3, 6.3e-4, 3.4e-4, 1.9e-4, 1.0e-4},
                                             {8.2e-3, 4.2e-3, 2.2e-3, 1.1e-3, 5.8e-4, 2.9e-4, 1.5e-4, 7.9e-5},
                                             {1.3e-2, 7.6e-3, 4.3e-3, 2.4e-3, 1.4e-3, 7.8e-4, 4.4e-4, 2.5e-4}}},
                                           {0.93, 0.93, 0.71, 0.88, 0.95, 0.82})});
        t.push_back({2, "geo 0.5", "one",
                     product_table_columns({{{4.1e-3, 2.1e-3, 1.1e-3, 5.6e-4, 2.9e-4, 1.5e-4, 7.6e-5, 3.9e-5},
                                             {3.3e-3, 1.7e-3, 8.6e-4, 4.4e-4, 2.2e-4, 1.1e-4, 5.9e-5, 3.0e-5},
                                             {2.8e-2, 1.7e-2, 1.0e-2, 6.2e-3, 3.8e-3, 2.3e-3, 1.4e-3, 8.7e-4},
                                             {5.5e-3, 2.9e-3, 1.6e-3, 8.6e-4, 4.6e-4, 2.5e-4, 1.4e-4, 7.5e-5},
                                             {3.3e-3, 1.7e-3, 8.6e-4, 4.4e-4, 2.2e-4, 1.1e-4, 5.9e-5, 3.0e-5},
                                             {6.7e-3, 3.6e-3, 2.0e-3, 1.1e-3, 5.8e-4, 3.1e-4, 1.7e-4, 9.3e-5}}},
                                           {0.96, 0.96, 0.71, 0.88, 0.97, 0.88})});
        t.push_back({3, "geo 0.8", "one",
                     product_table_columns({{{9.9e-2, 5.7e-2, 3.5e-2, 2.1e-2, 1.2e-2, 7.3e-3, 4.3e-3, 2.5e-3},
                                             {8.3e-2, 5.0e-2, 2.9e-2, 1.7e-2, 1.0e-2, 5.9e-3, 3.5e-3, 2.0e-3},
                                             {2.0e-1, 1.2e-1, 7.5e-2, 4.6e-2, 2.8e-2, 1.7e-2, 1.0e-2, 6.4e-3},
                                             {2.8, 1.5, 8.2e-1, 4.4e-1, 2.4e-1, 1.3e-1, 7.1e-2, 3.9e-2},
                                             {1.6e-1, 8.9e-2, 5.1e-2, 2.8e-2, 1.6e-2, 9.1e-3, 5.0e-3, 2.9e-3},
                                             {1.2e-1, 7.2e-2, 4.5e-2, 2.8e-2, 1.8e-2, 1.1e-2, 6.7e-3, 4.2e-3}}},
                                           {0.75, 0.75, 0.71, 0.88, 0.82, 0.69})});
        t.push_back({4, "", "one",
                     {detail::lam_col("b=i^-2", {.672, .668, .661, .657, .652, .645, .642, .637}),
                      detail::lam_col("b=0.5^i", {.616, .615, .610, .607, .604, .601, .597, .594}),
                      detail::lam_col("b=0.8^i", {.756, .744, .735, .725, .715, .711, .700, .696})}});
        t.push_back({5, "poly 2", "linear",
                     pod_table_columns("factorial",
                                       {{{8.6e-3, 4.6e-3, 2.5e-3, 1.3e-3, 6.9e-4, 3.7e-4, 1.9e-4, 1.0e-4},
                                         {8.5e-3, 4.5e-3, 2.5e-3, 1.3e-3, 7.0e-4, 3.7e-4, 2.0e-4, 1.1e-4},
                                         {8.7e-3, 4.6e-3, 2.5e-3, 1.3e-3, 6.8e-4, 3.6e-4, 1.9e-4, 1.0e-4},
                                         {.680, .673, .666, .659, .655, .650, .645, .640}}},
                                       {0.91, 0.90, 0.92})});
        t.push_back({6, "poly 2", "factorial",
                     pod_table_columns("linear",
                                       {{{9.2e-3, 5.0e-3, 2.7e-3, 1.5e-3, 7.9e-4, 4.2e-4, 2.3e-4, 1.2e-4},
                                         {1.1e-2, 5.8e-3, 3.2e-3, 1.7e-3, 9.6e-4, 5.2e-4, 2.8e-4, 1.6e-4},
                                         {9.7e-3, 5.1e-3, 2.8e-3, 1.5e-3, 8.0e-4, 4.3e-4, 2.3e-4, 1.3e-4},
                                         {.692, .685, .679, .673, .667, .661, .656, .651}}},
                                       {0.89, 0.87, 0.89})});
        t.push_back({7, "geo 0.5", "linear",
                     pod_table_columns("factorial",
                                       {{{4.9e-3, 2.5e-3, 1.3e-3, 6.9e-4, 3.6e-4, 1.9e-4, 9.8e-5, 5.1e-5},
                                         {5.0e-3, 2.6e-3, 1.4e-3, 7.2e-4, 3.8e-4, 2.0e-4, 1.0e-4, 5.3e-5},
                                         {3.8e-3, 2.0e-3, 1.0e-3, 5.3e-4, 2.7e-4, 1.4e-4, 7.2e-5, 3.7e-5},
                                         {.619, .617, .612, .608, .605, .602, .597, .595}}},
                                       {0.94, 0.93, 0.95})});
        t.push_back({8, "geo 0.5", "factorial",
                     pod_table_columns("linear",
                                       {{{5.1e-3, 2.6e-3, 1.4e-3, 7.3e-4, 3.9e-4, 2.0e-4, 1.1e-4, 5.6e-5},
                                         {5.1e-3, 2.6e-3, 1.4e-3, 7.3e-4, 3.8e-4, 2.0e-4, 1.0e-4, 5.5e-5},
                                         {4.0e-3, 2.1e-3, 1.1e-3, 5.6e-4, 2.9e-4, 1.5e-4, 7.9e-5, 4.1e-5},
                                         {.625, .622, .618, .614, .608, .604, .602, .599}}},
                                       {0.93, 0.93, 0.95})});
        return t;
    }();
    return tables;
}

[[nodiscard]] inline const TableDef& reference_table(int id) {
    for (const auto& t : reference_tables())
        if (t.id == id) return t;
    throw std::out_of_range("no table " + std::to_string(id));
}

/// Round to `digits` significant figures.
[[nodiscard]] inline double round_sig(double x, int digits) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    const double e = std::floor(std::log10(std::abs(x)));
    const double scale = std::pow(10.0, digits - 1 - e);
    return std::round(x * scale) / scale;
}

// =============================================================================
// Computation
// =============================================================================

/// Outcome of one construction at one modulus.
struct CellValue {
    double E = 0.0;
    std::optional<double> lambda;
    double seconds = 0.0;
    ConstructionResult result;
};

/// Run one job for (b, B) at modulus n.
[[nodiscard]] inline CellValue compute_cell(const ColumnJob& job, const std::string& b, const std::string& B,
                                            std::uint64_t n, std::size_t s = table_dimension) {
    const auto t0 = std::chrono::steady_clock::now();
    const NormBoundSpec spec{parse_coordinate_sequence(b), parse_order_sequence(B)};
    CellValue out;
    using K = ColumnJob::Kind;
    switch (job.kind) {
    case K::cbc_product_poly: {
        std::vector<double> g(s);
        for (std::size_t i = 1; i <= s; ++i) g[i - 1] = std::pow(static_cast<double>(i), -job.param);
        out.result = cbc_product(n, s, g);
        attach_norm_bound(out.result, spec);
        break;
    }
    case K::cbc_lambda:
        out.result = cbc_pod(n, s, lambda_weights(spec, job.param, s));
        attach_norm_bound(out.result, spec);
        break;
    case K::dcbc:
        if (job.Gamma.empty())
            out.result = dcbc_product(n, s, spec, default_gamma1);
        else
            out.result = dcbc_pod(n, s, spec, job.Gamma == "equal-B" ? spec.B : parse_order_sequence(job.Gamma),
                                  default_gamma1);
        break;
    case K::icbc: {
        auto [r, trace] = icbc(n, s, spec);
        out.result = std::move(r);
        out.lambda = trace.lambda_star;
        break;
    }
    }
    out.E = out.result.E();
    if (!std::isfinite(out.E)) throw numerical_error("non-finite bound for " + job.key(b, B) + " at n = " + std::to_string(n));
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

/// Computed grid of one table: values[column][n index].
struct TableResult {
    int id = 0;
    std::vector<std::uint64_t> moduli;
    std::vector<std::vector<double>> values;
    std::vector<std::optional<double>> rates;
    std::vector<std::vector<double>> seconds;
};

/// Shared results of jobs keyed by ColumnJob::key and modulus.
using CellCache = std::map<std::pair<std::string, std::uint64_t>, CellValue>;

/// Compute every job needed by `ids` once, on `threads` workers. Columns
/// rejected by `include` are skipped.
inline void fill_cache(CellCache& cache, const std::vector<int>& ids, std::span<const std::uint64_t> moduli,
                       unsigned threads, std::size_t s = table_dimension,
                       const std::function<bool(const ColumnDef&)>& include = {}) {
    struct Task {
        ColumnJob job;
        std::string b, B;
        std::uint64_t n;
    };
    std::vector<Task> tasks;
    std::vector<std::pair<std::string, std::uint64_t>> keys;
    for (int id : ids) {
        const auto& t = reference_table(id);
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            const auto& col = t.columns[c];
            if (include && !include(col)) continue;
            const auto b = t.column_b(c);
            for (auto n : moduli) {
                auto k = std::make_pair(col.job.key(b, t.B_family), n);
                if (cache.count(k) || std::find(keys.begin(), keys.end(), k) != keys.end()) continue;
                keys.push_back(k);
                tasks.push_back({col.job, b, t.B_family, n});
            }
        }
    }
    // Largest moduli first keeps the pool busy to the end.
    std::vector<std::size_t> order(tasks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return tasks[a].n > tasks[b].n; });
    std::vector<CellValue> values(tasks.size());
    parallel_for(tasks.size(), threads, [&](std::size_t i) {
        const auto& tk = tasks[order[i]];
        values[order[i]] = compute_cell(tk.job, tk.b, tk.B, tk.n, s);
    });
    for (std::size_t i = 0; i < tasks.size(); ++i) cache.emplace(keys[i], std::move(values[i]));
}

[[nodiscard]] inline TableResult assemble_table(int id, const CellCache& cache, std::span<const std::uint64_t> moduli) {
    const auto& t = reference_table(id);
    TableResult r;
    r.id = id;
    r.moduli.assign(moduli.begin(), moduli.end());
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        const auto& col = t.columns[c];
        std::vector<double> vals, secs;
        std::vector<std::pair<std::uint64_t, double>> pts;
        for (auto n : moduli) {
            const auto& cell = cache.at({col.job.key(t.column_b(c), t.B_family), n});
            vals.push_back(col.lambda_column ? cell.lambda.value() : cell.E);
            secs.push_back(cell.seconds);
            pts.emplace_back(n, cell.E);
        }
        r.values.push_back(vals);
        r.seconds.push_back(secs);
        if (!col.lambda_column && pts.size() >= 2)
            r.rates.emplace_back(fit_power_law(pts).exponent);
        else
            r.rates.emplace_back(std::nullopt);
    }
    return r;
}

// =============================================================================
// Output
// =============================================================================

inline void write_table_csv(std::ostream& os, const TableResult& r) {
    const auto& t = reference_table(r.id);
    os << 'n';
    for (const auto& c : t.columns) os << ',' << c.name;
    os << '\n';
    for (std::size_t i = 0; i < r.moduli.size(); ++i) {
        os << r.moduli[i];
        for (std::size_t c = 0; c < t.columns.size(); ++c)
            os << ',' << (t.columns[c].lambda_column ? format_fixed(r.values[c][i], 5) : format_sci(r.values[c][i]));
        os << '\n';
    }
    os << "rate";
    for (const auto& rate : r.rates) os << ',' << (rate ? format_fixed(*rate, 4) : "");
    os << '\n';
}

inline void write_timing_csv(std::ostream& os, const TableResult& r) {
    const auto& t = reference_table(r.id);
    os << 'n';
    for (const auto& c : t.columns) os << ',' << c.name;
    os << '\n';
    for (std::size_t i = 0; i < r.moduli.size(); ++i) {
        os << r.moduli[i];
        for (std::size_t c = 0; c < t.columns.size(); ++c) os << ',' << format_fixed(r.seconds[c][i], 3);
        os << '\n';
    }
}

/// Tolerances used by the comparison report.
struct Tolerances {
    double deterministic = 0.02;
    double adaptive = 0.25;
    double lambda_abs = 0.02;
    double rate_deterministic = 0.03;
    double rate_adaptive = 0.06;
};

/// One compared cell.
struct CellComparison {
    int table = 0;
    std::string column;
    std::string row;  // modulus or "rate"
    double computed = 0.0;
    double reference = 0.0;
    double deviation = 0.0;  // relative for E, absolute for lambda and rates
    double tolerance = 0.0;
    bool deterministic = false;
    bool lambda = false;  // lambda* cell rather than an E cell
    bool gated = true;
    // The slack absorbs binary rounding of decimal values such as 0.0051 vs 0.005.
    [[nodiscard]] bool ok() const { return deviation <= tolerance + 1e-12; }
};

/// E cells are rounded to 2 significant figures before comparison.
[[nodiscard]] inline std::vector<CellComparison> compare_table(const TableResult& r, const Tolerances& tol = {}) {
    const auto& t = reference_table(r.id);
    std::vector<CellComparison> out;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        const auto& col = t.columns[c];
        for (std::size_t i = 0; i < r.moduli.size(); ++i) {
            const auto it = std::find(table_moduli.begin(), table_moduli.end(), r.moduli[i]);
            if (it == table_moduli.end()) continue;
            const double ref = col.reference[static_cast<std::size_t>(it - table_moduli.begin())];
            CellComparison cc{r.id, col.name, std::to_string(r.moduli[i]), r.values[c][i], ref};
            cc.deterministic = col.deterministic;
            if (col.lambda_column) {
                cc.lambda = true;
                cc.deviation = std::abs(r.values[c][i] - ref);
                cc.tolerance = tol.lambda_abs;
                cc.gated = r.id == 4;
            } else {
                cc.computed = round_sig(r.values[c][i], 2);
                cc.deviation = std::abs(cc.computed - ref) / ref;
                cc.tolerance = col.deterministic ? tol.deterministic : tol.adaptive;
            }
            out.push_back(cc);
        }
        if (col.reference_rate && r.rates[c] && r.moduli.size() == table_moduli.size()) {
            CellComparison cc{r.id, col.name, "rate", *r.rates[c], *col.reference_rate};
            cc.deterministic = col.deterministic;
            cc.deviation = std::abs(*r.rates[c] - *col.reference_rate);
            cc.tolerance = col.deterministic ? tol.rate_deterministic : tol.rate_adaptive;
            out.push_back(cc);
        }
    }
    return out;
}

inline void write_report(std::ostream& os, const std::vector<CellComparison>& cells) {
    os << "table,column,row,computed,reference,deviation,tolerance,class,status\n";
    for (const auto& c : cells) {
        const bool is_e = c.row != "rate" && !c.lambda;
        os << c.table << ',' << c.column << ',' << c.row << ','
           << (is_e ? format_sci(c.computed) : format_fixed(c.computed, 4)) << ','
           << (is_e ? format_sci(c.reference) : format_fixed(c.reference, 4)) << ',' << format_fixed(c.deviation, 4)
           << ',' << format_fixed(c.tolerance, 4) << ',' << (c.deterministic ? "deterministic" : "adaptive") << ','
           << (c.ok() ? "ok" : (c.gated ? "FAIL" : "outside")) << '\n';
    }
}

} // namespace latcbc
