// latcbc: lattice-rule constructions with weights chosen from derivative bounds.
//
//   latcbc construct --config run.ini [overrides]
//   latcbc wce --vector z.txt [--weights ...] [--b ... --B ...]
//   latcbc bound --weights ... --n N --s S [--lambda l]
//   latcbc tables [--which 1,2,3] [--out DIR] [--threads T]
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure, 3 I/O error.

#include "latcbc/config.hpp"
#include "latcbc/io.hpp"
#include "latcbc/run.hpp"
#include "latcbc/tables.hpp"
#include "latcbc/wce.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace latcbc;

enum Exit : int { ok = 0, config_failure = 1, numeric_failure = 2, io_failure = 3 };

struct ConstructArgs {
    std::string config;
    std::optional<std::string> algorithm, n, b, B, weights, Gamma, gamma1, vector, table, history;
    std::optional<std::size_t> s;
    std::optional<unsigned> threads;
    std::optional<double> lambda0, tau;
    std::optional<int> k_max;
};

RunConfig build_config(const ConstructArgs& a) {
    std::ostringstream ini;
    if (!a.config.empty()) {
        std::ifstream is(a.config);
        if (!is) throw io_error("cannot open config " + a.config);
        ini << is.rdbuf();
    }
    RunConfig c;
    // Parse without validation first so flags can fill required fields.
    std::istringstream text(ini.str());
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(text, tree);
    } catch (const pt::ini_parser_error& e) {
        throw config_error(std::string("config syntax: ") + e.what());
    }
    auto set = [&](const char* key, const std::optional<std::string>& v) {
        if (v) tree.put(key, *v);
    };
    set("run.algorithm", a.algorithm);
    set("run.n", a.n);
    if (a.s) tree.put("run.s", std::to_string(*a.s));
    if (a.threads) tree.put("run.threads", std::to_string(*a.threads));
    set("bounds.b", a.b);
    set("bounds.B", a.B);
    set("weights.weights", a.weights);
    set("weights.Gamma", a.Gamma);
    set("weights.gamma1", a.gamma1);
    if (a.lambda0) tree.put("icbc.lambda0", format_g17(*a.lambda0));
    if (a.tau) tree.put("icbc.tau", format_g17(*a.tau));
    if (a.k_max) tree.put("icbc.k_max", std::to_string(*a.k_max));
    set("output.vector", a.vector);
    set("output.table", a.table);
    set("output.history", a.history);
    std::ostringstream merged;
    pt::write_ini(merged, tree);
    return parse_config_string(merged.str());
}

int cmd_construct(const ConstructArgs& a) {
    auto cfg = build_config(a);
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
    const auto rows = run(cfg);
    write_run_table(std::cout, rows);
    for (const auto& r : rows)
        if (r.trace)
            std::cerr << "n = " << r.n << ": lambda* = " << format_fixed(r.trace->lambda_star, 5) << " after "
                      << r.trace->iterates.size() << " iterate(s), stop: " << to_string(r.trace->stop_reason) << '\n';
    return ok;
}

int cmd_wce(const std::string& vector_path, const std::string& weights, const std::string& b, const std::string& B) {
    const auto vf = load_vector(vector_path);
    const std::size_t s = vf.gv.dimension();
    WeightScheme w;
    if (!weights.empty()) {
        RunConfig c;
        c.s = s;
        c.weights = weights;
        c.B_family = B.empty() ? "one" : B;
        if (!b.empty()) c.b_family = b;
        w = c.resolve_weights(NormBoundSpec{parse_coordinate_sequence(c.b_family), parse_order_sequence(c.B_family)});
    } else {
        if (vf.gamma.size() < s) throw config_error("wce: vector file carries no weights; pass --weights");
        w = WeightScheme::product(std::vector<double>(vf.gamma.begin(), vf.gamma.begin() + static_cast<std::ptrdiff_t>(s)));
        if (!B.empty() && B != "one") {
            const auto Bs = parse_order_sequence(B);
            std::vector<double> ratios(s);
            for (std::size_t l = 1; l <= s; ++l) ratios[l - 1] = Bs.ratio(l);
            w = WeightScheme::pod(w.gamma, ratios);
        }
    }
    const double e = wce_pod_fixed_z(vf.gv, w);
    std::cout << "n,s,wce";
    if (!b.empty()) std::cout << ",M,E";
    std::cout << '\n' << vf.gv.n << ',' << s << ',' << format_g17(e);
    if (!b.empty()) {
        const NormBoundSpec spec{parse_coordinate_sequence(b), parse_order_sequence(B.empty() ? "one" : B)};
        const double M = norm_bound(spec, w, s);
        std::cout << ',' << format_g17(M) << ',' << format_g17(e * std::sqrt(M));
    }
    std::cout << '\n';
    return ok;
}

int cmd_bound(const std::string& weights, const std::string& b, const std::string& B, std::uint64_t n, std::size_t s,
              std::optional<double> lambda) {
    RunConfig c;
    c.s = s;
    c.weights = weights;
    c.b_family = b;
    c.B_family = B;
    const auto w = c.resolve_weights(c.bound_spec());
    std::vector<double> grid;
    if (lambda)
        grid.push_back(*lambda);
    else
        for (int k = 0; k <= 9; ++k) grid.push_back(0.55 + 0.05 * k);
    std::cout << "lambda,bound\n";
    for (double l : grid) std::cout << format_fixed(l, 4) << ',' << format_g17(wce_upper_bound(w, n, s, l)) << '\n';
    return ok;
}

std::vector<int> parse_which(const std::string& which) {
    std::vector<int> ids;
    std::string t = which;
    for (auto& ch : t)
        if (ch == ',') ch = ' ';
    std::istringstream is(t);
    int id = 0;
    while (is >> id) {
        if (id < 1 || id > 8) throw config_error("tables --which: table ids are 1..8, got " + std::to_string(id));
        ids.push_back(id);
    }
    if (!is.eof()) throw config_error("tables --which: expected a comma-separated list of integers");
    if (ids.empty()) throw config_error("tables --which: no tables selected");
    return ids;
}

int cmd_tables(const std::string& which, const std::string& out_dir, unsigned threads, const std::string& moduli_text) {
    const auto ids = parse_which(which);
    std::vector<std::uint64_t> moduli(table_moduli.begin(), table_moduli.end());
    if (!moduli_text.empty()) {
        moduli = detail::parse_moduli(moduli_text);
        for (auto n : moduli)
            if (std::find(table_moduli.begin(), table_moduli.end(), n) == table_moduli.end())
                throw config_error("tables --moduli: " + std::to_string(n) + " is not on the table grid");
    }

    CellCache cache;
    fill_cache(cache, ids, moduli, threads);

    detail::OutputGuard guard;
    std::vector<CellComparison> all;
    for (int id : ids) {
        const auto r = assemble_table(id, cache, moduli);
        const auto base = (std::filesystem::path(out_dir) / ("table" + std::to_string(id))).string();
        auto os = guard.open(base + ".csv");
        write_table_csv(os, r);
        detail::close_checked(os, base + ".csv");
        auto ts = guard.open(base + ".timing.csv");
        write_timing_csv(ts, r);
        detail::close_checked(ts, base + ".timing.csv");
        const auto cmp = compare_table(r);
        all.insert(all.end(), cmp.begin(), cmp.end());
    }
    const auto rpath = (std::filesystem::path(out_dir) / "comparison.csv").string();
    auto rs = guard.open(rpath);
    write_report(rs, all);
    detail::close_checked(rs, rpath);
    guard.commit();

    std::size_t bad_det = 0, bad_other = 0;
    for (const auto& c : all) {
        if (c.ok() || !c.gated) continue;
        (c.deterministic && c.row != "rate" ? bad_det : bad_other)++;
        std::cerr << "table " << c.table << " " << c.column << " " << c.row << ": computed " << c.computed
                  << " vs reference " << c.reference << " (deviation " << format_fixed(c.deviation, 4) << ")\n";
    }
    std::cout << all.size() << " cells compared, " << bad_det << " deterministic and " << bad_other
              << " other cells outside tolerance; report in " << rpath << '\n';
    return bad_det == 0 ? ok : numeric_failure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lattice rules with weights chosen from derivative bounds"};
    app.require_subcommand(1);

    ConstructArgs ca;
    auto* construct = app.add_subcommand("construct", "Run a construction over a grid of moduli");
    construct->add_option("-c,--config", ca.config, "INI configuration file");
    construct->add_option("--algorithm", ca.algorithm, "cbc | dcbc | icbc");
    construct->add_option("-n,--n", ca.n, "Moduli, comma separated");
    construct->add_option("-s,--s", ca.s, "Dimension");
    construct->add_option("--b", ca.b, "Coordinate bounds: poly c | geo r | const v | file <path>");
    construct->add_option("--B", ca.B, "Order bounds: one | linear | factorial | file <path>");
    construct->add_option("--weights", ca.weights, "CBC weights: product-poly c | product-geo r | lambda l | file <path>");
    construct->add_option("--Gamma", ca.Gamma, "DCBC order factors: equal-B | linear | factorial | file <path>");
    construct->add_option("--gamma1", ca.gamma1, "DCBC first weight: default | lambda1 | <real>");
    construct->add_option("--lambda0", ca.lambda0, "ICBC starting lambda");
    construct->add_option("--tau", ca.tau, "ICBC relative gradient tolerance");
    construct->add_option("--k-max", ca.k_max, "ICBC iteration limit");
    construct->add_option("--vector", ca.vector, "Vector output path; {n} expands to the modulus");
    construct->add_option("--table", ca.table, "Table CSV output path");
    construct->add_option("--history", ca.history, "Per-dimension history CSV path; {n} expands");
    construct->add_option("--threads", ca.threads, "Worker threads for the grid");

    std::string wce_vector, wce_weights, wce_b, wce_B;
    auto* wce = app.add_subcommand("wce", "Evaluate the worst-case error of a vector file");
    wce->add_option("--vector", wce_vector, "Vector file")->required();
    wce->add_option("--weights", wce_weights, "Weights (default: those recorded in the file)");
    wce->add_option("--b", wce_b, "Coordinate bounds, to also report M and E");
    wce->add_option("--B", wce_B, "Order bounds");

    std::string bound_weights, bound_b = "poly 2", bound_B = "one";
    std::uint64_t bound_n = 0;
    std::size_t bound_s = 0;
    std::optional<double> bound_lambda;
    auto* bound = app.add_subcommand("bound", "Upper bound on the error of a CBC vector");
    bound->add_option("--weights", bound_weights, "product-poly c | product-geo r | lambda l | file <path>")->required();
    bound->add_option("--b", bound_b, "Coordinate bounds (lambda weights only)");
    bound->add_option("--B", bound_B, "Order bounds (lambda weights only)");
    bound->add_option("-n,--n", bound_n, "Modulus")->required()->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1} << 40));
    bound->add_option("-s,--s", bound_s, "Dimension")->required()->check(CLI::PositiveNumber);
    bound->add_option("--lambda", bound_lambda, "lambda in (1/2, 1]; default: grid 0.55..1.00");

    std::string which = "1,2,3,4,5,6,7,8", out_dir = "tables_out", moduli;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    auto* tables = app.add_subcommand("tables", "Reproduce the result tables");
    tables->add_option("--which", which, "Comma-separated table ids");
    tables->add_option("--out", out_dir, "Output directory");
    tables->add_option("--threads", threads, "Worker threads");
    tables->add_option("--moduli", moduli, "Subset of the modulus grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : config_failure;
    }

    try {
        if (*construct) return cmd_construct(ca);
        if (*wce) return cmd_wce(wce_vector, wce_weights, wce_b, wce_B);
        if (*bound) return cmd_bound(bound_weights, bound_b, bound_B, bound_n, bound_s, bound_lambda);
        if (*tables) return cmd_tables(which, out_dir, threads, moduli);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_failure;
    } catch (const parse_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_failure;
    } catch (const io_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return io_failure;
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return numeric_failure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_failure;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_failure;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return numeric_failure;
    }
    return ok;
}
