#include "latcbc/config.hpp"
#include "latcbc/io.hpp"
#include "latcbc/run.hpp"
#include "latcbc/tables.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

using namespace latcbc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("latcbc_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LATCBC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

} // namespace

TEST(VectorFile, RoundTrip) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const std::uint64_t n = 1009;
        GeneratingVector gv{n, {}};
        std::vector<double> g;
        for (int j = 0; j < 1 + trial; ++j) {
            gv.z.push_back(1 + rng() % (n - 1));
            g.push_back(std::ldexp(static_cast<double>(rng() >> 11), -53) * 7.0 + 1e-300);
        }
        std::stringstream ss;
        write_vector(ss, gv, g);
        const auto back = read_vector(ss);
        EXPECT_EQ(back.gv, gv);
        EXPECT_EQ(back.gamma, g);
    }
}

TEST(VectorFile, ExactLayout) {
    std::stringstream ss;
    write_vector(ss, GeneratingVector{5, {1, 2}}, std::vector<double>{1.0, 0.1});
    EXPECT_EQ(ss.str(), "5 2\n1\n2\n# gamma_1 = 1\n# gamma_2 = 0.10000000000000001\n");
}

TEST(VectorFile, Malformed) {
    for (const char* text : {"", "5 3\n1\n2\n", "5 1\nx\n", "5 1\n5\n"}) {
        std::stringstream ss(text);
        EXPECT_ANY_THROW((void)read_vector(ss)) << text;
    }
    EXPECT_THROW((void)load_vector("/nonexistent/dir/z.txt"), io_error);
}

TEST(Specifiers, Parse) {
    EXPECT_EQ(parse_coordinate_sequence("poly 2").describe(), "poly 2");
    EXPECT_DOUBLE_EQ(parse_coordinate_sequence("geo 0.8")(2), 0.64);
    EXPECT_EQ(parse_order_sequence("factorial").describe(), "factorial");
    EXPECT_THROW((void)parse_coordinate_sequence("poly"), parse_error);
    EXPECT_THROW((void)parse_coordinate_sequence("cubic 3"), parse_error);
    EXPECT_THROW((void)parse_coordinate_sequence("poly two"), parse_error);
    EXPECT_THROW((void)parse_order_sequence("quadratic"), parse_error);
}

TEST(Specifiers, FromFile) {
    const auto dir = scratch("spec");
    std::ofstream(dir / "b.txt") << "0.5, 0.25\n0.125 # trailing\n";
    const auto b = parse_coordinate_sequence("file " + (dir / "b.txt").string());
    EXPECT_EQ(b.available(), 3u);
    EXPECT_DOUBLE_EQ(b(3), 0.125);
}

TEST(Config, ParsesAllSections) {
    const auto c = parse_config_string(R"(
[run]
algorithm = icbc
n = 251, 499
s = 20
threads = 2
[bounds]
b = geo 0.5   ; comment
B = linear
[icbc]
lambda0 = 0.8
tau = 1e-4
k_max = 5
[output]
table = out.csv
)");
    EXPECT_EQ(c.algorithm, Algorithm::icbc);
    EXPECT_EQ(c.n, (std::vector<std::uint64_t>{251, 499}));
    EXPECT_EQ(c.s, 20u);
    EXPECT_EQ(c.threads, 2u);
    EXPECT_EQ(c.b_family, "geo 0.5");
    EXPECT_DOUBLE_EQ(c.icbc.lambda0, 0.8);
    EXPECT_DOUBLE_EQ(c.icbc.tau, 1e-4);
    EXPECT_EQ(c.icbc.k_max, 5);
    EXPECT_EQ(c.table_path, "out.csv");
}

TEST(Config, ErrorsNameTheField) {
    auto expect_field = [](const std::string& text, const std::string& field) {
        try {
            (void)parse_config_string(text);
            ADD_FAILURE() << "accepted: " << text;
        } catch (const config_error& e) {
            EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
        }
    };
    expect_field("[run]\nalgorithm = foo\nn = 7\n", "run.algorithm");
    expect_field("[run]\nn = 1\n", "run.n");
    expect_field("[run]\nn = seven\n", "run.n");
    expect_field("[run]\nn = 7\ns = 0\n", "run.s");
    expect_field("[run]\nalgorithm = cbc\nn = 7\n", "weights.weights");
    expect_field("[run]\nalgorithm = dcbc\nn = 7\n[bounds]\nB = linear\n", "weights.Gamma");
    expect_field("[run]\nalgorithm = dcbc\nn = 7\n[weights]\ngamma1 = -1\n", "weights.gamma1");
    expect_field("[run]\nalgorithm = icbc\nn = 7\n[icbc]\nlambda0 = 0.4\n", "icbc.lambda0");
    expect_field("[run]\nn = 7\n[bounds]\nb = poly\n", "bounds");
    expect_field("[run]\nn = 7\nbogus = 1\n", "run.bogus");
    expect_field("[nothing]\nx = 1\n", "nothing");
}

TEST(Config, CompositeModulusWarns) {
    const auto c = parse_config_string("[run]\nn = 100\n");
    ASSERT_EQ(c.warnings.size(), 1u);
    EXPECT_NE(c.warnings[0].find("100"), std::string::npos);
}

TEST(Config, Gamma1Choices) {
    RunConfig c;
    const NormBoundSpec spec{CoordinateSequence::geometric(0.5), OrderSequence::ones()};
    EXPECT_DOUBLE_EQ(c.resolve_gamma1(spec), 1.0);
    c.gamma1 = "lambda1";
    EXPECT_NEAR(c.resolve_gamma1(spec), 0.5 * std::sqrt(6.0), 1e-15);
    c.gamma1 = "0.3";
    EXPECT_DOUBLE_EQ(c.resolve_gamma1(spec), 0.3);
}

TEST(Run, WritesArtifactsDeterministically) {
    const auto dir = scratch("run");
    auto text = "[run]\nalgorithm = cbc\nn = 251, 499\ns = 100\nthreads = 2\n[bounds]\nb = poly 2\n[weights]\nweights = product-poly 2\n"
                "[output]\nvector = " + (dir / "z_{n}.txt").string() + "\ntable = " + (dir / "t.csv").string() +
                "\nhistory = " + (dir / "h_{n}.csv").string() + "\n";
    const auto c = parse_config_string(text);
    const auto rows = run(c);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(round_sig(rows[0].result.E(), 2), 7.5e-3);
    const auto first = slurp(dir / "t.csv");
    (void)run(c);
    EXPECT_EQ(slurp(dir / "t.csv"), first);
    EXPECT_TRUE(fs::exists(dir / "t.csv.timing.csv"));
    EXPECT_EQ(load_vector((dir / "z_251.txt").string()).gv, rows[0].result.gv);
    EXPECT_NE(slurp(dir / "h_499.csv").find("i,z,gamma,e2,M,E"), std::string::npos);
    EXPECT_EQ(first.substr(0, 4), "n,E\n");
    EXPECT_NE(first.find("rate,"), std::string::npos);
}

TEST(Run, DcbcAndIcbcRows) {
    auto c = parse_config_string("[run]\nalgorithm = dcbc\nn = 251\ns = 100\n[bounds]\nb = poly 2\n");
    EXPECT_NEAR(run(c)[0].result.E(), 6.8e-3, 0.25 * 6.8e-3);
    c = parse_config_string("[run]\nalgorithm = icbc\nn = 251\ns = 100\n[bounds]\nb = geo 0.5\n");
    const auto rows = run(c);
    ASSERT_TRUE(rows[0].trace.has_value());
    EXPECT_NEAR(rows[0].trace->lambda_star, 0.616, 0.02);
    c = parse_config_string("[run]\nalgorithm = dcbc\nn = 251\ns = 30\n[bounds]\nb = poly 2\nB = linear\n[weights]\nGamma = equal-B\n");
    EXPECT_EQ(run(c)[0].result.meta.algorithm, "dcbc-pod");
}

TEST(Run, FailureRemovesPartialOutputs) {
    const auto dir = scratch("fail");
    RunConfig c = parse_config_string("[run]\nalgorithm = cbc\nn = 11\ns = 3\n[weights]\nweights = product-poly 2\n");
    c.vector_path = (dir / "z_{n}.txt").string();
    c.table_path = "/proc/latcbc_cannot_write/t.csv";
    EXPECT_THROW((void)run(c), io_error);
    EXPECT_FALSE(fs::exists(dir / "z_11.txt"));
}

TEST(Tables, RoundingAndComparison) {
    EXPECT_DOUBLE_EQ(round_sig(7.46e-3, 2), 7.5e-3);
    EXPECT_DOUBLE_EQ(round_sig(2.849, 2), 2.8);
    EXPECT_DOUBLE_EQ(round_sig(9.96e-4, 2), 1.0e-3);
    TableResult r;
    r.id = 1;
    r.moduli = {251};
    r.values.assign(6, {0.0});
    r.values[3][0] = 7.46e-3;
    r.values[2][0] = 3.6e-2;
    r.rates.assign(6, std::nullopt);
    const auto cmp = compare_table(r);
    ASSERT_EQ(cmp.size(), 6u);
    EXPECT_TRUE(cmp[3].ok());
    EXPECT_TRUE(cmp[3].deterministic);
    EXPECT_FALSE(cmp[2].ok());
}

TEST(Tables, ReferenceLayout) {
    EXPECT_EQ(reference_tables().size(), 8u);
    EXPECT_EQ(reference_table(3).columns[3].reference[0], 2.8);
    EXPECT_EQ(reference_table(6).columns[0].reference[2], 2.7e-3);
    EXPECT_EQ(reference_table(2).columns[1].reference[7], 3.0e-5);
    for (const auto& t : reference_tables())
        for (const auto& c : t.columns)
            if (!c.lambda_column) {
                for (std::size_t i = 1; i < 8; ++i) EXPECT_LT(c.reference[i], c.reference[i - 1]) << t.id << c.name;
            }
}

TEST(Tables, SmallGridCsv) {
    CellCache cache;
    const std::vector<std::uint64_t> moduli = {251, 499};
    fill_cache(cache, {4}, moduli, 1, 100);
    const auto r = assemble_table(4, cache, moduli);
    std::ostringstream os;
    write_table_csv(os, r);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "n,b=i^-2,b=0.5^i,b=0.8^i");
    for (const auto& c : compare_table(r)) EXPECT_TRUE(c.ok()) << c.column << ' ' << c.row << ' ' << c.computed;
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli("construct --algorithm cbc --n 11 --s 3 --weights 'product-poly 2'"), 0);
    EXPECT_EQ(run_cli("construct --algorithm cbc --n 11 --s 3"), 1);
    EXPECT_EQ(run_cli("construct --algorithm nope --n 11"), 1);
    EXPECT_EQ(run_cli("construct --config /nonexistent.ini"), 3);
    EXPECT_EQ(run_cli("construct --algorithm dcbc --n 11 --s 3 --table /proc/latcbc/x.csv"), 3);
    EXPECT_EQ(run_cli("tables --which 9"), 1);
    EXPECT_EQ(run_cli("bound --weights 'product-poly 2' --n 101 --s 5"), 0);
    EXPECT_EQ(run_cli("bound --weights 'product-poly 2' --n 101 --s 5 --lambda 0.4"), 1);
    const auto vec = (dir / "z_{n}.txt").string();
    EXPECT_EQ(run_cli("construct --algorithm dcbc --n 101 --s 4 --vector '" + vec + "'"), 0);
    EXPECT_EQ(run_cli("wce --vector '" + (dir / "z_101.txt").string() + "' --b 'poly 2'"), 0);
    EXPECT_EQ(run_cli("wce --vector /nonexistent.txt"), 3);
}

TEST(Cli, WceMatchesConstruction) {
    const auto dir = scratch("cli_wce");
    const auto vec = (dir / "z_{n}.txt").string();
    ASSERT_EQ(run_cli("construct --algorithm dcbc --n 101 --s 6 --vector '" + vec + "'"), 0);
    const std::string out = (dir / "out.csv").string();
    const std::string cmd = std::string(LATCBC_CLI_PATH) + " wce --vector '" + (dir / "z_101.txt").string() + "' --b 'poly 2' > '" + out + "'";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    const auto text = slurp(out);
    const auto line = text.substr(text.find('\n') + 1);
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string t; std::getline(ls, t, ',');) f.push_back(t);
    ASSERT_EQ(f.size(), 5u);
    const NormBoundSpec spec{CoordinateSequence::polynomial(2), OrderSequence::ones()};
    const auto r = dcbc_product(101, 6, spec, default_gamma1);
    EXPECT_LE(oracle::rel_err(std::stod(f[4]), r.E()), 1e-13);
}
