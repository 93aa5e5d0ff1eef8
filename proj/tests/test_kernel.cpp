#include "latcbc/cbc.hpp"
#include "latcbc/kernel.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace latcbc;

TEST(KernelColumn, PermutationStructure) {
    const KernelColumn col(13);
    EXPECT_EQ(col.modulus().generator, 2u);
    EXPECT_EQ(col.fft_length(), 32u);
    for (std::uint64_t z = 1; z < 13; ++z) {
        EXPECT_EQ(col.power(col.log_of(z)), z);
        for (std::uint64_t k = 0; k < 13; ++k) EXPECT_DOUBLE_EQ(col.value(z, k), bernoulli2_residue(z * k % 13, 13));
    }
    EXPECT_THROW(KernelColumn(15), std::invalid_argument);
}

TEST(KernelMatvec, MatchesNaiveSmall) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 2.0);
    for (std::uint64_t n : {3u, 5u, 7u, 11u, 101u, 251u}) {
        const KernelColumn col(n);
        std::vector<double> v(n);
        for (auto& x : v) x = u(rng);
        const auto fast = kernel_matvec(col, v);
        const auto slow = kernel_matvec_naive(n, v);
        EXPECT_TRUE(std::isnan(fast[0]));
        for (std::uint64_t z = 1; z < n; ++z) EXPECT_NEAR(fast[z], slow[z], 1e-12 * (1 + std::abs(slow[z]))) << n << ' ' << z;
    }
}

TEST(KernelMatvec, OneVectorGivesRowSums) {
    const std::uint64_t n = 97;
    const KernelColumn col(n);
    const auto w = col.matvec(std::vector<double>(n, 1.0));
    for (std::uint64_t z = 1; z < n; ++z) EXPECT_NEAR(w[z], 1.0 / (6.0 * n), 1e-15);
}

TEST(KernelMatvec, SymmetricScores) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::uint64_t n = 509;
    const KernelColumn col(n);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    const auto w = col.matvec(v);
    for (std::uint64_t z = 1; z < n; ++z) EXPECT_EQ(w[z], w[n - z]);
}

TEST(KernelMatvec, NaiveComposite) {
    const std::uint64_t n = 12;
    const std::vector<double> v(n, 1.0);
    const auto w = kernel_matvec_naive(n, v);
    for (std::uint64_t z = 0; z < n; ++z) EXPECT_EQ(std::isnan(w[z]), std::gcd(z, n) != 1) << z;
    EXPECT_THROW((void)kernel_matvec_naive(n, std::vector<double>(5)), std::invalid_argument);
}

TEST(KernelMatvec, LengthMismatch) {
    const KernelColumn col(7);
    EXPECT_THROW((void)col.matvec(std::vector<double>(6)), std::invalid_argument);
}

TEST(ScoreEngine, PathSelection) {
    EXPECT_TRUE(ScoreEngine(251, KernelPath::automatic).fast());
    EXPECT_FALSE(ScoreEngine(251, KernelPath::naive).fast());
    EXPECT_FALSE(ScoreEngine(250, KernelPath::automatic).fast());
    EXPECT_THROW(ScoreEngine(250, KernelPath::fast), std::invalid_argument);
}

TEST(ScoreEngine, TieBreakSmallestZ) {
    const std::vector<double> scores = {not_a_candidate, 2.0, 1.0, 1.0, 3.0};
    EXPECT_EQ(argmin_candidate(scores), 2u);
    const std::vector<double> none = {not_a_candidate, not_a_candidate};
    EXPECT_THROW((void)argmin_candidate(none), numerical_error);
}

TEST(Cbc, ExactSmallExample) {
    const auto r = cbc_product(5, 2, std::vector<double>{1.0, 1.0});
    EXPECT_EQ(r.gv.z, (std::vector<std::uint64_t>{1, 2}));
    EXPECT_NEAR(r.e2(), 2081.0 / 112500.0, 1e-16);
    EXPECT_NEAR(r.G_history[1], 0.011831111111111112, 1e-16);
}

TEST(Cbc, FastAndNaiveAgree) {
    std::mt19937_64 rng(9);
    for (auto n : oracle::primes_up_to(200, 3)) {
        const std::size_t s = 6;
        std::vector<double> g(s);
        for (std::size_t j = 0; j < s; ++j) g[j] = std::pow(double(j + 1), -1.5);
        const auto a = cbc_product(n, s, g, KernelPath::fast);
        const auto b = cbc_product(n, s, g, KernelPath::naive);
        EXPECT_EQ(a.gv, b.gv) << n;
        EXPECT_EQ(a.e2(), b.e2()) << n;
        const auto w = WeightScheme::pod(g, {1.0, 2.0, 1.5, 4.0 / 3.0, 1.25, 1.2});
        EXPECT_EQ(cbc_pod(n, s, w, KernelPath::fast).gv, cbc_pod(n, s, w, KernelPath::naive).gv) << n;
    }
}

TEST(Cbc, ChosenComponentIsGreedyOptimal) {
    const std::uint64_t n = 61;
    const std::vector<double> g = {1.0, 0.5, 0.3, 0.2};
    const auto r = cbc_product(n, 4, g);
    for (std::size_t i = 2; i <= 4; ++i) {
        std::vector<std::uint64_t> prefix(r.gv.z.begin(), r.gv.z.begin() + static_cast<std::ptrdiff_t>(i - 1));
        const std::vector<double> gi(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(i));
        const auto chosen = [&] {
            auto z = prefix;
            z.push_back(r.gv.z[i - 1]);
            return oracle::e2_subsets(n, z, gi, std::vector<double>(i, 1.0));
        }();
        for (std::uint64_t c = 1; c < n; ++c) {
            auto z = prefix;
            z.push_back(c);
            EXPECT_LE(chosen, oracle::e2_subsets(n, z, gi, std::vector<double>(i, 1.0)) * (1 + 1e-13)) << i << ' ' << c;
        }
    }
}

TEST(Cbc, CompositeModulusUsesNaivePath) {
    const auto r = cbc_product(100, 3, std::vector<double>{1.0, 0.5, 0.25});
    EXPECT_FALSE(r.meta.fast_kernel);
    for (auto z : r.gv.z) EXPECT_EQ(std::gcd(z, std::uint64_t{100}), 1u);
    EXPECT_LE(oracle::rel_err(r.e2(), oracle::e2_subsets(100, r.gv.z, {1.0, 0.5, 0.25}, {1, 1, 1})), 1e-13);
}

TEST(Cbc, RejectsBadInput) {
    EXPECT_THROW((void)cbc_product(7, 0, std::vector<double>{}), std::invalid_argument);
    EXPECT_THROW((void)cbc_product(7, 2, std::vector<double>{1.0}), std::invalid_argument);
    EXPECT_THROW((void)cbc_product(7, 2, std::vector<double>{1.0, -1.0}), std::invalid_argument);
}
