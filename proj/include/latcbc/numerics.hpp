#pragma once

/**
 * @file numerics.hpp
 * @brief Special functions and number-theoretic helpers.
 *
 * The Bernoulli kernel, the Riemann zeta function and its derivative on
 * (1, 2], primitive roots of prime moduli, the Euler totient, pairwise
 * summation and the power-law rate fit used by the reproduction tables.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace latcbc {

/// Raised when a numerically derived quantity fails a validity check.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// =============================================================================
// Bernoulli polynomial of degree 2
// =============================================================================

/// B2(x) = x^2 - x + 1/6 on [0, 1).
[[nodiscard]] inline double bernoulli2(double x) {
    if (!(x >= 0.0 && x < 1.0))
        throw std::domain_error("bernoulli2: argument must lie in [0, 1), got " + std::to_string(x));
    return x * x - x + 1.0 / 6.0;
}

/// 6 n^2 B2({r/n}) = n^2 - 6 r (n - r). Exact integer for n <= 2^26.
[[nodiscard]] inline double bernoulli2_numerator(std::uint64_t r, std::uint64_t n) noexcept {
    if (n <= (std::uint64_t{1} << 26)) {
        const auto nn = static_cast<std::int64_t>(n * n);
        return static_cast<double>(nn - 6 * static_cast<std::int64_t>(r * (n - r)));
    }
    const long double ln = static_cast<long double>(n), lr = static_cast<long double>(r);
    return static_cast<double>(ln * ln - 6.0L * lr * (ln - lr));
}

/// B2({r/n}) for an integer residue r in [0, n); no domain check.
/// Symmetric in r <-> n - r bit for bit.
[[nodiscard]] inline double bernoulli2_residue(std::uint64_t r, std::uint64_t n) noexcept {
    const double nd = static_cast<double>(n);
    return bernoulli2_numerator(r, n) / (6.0 * nd * nd);
}

// =============================================================================
// Pairwise summation
// =============================================================================

namespace detail {

template <class T>
[[nodiscard]] T pairwise(std::span<const T> xs) noexcept {
    constexpr std::size_t block = 16;
    if (xs.size() <= block) {
        T acc = 0;
        for (T x : xs) acc += x;
        return acc;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise(xs.first(half)) + pairwise(xs.subspan(half));
}

} // namespace detail

/// Sum with O(log n) rounding growth. Fixed recursion order, so the result
/// depends only on the input values.
[[nodiscard]] inline double pairwise_sum(std::span<const double> xs) noexcept { return detail::pairwise(xs); }
[[nodiscard]] inline long double pairwise_sum(std::span<const long double> xs) noexcept { return detail::pairwise(xs); }

/// Dot product in twice the working precision (fma-based error-free
/// transformations), rounded once at the end.
[[nodiscard]] inline double compensated_dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0, c = 0.0;
    const std::size_t m = std::min(a.size(), b.size());
    for (std::size_t k = 0; k < m; ++k) {
        const double p = a[k] * b[k];
        const double pe = std::fma(a[k], b[k], -p);
        const double t = s + p;
        const double bp = t - s;
        c += ((s - (t - bp)) + (p - bp)) + pe;
        s = t;
    }
    return s + c;
}

// =============================================================================
// Riemann zeta via Euler-Maclaurin summation
// =============================================================================

namespace detail {

inline constexpr int zeta_direct_terms = 64;

// B_{2j} / (2j)! for j = 1, 2, 3
inline constexpr double em_coeff[3] = {1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0};

inline void require_zeta_domain(double s, const char* who) {
    if (!(s > 1.0))
        throw std::domain_error(std::string(who) + ": requires s > 1, got " + std::to_string(s));
}

} // namespace detail

/// Riemann zeta function for real s > 1.
[[nodiscard]] inline double zeta(double s) {
    detail::require_zeta_domain(s, "zeta");
    constexpr int N = detail::zeta_direct_terms;
    const double logN = std::log(static_cast<double>(N));
    const double t = s - 1.0;

    // Direct part, smallest terms first.
    double head = 0.0;
    for (int k = N - 1; k >= 1; --k) head += std::pow(static_cast<double>(k), -s);

    // N^{1-s}/(s-1) = 1/(s-1) + expm1(-(s-1) log N)/(s-1), keeping the pole exact.
    double tail = std::expm1(-t * logN) / t;
    const double Ns = std::exp(-s * logN);
    tail += 0.5 * Ns;

    double rising = s;          // (s)_{2j-1}
    double power = Ns / N;      // N^{-s-2j+1}
    for (int j = 0; j < 3; ++j) {
        tail += detail::em_coeff[j] * rising * power;
        rising *= (s + 2 * j + 1) * (s + 2 * j + 2);
        power /= static_cast<double>(N) * N;
    }
    return 1.0 / t + (head + tail);
}

/// Derivative of the Riemann zeta function for real s > 1.
[[nodiscard]] inline double zeta_prime(double s) {
    detail::require_zeta_domain(s, "zeta_prime");
    constexpr int N = detail::zeta_direct_terms;
    const double logN = std::log(static_cast<double>(N));
    const double t = s - 1.0;

    double head = 0.0;
    for (int k = N - 1; k >= 2; --k) {
        const double lk = std::log(static_cast<double>(k));
        head -= lk * std::exp(-s * lk);
    }

    // d/ds [e^{-tL}/t] = -e^{-tL}/t^2 - L e^{-tL}/t
    const double e = std::exp(-t * logN);
    double tail = -e * logN / t - std::expm1(-t * logN) / (t * t);
    const double Ns = std::exp(-s * logN);
    tail -= 0.5 * logN * Ns;

    // d/ds [(s)_m N^{-s-m+1}] = (s)_m N^{-s-m+1} (sum_i 1/(s+i) - log N)
    double rising = s;
    double harmonic = 1.0 / s;
    double power = Ns / N;
    for (int j = 0; j < 3; ++j) {
        tail += detail::em_coeff[j] * rising * power * (harmonic - logN);
        rising *= (s + 2 * j + 1) * (s + 2 * j + 2);
        harmonic += 1.0 / (s + 2 * j + 1) + 1.0 / (s + 2 * j + 2);
        power /= static_cast<double>(N) * N;
    }
    return -1.0 / (t * t) + (head + tail);
}

// =============================================================================
// Integers modulo n
// =============================================================================

[[nodiscard]] constexpr std::uint64_t mod_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t m) noexcept {
    std::uint64_t result = 1 % m;
    base %= m;
    while (exp > 0) {
        if (exp & 1) result = static_cast<std::uint64_t>((static_cast<unsigned __int128>(result) * base) % m);
        base = static_cast<std::uint64_t>((static_cast<unsigned __int128>(base) * base) % m);
        exp >>= 1;
    }
    return result;
}

[[nodiscard]] constexpr bool is_prime(std::uint64_t n) noexcept {
    if (n < 2) return false;
    if (n < 4) return true;
    if (n % 2 == 0 || n % 3 == 0) return false;
    for (std::uint64_t d = 5; d * d <= n; d += 6)
        if (n % d == 0 || n % (d + 2) == 0) return false;
    return true;
}

/// Distinct prime factors in increasing order.
[[nodiscard]] inline std::vector<std::uint64_t> prime_factors(std::uint64_t m) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t d = 2; d * d <= m; ++d) {
        if (m % d == 0) {
            out.push_back(d);
            while (m % d == 0) m /= d;
        }
    }
    if (m > 1) out.push_back(m);
    return out;
}

/// Count of integers in [1, n) coprime to n, with phi(1) = 1.
[[nodiscard]] inline std::uint64_t euler_totient(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("euler_totient: n must be positive");
    std::uint64_t phi = n;
    for (auto p : prime_factors(n)) phi -= phi / p;
    return phi;
}

/// Smallest primitive root of a prime n >= 3.
[[nodiscard]] inline std::uint64_t primitive_root(std::uint64_t n) {
    if (n < 3 || !is_prime(n))
        throw std::invalid_argument("primitive_root: n must be an odd prime, got " + std::to_string(n));
    const auto factors = prime_factors(n - 1);
    for (std::uint64_t g = 2; g < n; ++g) {
        const bool generates = std::all_of(factors.begin(), factors.end(), [&](std::uint64_t q) {
            return mod_pow(g, (n - 1) / q, n) != 1;
        });
        if (generates) return g;
    }
    throw numerical_error("primitive_root: no generator found"); // unreachable for prime n
}

/// A prime modulus with its group order and smallest generator.
struct PrimeModulus {
    std::uint64_t n = 0;
    std::uint64_t phi = 0;
    std::uint64_t generator = 0;

    [[nodiscard]] static PrimeModulus make(std::uint64_t n) {
        return PrimeModulus{n, n - 1, primitive_root(n)};
    }
};

// =============================================================================
// Power-law rate fit
// =============================================================================

/// E ~ C n^{-exponent}; log_constant = log C.
struct PowerLawFit {
    double exponent = 0.0;
    double log_constant = 0.0;
};

/// Ordinary least squares of -log E against log n.
[[nodiscard]] inline PowerLawFit fit_power_law(std::span<const std::pair<std::uint64_t, double>> pairs) {
    if (pairs.size() < 2) throw std::invalid_argument("fit_power_law: need at least two points");
    std::vector<double> xs, ys;
    xs.reserve(pairs.size());
    ys.reserve(pairs.size());
    for (const auto& [n, e] : pairs) {
        if (!(e > 0.0)) throw std::invalid_argument("fit_power_law: error values must be positive");
        if (n == 0) throw std::invalid_argument("fit_power_law: n must be positive");
        xs.push_back(std::log(static_cast<double>(n)));
        ys.push_back(-std::log(e));
    }
    const double k = static_cast<double>(xs.size());
    const double xbar = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
    const double ybar = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_power_law: need at least two distinct n");
    const double slope = sxy / sxx;
    return PowerLawFit{slope, -(ybar - slope * xbar)};
}

} // namespace latcbc
