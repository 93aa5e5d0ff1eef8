#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Everything here enumerates subsets literally and uses long double, so it
// shares no recursion with the library.

#include "latcbc/latcbc.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <cstdint>
#include <random>
#include <vector>

namespace latcbc::oracle {

inline std::vector<std::uint64_t> primes_up_to(std::uint64_t hi, std::uint64_t lo = 2) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t p = lo; p <= hi; ++p) {
        bool prime = p >= 2;
        for (std::uint64_t d = 2; d * d <= p && prime; ++d)
            if (p % d == 0) prime = false;
        if (prime) out.push_back(p);
    }
    return out;
}

/// n^2 - 6 r (n - r) = 6 n^2 B2(r/n), an exact integer. Products of these are
/// summed before dividing by (6 n^2)^|u|; evaluating B2 itself in floating
/// point first loses accuracy to cancellation for large n.
inline long double b2_numerator(std::uint64_t r, std::uint64_t n) {
    return static_cast<long double>(static_cast<std::int64_t>(n * n) - 6 * static_cast<std::int64_t>(r * (n - r)));
}

inline long double b2_scale_power(std::uint64_t n, std::size_t l) {
    long double d = 1.0L;
    for (std::size_t i = 0; i < l; ++i) d *= 6.0L * static_cast<long double>(n) * static_cast<long double>(n);
    return d;
}

/// (1/n) sum_k prod_{j in mask} B2({k z_j/n}).
inline long double subset_kernel_average(std::uint64_t n, const std::vector<std::uint64_t>& z, std::uint64_t mask) {
    long double total = 0.0L;
    for (std::uint64_t k = 0; k < n; ++k) {
        long double p = 1.0L;
        for (std::size_t j = 0; j < z.size(); ++j)
            if (mask >> j & 1) p *= b2_numerator(k * z[j] % n, n);
        total += p;
    }
    return total / b2_scale_power(n, static_cast<std::size_t>(std::popcount(mask))) / static_cast<long double>(n);
}

/// Subset weight from explicit product part and order factors Gamma_l (Gamma[0] = 1).
inline long double pod_weight(const std::vector<double>& gamma, const std::vector<long double>& Gamma, std::uint64_t mask) {
    long double w = Gamma[static_cast<std::size_t>(std::popcount(mask))];
    for (std::size_t j = 0; j < gamma.size(); ++j)
        if (mask >> j & 1) w *= gamma[j];
    return w;
}

inline std::vector<long double> cumulative(const std::vector<double>& ratios) {
    std::vector<long double> G{1.0L};
    for (double r : ratios) G.push_back(G.back() * r);
    return G;
}

/// Squared error by enumerating all 2^s - 1 subsets. For each point the
/// kernel product of every subset is built from the subset without its lowest
/// element, so the cost is O(n 2^s) rather than O(n s 2^s).
inline long double e2_subsets(std::uint64_t n, const std::vector<std::uint64_t>& z, const std::vector<double>& gamma,
                              const std::vector<double>& ratios) {
    const auto G = cumulative(ratios);
    const std::uint64_t masks = std::uint64_t{1} << z.size();
    std::vector<long double> w(masks), acc(masks, 0.0L), p(masks);
    for (std::uint64_t mask = 1; mask < masks; ++mask) w[mask] = pod_weight(gamma, G, mask);
    std::vector<long double> b(z.size());
    p[0] = 1.0L;
    for (std::uint64_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < z.size(); ++j) b[j] = b2_numerator(k * z[j] % n, n);
        for (std::uint64_t mask = 1; mask < masks; ++mask) {
            const auto low = static_cast<std::size_t>(std::countr_zero(mask));
            p[mask] = p[mask & (mask - 1)] * b[low];
            acc[mask] += p[mask];
        }
    }
    long double total = 0.0L;
    for (std::uint64_t mask = 1; mask < masks; ++mask)
        total += w[mask] * acc[mask] / b2_scale_power(n, static_cast<std::size_t>(std::popcount(mask)));
    return total / static_cast<long double>(n);
}

/// M = sum_u (B_|u| / gamma_u) prod b_j^2 including u = empty.
inline long double norm_subsets(const std::vector<double>& b, const std::vector<double>& B, const std::vector<double>& gamma,
                                const std::vector<double>& ratios) {
    const auto G = cumulative(ratios);
    long double total = 1.0L;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << gamma.size()); ++mask) {
        const auto l = static_cast<std::size_t>(std::popcount(mask));
        long double Bl = 1.0L;
        for (std::size_t i = 0; i < l; ++i) Bl *= B[i];
        long double pb = 1.0L;
        for (std::size_t j = 0; j < gamma.size(); ++j)
            if (mask >> j & 1) pb *= static_cast<long double>(b[j]) * b[j];
        total += Bl * pb / pod_weight(gamma, G, mask);
    }
    return total;
}

/// E^2(lambda) and its derivative by enumerating subsets, with gamma_u(lambda)
/// and its derivative written in closed form per subset.
struct SubsetObjective {
    long double E2 = 0.0L;
    long double dE2 = 0.0L;
};

inline SubsetObjective objective_subsets(std::uint64_t n, const std::vector<std::uint64_t>& z, const std::vector<double>& b,
                                         const std::vector<double>& B, double lambda) {
    const long double lam = lambda;
    const long double zt = zeta(2.0 * lambda), ztp = zeta_prime(2.0 * lambda);
    const long double pi2 = 2.0L * std::numbers::pi_v<long double> * std::numbers::pi_v<long double>;
    long double e2 = 0.0L, de2 = 0.0L, M = 1.0L, dM = 0.0L;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << z.size()); ++mask) {
        const auto l = static_cast<std::size_t>(std::popcount(mask));
        long double Bl = 1.0L;
        for (std::size_t i = 0; i < l; ++i) Bl *= B[i];
        long double pb = 1.0L;
        for (std::size_t j = 0; j < z.size(); ++j)
            if (mask >> j & 1) pb *= static_cast<long double>(b[j]) * b[j];
        // gamma_u = (B_l * pb * (2 pi^2)^(l lam) / (2 zeta)^l)^(1/(1+lam))
        const long double A = Bl * pb * std::pow(pi2, l * lam) / std::pow(2.0L * zt, static_cast<long double>(l));
        const long double g = std::pow(A, 1.0L / (1.0L + lam));
        const long double dlogA = l * (std::log(pi2) - 2.0L * ztp / zt);
        const long double dg = g * (-std::log(A) / ((1.0L + lam) * (1.0L + lam)) + dlogA / (1.0L + lam));
        const long double K = subset_kernel_average(n, z, mask);
        e2 += g * K;
        de2 += dg * K;
        M += Bl * pb / g;
        dM -= Bl * pb * dg / (g * g);
    }
    return {e2 * M, de2 * M + e2 * dM};
}

/// B is given as successive ratios B_l / B_{l-1}, matching norm_subsets.
inline NormBoundSpec spec_from_lists(const std::vector<double>& b, const std::vector<double>& B) {
    std::vector<double> values;
    double v = 1.0;
    for (double r : B) values.push_back(v *= r);
    return NormBoundSpec{CoordinateSequence::explicit_list(b), OrderSequence::explicit_list(values)};
}

inline double rel_err(long double a, long double b) {
    return static_cast<double>(std::abs(a - b) / std::max(std::abs(b), 1e-300L));
}

} // namespace latcbc::oracle
