#pragma once

/**
 * @file wce.hpp
 * @brief Shift-averaged worst-case error of rank-1 lattice rules.
 *
 * For a generating vector z with modulus n and weights gamma_u the squared
 * shift-averaged worst-case error is
 *
 *     e^2 = sum_{u nonempty} gamma_u (1/n) sum_k prod_{j in u} B2({k z_j / n}).
 *
 * Three evaluators are provided: a literal subset sum (small s only), an
 * incremental product-weight recursion, and an order-layered table for POD
 * weights. All maintain e^2 incrementally rather than as -1 + mean(...).
 */

#include "latcbc/numerics.hpp"
#include "latcbc/weights.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace latcbc {

/// Rank-1 lattice generating vector: z_i in U_n.
struct GeneratingVector {
    std::uint64_t n = 0;
    std::vector<std::uint64_t> z;

    [[nodiscard]] std::size_t dimension() const noexcept { return z.size(); }

    void validate() const {
        if (n < 2) throw std::invalid_argument("generating vector modulus must be >= 2");
        for (auto zi : z)
            if (zi < 1 || zi >= n || std::gcd(zi, n) != 1)
                throw std::invalid_argument("component " + std::to_string(zi) + " is not a unit modulo " +
                                            std::to_string(n));
    }

    friend bool operator==(const GeneratingVector&, const GeneratingVector&) = default;
};

/// Row of the Bernoulli kernel: B2({k z / n}) for k = 0..n-1.
[[nodiscard]] inline std::vector<double> kernel_row(std::uint64_t n, std::uint64_t z) {
    std::vector<double> row(n);
    std::uint64_t r = 0;
    z %= n;
    for (std::uint64_t k = 0; k < n; ++k) {
        row[k] = bernoulli2_residue(r, n);
        r += z;
        if (r >= n) r -= n;
    }
    return row;
}

/// 6 n^2 B2({k z/n}) for k = 0..n-1, exact integers.
[[nodiscard]] inline std::vector<double> kernel_numerator_row(std::uint64_t n, std::uint64_t z) {
    std::vector<double> row(n);
    std::uint64_t r = 0;
    z %= n;
    for (std::uint64_t k = 0; k < n; ++k) {
        row[k] = bernoulli2_numerator(r, n);
        r += z;
        if (r >= n) r -= n;
    }
    return row;
}

/// (1/n) sum_k B2({k z/n}) v(k). The kernel enters as exact numerators and the
/// dot product is compensated, so the heavy cancellation in the sum costs
/// nothing beyond the final rounding.
[[nodiscard]] inline double kernel_mean(std::uint64_t n, std::uint64_t z, std::span<const double> v) {
    const double nd = static_cast<double>(n);
    return compensated_dot(kernel_numerator_row(n, z), v) / (6.0 * nd * nd) / nd;
}

/// Running per-point products are stored in extended precision. G is tiny
/// next to its terms (about 1/n^2 against 1/12 at s = 1), and that ratio
/// multiplies any rounding held in v.
using state_real = long double;

/// kernel_mean for an extended-precision v, pairwise-summed in that precision.
[[nodiscard]] inline double kernel_mean(std::uint64_t n, std::uint64_t z, std::span<const state_real> v) {
    const auto row = kernel_numerator_row(n, z);
    std::vector<state_real> prod(n);
    for (std::uint64_t k = 0; k < n; ++k) prod[k] = static_cast<state_real>(row[k]) * v[k];
    const state_real nd = static_cast<state_real>(n);
    return static_cast<double>(pairwise_sum(prod) / (6 * nd * nd) / nd);
}

namespace detail {

template <class T>
[[nodiscard]] double kernel_mean_magnitude(std::uint64_t n, std::uint64_t z, std::span<const T> v) {
    const auto row = kernel_numerator_row(n, z);
    std::vector<double> a(n);
    for (std::uint64_t k = 0; k < n; ++k) a[k] = std::abs(row[k] * static_cast<double>(v[k]));
    const double nd = static_cast<double>(n);
    return pairwise_sum(a) / (6.0 * nd * nd) / nd;
}

} // namespace detail

/// (1/n) sum_k |B2({k z/n}) v(k)|, the scale of the rounding error in kernel_mean.
[[nodiscard]] inline double kernel_mean_magnitude(std::uint64_t n, std::uint64_t z, std::span<const double> v) {
    return detail::kernel_mean_magnitude(n, z, v);
}
[[nodiscard]] inline double kernel_mean_magnitude(std::uint64_t n, std::uint64_t z, std::span<const state_real> v) {
    return detail::kernel_mean_magnitude(n, z, v);
}

/// Extended-precision B2({k z/n}) for k = 0..n-1.
[[nodiscard]] inline std::vector<state_real> kernel_row_wide(std::uint64_t n, std::uint64_t z) {
    const auto num = kernel_numerator_row(n, z);
    const state_real scale = 6 * static_cast<state_real>(n) * static_cast<state_real>(n);
    std::vector<state_real> row(n);
    for (std::uint64_t k = 0; k < n; ++k) row[k] = static_cast<state_real>(num[k]) / scale;
    return row;
}

/// (1/n) sum_k a(k) b(k), pairwise-summed.
[[nodiscard]] inline double mean_product(std::span<const double> a, std::span<const double> b) {
    std::vector<double> prod(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) prod[k] = a[k] * b[k];
    return pairwise_sum(prod) / static_cast<double>(a.size());
}

// =============================================================================
// Literal subset sum
// =============================================================================

using SubsetWeightFn = std::function<double(std::span<const std::size_t>)>;

inline constexpr std::size_t bruteforce_max_dimension = 20;

/// sqrt(sum_u gamma_u K_u) by enumerating all 2^s - 1 nonempty subsets.
/// The weight callback receives the 1-based coordinates of u.
[[nodiscard]] inline double wce_bruteforce(const GeneratingVector& gv, const SubsetWeightFn& weight) {
    gv.validate();
    const std::size_t s = gv.dimension();
    if (s > bruteforce_max_dimension)
        throw std::invalid_argument("wce_bruteforce: dimension " + std::to_string(s) + " exceeds the oracle limit");
    const std::uint64_t n = gv.n;
    std::vector<std::vector<double>> rows;
    rows.reserve(s);
    for (auto zi : gv.z) rows.push_back(kernel_row(n, zi));

    std::vector<double> terms;
    std::vector<double> prod(n);
    std::vector<std::size_t> u;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << s); ++mask) {
        u.clear();
        for (std::size_t j = 0; j < s; ++j)
            if (mask & (std::uint64_t{1} << j)) u.push_back(j + 1);
        const double g = weight(u);
        if (g < 0.0) throw std::invalid_argument("wce_bruteforce: negative subset weight");
        if (g == 0.0) continue;
        std::fill(prod.begin(), prod.end(), 1.0);
        for (auto j : u)
            for (std::uint64_t k = 0; k < n; ++k) prod[k] *= rows[j - 1][k];
        terms.push_back(g * pairwise_sum(prod) / static_cast<double>(n));
    }
    return std::sqrt(pairwise_sum(terms));
}

[[nodiscard]] inline double wce_bruteforce(const GeneratingVector& gv, const WeightScheme& w) {
    return wce_bruteforce(gv, [&](std::span<const std::size_t> u) { return w.subset_weight(u); });
}

// =============================================================================
// Product weights
// =============================================================================

/// Running product-weight state: per_point[k] = prod_j (1 + gamma_j B2({k z_j/n})).
struct ProductWceState {
    GeneratingVector gv;
    std::vector<double> gamma;
    double e2 = 0.0;
    std::vector<state_real> per_point;

    [[nodiscard]] static ProductWceState empty(std::uint64_t n) {
        if (n < 2) throw std::invalid_argument("modulus must be >= 2");
        return ProductWceState{GeneratingVector{n, {}}, {}, 0.0, std::vector<state_real>(n, 1.0L)};
    }

    /// G(z) = (1/n) sum_k B2({k z/n}) per_point(k), for the next coordinate.
    [[nodiscard]] double score(std::uint64_t z) const { return kernel_mean(gv.n, z, per_point); }

    /// In-place append of (z, gamma); returns the G value used.
    double append(std::uint64_t z, double g) {
        if (z < 1 || z >= gv.n || std::gcd(z, gv.n) != 1)
            throw std::invalid_argument("append: " + std::to_string(z) + " is not a unit modulo " + std::to_string(gv.n));
        if (!(g > 0.0)) throw std::invalid_argument("append: weight must be positive");
        const auto row = kernel_row_wide(gv.n, z);
        const double G = kernel_mean(gv.n, z, per_point);
        e2 += g * G;
        for (std::size_t k = 0; k < per_point.size(); ++k) per_point[k] *= 1 + g * row[k];
        gv.z.push_back(z);
        gamma.push_back(g);
        return G;
    }
};

/// Value-returning append: e2 += gamma_new * G, per_point *= (1 + gamma_new B2).
[[nodiscard]] inline ProductWceState wce_product_append(ProductWceState state, std::uint64_t z_new, double gamma_new) {
    state.append(z_new, gamma_new);
    return state;
}

// =============================================================================
// POD weights
// =============================================================================

/// Order-layered table p[l][k] = Gamma_l sum_{|u|=l} prod_{j in u} gamma_j B2({k z_j/n}).
struct PodWceState {
    GeneratingVector gv;
    std::vector<double> gamma;
    std::vector<double> Gamma_ratio;
    double e2 = 0.0;
    std::vector<std::vector<state_real>> p;

    [[nodiscard]] static PodWceState empty(std::uint64_t n) {
        if (n < 2) throw std::invalid_argument("modulus must be >= 2");
        PodWceState st{GeneratingVector{n, {}}, {}, {}, 0.0, {}};
        st.p.emplace_back(n, 1.0L);
        return st;
    }

    [[nodiscard]] std::size_t dim() const noexcept { return gv.z.size(); }

    /// v(k) = sum_{l=1}^{d+1} (Gamma_l/Gamma_{l-1}) p[l-1](k) for the next coordinate.
    /// `ratios` supplies Gamma_l/Gamma_{l-1} for l = 1..d+1.
    [[nodiscard]] std::vector<state_real> combined(std::span<const double> ratios) const {
        const std::size_t d = dim();
        if (ratios.size() < d + 1) throw std::invalid_argument("order ratios too short for the next dimension");
        std::vector<state_real> v(gv.n, 0.0L);
        for (std::size_t l = d + 1; l >= 1; --l) {
            const state_real r = ratios[l - 1];
            const auto& src = p[l - 1];
            for (std::size_t k = 0; k < v.size(); ++k) v[k] += r * src[k];
        }
        return v;
    }

    /// Append (z, gamma); returns G. `ratios` as for combined().
    double append(std::uint64_t z, double g, std::span<const double> ratios) {
        return append(z, g, ratios, combined(ratios));
    }

    /// Append reusing v = combined(ratios) already formed by the caller.
    double append(std::uint64_t z, double g, std::span<const double> ratios, std::span<const state_real> v) {
        if (z < 1 || z >= gv.n || std::gcd(z, gv.n) != 1)
            throw std::invalid_argument("append: " + std::to_string(z) + " is not a unit modulo " + std::to_string(gv.n));
        if (!(g > 0.0)) throw std::invalid_argument("append: weight must be positive");
        if (v.size() != gv.n) throw std::invalid_argument("append: combined vector has the wrong length");
        const std::size_t d = dim();
        if (ratios.size() < d + 1) throw std::invalid_argument("order ratios too short for the next dimension");
        const auto row = kernel_row_wide(gv.n, z);
        const double G = kernel_mean(gv.n, z, v);
        e2 += g * G;
        p.emplace_back(gv.n, 0.0L);
        for (std::size_t l = d + 1; l >= 1; --l) {
            const state_real c = static_cast<state_real>(ratios[l - 1]) * g;
            auto& dst = p[l];
            const auto& src = p[l - 1];
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += c * row[k] * src[k];
        }
        gv.z.push_back(z);
        gamma.push_back(g);
        Gamma_ratio.assign(ratios.begin(), ratios.begin() + static_cast<std::ptrdiff_t>(d + 1));
        return G;
    }
};

/// Shift-averaged worst-case error for POD (or product / order-dependent) weights in O(s^2 n).
[[nodiscard]] inline double wce_pod_fixed_z(const GeneratingVector& gv, const WeightScheme& w) {
    gv.validate();
    const std::size_t s = gv.dimension();
    if (w.dimension() < s) throw std::invalid_argument("wce_pod_fixed_z: scheme shorter than the vector");
    std::vector<double> ratios(s);
    for (std::size_t l = 1; l <= s; ++l) ratios[l - 1] = w.order_ratio(l);
    auto st = PodWceState::empty(gv.n);
    for (std::size_t j = 1; j <= s; ++j) st.append(gv.z[j - 1], w.product_part(j), ratios);
    return std::sqrt(st.e2);
}

/// Product-weight error via the incremental recursion.
[[nodiscard]] inline double wce_product(const GeneratingVector& gv, std::span<const double> gamma) {
    gv.validate();
    if (gamma.size() < gv.dimension()) throw std::invalid_argument("wce_product: fewer weights than dimensions");
    auto st = ProductWceState::empty(gv.n);
    for (std::size_t j = 0; j < gv.dimension(); ++j) st.append(gv.z[j], gamma[j]);
    return std::sqrt(st.e2);
}

// =============================================================================
// Theoretical upper bound for CBC-constructed vectors
// =============================================================================

/// rho(lambda) = 2 zeta(2 lambda) / (2 pi^2)^lambda
[[nodiscard]] inline double bound_rho(double lambda) {
    return 2.0 * zeta(2.0 * lambda) / std::pow(two_pi_sq, lambda);
}

/// ((1/phi(n)) sum_{u nonempty} gamma_u^lambda rho^{|u|})^{1/(2 lambda)}.
[[nodiscard]] inline double wce_upper_bound(const WeightScheme& w, std::uint64_t n, std::size_t s, double lambda) {
    require_lambda(lambda);
    if (w.dimension() < s) throw std::invalid_argument("wce_upper_bound: scheme shorter than the dimension");
    const double rho = bound_rho(lambda);
    double total = 0.0;
    if (w.kind == WeightScheme::Kind::product) {
        // prod (1 + x_j) - 1 without cancellation
        double log_prod = 0.0;
        for (std::size_t j = 1; j <= s; ++j) log_prod += std::log1p(std::pow(w.gamma[j - 1], lambda) * rho);
        total = std::expm1(log_prod);
    } else {
        // q[l] = Gamma_l^lambda rho^l e_l(gamma_j^lambda)
        std::vector<double> q(s + 1, 0.0);
        q[0] = 1.0;
        for (std::size_t j = 1; j <= s; ++j) {
            const double x = std::pow(w.product_part(j), lambda) * rho;
            for (std::size_t l = j; l >= 1; --l) q[l] += std::pow(w.order_ratio(l), lambda) * x * q[l - 1];
        }
        for (std::size_t l = 1; l <= s; ++l) total += q[l];
    }
    return std::pow(total / static_cast<double>(euler_totient(n)), 1.0 / (2.0 * lambda));
}

} // namespace latcbc
