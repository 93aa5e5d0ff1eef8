#pragma once

/**
 * @file weights.hpp
 * @brief Weight schemes, derivative-bound data and the implied norm bound.
 *
 * A user describes an integrand through two sequences: per-coordinate factors
 * b_j and order-dependent factors B_l, such that the mixed first derivative
 * over a subset u is bounded in L2 by B_|u| * prod_{j in u} b_j^2. Given
 * weights gamma_u, the squared norm of the integrand is then bounded by
 *
 *     M = sum_u (B_|u| / gamma_u) prod_{j in u} b_j^2.
 *
 * Order-dependent sequences (B_l, Gamma_l) are handled as successive ratios
 * X_l / X_{l-1}; l! at l = 100 never has to be formed.
 */

#include "latcbc/numerics.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace latcbc {

// =============================================================================
// Per-coordinate sequences b_1, b_2, ...
// =============================================================================

class CoordinateSequence {
public:
    enum class Kind { polynomial, geometric, constant, explicit_list };

    /// b_i = i^{-c}
    [[nodiscard]] static CoordinateSequence polynomial(double c) { return {Kind::polynomial, c, {}}; }
    /// b_i = r^i
    [[nodiscard]] static CoordinateSequence geometric(double r) {
        if (!(r > 0.0)) throw std::invalid_argument("geometric sequence needs r > 0");
        return {Kind::geometric, r, {}};
    }
    [[nodiscard]] static CoordinateSequence constant(double v) {
        if (!(v > 0.0)) throw std::invalid_argument("constant sequence needs a positive value");
        return {Kind::constant, v, {}};
    }
    [[nodiscard]] static CoordinateSequence explicit_list(std::vector<double> values) {
        for (double v : values)
            if (!(v > 0.0)) throw std::invalid_argument("coordinate sequence entries must be positive");
        return {Kind::explicit_list, 0.0, std::move(values)};
    }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double parameter() const noexcept { return param_; }

    /// Number of terms available (unbounded for closed-form families).
    [[nodiscard]] std::size_t available() const noexcept {
        return kind_ == Kind::explicit_list ? values_.size() : std::numeric_limits<std::size_t>::max();
    }

    /// b_i for i >= 1.
    [[nodiscard]] double operator()(std::size_t i) const {
        if (i == 0) throw std::out_of_range("coordinate sequences are 1-based");
        switch (kind_) {
        case Kind::polynomial: return std::pow(static_cast<double>(i), -param_);
        case Kind::geometric: return std::pow(param_, static_cast<double>(i));
        case Kind::constant: return param_;
        case Kind::explicit_list:
            if (i > values_.size())
                throw std::out_of_range("coordinate list has " + std::to_string(values_.size()) +
                                        " entries, index " + std::to_string(i) + " requested");
            return values_[i - 1];
        }
        return 0.0;
    }

    [[nodiscard]] std::string describe() const {
        std::ostringstream os;
        switch (kind_) {
        case Kind::polynomial: os << "poly " << param_; break;
        case Kind::geometric: os << "geo " << param_; break;
        case Kind::constant: os << "const " << param_; break;
        case Kind::explicit_list: os << "list[" << values_.size() << "]"; break;
        }
        return os.str();
    }

private:
    CoordinateSequence(Kind k, double p, std::vector<double> v) : kind_(k), param_(p), values_(std::move(v)) {}

    Kind kind_;
    double param_;
    std::vector<double> values_;
};

// =============================================================================
// Order-dependent sequences X_0 = 1, X_1, X_2, ...
// =============================================================================

class OrderSequence {
public:
    enum class Kind { ones, linear, factorial, explicit_list };

    [[nodiscard]] static OrderSequence ones() { return {Kind::ones, {}}; }
    /// X_l = l
    [[nodiscard]] static OrderSequence linear() { return {Kind::linear, {}}; }
    /// X_l = l!
    [[nodiscard]] static OrderSequence factorial() { return {Kind::factorial, {}}; }
    /// X_1..X_L given; stored as X_1 followed by successive ratios.
    [[nodiscard]] static OrderSequence explicit_list(std::span<const double> values) {
        std::vector<double> ratios;
        ratios.reserve(values.size());
        double prev = 1.0;
        for (double v : values) {
            if (!(v > 0.0)) throw std::invalid_argument("order-dependent entries must be positive");
            ratios.push_back(v / prev);
            prev = v;
        }
        return {Kind::explicit_list, std::move(ratios)};
    }
    [[nodiscard]] static OrderSequence from_ratios(std::vector<double> ratios) {
        for (double r : ratios)
            if (!(r > 0.0)) throw std::invalid_argument("order-dependent ratios must be positive");
        return {Kind::explicit_list, std::move(ratios)};
    }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }

    [[nodiscard]] std::size_t available() const noexcept {
        return kind_ == Kind::explicit_list ? ratios_.size() : std::numeric_limits<std::size_t>::max();
    }

    [[nodiscard]] bool all_ones() const noexcept {
        if (kind_ == Kind::ones) return true;
        if (kind_ != Kind::explicit_list) return false;
        for (double r : ratios_)
            if (r != 1.0) return false;
        return true;
    }

    /// X_l / X_{l-1} for l >= 1 (so ratio(1) = X_1).
    [[nodiscard]] double ratio(std::size_t l) const {
        if (l == 0) throw std::out_of_range("order ratios start at l = 1");
        switch (kind_) {
        case Kind::ones: return 1.0;
        case Kind::linear: return l == 1 ? 1.0 : static_cast<double>(l) / static_cast<double>(l - 1);
        case Kind::factorial: return static_cast<double>(l);
        case Kind::explicit_list:
            if (l > ratios_.size())
                throw std::out_of_range("order-dependent list has " + std::to_string(ratios_.size()) +
                                        " entries, order " + std::to_string(l) + " requested");
            return ratios_[l - 1];
        }
        return 0.0;
    }

    /// log X_l
    [[nodiscard]] double log_value(std::size_t l) const {
        switch (kind_) {
        case Kind::ones: return 0.0;
        case Kind::linear: return l == 0 ? 0.0 : std::log(static_cast<double>(l));
        case Kind::factorial: return std::lgamma(static_cast<double>(l) + 1.0);
        case Kind::explicit_list: {
            double acc = 0.0;
            for (std::size_t i = 1; i <= l; ++i) acc += std::log(ratio(i));
            return acc;
        }
        }
        return 0.0;
    }

    /// X_l materialized as the running product of ratios.
    [[nodiscard]] double value(std::size_t l) const {
        double acc = 1.0;
        for (std::size_t i = 1; i <= l; ++i) acc *= ratio(i);
        return acc;
    }

    [[nodiscard]] std::string describe() const {
        switch (kind_) {
        case Kind::ones: return "one";
        case Kind::linear: return "linear";
        case Kind::factorial: return "factorial";
        case Kind::explicit_list: return "list[" + std::to_string(ratios_.size()) + "]";
        }
        return {};
    }

private:
    OrderSequence(Kind k, std::vector<double> r) : kind_(k), ratios_(std::move(r)) {}

    Kind kind_;
    std::vector<double> ratios_;
};

/// Derivative-bound data (b_j, B_l).
struct NormBoundSpec {
    CoordinateSequence b = CoordinateSequence::constant(1.0);
    OrderSequence B = OrderSequence::ones();

    [[nodiscard]] bool product_form() const noexcept { return B.all_ones(); }
};

// =============================================================================
// Weight schemes
// =============================================================================

/// gamma_u in factored form: product, order-dependent, or POD.
///
/// `gamma` holds gamma_1..gamma_s (empty for order-dependent), `Gamma_ratio`
/// holds Gamma_l / Gamma_{l-1} for l = 1..s (empty for product).
struct WeightScheme {
    enum class Kind { product, order_dependent, pod };

    Kind kind = Kind::product;
    std::vector<double> gamma;
    std::vector<double> Gamma_ratio;

    [[nodiscard]] static WeightScheme product(std::vector<double> g) {
        WeightScheme w{Kind::product, std::move(g), {}};
        w.validate();
        return w;
    }
    [[nodiscard]] static WeightScheme pod(std::vector<double> g, std::vector<double> ratios) {
        WeightScheme w{Kind::pod, std::move(g), std::move(ratios)};
        w.validate();
        return w;
    }
    [[nodiscard]] static WeightScheme order_dependent(std::vector<double> ratios) {
        WeightScheme w{Kind::order_dependent, {}, std::move(ratios)};
        w.validate();
        return w;
    }

    void validate() const {
        for (double g : gamma)
            if (!(g > 0.0) || !std::isfinite(g)) throw std::invalid_argument("weights must be positive and finite");
        for (double r : Gamma_ratio)
            if (!(r > 0.0) || !std::isfinite(r))
                throw std::invalid_argument("order-dependent weight ratios must be positive and finite");
        if (kind == Kind::product && !Gamma_ratio.empty())
            throw std::invalid_argument("product weights carry no order-dependent part");
        if (kind == Kind::order_dependent && !gamma.empty())
            throw std::invalid_argument("order-dependent weights carry no product part");
    }

    /// Largest dimension for which every gamma_u is defined.
    [[nodiscard]] std::size_t dimension() const noexcept {
        switch (kind) {
        case Kind::product: return gamma.size();
        case Kind::order_dependent: return Gamma_ratio.size();
        case Kind::pod: return std::min(gamma.size(), Gamma_ratio.size());
        }
        return 0;
    }

    /// gamma_j, 1-based; 1 for order-dependent weights.
    [[nodiscard]] double product_part(std::size_t j) const {
        if (kind == Kind::order_dependent) return 1.0;
        return gamma.at(j - 1);
    }
    /// Gamma_l / Gamma_{l-1}, l >= 1; 1 for product weights.
    [[nodiscard]] double order_ratio(std::size_t l) const {
        if (kind == Kind::product) return 1.0;
        return Gamma_ratio.at(l - 1);
    }
    /// Gamma_l
    [[nodiscard]] double order_factor(std::size_t l) const {
        double acc = 1.0;
        for (std::size_t i = 1; i <= l; ++i) acc *= order_ratio(i);
        return acc;
    }

    /// gamma_u for u given by 1-based coordinate indices.
    [[nodiscard]] double subset_weight(std::span<const std::size_t> u) const {
        double w = order_factor(u.size());
        for (auto j : u) w *= product_part(j);
        return w;
    }
};

// =============================================================================
// Norm bound M_{s,gamma}
// =============================================================================

/// prod_{j<=s} (1 + b_j^2 / gamma_j), valid when all B_l = 1.
[[nodiscard]] inline double norm_bound_product(const NormBoundSpec& spec, std::span<const double> gamma, std::size_t s) {
    if (!spec.product_form()) throw std::invalid_argument("norm_bound_product: requires B_l = 1 for all l");
    if (gamma.size() < s) throw std::invalid_argument("norm_bound_product: fewer weights than dimensions");
    double M = 1.0;
    for (std::size_t j = 1; j <= s; ++j) {
        const double g = gamma[j - 1];
        if (!(g > 0.0)) throw std::invalid_argument("norm_bound_product: weights must be positive");
        const double bj = spec.b(j);
        M *= 1.0 + bj * bj / g;
    }
    return M;
}

/// Running state of the POD norm recursion after s dimensions.
///
/// H[l] = (B_{l+1}/Gamma_{l+1}) * e_l(b_1^2/gamma_1, ..., b_s^2/gamma_s), where e_l
/// is the elementary symmetric polynomial. H has s+1 entries when the order
/// data reaches l = s+1; the last entry is omitted when an explicit list ends.
struct PodNormState {
    std::size_t dim = 0;
    double M = 1.0;
    std::vector<double> H;

    [[nodiscard]] double H_sum() const noexcept {
        double acc = 0.0;
        for (double h : H) acc += h;
        return acc;
    }
};

/// State for the empty dimension set: M = 1, H_{0,0} = B_1 / Gamma_1.
[[nodiscard]] inline PodNormState pod_norm_initial(const NormBoundSpec& spec, const OrderSequence& Gamma) {
    PodNormState st;
    st.H.push_back(spec.B.ratio(1) / Gamma.ratio(1));
    return st;
}

/// Advance the POD norm recursion by dimension s = state.dim + 1 with product weight gamma_s.
[[nodiscard]] inline PodNormState norm_bound_pod_step(const PodNormState& state, const NormBoundSpec& spec,
                                                      const OrderSequence& Gamma, double gamma_s) {
    if (!(gamma_s > 0.0)) throw std::invalid_argument("norm_bound_pod_step: weight must be positive");
    const std::size_t s = state.dim + 1;
    if (state.H.size() < s)
        throw std::out_of_range("norm_bound_pod_step: order-dependent data too short for dimension " +
                                std::to_string(s));
    const double bs = spec.b(s);
    const double x = bs * bs / gamma_s;

    PodNormState next;
    next.dim = s;
    next.M = state.M + x * state.H_sum();

    // H_{s,l} = H_{s-1,l} + x (B_{l+1}/B_l)(Gamma_l/Gamma_{l+1}) H_{s-1,l-1}, l = s..1
    const std::size_t top = std::min<std::size_t>(s, std::min(spec.B.available(), Gamma.available()) - 1);
    next.H.assign(top + 1, 0.0);
    next.H[0] = state.H[0];
    for (std::size_t l = top; l >= 1; --l) {
        const double prev = l < state.H.size() ? state.H[l] : 0.0;
        next.H[l] = prev + x * (spec.B.ratio(l + 1) / Gamma.ratio(l + 1)) * state.H[l - 1];
    }
    return next;
}

/// M_{s,gamma} for a POD scheme through the ratio recursion.
[[nodiscard]] inline double norm_bound(const NormBoundSpec& spec, const WeightScheme& w, std::size_t s) {
    if (w.dimension() < s) throw std::invalid_argument("norm_bound: scheme shorter than the dimension");
    if (w.kind == WeightScheme::Kind::product && spec.product_form())
        return norm_bound_product(spec, w.gamma, s);
    std::vector<double> ratios(s + 1);
    for (std::size_t l = 1; l <= s; ++l) ratios[l - 1] = w.order_ratio(l);
    // One extra order so the last H entry is defined; it never feeds M_s.
    ratios[s] = 1.0;
    const auto Gamma = OrderSequence::from_ratios(std::move(ratios));
    auto st = pod_norm_initial(spec, Gamma);
    for (std::size_t j = 1; j <= s; ++j) st = norm_bound_pod_step(st, spec, Gamma, w.product_part(j));
    return st.M;
}

// =============================================================================
// Lambda-indexed optimal weights
// =============================================================================

/// Admissible exponent range (1/2, 1].
inline void require_lambda(double lambda) {
    if (!(lambda > 0.5 && lambda <= 1.0))
        throw std::domain_error("lambda must lie in (1/2, 1], got " + std::to_string(lambda));
}

inline constexpr double two_pi_sq = 2.0 * std::numbers::pi * std::numbers::pi;

/// log c_j(lambda) - log b_j^2 = lambda log(2 pi^2) - log(2 zeta(2 lambda)).
[[nodiscard]] inline double lambda_log_scale(double lambda) {
    return lambda * std::log(two_pi_sq) - std::log(2.0 * zeta(2.0 * lambda));
}

/// POD weights minimizing the lambda-family error bound:
///   Gamma_l = B_l^{1/(1+lambda)},  gamma_j = ((2 pi^2)^lambda b_j^2 / (2 zeta(2 lambda)))^{1/(1+lambda)}.
[[nodiscard]] inline WeightScheme lambda_weights(const NormBoundSpec& spec, double lambda, std::size_t s) {
    require_lambda(lambda);
    const double p = 1.0 / (1.0 + lambda);
    const double scale = lambda_log_scale(lambda);
    std::vector<double> gamma(s), ratios(s);
    for (std::size_t j = 1; j <= s; ++j) {
        const double bj = spec.b(j);
        gamma[j - 1] = std::exp(p * (scale + 2.0 * std::log(bj)));
        ratios[j - 1] = std::pow(spec.B.ratio(j), p);
    }
    return WeightScheme::pod(std::move(gamma), std::move(ratios));
}

/// d gamma_u / d lambda for |u| = u_size, where b_product_log = log prod_{j in u} b_j^2.
[[nodiscard]] inline double lambda_weights_derivative(const NormBoundSpec& spec, double lambda, std::size_t u_size,
                                                      double b_product_log) {
    require_lambda(lambda);
    if (u_size == 0) throw std::invalid_argument("lambda_weights_derivative: u must be nonempty");
    const double ell = static_cast<double>(u_size);
    const double log_arg = spec.B.log_value(u_size) + ell * lambda_log_scale(lambda) + b_product_log;
    const double gamma_u = std::exp(log_arg / (1.0 + lambda));
    const double dlog_c = std::log(two_pi_sq) - 2.0 * zeta_prime(2.0 * lambda) / zeta(2.0 * lambda);
    return gamma_u * (-log_arg / ((1.0 + lambda) * (1.0 + lambda)) + ell * dlog_c / (1.0 + lambda));
}

} // namespace latcbc
