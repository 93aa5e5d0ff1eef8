#pragma once

/**
 * @file construct.hpp
 * @brief Constructions that choose the weights together with the lattice.
 *
 * Double CBC picks, in each dimension, the component z_i minimizing the
 * worst-case error increment and then the product weight gamma_i minimizing
 * the bound (e^2_{i-1} + gamma_i G_i)(M_{i-1} + d_i / gamma_i) on the mean
 * square error. Iterated CBC walks the lambda-indexed family of POD weights,
 * running the classic construction for each lambda and moving lambda to the
 * minimizer of the bound with the lattice held fixed.
 */

#include "latcbc/cbc.hpp"
#include "latcbc/kernel.hpp"
#include "latcbc/numerics.hpp"
#include "latcbc/result.hpp"
#include "latcbc/wce.hpp"
#include "latcbc/weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace latcbc {

// =============================================================================
// One-dimensional weight choice
// =============================================================================

/// Coefficients of h(x) = (a + b x)(c + d / x), all positive.
struct MinimizerInputs {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;

    [[nodiscard]] double h(double x) const noexcept { return (a + b * x) * (c + d / x); }
};

/// argmin_{x > 0} h(x) = sqrt(a d / (b c)); h is convex on (0, inf).
[[nodiscard]] inline double lemma_minimizer(const MinimizerInputs& m) {
    if (!(m.a > 0.0 && m.b > 0.0 && m.c > 0.0 && m.d > 0.0))
        throw std::domain_error("lemma_minimizer: all coefficients must be positive");
    return std::sqrt(m.a * m.d / (m.b * m.c));
}

// =============================================================================
// Double CBC
// =============================================================================

/// Default first weight, gamma_1 = 1. Reproduces the published DCBC tables.
inline constexpr double default_gamma1 = 1.0;

/// Alternative first weight: the singleton weight gamma_{{1}}(lambda = 1) = sqrt(6 B_1) b_1.
[[nodiscard]] inline double lambda_one_gamma1(const NormBoundSpec& spec) {
    return std::sqrt(6.0 * spec.B.ratio(1)) * spec.b(1);
}

namespace detail {

inline double checked_score(double G, std::size_t i) {
    if (!(G > 0.0) || !std::isfinite(G))
        throw numerical_error("non-positive error increment G = " + std::to_string(G) + " in dimension " +
                              std::to_string(i));
    return G;
}

} // namespace detail

/// Double CBC for product weights (requires B_l = 1).
[[nodiscard]] inline ConstructionResult dcbc_product(std::uint64_t n, std::size_t s, const NormBoundSpec& spec,
                                                     double gamma1, KernelPath path = KernelPath::automatic) {
    if (!spec.product_form()) throw std::invalid_argument("dcbc_product: requires B_l = 1 for all l");
    if (!(gamma1 > 0.0)) throw std::invalid_argument("dcbc_product: gamma_1 must be positive");
    if (s == 0) throw std::invalid_argument("dcbc_product: dimension must be positive");

    const ScoreEngine engine(n, path);
    auto st = ProductWceState::empty(n);
    ConstructionResult r;
    std::vector<double> gamma;

    const double b1 = spec.b(1);
    r.G_history.push_back(st.append(1, gamma1));
    double M = 1.0 + b1 * b1 / gamma1;
    gamma.push_back(gamma1);
    r.e2_history.push_back(st.e2);
    r.M_history.push_back(M);

    for (std::size_t i = 2; i <= s; ++i) {
        const auto cand = engine.score(st.per_point);
        const std::uint64_t z = cand.argmin;
        const double G = detail::checked_score(st.score(z), i);
        const double bi = spec.b(i);
        const double g = lemma_minimizer({st.e2, G, M, bi * bi * M});
        st.append(z, g);
        M *= 1.0 + bi * bi / g;
        gamma.push_back(g);
        r.G_history.push_back(G);
        r.e2_history.push_back(st.e2);
        r.M_history.push_back(M);
    }

    r.gv = st.gv;
    r.scheme = WeightScheme::product(std::move(gamma));
    for (std::size_t i = 0; i < s; ++i) r.E_history.push_back(std::sqrt(r.e2_history[i] * r.M_history[i]));
    r.meta.algorithm = "dcbc";
    r.meta.n = n;
    r.meta.s = s;
    r.meta.b_family = spec.b.describe();
    r.meta.B_family = spec.B.describe();
    r.meta.gamma1 = gamma1;
    r.meta.fast_kernel = engine.fast();
    return r;
}

/// Double CBC for POD weights with given order-dependent factors Gamma_l.
[[nodiscard]] inline ConstructionResult dcbc_pod(std::uint64_t n, std::size_t s, const NormBoundSpec& spec,
                                                 const OrderSequence& Gamma, double gamma1,
                                                 KernelPath path = KernelPath::automatic) {
    if (!(gamma1 > 0.0)) throw std::invalid_argument("dcbc_pod: gamma_1 must be positive");
    if (s == 0) throw std::invalid_argument("dcbc_pod: dimension must be positive");
    if (Gamma.available() < s) throw std::invalid_argument("dcbc_pod: order-dependent factors shorter than s");
    if (spec.B.available() < s) throw std::invalid_argument("dcbc_pod: bound factors B_l shorter than s");

    std::vector<double> ratios(s);
    for (std::size_t l = 1; l <= s; ++l) ratios[l - 1] = Gamma.ratio(l);

    const ScoreEngine engine(n, path);
    auto st = PodWceState::empty(n);
    auto norm = pod_norm_initial(spec, Gamma);
    ConstructionResult r;
    std::vector<double> gamma;

    r.G_history.push_back(st.append(1, gamma1, ratios));
    norm = norm_bound_pod_step(norm, spec, Gamma, gamma1);
    gamma.push_back(gamma1);
    r.e2_history.push_back(st.e2);
    r.M_history.push_back(norm.M);

    for (std::size_t i = 2; i <= s; ++i) {
        const auto v = st.combined(ratios);
        const auto cand = engine.score(v);
        const std::uint64_t z = cand.argmin;
        const double G = detail::checked_score(kernel_mean(n, z, v), i);
        const double bi = spec.b(i);
        const double g = lemma_minimizer({st.e2, G, norm.M, bi * bi * norm.H_sum()});
        st.append(z, g, ratios, v);
        norm = norm_bound_pod_step(norm, spec, Gamma, g);
        gamma.push_back(g);
        r.G_history.push_back(G);
        r.e2_history.push_back(st.e2);
        r.M_history.push_back(norm.M);
    }

    r.gv = st.gv;
    r.scheme = WeightScheme::pod(std::move(gamma), std::move(ratios));
    for (std::size_t i = 0; i < s; ++i) r.E_history.push_back(std::sqrt(r.e2_history[i] * r.M_history[i]));
    r.meta.algorithm = "dcbc-pod";
    r.meta.n = n;
    r.meta.s = s;
    r.meta.b_family = spec.b.describe();
    r.meta.B_family = spec.B.describe();
    r.meta.Gamma_source = Gamma.describe();
    r.meta.gamma1 = gamma1;
    r.meta.fast_kernel = engine.fast();
    return r;
}

// =============================================================================
// Bound as a function of lambda for a fixed lattice
// =============================================================================

/// e^2(lambda), M(lambda), their product E^2 and dE^2/dlambda.
struct LambdaObjectiveValue {
    double lambda = 0.0;
    double e2 = 0.0;
    double M = 0.0;
    double E2 = 0.0;
    double dE2 = 0.0;

    [[nodiscard]] double E() const { return std::sqrt(E2); }
};

/// E^2_{n,s,z}(lambda) = e^2(z, gamma(lambda)) M(gamma(lambda)) with z fixed.
///
/// Weight derivatives factor as gamma'_u / gamma_u = alpha_|u| + sum_{j in u} beta_j,
/// so both sums over subsets run through order-layered tables carrying
/// sum_u prod and sum_u (sum beta) prod, in O(s^2 n) (O(s n) when B_l = 1).
class LambdaObjective {
public:
    LambdaObjective(GeneratingVector gv, NormBoundSpec spec) : gv_(std::move(gv)), spec_(std::move(spec)) {
        gv_.validate();
        const std::size_t s = gv_.dimension();
        if (s == 0) throw std::invalid_argument("LambdaObjective: empty generating vector");
        rows_.reserve(s);
        for (auto z : gv_.z) rows_.push_back(kernel_row(gv_.n, z));
        log_b2_.resize(s);
        for (std::size_t j = 1; j <= s; ++j) log_b2_[j - 1] = 2.0 * std::log(spec_.b(j));
        log_B_ratio_.resize(s);
        for (std::size_t l = 1; l <= s; ++l) log_B_ratio_[l - 1] = std::log(spec_.B.ratio(l));
        product_ = spec_.product_form();
    }

    [[nodiscard]] const GeneratingVector& generating_vector() const noexcept { return gv_; }
    [[nodiscard]] const NormBoundSpec& spec() const noexcept { return spec_; }
    /// Every lambda at which evaluate() has been called.
    [[nodiscard]] const std::vector<double>& evaluations() const noexcept { return evaluated_; }

    [[nodiscard]] LambdaObjectiveValue evaluate(double lambda) const {
        require_lambda(lambda);
        evaluated_.push_back(lambda);
        const std::size_t s = gv_.dimension();
        const double p = 1.0 / (1.0 + lambda);
        const double scale = lambda_log_scale(lambda);
        const double dlog_c = std::log(two_pi_sq) - 2.0 * zeta_prime(2.0 * lambda) / zeta(2.0 * lambda);

        std::vector<double> gamma(s), beta(s);
        for (std::size_t j = 0; j < s; ++j) {
            const double log_c = scale + log_b2_[j];
            gamma[j] = std::exp(p * log_c);
            beta[j] = -log_c * p * p + dlog_c * p;
        }
        LambdaObjectiveValue out;
        out.lambda = lambda;
        if (product_)
            evaluate_product(gamma, beta, out);
        else
            evaluate_pod(lambda, gamma, beta, out);
        out.E2 = out.e2 * out.M;
        return out;
    }

private:
    void evaluate_product(const std::vector<double>& gamma, const std::vector<double>& beta,
                          LambdaObjectiveValue& out) const {
        const std::size_t s = gv_.dimension();
        const std::size_t n = gv_.n;
        std::vector<double> P(n, 1.0), D(n, 0.0), tmp(n);
        double e2 = 0.0, M = 1.0, dM_neg = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            const auto& row = rows_[j];
            const double g = gamma[j];
            for (std::size_t k = 0; k < n; ++k) tmp[k] = row[k] * P[k];
            e2 += g * pairwise_sum(tmp) / static_cast<double>(n);
            for (std::size_t k = 0; k < n; ++k) {
                const double x = g * row[k];
                D[k] = D[k] * (1.0 + x) + beta[j] * x * P[k];
                P[k] *= 1.0 + x;
            }
            const double bj2 = std::exp(log_b2_[j]);
            const double y = bj2 / g;
            dM_neg = dM_neg * (1.0 + y) + beta[j] * y * M;
            M *= 1.0 + y;
        }
        const double de2 = pairwise_sum(D) / static_cast<double>(n);
        out.e2 = e2;
        out.M = M;
        out.dE2 = de2 * M - e2 * dM_neg;
    }

    void evaluate_pod(double lambda, const std::vector<double>& gamma, const std::vector<double>& beta,
                      LambdaObjectiveValue& out) const {
        const std::size_t s = gv_.dimension();
        const std::size_t n = gv_.n;
        const double p = 1.0 / (1.0 + lambda);

        // Gamma_l/Gamma_{l-1} = (B_l/B_{l-1})^p ; (B_l/Gamma_l)/(B_{l-1}/Gamma_{l-1}) = (B_l/B_{l-1})^{1-p}
        std::vector<double> r(s + 1), t(s + 1), alpha(s + 1);
        double log_B = 0.0;
        alpha[0] = 0.0;
        for (std::size_t l = 1; l <= s; ++l) {
            r[l] = std::exp(p * log_B_ratio_[l - 1]);
            t[l] = std::exp((1.0 - p) * log_B_ratio_[l - 1]);
            log_B += log_B_ratio_[l - 1];
            alpha[l] = -log_B * p * p;
        }

        // Kernel side, blocked over k: P[l][.] = Gamma_l e_l, Q[l][.] = Gamma_l sum (sum beta) prod.
        constexpr std::size_t block = 32;
        const std::size_t nblocks = (n + block - 1) / block;
        std::vector<double> P((s + 1) * block), Q((s + 1) * block);
        std::vector<std::vector<double>> Psum(s + 1, std::vector<double>(nblocks, 0.0));
        std::vector<std::vector<double>> Qsum(s + 1, std::vector<double>(nblocks, 0.0));
        double x[block];
        for (std::size_t bi = 0; bi < nblocks; ++bi) {
            const std::size_t k0 = bi * block;
            const std::size_t len = std::min(block, n - k0);
            std::fill(P.begin(), P.end(), 0.0);
            std::fill(Q.begin(), Q.end(), 0.0);
            for (std::size_t k = 0; k < len; ++k) P[k] = 1.0;
            for (std::size_t j = 0; j < s; ++j) {
                const double* row = rows_[j].data() + k0;
                for (std::size_t k = 0; k < len; ++k) x[k] = gamma[j] * row[k];
                const double bj = beta[j];
                for (std::size_t l = j + 1; l >= 1; --l) {
                    const double rl = r[l];
                    double* Pl = &P[l * block];
                    double* Ql = &Q[l * block];
                    const double* Pm = &P[(l - 1) * block];
                    const double* Qm = &Q[(l - 1) * block];
                    for (std::size_t k = 0; k < len; ++k) {
                        const double c = rl * x[k];
                        Ql[k] += c * (Qm[k] + bj * Pm[k]);
                        Pl[k] += c * Pm[k];
                    }
                }
            }
            for (std::size_t l = 1; l <= s; ++l) {
                double ps = 0.0, qs = 0.0;
                for (std::size_t k = 0; k < len; ++k) {
                    ps += P[l * block + k];
                    qs += Q[l * block + k];
                }
                Psum[l][bi] = ps;
                Qsum[l][bi] = qs;
            }
        }
        double e2 = 0.0, de2 = 0.0;
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t l = 1; l <= s; ++l) {
            const double pl = pairwise_sum(Psum[l]) * inv_n;
            const double ql = pairwise_sum(Qsum[l]) * inv_n;
            e2 += pl;
            de2 += alpha[l] * pl + ql;
        }

        // Norm side: h[l] = (B_l/Gamma_l) e_l(b^2/gamma), g[l] = (B_l/Gamma_l) sum (sum beta) prod.
        std::vector<double> h(s + 1, 0.0), g(s + 1, 0.0);
        h[0] = 1.0;
        for (std::size_t j = 0; j < s; ++j) {
            const double y = std::exp(log_b2_[j]) / gamma[j];
            for (std::size_t l = j + 1; l >= 1; --l) {
                const double c = t[l] * y;
                g[l] += c * (g[l - 1] + beta[j] * h[l - 1]);
                h[l] += c * h[l - 1];
            }
        }
        double M = 0.0, dM_neg = 0.0;
        for (std::size_t l = 0; l <= s; ++l) {
            M += h[l];
            dM_neg += alpha[l] * h[l] + g[l];
        }
        out.e2 = e2;
        out.M = M;
        out.dE2 = de2 * M - e2 * dM_neg;
    }

    GeneratingVector gv_;
    NormBoundSpec spec_;
    std::vector<std::vector<double>> rows_;
    std::vector<double> log_b2_;
    std::vector<double> log_B_ratio_;
    bool product_ = false;
    mutable std::vector<double> evaluated_;
};

/// d E^2_{n,s,z}(lambda) / d lambda for a fixed generating vector.
[[nodiscard]] inline double icbc_objective_derivative(const GeneratingVector& gv, const NormBoundSpec& spec,
                                                      double lambda) {
    return LambdaObjective(gv, spec).evaluate(lambda).dE2;
}

// =============================================================================
// Safeguarded one-dimensional search on dE^2/dlambda
// =============================================================================

struct LambdaSearchResult {
    LambdaObjectiveValue best;
    bool at_boundary = false;
    int evaluations = 0;
};

/// Minimize E^2(lambda) on [lo, hi]: bracket the sign change of the derivative,
/// then Illinois-modified secant steps with bisection fallback until the
/// bracket is narrower than tol. The lowest evaluated point is returned.
[[nodiscard]] inline LambdaSearchResult minimize_lambda(const LambdaObjective& f, double lo, double hi,
                                                        double tol = 1e-6, int max_evals = 100) {
    LambdaSearchResult res;
    auto eval = [&](double x) {
        ++res.evaluations;
        return f.evaluate(x);
    };
    auto fa = eval(lo);
    auto fb = eval(hi);
    res.best = fa.E2 <= fb.E2 ? fa : fb;
    if (fa.dE2 >= 0.0 || fb.dE2 <= 0.0) {
        // No interior stationary point under unimodality; pick the lower endpoint value.
        res.at_boundary = true;
        return res;
    }

    double a = lo, b = hi, da = fa.dE2, db = fb.dE2;
    int side = 0;
    while (b - a > tol && res.evaluations < max_evals) {
        double x = (a * db - b * da) / (db - da);
        // Fall back to bisection when the secant point hugs an end of the bracket.
        const double w = b - a;
        if (!(x > a + 0.01 * w && x < b - 0.01 * w)) x = 0.5 * (a + b);
        const auto fx = eval(x);
        if (fx.E2 < res.best.E2) res.best = fx;
        if (fx.dE2 == 0.0) break;
        if (fx.dE2 < 0.0) {
            a = x;
            da = fx.dE2;
            if (side == -1) db *= 0.5;
            side = -1;
        } else {
            b = x;
            db = fx.dE2;
            if (side == 1) da *= 0.5;
            side = 1;
        }
    }
    res.at_boundary = res.best.lambda == lo || res.best.lambda == hi;
    return res;
}

// =============================================================================
// Iterated CBC
// =============================================================================

struct IcbcOptions {
    double lambda0 = 0.75;
    /// Stop when |dE^2/dlambda| < tau * E^2 at the current iterate.
    double tau = 1e-3;
    int k_max = 10;
    /// Search interval is [1/2 + epsilon, 1].
    double epsilon = 1e-3;
    double lambda_tol = 1e-6;
    double cycle_tol = 1e-6;
    KernelPath path = KernelPath::automatic;
};

enum class IcbcStop { gradient_below_tau, max_iterations, cycle_detected, boundary };

[[nodiscard]] inline const char* to_string(IcbcStop s) noexcept {
    switch (s) {
    case IcbcStop::gradient_below_tau: return "gradient-below-tau";
    case IcbcStop::max_iterations: return "max-iterations";
    case IcbcStop::cycle_detected: return "cycle-detected";
    case IcbcStop::boundary: return "boundary";
    }
    return "unknown";
}

struct IcbcIterate {
    double lambda = 0.0;
    GeneratingVector z;
    double E = 0.0;
    double dE2 = 0.0;
};

struct IcbcTrace {
    std::vector<IcbcIterate> iterates;
    double lambda_star = 0.0;
    IcbcStop stop_reason = IcbcStop::max_iterations;
};

[[nodiscard]] inline std::pair<ConstructionResult, IcbcTrace> icbc(std::uint64_t n, std::size_t s,
                                                                   const NormBoundSpec& spec,
                                                                   const IcbcOptions& opt = {}) {
    require_lambda(opt.lambda0);
    if (!(opt.tau > 0.0)) throw std::domain_error("icbc: tau must be positive");
    if (opt.k_max < 1) throw std::invalid_argument("icbc: k_max must be at least 1");
    if (!(opt.epsilon > 0.0 && opt.epsilon < 0.5)) throw std::domain_error("icbc: epsilon must lie in (0, 1/2)");
    if (s == 0) throw std::invalid_argument("icbc: dimension must be positive");

    const double lo = 0.5 + opt.epsilon;
    const double hi = 1.0;
    IcbcTrace trace;
    ConstructionResult best;
    double best_E = std::numeric_limits<double>::infinity();
    double lambda = opt.lambda0;
    bool last_search_at_boundary = false;

    for (int k = 0;; ++k) {
        const auto weights = lambda_weights(spec, lambda, s);
        auto r = cbc_pod(n, s, weights, opt.path);
        attach_norm_bound(r, spec);
        const LambdaObjective f(r.gv, spec);
        const auto val = f.evaluate(lambda);
        trace.iterates.push_back({lambda, r.gv, val.E(), val.dE2});
        if (val.E() < best_E) {
            best_E = val.E();
            best = std::move(r);
            best.meta.lambda = lambda;
        }

        if (std::abs(val.dE2) < opt.tau * val.E2) {
            trace.stop_reason = IcbcStop::gradient_below_tau;
            break;
        }
        if (k >= opt.k_max) {
            trace.stop_reason = IcbcStop::max_iterations;
            break;
        }
        const auto next = minimize_lambda(f, lo, hi, opt.lambda_tol);
        last_search_at_boundary = next.at_boundary;
        const double lambda_next = next.best.lambda;
        const bool repeat = std::any_of(trace.iterates.begin(), trace.iterates.end(), [&](const IcbcIterate& it) {
            return std::abs(it.lambda - lambda_next) < opt.cycle_tol;
        });
        if (repeat) {
            trace.stop_reason = last_search_at_boundary ? IcbcStop::boundary : IcbcStop::cycle_detected;
            break;
        }
        lambda = lambda_next;
    }

    trace.lambda_star = *best.meta.lambda;
    best.meta.algorithm = "icbc";
    best.meta.b_family = spec.b.describe();
    best.meta.B_family = spec.B.describe();
    return {std::move(best), std::move(trace)};
}

} // namespace latcbc
