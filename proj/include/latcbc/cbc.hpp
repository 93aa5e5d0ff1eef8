#pragma once

/**
 * @file cbc.hpp
 * @brief Classic component-by-component construction with given weights.
 *
 * z_1 = 1; each later z_i minimizes the squared worst-case error with the
 * earlier components fixed. Candidate scores come from the fast kernel for
 * prime n; the recorded G and e^2 are recomputed directly for the chosen z_i.
 */

#include "latcbc/kernel.hpp"
#include "latcbc/result.hpp"
#include "latcbc/wce.hpp"
#include "latcbc/weights.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace latcbc {

[[nodiscard]] inline ConstructionResult cbc_product(std::uint64_t n, std::size_t s, std::span<const double> gamma,
                                                    KernelPath path = KernelPath::automatic) {
    if (s == 0) throw std::invalid_argument("cbc_product: dimension must be positive");
    if (gamma.size() < s) throw std::invalid_argument("cbc_product: fewer weights than dimensions");
    for (std::size_t j = 0; j < s; ++j)
        if (!(gamma[j] > 0.0)) throw std::invalid_argument("cbc_product: weights must be positive");

    const ScoreEngine engine(n, path);
    auto st = ProductWceState::empty(n);
    ConstructionResult r;
    r.G_history.push_back(st.append(1, gamma[0]));
    r.e2_history.push_back(st.e2);
    for (std::size_t i = 2; i <= s; ++i) {
        const auto cand = engine.score(st.per_point);
        r.G_history.push_back(st.append(cand.argmin, gamma[i - 1]));
        r.e2_history.push_back(st.e2);
    }
    r.gv = st.gv;
    r.scheme = WeightScheme::product(std::vector<double>(gamma.begin(), gamma.begin() + static_cast<std::ptrdiff_t>(s)));
    r.meta.algorithm = "cbc";
    r.meta.n = n;
    r.meta.s = s;
    r.meta.fast_kernel = engine.fast();
    return r;
}

[[nodiscard]] inline ConstructionResult cbc_pod(std::uint64_t n, std::size_t s, const WeightScheme& w,
                                                KernelPath path = KernelPath::automatic) {
    if (s == 0) throw std::invalid_argument("cbc_pod: dimension must be positive");
    if (w.dimension() < s) throw std::invalid_argument("cbc_pod: scheme shorter than the dimension");
    w.validate();

    std::vector<double> ratios(s);
    for (std::size_t l = 1; l <= s; ++l) ratios[l - 1] = w.order_ratio(l);

    const ScoreEngine engine(n, path);
    auto st = PodWceState::empty(n);
    ConstructionResult r;
    r.G_history.push_back(st.append(1, w.product_part(1), ratios));
    r.e2_history.push_back(st.e2);
    for (std::size_t i = 2; i <= s; ++i) {
        const auto v = st.combined(ratios);
        const auto cand = engine.score(v);
        r.G_history.push_back(st.append(cand.argmin, w.product_part(i), ratios, v));
        r.e2_history.push_back(st.e2);
    }
    r.gv = st.gv;
    if (w.kind == WeightScheme::Kind::product) {
        r.scheme = w;
        r.scheme.gamma.resize(s);
    } else {
        std::vector<double> g(s);
        for (std::size_t j = 1; j <= s; ++j) g[j - 1] = w.product_part(j);
        r.scheme = WeightScheme::pod(std::move(g), ratios);
    }
    r.meta.algorithm = "cbc";
    r.meta.n = n;
    r.meta.s = s;
    r.meta.fast_kernel = engine.fast();
    return r;
}

} // namespace latcbc
