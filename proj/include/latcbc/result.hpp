#pragma once

#include "latcbc/wce.hpp"
#include "latcbc/weights.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace latcbc {

/// Inputs echoed alongside a construction.
struct RunMeta {
    std::string algorithm;
    std::uint64_t n = 0;
    std::size_t s = 0;
    std::string b_family;
    std::string B_family;
    std::string Gamma_source;
    std::optional<double> gamma1;
    std::optional<double> lambda;
    bool fast_kernel = false;
};

/// Per-dimension record of a construction. Index i holds dimension i + 1.
///
/// E_history[i]^2 = e2_history[i] * M_history[i]; M and E are empty until a
/// norm bound has been attached.
struct ConstructionResult {
    GeneratingVector gv;
    WeightScheme scheme;
    std::vector<double> G_history;
    std::vector<double> e2_history;
    std::vector<double> M_history;
    std::vector<double> E_history;
    RunMeta meta;

    [[nodiscard]] double e2() const { return e2_history.back(); }
    [[nodiscard]] double wce() const { return std::sqrt(e2_history.back()); }
    [[nodiscard]] double E() const { return E_history.back(); }
};

/// Fill M_history and E_history from derivative-bound data.
inline void attach_norm_bound(ConstructionResult& r, const NormBoundSpec& spec) {
    const std::size_t s = r.gv.dimension();
    r.M_history.assign(s, 0.0);
    r.E_history.assign(s, 0.0);
    r.meta.b_family = spec.b.describe();
    r.meta.B_family = spec.B.describe();

    if (r.scheme.kind == WeightScheme::Kind::product && spec.product_form()) {
        double M = 1.0;
        for (std::size_t j = 1; j <= s; ++j) {
            const double bj = spec.b(j);
            M *= 1.0 + bj * bj / r.scheme.gamma[j - 1];
            r.M_history[j - 1] = M;
        }
    } else {
        std::vector<double> ratios(s + 1, 1.0);
        for (std::size_t l = 1; l <= s; ++l) ratios[l - 1] = r.scheme.order_ratio(l);
        const auto Gamma = OrderSequence::from_ratios(std::move(ratios));
        auto st = pod_norm_initial(spec, Gamma);
        for (std::size_t j = 1; j <= s; ++j) {
            st = norm_bound_pod_step(st, spec, Gamma, r.scheme.product_part(j));
            r.M_history[j - 1] = st.M;
        }
    }
    for (std::size_t i = 0; i < s; ++i) r.E_history[i] = std::sqrt(r.e2_history[i] * r.M_history[i]);
}

} // namespace latcbc
