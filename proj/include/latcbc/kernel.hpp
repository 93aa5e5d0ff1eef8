#pragma once

/**
 * @file kernel.hpp
 * @brief Fast evaluation of the Bernoulli-kernel matrix-vector product.
 *
 * For prime n the matrix Omega(z, k) = B2({k z / n}), z in U_n, becomes
 * circulant once rows and columns are ordered by powers of a primitive root g:
 * with z = g^a and k = g^b, Omega(z, k) = c[(a + b) mod (n - 1)] where
 * c[t] = B2({g^t / n}). The product w(z) = sum_k Omega(z, k) v(k) is then a
 * length-(n-1) circular correlation plus the k = 0 column B2(0) v(0),
 * computed here by a zero-padded power-of-two real FFT.
 */

#include "latcbc/numerics.hpp"
#include "latcbc/wce.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace latcbc {

namespace detail {

// FFTW planning is not thread-safe; execution on distinct plans is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};
struct FftwPlanDestroy {
    void operator()(fftw_plan p) const noexcept {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(p);
    }
};
using FftwPlan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, FftwPlanDestroy>;
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> fftw_alloc(std::size_t count) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * count));
    if (!p) throw std::bad_alloc();
    return FftwBuffer<T>(p);
}

[[nodiscard]] inline std::size_t next_pow2(std::size_t x) {
    std::size_t p = 1;
    while (p < x) p <<= 1;
    return p;
}

} // namespace detail

inline constexpr double not_a_candidate = std::numeric_limits<double>::quiet_NaN();

/// Scores of every candidate z for the next coordinate, indexed by z in [0, n).
/// Entries for z not in U_n (including z = 0) are NaN.
struct CandidateScores {
    std::vector<double> scores;
    std::uint64_t argmin = 0;
};

/// Smallest z among the minimizers over U_n.
[[nodiscard]] inline std::uint64_t argmin_candidate(std::span<const double> scores) {
    std::uint64_t best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::uint64_t z = 1; z < scores.size(); ++z) {
        const double v = scores[z];
        if (std::isnan(v)) continue;
        if (v < best_val) {
            best_val = v;
            best = z;
        }
    }
    if (best == 0) throw numerical_error("argmin_candidate: no finite candidate score");
    return best;
}

/// Bernoulli-kernel column data for a prime modulus, with a reusable FFT workspace.
///
/// Not safe for concurrent matvec calls on one instance; use one per thread.
class KernelColumn {
public:
    explicit KernelColumn(std::uint64_t n) : modulus_(PrimeModulus::make(n)) {
        const std::uint64_t m = modulus_.phi;
        const std::uint64_t g = modulus_.generator;
        power_.resize(m);
        log_.assign(n, 0);
        perm_values_.resize(m);
        std::uint64_t x = 1;
        for (std::uint64_t a = 0; a < m; ++a) {
            power_[a] = x;
            log_[x] = a;
            perm_values_[a] = bernoulli2_residue(x, n);
            x = x * g % n;
        }

        len_ = detail::next_pow2(2 * m - 1);
        spec_len_ = len_ / 2 + 1;
        real_ = detail::fftw_alloc<double>(len_);
        spectrum_ = detail::fftw_alloc<fftw_complex>(spec_len_);
        kernel_spectrum_ = detail::fftw_alloc<fftw_complex>(spec_len_);
        {
            std::lock_guard lock(detail::fftw_planner_mutex());
            forward_.reset(fftw_plan_dft_r2c_1d(static_cast<int>(len_), real_.get(), spectrum_.get(), FFTW_ESTIMATE));
            backward_.reset(fftw_plan_dft_c2r_1d(static_cast<int>(len_), spectrum_.get(), real_.get(), FFTW_ESTIMATE));
        }
        if (!forward_ || !backward_) throw std::runtime_error("KernelColumn: FFT planning failed");

        // Periodic extension c[t mod m], t < 2m - 1.
        for (std::size_t t = 0; t < len_; ++t) real_[t] = t < 2 * m - 1 ? perm_values_[t % m] : 0.0;
        fftw_execute(forward_.get());
        for (std::size_t i = 0; i < spec_len_; ++i) {
            kernel_spectrum_[i][0] = spectrum_[i][0];
            kernel_spectrum_[i][1] = spectrum_[i][1];
        }
    }

    KernelColumn(const KernelColumn&) = delete;
    KernelColumn& operator=(const KernelColumn&) = delete;
    KernelColumn(KernelColumn&&) noexcept = default;
    KernelColumn& operator=(KernelColumn&&) noexcept = default;

    [[nodiscard]] const PrimeModulus& modulus() const noexcept { return modulus_; }
    [[nodiscard]] std::uint64_t n() const noexcept { return modulus_.n; }
    [[nodiscard]] static constexpr double omega0() noexcept { return 1.0 / 6.0; }
    [[nodiscard]] std::span<const double> perm_values() const noexcept { return perm_values_; }
    /// Discrete logarithm of z in U_n to base g.
    [[nodiscard]] std::uint64_t log_of(std::uint64_t z) const { return log_.at(z % n()); }
    [[nodiscard]] std::uint64_t power(std::uint64_t a) const { return power_[a % modulus_.phi]; }
    [[nodiscard]] std::size_t fft_length() const noexcept { return len_; }

    /// Omega(z, k) through the permuted column.
    [[nodiscard]] double value(std::uint64_t z, std::uint64_t k) const {
        if (k % n() == 0) return omega0();
        return perm_values_[(log_of(z) + log_of(k)) % modulus_.phi];
    }

    /// w(z) = sum_k B2({k z/n}) v(k) for all z in U_n; entry 0 is NaN.
    [[nodiscard]] std::vector<double> matvec(std::span<const double> v) const {
        const std::uint64_t nn = n();
        const std::uint64_t m = modulus_.phi;
        if (v.size() != nn)
            throw std::invalid_argument("matvec: vector length " + std::to_string(v.size()) + " != n = " +
                                        std::to_string(nn));

        // Centre the permuted vector; the mean couples to sum_{k>=1} B2(k/n) = 1/(6n) - 1/6.
        std::vector<double> vb(m);
        for (std::uint64_t b = 0; b < m; ++b) vb[b] = v[power_[b]];
        const double mu = pairwise_sum(vb) / static_cast<double>(m);
        const double folded = omega0() * v[0] + mu * (1.0 / (6.0 * static_cast<double>(nn)) - 1.0 / 6.0);

        for (std::size_t t = 0; t < len_; ++t) real_[t] = t < m ? vb[m - 1 - t] - mu : 0.0;
        fftw_execute(forward_.get());
        for (std::size_t i = 0; i < spec_len_; ++i) {
            const std::complex<double> a(spectrum_[i][0], spectrum_[i][1]);
            const std::complex<double> b(kernel_spectrum_[i][0], kernel_spectrum_[i][1]);
            const auto c = a * b;
            spectrum_[i][0] = c.real();
            spectrum_[i][1] = c.imag();
        }
        fftw_execute(backward_.get());

        const double scale = 1.0 / static_cast<double>(len_);
        std::vector<double> w(nn, not_a_candidate);
        for (std::uint64_t a = 0; a < m; ++a) w[power_[a]] = real_[a + m - 1] * scale + folded;
        // B2 is symmetric about 1/2, so w(z) = w(n - z) exactly.
        for (std::uint64_t z = nn / 2 + 1; z < nn; ++z) w[z] = w[nn - z];
        return w;
    }

private:
    PrimeModulus modulus_;
    std::vector<std::uint64_t> power_;
    std::vector<std::uint64_t> log_;
    std::vector<double> perm_values_;

    std::size_t len_ = 0;
    std::size_t spec_len_ = 0;
    detail::FftwBuffer<double> real_;
    detail::FftwBuffer<fftw_complex> spectrum_;
    detail::FftwBuffer<fftw_complex> kernel_spectrum_;
    detail::FftwPlan forward_;
    detail::FftwPlan backward_;
};

/// Fast product; the modulus of `col` is prime by construction.
[[nodiscard]] inline std::vector<double> kernel_matvec(const KernelColumn& col, std::span<const double> v) {
    return col.matvec(v);
}

/// O(n^2) reference product over z in U_n, any n >= 2; non-units are NaN.
[[nodiscard]] inline std::vector<double> kernel_matvec_naive(std::uint64_t n, std::span<const double> v) {
    if (v.size() != n) throw std::invalid_argument("kernel_matvec_naive: vector length must equal n");
    std::vector<double> table(n);
    for (std::uint64_t r = 0; r < n; ++r) table[r] = bernoulli2_residue(r, n);
    std::vector<double> w(n, not_a_candidate);
    std::vector<double> terms(n);
    for (std::uint64_t z = 1; z <= n / 2; ++z) {
        if (std::gcd(z, n) != 1) continue;
        std::uint64_t r = 0;
        for (std::uint64_t k = 0; k < n; ++k) {
            terms[k] = table[r] * v[k];
            r += z;
            if (r >= n) r -= n;
        }
        w[z] = pairwise_sum(terms);
        w[n - z] = w[z];
    }
    return w;
}

/// How candidate scores are evaluated.
enum class KernelPath { automatic, fast, naive };

/// Per-modulus scoring engine: fast circulant path for prime n, naive scan otherwise.
class ScoreEngine {
public:
    ScoreEngine(std::uint64_t n, KernelPath path) : n_(n) {
        if (n < 2) throw std::invalid_argument("modulus must be >= 2");
        const bool prime = is_prime(n) && n >= 3;
        if (path == KernelPath::fast && !prime)
            throw std::invalid_argument("fast kernel requires a prime modulus; n = " + std::to_string(n) +
                                        " (request the naive path explicitly)");
        if (path != KernelPath::naive && prime) column_ = std::make_unique<KernelColumn>(n);
    }

    [[nodiscard]] std::uint64_t n() const noexcept { return n_; }
    [[nodiscard]] bool fast() const noexcept { return column_ != nullptr; }

    /// Scores G(z) = (1/n) sum_k B2({kz/n}) v(k), and the selected candidate.
    [[nodiscard]] CandidateScores score(std::span<const double> v) const {
        CandidateScores out;
        out.scores = column_ ? column_->matvec(v) : kernel_matvec_naive(n_, v);
        const double inv_n = 1.0 / static_cast<double>(n_);
        for (auto& x : out.scores) x *= inv_n;
        refine_near_minimum(out, v);
        return out;
    }

    /// As above for an extended-precision v; the matvec sees it rounded, the
    /// re-scoring does not.
    [[nodiscard]] CandidateScores score(std::span<const state_real> v) const {
        const std::vector<double> vd(v.begin(), v.end());
        CandidateScores out;
        out.scores = column_ ? column_->matvec(vd) : kernel_matvec_naive(n_, vd);
        const double inv_n = 1.0 / static_cast<double>(n_);
        for (auto& x : out.scores) x *= inv_n;
        refine_near_minimum(out, v);
        return out;
    }

    /// Relative width of the window re-scored exactly around the minimum.
    static constexpr double refine_window = 1e-9;
    /// Re-scored candidates closer than this times (1/n) sum |B2 v| count as
    /// tied. It covers the rounding already present in v after a few thousand
    /// coordinates.
    static constexpr double tie_tolerance = 1e-13;

private:
    // Near-ties are decided by the compensated direct sum, so both paths
    // select the same z whenever matvec rounding exceeds the gap. Exact ties
    // (z and its inverse tie in dimension 2, for instance) go to the smallest z.
    template <class T>
    void refine_near_minimum(CandidateScores& out, std::span<const T> v) const {
        const std::uint64_t first = argmin_candidate(out.scores);
        double vmax = 0.0;
        for (T x : v) vmax = std::max(vmax, std::abs(static_cast<double>(x)));
        const double cut = out.scores[first] + refine_window * std::abs(out.scores[first]) + 1e-13 * vmax;
        std::vector<std::uint64_t> window;
        double best_val = std::numeric_limits<double>::infinity();
        std::uint64_t best = first;
        for (std::uint64_t z = 1; z < out.scores.size(); ++z) {
            if (std::isnan(out.scores[z]) || out.scores[z] > cut) continue;
            out.scores[z] = kernel_mean(n_, z, v);
            window.push_back(z);
            if (out.scores[z] < best_val) {
                best_val = out.scores[z];
                best = z;
            }
        }
        const double tie = best_val + tie_tolerance * kernel_mean_magnitude(n_, best, v);
        for (auto z : window)
            if (out.scores[z] <= tie) {
                out.argmin = z;
                return;
            }
        out.argmin = best;
    }

    std::uint64_t n_;
    std::unique_ptr<KernelColumn> column_;
};

} // namespace latcbc
