#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "binquant/errors.hpp"

namespace binquant {

/// Parameters of the perturbed averaging recursion
///
///   r_k = (1 - eta1/k) r_{k-1} + (eta2/k) sum_{i=2..k} h1^{i-1} r_{k-i} + c/k^2.
///
/// The O(1/k^2) term of the underlying lemma is realized as a deterministic
/// forcing c/k^2; the lemma's conclusions hold for any such realization.
struct RecursionSpec {
    double eta1 = 1.0;
    double eta2 = 0.0;
    double h1 = 0.5;
    double r0 = 1.0;
    std::int64_t horizon = 100000;
    double perturbation = 1.0;  ///< c in the forcing c/k^2
};

/// The combined rate constant eta = eta1 - eta2 h1 / (1 - h1). The
/// recursion converges to zero iff eta > 0, at rate 1/k^eta for eta < 1,
/// ln(k)/k at eta = 1 and 1/k for eta > 1.
inline double rate_eta(const RecursionSpec& spec) {
    return spec.eta1 - spec.eta2 * spec.h1 / (1.0 - spec.h1);
}

inline void validate(const RecursionSpec& spec) {
    if (!(spec.eta1 > 0.0)) throw DomainError("RecursionSpec: eta1 must be > 0");
    if (!(spec.eta2 >= 0.0)) throw DomainError("RecursionSpec: eta2 must be >= 0");
    if (!(spec.h1 > 0.0 && spec.h1 < 1.0)) {
        throw DomainError("RecursionSpec: h1 must lie in (0, 1)");
    }
    if (!(spec.r0 > 0.0)) throw DomainError("RecursionSpec: r0 must be > 0");
    if (spec.horizon < 2) throw DomainError("RecursionSpec: horizon must be >= 2");
    if (!(spec.perturbation >= 0.0)) {
        throw DomainError("RecursionSpec: perturbation must be >= 0");
    }
}

/// Simulates r_1..r_K; the returned vector has r_k at index k (index 0
/// holds r0). The convolution is carried incrementally through
/// T_k = r_{k-1} + h1 T_{k-1}, so the cost is O(K), not O(K^2).
///
/// For eta1 > 1 the factor (1 - eta1/k) is negative at small k, which is a
/// transient outside the lemma's asymptotic regime; the recursion therefore
/// starts at k0 = ceil(eta1) + 1 with the history held at r0. Any negative
/// overshoot is clamped at zero.
inline std::vector<double> iterate(const RecursionSpec& spec) {
    validate(spec);
    const std::int64_t k0 =
        spec.eta1 <= 1.0 ? 1 : static_cast<std::int64_t>(std::ceil(spec.eta1)) + 1;
    std::vector<double> r(static_cast<std::size_t>(spec.horizon) + 1, spec.r0);

    double conv_carry = 0.0;  // T_{k-1} = sum_{i>=1} h1^{i-1} r_{k-1-i}
    for (std::int64_t j = 1; j <= k0; ++j) {
        conv_carry = spec.r0 + spec.h1 * conv_carry;
    }
    double prev = spec.r0;
    for (std::int64_t k = k0 + 1; k <= spec.horizon; ++k) {
        const double kd = static_cast<double>(k);
        double next = (1.0 - spec.eta1 / kd) * prev +
                      (spec.eta2 / kd) * spec.h1 * conv_carry +
                      spec.perturbation / (kd * kd);
        if (next < 0.0) next = 0.0;
        conv_carry = prev + spec.h1 * conv_carry;
        prev = next;
        r[static_cast<std::size_t>(k)] = next;
    }
    return r;
}

/// Least-squares slope of log r_k against log k over k in [k_lo, k_hi].
/// The sequence is indexed like iterate()'s output (value for step k at
/// index k).
inline double fit_rate(const std::vector<double>& seq, std::int64_t k_lo,
                       std::int64_t k_hi) {
    if (k_lo < 1 || k_hi <= k_lo ||
        k_hi >= static_cast<std::int64_t>(seq.size())) {
        throw DomainError("fit_rate: invalid window");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::int64_t n = 0;
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
        const double v = seq[static_cast<std::size_t>(k)];
        if (!(v > 0.0)) {
            throw DomainError("fit_rate: non-positive value in window");
        }
        const double x = std::log(static_cast<double>(k));
        const double y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    const double nd = static_cast<double>(n);
    return (nd * sxy - sx * sy) / (nd * sxx - sx * sx);
}

/// Sliding averages (x_n + ... + x_{n+N-1}) / N for n = 1..len-N+1.
/// Input uses the x_1..x_len convention (x_n at index n-1).
inline std::vector<double> window_average(const std::vector<double>& seq, int N) {
    if (N < 1 || static_cast<std::size_t>(N) > seq.size()) {
        throw DomainError("window_average: invalid window");
    }
    std::vector<double> avg(seq.size() - static_cast<std::size_t>(N) + 1);
    double sum = 0.0;
    for (int i = 0; i < N; ++i) sum += seq[static_cast<std::size_t>(i)];
    avg[0] = sum / N;
    for (std::size_t n = 1; n < avg.size(); ++n) {
        sum += seq[n + static_cast<std::size_t>(N) - 1] - seq[n - 1];
        avg[n] = sum / N;
    }
    return avg;
}

namespace detail {

/// On-horizon boundedness of sup_n n^t x_n: the running sup must saturate,
/// i.e. the second half of the horizon may not raise it by more than the
/// tolerance factor.
inline bool power_sup_saturates(const std::vector<double>& seq, double t,
                                double tol) {
    const std::size_t len = seq.size();
    const std::size_t half = len / 2;
    double sup_first = 0.0, sup_full = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        const double v = std::pow(static_cast<double>(i + 1), t) * seq[i];
        if (i < half) sup_first = std::max(sup_first, v);
        sup_full = std::max(sup_full, v);
    }
    return sup_full <= (1.0 + tol) * sup_first;
}

}  // namespace detail

/// Numerical verdict for the averaging-rate equivalence: `backward` states
/// that x_n itself is O(1/n^t) on the horizon, `forward` that the N-window
/// average is. The lemma asserts the two are equivalent, so the verdicts
/// must agree; each one is judged by saturation of the running sup of
/// n^t * (value).
struct AveragingVerdict {
    bool forward = false;
    bool backward = false;
};

inline AveragingVerdict averaging_equivalence(const std::vector<double>& seq,
                                              int N, double t,
                                              double tol = 0.05) {
    if (N < 1) throw DomainError("averaging_equivalence: N must be >= 1");
    if (!(t > 0.0)) throw DomainError("averaging_equivalence: t must be > 0");
    if (seq.size() < static_cast<std::size_t>(2 * N) || seq.size() < 8) {
        throw DomainError("averaging_equivalence: sequence too short");
    }
    for (double v : seq) {
        if (!(v > 0.0)) {
            throw DomainError("averaging_equivalence: sequence must be positive");
        }
    }
    AveragingVerdict verdict;
    verdict.backward = detail::power_sup_saturates(seq, t, tol);
    verdict.forward = detail::power_sup_saturates(window_average(seq, N), t, tol);
    return verdict;
}

}  // namespace binquant
