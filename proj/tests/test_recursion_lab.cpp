#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "binquant/recursion_lab.hpp"
#include "binquant/rng.hpp"

using namespace binquant;
using Catch::Approx;

namespace {

/// Brute-force boundedness oracle: recompute every window sum directly and
/// apply the same saturation rule as the library.
bool brute_bounded(const std::vector<double>& seq, double t, double tol) {
    const std::size_t half = seq.size() / 2;
    double sup_first = 0.0, sup_full = 0.0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const double v = std::pow(double(i + 1), t) * seq[i];
        if (i < half) sup_first = std::max(sup_first, v);
        sup_full = std::max(sup_full, v);
    }
    return sup_full <= (1.0 + tol) * sup_first;
}

std::vector<double> brute_average(const std::vector<double>& seq, int N) {
    std::vector<double> avg;
    for (std::size_t n = 0; n + static_cast<std::size_t>(N) <= seq.size(); ++n) {
        double s = 0.0;
        for (int i = 0; i < N; ++i) s += seq[n + static_cast<std::size_t>(i)];
        avg.push_back(s / N);
    }
    return avg;
}

}  // namespace

TEST_CASE("iterate matches the closed-form product when unforced", "[recursion]") {
    // eta2 = 0, c = 0, eta1 = 2: r_k = r0 * prod_{l=k0+1..k} (1 - 2/l),
    // which telescopes to O(1/k^2).
    RecursionSpec spec{2.0, 0.0, 0.5, 1.0, 1000, 0.0};
    const auto seq = iterate(spec);
    double product = 1.0;
    for (std::int64_t k = 4; k <= 1000; ++k) {  // k0 = ceil(2) + 1 = 3
        product *= 1.0 - 2.0 / static_cast<double>(k);
        REQUIRE(seq[static_cast<std::size_t>(k)] == product);
    }
    double sup_k_rk = 0.0;
    for (std::int64_t k = 1; k <= 1000; ++k) {
        sup_k_rk = std::max(sup_k_rk, k * seq[static_cast<std::size_t>(k)]);
    }
    CHECK(sup_k_rk <= 3.0);  // k * r_k = 6/(k-1) for k > 3
}

TEST_CASE("forced recursion with large eta decays like 1/k", "[recursion]") {
    RecursionSpec spec{2.0, 0.0, 0.5, 1.0, 100000, 1.0};
    const auto seq = iterate(spec);
    CHECK(fit_rate(seq, 10000, 100000) == Approx(-1.0).margin(0.05));
}

TEST_CASE("non-positive eta does not converge", "[recursion]") {
    for (const auto& [eta1, eta2, h1] :
         std::vector<std::tuple<double, double, double>>{
             {0.5, 1.0, 0.5}, {0.2, 0.5, 0.5}, {1.0, 2.0, 0.6}}) {
        RecursionSpec spec{eta1, eta2, h1, 1.0, 100000, 1.0};
        REQUIRE(rate_eta(spec) <= 0.0);
        const auto seq = iterate(spec);
        REQUIRE(fit_rate(seq, 10000, 100000) > -0.05);
    }
}

TEST_CASE("rate fits across the lemma's three regimes", "[recursion]") {
    const std::vector<std::pair<double, double>> mixes = {
        {0.0, 0.5}, {0.5, 0.3}, {1.0, 0.5}, {0.3, 0.7}};
    for (double eta : {0.3, 0.5, 0.8, 1.5, 3.0}) {
        for (const auto& [eta2, h1] : mixes) {
            const double eta1 = eta + eta2 * h1 / (1.0 - h1);
            RecursionSpec spec{eta1, eta2, h1, 1.0, 100000, 1.0};
            REQUIRE(rate_eta(spec) == Approx(eta).margin(1e-12));
            const double fitted = fit_rate(iterate(spec), 10000, 100000);
            const double expected = eta < 1.0 ? -eta : -1.0;
            INFO("eta=" << eta << " eta2=" << eta2 << " h1=" << h1
                        << " fitted=" << fitted);
            REQUIRE(fitted == Approx(expected).margin(0.1));
        }
    }
}

TEST_CASE("fitted exponent crosses zero with eta", "[recursion]") {
    // eta2 h1 / (1 - h1) = 1 here, so eta = eta1 - 1.
    std::vector<double> fits;
    for (double eta1 : {0.6, 0.8, 1.0, 1.2, 1.4}) {
        RecursionSpec spec{eta1, 1.0, 0.5, 1.0, 30000, 1.0};
        fits.push_back(fit_rate(iterate(spec), 3000, 30000));
    }
    for (std::size_t i = 1; i < fits.size(); ++i) {
        REQUIRE(fits[i] < fits[i - 1]);
    }
    CHECK(fits.front() > 0.2);   // eta = -0.4: growth
    CHECK(fits.back() < -0.2);   // eta = +0.4: decay
}

TEST_CASE("transformed residual decays quadratically", "[recursion]") {
    // z_k = r_k - (1 - eta/k) r_{k-1} collapses the convolution term; the
    // characteristic-equation argument makes it O(1/k^2).
    for (const auto& [eta1, eta2, h1] :
         std::vector<std::tuple<double, double, double>>{
             {1.2, 0.5, 0.4}, {2.0, 1.0, 0.5}, {0.8, 0.3, 0.6}}) {
        RecursionSpec spec{eta1, eta2, h1, 1.0, 100000, 1.0};
        const double eta = rate_eta(spec);
        const auto seq = iterate(spec);
        auto sup_k2z = [&](std::int64_t lo, std::int64_t hi) {
            double sup = 0.0;
            for (std::int64_t k = lo; k <= hi; ++k) {
                const double z = seq[static_cast<std::size_t>(k)] -
                                 (1.0 - eta / k) * seq[static_cast<std::size_t>(k - 1)];
                sup = std::max(sup, k * static_cast<double>(k) * std::abs(z));
            }
            return sup;
        };
        const double early = sup_k2z(10000, 50000);
        const double late = sup_k2z(50001, 100000);
        REQUIRE(late <= 1.5 * early);
        REQUIRE(late <= 3.0 * spec.perturbation);
    }
}

TEST_CASE("rate fitting basics", "[recursion]") {
    std::vector<double> inv_k(1001, 1.0);
    for (std::size_t k = 1; k < inv_k.size(); ++k) inv_k[k] = 1.0 / double(k);
    CHECK(fit_rate(inv_k, 10, 1000) == Approx(-1.0).margin(1e-6));

    std::vector<double> with_zero(100, 1.0);
    with_zero[50] = 0.0;
    CHECK_THROWS_AS(fit_rate(with_zero, 10, 99), DomainError);
    CHECK_THROWS_AS(fit_rate(inv_k, 0, 1000), DomainError);
    CHECK_THROWS_AS(fit_rate(inv_k, 100, 5000), DomainError);
    CHECK_THROWS_AS(fit_rate(inv_k, 700, 700), DomainError);
}

TEST_CASE("spec validation", "[recursion]") {
    CHECK_THROWS_AS(iterate(RecursionSpec{0.0, 0.0, 0.5, 1.0, 100, 1.0}), DomainError);
    CHECK_THROWS_AS(iterate(RecursionSpec{1.0, -0.1, 0.5, 1.0, 100, 1.0}), DomainError);
    CHECK_THROWS_AS(iterate(RecursionSpec{1.0, 0.0, 1.0, 1.0, 100, 1.0}), DomainError);
    CHECK_THROWS_AS(iterate(RecursionSpec{1.0, 0.0, 0.5, 0.0, 100, 1.0}), DomainError);
    CHECK_THROWS_AS(iterate(RecursionSpec{1.0, 0.0, 0.5, 1.0, 100, -1.0}), DomainError);
}

TEST_CASE("window averages", "[recursion]") {
    const std::vector<double> seq{1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(window_average(seq, 1) == seq);
    CHECK(window_average(seq, 3) == std::vector<double>{2.0, 3.0, 4.0});
    CHECK_THROWS_AS(window_average(seq, 0), DomainError);
    CHECK_THROWS_AS(window_average(seq, 6), DomainError);
}

TEST_CASE("averaging equivalence verdicts", "[recursion]") {
    const std::size_t len = 20000;

    SECTION("1/n is O(1/n) and so is its average") {
        std::vector<double> seq(len);
        for (std::size_t i = 0; i < len; ++i) seq[i] = 1.0 / double(i + 1);
        const auto verdict = averaging_equivalence(seq, 3, 1.0);
        CHECK(verdict.forward);
        CHECK(verdict.backward);
    }

    SECTION("a constant is not O(1/n)") {
        const std::vector<double> seq(len, 1.0);
        const auto verdict = averaging_equivalence(seq, 3, 1.0);
        CHECK_FALSE(verdict.forward);
        CHECK_FALSE(verdict.backward);
    }

    SECTION("errors") {
        std::vector<double> seq(100, 1.0);
        seq[10] = 0.0;
        CHECK_THROWS_AS(averaging_equivalence(seq, 3, 1.0), DomainError);
        CHECK_THROWS_AS(averaging_equivalence(std::vector<double>(100, 1.0), 0, 1.0),
                        DomainError);
        CHECK_THROWS_AS(averaging_equivalence(std::vector<double>(4, 1.0), 3, 1.0),
                        DomainError);
    }
}

TEST_CASE("verdicts agree with brute force on constructed sequences", "[recursion]") {
    const std::size_t len = 20000;
    RngStream rng(81u);
    int checked = 0;
    for (int case_index = 0; case_index < 50; ++case_index) {
        std::vector<double> seq(len);
        const int family = case_index % 5;
        const double t = case_index % 2 == 0 ? 1.0 : 0.5;
        const double power = rng.uniform(0.3, 1.5);
        for (std::size_t i = 0; i < len; ++i) {
            const double n = double(i + 1);
            switch (family) {
                case 0: seq[i] = std::pow(n, -power); break;
                case 1: seq[i] = 0.2 + 0.1 * std::sin(0.01 * n); break;
                case 2: {  // decay with spikes at powers of two
                    seq[i] = 1.0 / n;
                    if ((i & (i + 1)) == 0) seq[i] += 1.0 / n;
                    break;
                }
                case 3: seq[i] = std::log(n + 1.0) / n; break;
                default: seq[i] = (1.0 + rng.uniform01()) / std::pow(n, power);
            }
        }
        const int N = 1 + static_cast<int>(rng.next_u64() % 6);
        const auto verdict = averaging_equivalence(seq, N, t);
        REQUIRE(verdict.backward == brute_bounded(seq, t, 0.05));
        REQUIRE(verdict.forward == brute_bounded(brute_average(seq, N), t, 0.05));
        // The equivalence itself: both sides must agree.
        REQUIRE(verdict.forward == verdict.backward);
        ++checked;
    }
    REQUIRE(checked == 50);
}

TEST_CASE("two-sided sup inequality behind the equivalence", "[recursion]") {
    // For positive sequences, sup n^t avg <= sup n^t x and
    // sup n^t x <= N sup n^t avg; this is the quantitative content.
    RngStream rng(82u);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t len = 500;
        const int N = 1 + static_cast<int>(rng.next_u64() % 5);
        const double t = rng.uniform(0.2, 2.0);
        std::vector<double> seq(len);
        for (std::size_t i = 0; i < len; ++i) {
            seq[i] = rng.uniform(0.01, 1.0) / std::pow(double(i + 1), t);
        }
        const auto avg = window_average(seq, N);
        double sup_x = 0.0, sup_x_covered = 0.0, sup_a = 0.0;
        for (std::size_t i = 0; i < seq.size(); ++i) {
            const double v = std::pow(double(i + 1), t) * seq[i];
            sup_x = std::max(sup_x, v);
            if (i < avg.size()) sup_x_covered = std::max(sup_x_covered, v);
        }
        for (std::size_t i = 0; i < avg.size(); ++i) {
            sup_a = std::max(sup_a, std::pow(double(i + 1), t) * avg[i]);
        }
        REQUIRE(sup_a <= sup_x * (1.0 + 1e-12));
        REQUIRE(sup_x_covered <= N * sup_a * (1.0 + 1e-12));
    }
}
