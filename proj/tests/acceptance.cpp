// Acceptance suite: end-to-end checks of the two bundled studies, the rate
// lab and the property suites, one pass/fail line per criterion. Returns
// the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "binquant/binquant.hpp"
#include "test_util.hpp"

#ifndef BINQUANT_CONFIG_DIR
#define BINQUANT_CONFIG_DIR "configs"
#endif

namespace {

using namespace binquant;
using Clock = std::chrono::steady_clock;

int failures = 0;

struct Criterion {
    explicit Criterion(int index, std::string name)
        : index(index), name(std::move(name)), start(Clock::now()) {}

    void check(bool ok, const std::string& detail) {
        all_ok = all_ok && ok;
        if (!details.empty()) details += "; ";
        details += detail;
        if (!ok) details += " [FAILED]";
    }

    void finish() {
        const double elapsed =
            std::chrono::duration<double>(Clock::now() - start).count();
        std::printf("criterion %d  %-34s  %s  (%.1fs)\n", index, name.c_str(),
                    all_ok ? "PASS" : "FAIL", elapsed);
        std::printf("             %s\n", details.c_str());
        if (!all_ok) ++failures;
    }

    double seconds() const {
        return std::chrono::duration<double>(Clock::now() - start).count();
    }

    int index;
    std::string name;
    Clock::time_point start;
    bool all_ok = true;
    std::string details;
};

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

ExperimentConfig load_study(const char* name) {
    return load_config(std::string(BINQUANT_CONFIG_DIR) + "/" + name);
}

double mean_at(const MonteCarloAggregate& agg, std::int64_t k) {
    for (std::size_t i = 0; i < agg.ks.size(); ++i) {
        if (agg.ks[i] == k) return agg.mean_e_sq[i];
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// --- criterion 1: study-1 analysis inequalities --------------------------

void criterion1() {
    Criterion c(1, "study-1 condition replication");
    const auto report = analyze(load_study("paper_5_1.json"));
    c.check(report.delta > 0.47, "delta=" + fmt("%.4f", report.delta) + " >0.47");
    c.check(report.M2() * report.M2() < 2.26,
            "M2^2=" + fmt("%.4f", report.M2() * report.M2()) + " <2.26");
    c.check(report.f_M / report.f_m < 2.0,
            "f_M/f_m=" + fmt("%.4f", report.f_M / report.f_m) + " <2");
    c.check(report.cond7 > 0.0, "condition7=" + fmt("%+.4f", report.cond7) + " >0");
    c.check(c.seconds() < 10.0, fmt("%.1f", c.seconds()) + "s <10s");
    c.finish();
}

// --- criteria 2-4: study-1 Monte Carlo ------------------------------------

void criteria2to4() {
    auto config = load_study("paper_5_1.json");

    Criterion c2(2, "study-1 convergence");
    const auto base = run_monte_carlo(config);
    const double e3 = mean_at(base, 1000);
    const double e5 = mean_at(base, 100000);
    c2.check(e5 <= e3 / 50.0, "mse(1e5)/mse(1e3)=1/" + fmt("%.1f", e3 / e5) +
                                  " need <=1/50");
    const auto& final_theta = base.mean_theta.back();
    const double da = std::abs(final_theta[0] - (-0.02));
    const double db = std::abs(final_theta[1] - 1.0);
    c2.check(da < 0.05 && db < 0.05,
             "|mean theta - truth| = (" + fmt("%.4f", da) + ", " + fmt("%.4f", db) +
                 ") <0.05");
    c2.check(c2.seconds() < 120.0, fmt("%.1f", c2.seconds()) + "s <120s");
    c2.finish();

    Criterion c3(3, "O(1/k) rate and initializer effect");
    const double base_slope = fit_mse_slope(base.ks, base.mean_e_sq, 1e3, 1e5);
    c3.check(base_slope >= -1.3 && base_slope <= -0.7,
             "slope=" + fmt("%+.3f", base_slope) + " in [-1.3,-0.7]");
    double spread = 0.0;
    for (const auto& theta0 :
         {std::vector<double>{0.0, 0.7}, std::vector<double>{-0.02, 1.05}}) {
        auto alt = config;
        alt.theta0 = theta0;
        const auto agg = run_monte_carlo(alt);
        const double slope = fit_mse_slope(agg.ks, agg.mean_e_sq, 1e3, 1e5);
        spread = std::max(spread, std::abs(slope - base_slope));
    }
    c3.check(spread < 0.15, "slope spread over initializers=" + fmt("%.3f", spread) +
                                " <0.15");
    c3.finish();

    Criterion c4(4, "noise-variance sensitivity");
    double e5_small = 0.0, e5_large = 0.0;
    {
        auto small = config;
        small.noise = NoiseModel::gaussian(std::sqrt(0.01));
        e5_small = mean_at(run_monte_carlo(small), 100000);
        auto large = config;
        large.noise = NoiseModel::gaussian(std::sqrt(100.0));
        e5_large = mean_at(run_monte_carlo(large), 100000);
    }
    c4.check(e5 < e5_small && e5 < e5_large,
             "mse(1e5): sigma2=0.01 -> " + fmt("%.2e", e5_small) +
                 ", 2 -> " + fmt("%.2e", e5) + ", 100 -> " + fmt("%.2e", e5_large) +
                 "; middle smallest");
    c4.finish();
}

// --- criterion 5: study-2, sufficiency is not necessity -------------------

void criterion5() {
    Criterion c(5, "study-2 converges uncertified");
    const auto config = load_study("paper_5_2.json");
    const auto report = analyze(config);
    bool violated = false;
    try {
        min_step_size(report);
    } catch (const ConditionViolated&) {
        violated = true;
    }
    c.check(report.cond7 <= 0.0 && violated,
            "condition7=" + fmt("%+.1f", report.cond7) + " <=0, no certified gamma");
    const auto agg = run_monte_carlo(config);
    const double e5 = mean_at(agg, 100000);
    c.check(e5 < 0.01, "mse(1e5)=" + fmt("%.2e", e5) + " <0.01");
    c.finish();
}

// --- criterion 6: rate table of the perturbed recursion --------------------

void criterion6() {
    Criterion c(6, "perturbed-recursion rate table");
    const std::vector<std::pair<double, double>> mixes = {
        {0.0, 0.5}, {0.5, 0.3}, {1.0, 0.5}, {0.3, 0.7}};
    double worst = 0.0;
    bool ok = true;
    for (double eta : {0.3, 0.5, 0.8, 1.5, 3.0}) {
        for (const auto& [eta2, h1] : mixes) {
            RecursionSpec spec{eta + eta2 * h1 / (1.0 - h1), eta2, h1, 1.0, 100000,
                               1.0};
            const double fitted = fit_rate(iterate(spec), 10000, 100000);
            const double expected = eta < 1.0 ? -eta : -1.0;
            worst = std::max(worst, std::abs(fitted - expected));
            ok = ok && std::abs(fitted - expected) <= 0.1;
        }
    }
    c.check(ok, "max |fit - expected| = " + fmt("%.3f", worst) + " <=0.1 over 20 specs");

    bool no_decay_ok = true;
    for (const auto& [eta1, eta2, h1] :
         std::vector<std::tuple<double, double, double>>{{0.5, 1.0, 0.5},
                                                         {0.2, 0.5, 0.5},
                                                         {1.0, 2.0, 0.6}}) {
        RecursionSpec spec{eta1, eta2, h1, 1.0, 100000, 1.0};
        no_decay_ok = no_decay_ok && fit_rate(iterate(spec), 10000, 100000) > -0.05;
    }
    c.check(no_decay_ok, "non-positive eta keeps fitted exponent > -0.05");
    c.finish();
}

// --- criterion 7: property suites ------------------------------------------

void criterion7() {
    Criterion c(7, "property suites");
    RngStream rng(20240u);

    {  // projection: non-expansive, idempotent, variational certificate
        const ConvexSet sets[] = {ConvexSet::box({-0.03, 0.0}, {0.03, 1.1}),
                                  ConvexSet::ball({0.5, -1.0, 0.0}, 2.0)};
        bool ok = true;
        for (const auto& set : sets) {
            for (int i = 0; i < 10000 && ok; ++i) {
                std::vector<double> x1(set.dim()), x2(set.dim());
                for (auto& v : x1) v = rng.uniform(-5.0, 5.0);
                for (auto& v : x2) v = rng.uniform(-5.0, 5.0);
                const auto p1 = project(x1, set);
                const auto p2 = project(x2, set);
                double dp = 0.0, dx = 0.0, inner = 0.0;
                for (std::size_t k = 0; k < p1.size(); ++k) {
                    dp += (p1[k] - p2[k]) * (p1[k] - p2[k]);
                    dx += (x1[k] - x2[k]) * (x1[k] - x2[k]);
                    inner += (x1[k] - p1[k]) * (p2[k] - p1[k]);
                }
                ok = ok && std::sqrt(dp) <= std::sqrt(dx) + 1e-12;
                ok = ok && project(p1, set) == p1;
                ok = ok && inner <= 1e-9;
            }
        }
        c.check(ok, "projection non-expansive/idempotent/variational on 1e4 pairs");
    }

    {  // matrix power envelope on random stable systems
        bool ok = true;
        for (int trial = 0; trial < 100 && ok; ++trial) {
            const int p = 1 + static_cast<int>(rng.next_u64() % 4);
            const auto params = test_util::random_stable_params(rng, p, 1, 0.9);
            const auto cm = companion_matrix(params);
            const auto env = lemma1_constants(cm);
            Eigen::MatrixXd power = Eigen::MatrixXd::Identity(p, p);
            for (int k = 0; k <= 100 && ok; ++k) {
                ok = power.jacobiSvd().singularValues()(0) <=
                     env.M * std::pow(env.h1, k) * (1.0 + 1e-12);
                power = cm.entries * power;
            }
        }
        c.check(ok, "||A^k|| <= M h1^k for k<=100 on 100 random stable systems");
    }

    {  // companion eigenvalues against an independent root finder
        bool ok = true;
        for (int trial = 0; trial < 200 && ok; ++trial) {
            const int p = 1 + static_cast<int>(rng.next_u64() % 4);
            const auto params = test_util::random_stable_params(rng, p, 1, 0.95);
            std::vector<double> poly{1.0};
            for (double ai : params.a) poly.push_back(-ai);
            const auto roots = test_util::polynomial_roots(poly);
            for (const auto& lambda : eigenvalues(companion_matrix(params))) {
                double best = 1e9;
                for (const auto& root : roots) {
                    best = std::min(best, std::abs(lambda - 1.0 / root));
                }
                ok = ok && best < 1e-8;
            }
        }
        c.check(ok, "companion eigenvalues match reciprocal roots to 1e-8");
    }

    const auto config = load_study("paper_5_1.json");
    {  // the estimate never leaves the set, over a full-horizon run
        Estimator estimator(config.theta0, config.set, config.gamma, config.noise,
                            config.sensor, 1, 1, config.timing);
        auto plant = make_plant_state(config.true_params);
        RngStream stream(config.master_seed, 0u);
        bool ok = true;
        for (std::int64_t k = 1; k <= config.horizon && ok; ++k) {
            const double u = generate_input(config.input, k, stream);
            const auto out = plant_step(plant, config.true_params, u,
                                        config.noise.sample(stream),
                                        config.sensor.threshold);
            estimator.update(u, out.s);
            ok = contains(estimator.theta_hat(), config.set);
        }
        c.check(ok, "estimate stays in the set across a full study-1 run");
    }

    {  // FIR degeneration: p = 0 equals a plain FIR recursive projection
        const std::vector<double> lo{-2.0, -2.0}, hi{2.0, 2.0};
        const auto noise = NoiseModel::gaussian(1.0);
        Estimator est({0.5, -0.5}, ConvexSet::box(lo, hi), 2.0, noise,
                      BinarySensor{0.1}, 0, 2);
        std::vector<double> ref{0.5, -0.5};
        double prev_u = 0.0;
        bool ok = true;
        for (std::int64_t k = 1; k <= 10000 && ok; ++k) {
            const double u = rng.uniform(-1.0, 1.0);
            const bool s = rng.uniform01() < 0.5;
            est.update(u, s);
            const double prediction = u * ref[0] + prev_u * ref[1];
            const double innovation = noise.cdf(0.1 - prediction) - (s ? 1.0 : 0.0);
            const double step = 2.0 / static_cast<double>(k);
            ref[0] = std::min(std::max(ref[0] + step * u * innovation, lo[0]), hi[0]);
            ref[1] =
                std::min(std::max(ref[1] + step * prev_u * innovation, lo[1]), hi[1]);
            prev_u = u;
            ok = est.theta_hat() == ref;
        }
        c.check(ok, "p=0 estimator equals the FIR reference bit for bit");
    }

    {  // binary sensor frequency against the noise cdf
        const double prediction = 1.0;
        const double expected = config.noise.cdf(config.sensor.threshold - prediction);
        const int n = 100000;
        int ones = 0;
        for (int i = 0; i < n; ++i) {
            ones += quantize(prediction + config.noise.sample(rng), config.sensor);
        }
        const double freq = static_cast<double>(ones) / n;
        const double tol = 3.0 * std::sqrt(expected * (1.0 - expected) / n);
        c.check(std::abs(freq - expected) <= tol,
                "sensor frequency " + fmt("%.4f", freq) + " matches F within " +
                    fmt("%.4f", tol));
    }
    c.finish();
}

// --- criterion 8: averaging equivalence vs brute force ---------------------

void criterion8() {
    Criterion c(8, "window-averaging equivalence");
    RngStream rng(20241u);
    const std::size_t len = 20000;
    auto brute_bounded = [](const std::vector<double>& seq, double t) {
        const std::size_t half = seq.size() / 2;
        double first = 0.0, full = 0.0;
        for (std::size_t i = 0; i < seq.size(); ++i) {
            const double v = std::pow(double(i + 1), t) * seq[i];
            if (i < half) first = std::max(first, v);
            full = std::max(full, v);
        }
        return full <= 1.05 * first;
    };
    bool ok = true;
    int agree = 0;
    for (int case_index = 0; case_index < 50; ++case_index) {
        std::vector<double> seq(len);
        const double t = case_index % 2 == 0 ? 1.0 : 0.5;
        const double power = rng.uniform(0.3, 1.4);
        for (std::size_t i = 0; i < len; ++i) {
            const double n = double(i + 1);
            switch (case_index % 3) {
                case 0: seq[i] = std::pow(n, -power); break;
                case 1: seq[i] = 0.3 + 0.05 * std::cos(0.02 * n); break;
                default:
                    seq[i] = 1.0 / n + ((i & (i + 1)) == 0 ? 1.0 / n : 0.0);
            }
        }
        const int N = 1 + static_cast<int>(rng.next_u64() % 5);
        const auto verdict = averaging_equivalence(seq, N, t);
        std::vector<double> avg(len - static_cast<std::size_t>(N) + 1);
        for (std::size_t i = 0; i < avg.size(); ++i) {
            double s = 0.0;
            for (int j = 0; j < N; ++j) s += seq[i + static_cast<std::size_t>(j)];
            avg[i] = s / N;
        }
        ok = ok && verdict.backward == brute_bounded(seq, t);
        ok = ok && verdict.forward == brute_bounded(avg, t);
        agree += verdict.forward == verdict.backward ? 1 : 0;
    }
    c.check(ok, "verdicts equal brute-force sup on 50 sequences");
    c.check(agree == 50, "forward and backward verdicts agree on all 50");
    c.finish();
}

}  // namespace

int main() {
    std::printf("acceptance suite (configs: %s)\n", BINQUANT_CONFIG_DIR);
    criterion1();
    criteria2to4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
