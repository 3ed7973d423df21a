// Command-line front end: run Monte Carlo experiments, evaluate the
// convergence analysis, sweep the rate recursion, and replicate the two
// bundled studies.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "binquant/binquant.hpp"

#ifndef BINQUANT_CONFIG_DIR
#define BINQUANT_CONFIG_DIR "configs"
#endif

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

binquant::ExperimentConfig load_with_overrides(const std::string& path,
                                               std::int64_t seed_override,
                                               bool has_seed) {
    auto config = binquant::load_config(path);
    if (has_seed) {
        config.master_seed = static_cast<std::uint64_t>(seed_override);
    }
    return config;
}

double value_at(const binquant::MonteCarloAggregate& agg, std::int64_t k) {
    for (std::size_t i = 0; i < agg.ks.size(); ++i) {
        if (agg.ks[i] == k) return agg.mean_e_sq[i];
    }
    return std::numeric_limits<double>::quiet_NaN();
}

int cmd_run(const std::string& config_path, const std::string& out,
            const std::string& format, std::int64_t seed, bool has_seed) {
    auto config = load_with_overrides(config_path, seed, has_seed);
    const auto t0 = Clock::now();
    auto agg = binquant::run_monte_carlo(config);
    const double elapsed = seconds_since(t0);

    const double first = agg.mean_e_sq.front();
    const double last = agg.mean_e_sq.back();
    std::printf("trials=%d horizon=%lld gamma=%g seed=%llu (%.2fs)\n",
                config.trials, static_cast<long long>(config.horizon),
                config.gamma, static_cast<unsigned long long>(config.master_seed),
                elapsed);
    std::printf("mean |theta_hat - theta|^2: k=%lld -> %.6e, k=%lld -> %.6e\n",
                static_cast<long long>(agg.ks.front()), first,
                static_cast<long long>(agg.ks.back()), last);
    const double lo = static_cast<double>(config.horizon) / 100.0;
    try {
        const double slope = binquant::fit_mse_slope(
            agg.ks, agg.mean_e_sq, lo, static_cast<double>(config.horizon));
        std::printf("log-log slope on [%g, %lld]: %+.3f\n", lo,
                    static_cast<long long>(config.horizon), slope);
    } catch (const binquant::DomainError&) {
        // Slope undefined (zero error values); nothing to report.
    }
    std::printf("mean final theta_hat:");
    for (double v : agg.mean_theta.back()) std::printf(" %+.6f", v);
    std::printf("\n");

    if (!out.empty()) {
        if (format == "csv") {
            binquant::export_csv(agg, out);
        } else {
            const auto report = binquant::analyze(config);
            binquant::export_json(agg, &report, out);
        }
        std::printf("wrote %s\n", out.c_str());
    }
    return 0;
}

int cmd_analyze(const std::string& config_path, const std::string& out,
                std::int64_t seed, bool has_seed) {
    auto config = load_with_overrides(config_path, seed, has_seed);
    const auto report = binquant::analyze(config);
    nlohmann::json j = report;
    if (out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream file(out, std::ios::binary);
        file << j.dump(2) << "\n";
        std::printf("wrote %s\n", out.c_str());
    }
    return 0;
}

int cmd_verify_recursion(std::int64_t horizon, const std::string& out) {
    std::ostringstream csv;
    csv << "eta1,eta2,h1,eta,fitted_exponent\n";
    const std::vector<std::pair<double, double>> mixes = {
        {0.0, 0.5}, {0.5, 0.3}, {1.0, 0.5}, {0.3, 0.7}};
    std::vector<double> etas = {-0.5, 0.3, 0.5, 0.8, 1.5, 3.0};
    for (double eta : etas) {
        for (const auto& [eta2, h1] : mixes) {
            const double eta1 = eta + eta2 * h1 / (1.0 - h1);
            if (!(eta1 > 0.0)) continue;
            binquant::RecursionSpec spec{eta1, eta2, h1, 1.0, horizon, 1.0};
            const auto seq = binquant::iterate(spec);
            const double fitted =
                binquant::fit_rate(seq, horizon / 10, horizon);
            char line[160];
            std::snprintf(line, sizeof(line), "%.10g,%.10g,%.10g,%.10g,%.6f\n",
                          eta1, eta2, h1, binquant::rate_eta(spec), fitted);
            csv << line;
        }
    }
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream file(out, std::ios::binary);
        file << csv.str();
        std::printf("wrote %s\n", out.c_str());
    }
    return 0;
}

struct CheckRow {
    std::string name;
    std::string measured;
    std::string target;
    bool pass;
};

void print_table(const std::vector<CheckRow>& rows) {
    std::size_t w0 = 0, w1 = 0, w2 = 0;
    for (const auto& r : rows) {
        w0 = std::max(w0, r.name.size());
        w1 = std::max(w1, r.measured.size());
        w2 = std::max(w2, r.target.size());
    }
    for (const auto& r : rows) {
        std::printf("%-*s  %-*s  %-*s  %s\n", static_cast<int>(w0), r.name.c_str(),
                    static_cast<int>(w1), r.measured.c_str(), static_cast<int>(w2),
                    r.target.c_str(), r.pass ? "PASS" : "FAIL");
    }
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

int cmd_replicate(const std::string& config_dir, int trials, std::int64_t horizon) {
    namespace bq = binquant;
    std::vector<CheckRow> rows;

    auto config1 = bq::load_config(config_dir + "/paper_5_1.json");
    auto config2 = bq::load_config(config_dir + "/paper_5_2.json");
    if (trials > 0) config1.trials = config2.trials = trials;
    if (horizon > 0) config1.horizon = config2.horizon = horizon;

    const auto report1 = bq::analyze(config1);
    rows.push_back({"study-1 delta", fmt("%.4f", report1.delta), "> 0.47",
                    report1.delta > 0.47});
    rows.push_back({"study-1 M2^2", fmt("%.4f", report1.M2() * report1.M2()),
                    "< 2.26", report1.M2() * report1.M2() < 2.26});
    rows.push_back({"study-1 f_M/f_m", fmt("%.4f", report1.f_M / report1.f_m),
                    "< 2", report1.f_M / report1.f_m < 2.0});
    rows.push_back({"study-1 condition", fmt("%+.4f", report1.cond7), "> 0",
                    report1.cond7 > 0.0});

    auto agg1 = bq::run_monte_carlo(config1);
    const double e3 = value_at(agg1, 1000);
    const double e5 = value_at(agg1, config1.horizon);
    rows.push_back({"study-1 mse decay (1e3 -> end)", fmt("%.1fx", e3 / e5),
                    ">= 50x", e3 / e5 >= 50.0});
    const double slope = bq::fit_mse_slope(agg1.ks, agg1.mean_e_sq, 1000.0,
                                           static_cast<double>(config1.horizon));
    rows.push_back({"study-1 log-log slope", fmt("%+.3f", slope),
                    "in [-1.3, -0.7]", slope >= -1.3 && slope <= -0.7});
    const auto& final_theta = agg1.mean_theta.back();
    const double da = std::abs(final_theta[0] - config1.true_params.a[0]);
    const double db = std::abs(final_theta[1] - config1.true_params.b[0]);
    rows.push_back({"study-1 final estimate error",
                    fmt("%.4f", std::max(da, db)), "< 0.05 per component",
                    da < 0.05 && db < 0.05});

    const auto report2 = bq::analyze(config2);
    bool violated = false;
    try {
        bq::min_step_size(report2);
    } catch (const bq::ConditionViolated&) {
        violated = true;
    }
    rows.push_back({"study-2 condition", fmt("%+.1f", report2.cond7),
                    "<= 0 (not certified)", report2.cond7 <= 0.0 && violated});
    auto agg2 = bq::run_monte_carlo(config2);
    const double final2 = agg2.mean_e_sq.back();
    rows.push_back({"study-2 final mse", fmt("%.2e", final2), "< 0.01",
                    final2 < 0.01});

    print_table(rows);
    int failures = 0;
    for (const auto& r : rows) failures += r.pass ? 0 : 1;
    std::printf("%zu checks, %d failed\n", rows.size(), failures);
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Identification of ARMA systems through a fixed-threshold "
                 "binary sensor: recursive projection estimator, convergence "
                 "analysis, Monte Carlo harness"};
    app.require_subcommand(1);

    std::string config_path, out, format = "csv", config_dir = BINQUANT_CONFIG_DIR;
    std::int64_t seed = 0, horizon = 100000;
    int trials = 0;

    auto* run = app.add_subcommand("run", "run a Monte Carlo experiment");
    run->add_option("config", config_path, "experiment configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    run->add_option("--out", out, "output file");
    run->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    auto* seed_opt = run->add_option("--seed", seed, "override master_seed");

    auto* analyze = app.add_subcommand(
        "analyze", "evaluate the convergence constants and condition");
    analyze->add_option("config", config_path, "experiment configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    analyze->add_option("--out", out, "write the report here instead of stdout");
    auto* seed_opt2 = analyze->add_option("--seed", seed, "override master_seed");

    auto* verify = app.add_subcommand(
        "verify-recursion", "sweep the perturbed recursion and fit decay rates");
    verify->add_option("--horizon", horizon, "steps per recursion");
    verify->add_option("--out", out, "write the CSV here instead of stdout");

    auto* replicate = app.add_subcommand(
        "replicate-paper", "run both bundled studies and print a pass/fail table");
    replicate->add_option("--config-dir", config_dir, "directory with the bundled configs");
    replicate->add_option("--trials", trials, "override trial count");
    replicate->add_option("--horizon", horizon, "override horizon");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cmd_run(config_path, out, format, seed, !seed_opt->empty());
        }
        if (analyze->parsed()) {
            return cmd_analyze(config_path, out, seed, !seed_opt2->empty());
        }
        if (verify->parsed()) {
            return cmd_verify_recursion(horizon, out);
        }
        if (replicate->parsed()) {
            return cmd_replicate(config_dir, trials,
                                 replicate->count("--horizon") ? horizon : 0);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
