#pragma once

#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "binquant/analysis.hpp"
#include "binquant/arma_model.hpp"
#include "binquant/errors.hpp"
#include "binquant/estimator.hpp"
#include "binquant/experiment.hpp"
#include "binquant/noise.hpp"
#include "binquant/projection.hpp"
#include "binquant/rng.hpp"

namespace binquant {

/// Diagnostics of one simulated trial, decimated to the recording grid.
/// e_sq realizes the squared parameter error ||theta_hat - theta||^2 and
/// v_sq the squared output-prediction error (yhat - y)^2.
struct TrialResult {
    std::vector<std::int64_t> ks;
    std::vector<double> e_sq;
    std::vector<double> v_sq;
    std::vector<std::vector<double>> theta_traj;
    double s_freq = 0.0;  ///< fraction of steps with s_k = 1
    std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::int64_t> recording_grid(std::int64_t horizon,
                                                std::int64_t decimation) {
    std::vector<std::int64_t> ks;
    for (std::int64_t k = decimation; k <= horizon; k += decimation) {
        ks.push_back(k);
    }
    if (ks.empty() || ks.back() != horizon) ks.push_back(horizon);
    return ks;
}

// Pairwise sum over [lo, hi) of f(i); keeps trial aggregation independent
// of scheduling and numerically stable.
template <typename F>
double pairwise_sum(std::size_t lo, std::size_t hi, const F& f) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(i);
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(lo, mid, f) + pairwise_sum(mid, hi, f);
}

}  // namespace detail

/// Simulates plant and estimator in lockstep for the configured horizon.
/// The trial's random stream is derived from (master_seed, trial_index), so
/// the result is a pure function of (config, trial_index).
inline TrialResult run_trial(const ExperimentConfig& config, int trial_index) {
    const auto& params = config.true_params;
    RngStream rng(config.master_seed, static_cast<std::uint64_t>(trial_index));

    PlantState plant = make_plant_state(params);
    Estimator estimator(config.theta0, config.set, config.gamma, config.noise,
                        config.sensor, params.p(), params.q(), config.timing);
    const std::vector<double> truth = params.theta();

    TrialResult result;
    result.seed = RngStream::derive_seed(config.master_seed,
                                         static_cast<std::uint64_t>(trial_index));
    result.ks = detail::recording_grid(config.horizon, config.decimation);
    result.e_sq.reserve(result.ks.size());
    result.v_sq.reserve(result.ks.size());
    result.theta_traj.reserve(result.ks.size());

    std::size_t next_record = 0;
    std::int64_t ones = 0;
    for (std::int64_t k = 1; k <= config.horizon; ++k) {
        const double u = generate_input(config.input, k, rng);
        const double d = config.noise.sample(rng);
        const PlantOutput out =
            plant_step(plant, params, u, d, config.sensor.threshold);
        estimator.update(u, out.s);
        ones += out.s ? 1 : 0;

        if (next_record < result.ks.size() && k == result.ks[next_record]) {
            const auto& th = estimator.theta_hat();
            double e2 = 0.0;
            for (std::size_t i = 0; i < th.size(); ++i) {
                const double di = th[i] - truth[i];
                e2 += di * di;
            }
            const double ve = estimator.predict_output() - out.y;
            result.e_sq.push_back(e2);
            result.v_sq.push_back(ve * ve);
            result.theta_traj.push_back(th);
            ++next_record;
        }
    }
    result.s_freq = static_cast<double>(ones) / static_cast<double>(config.horizon);
    return result;
}

/// Trial-averaged error series plus the individual trials.
struct MonteCarloAggregate {
    std::vector<std::int64_t> ks;
    std::vector<double> mean_e_sq;
    std::vector<double> mean_v_sq;
    std::vector<std::vector<double>> mean_theta;
    std::vector<TrialResult> per_trial;
};

/// Worker count: BINQUANT_THREADS when set, otherwise the hardware
/// concurrency, never more than the trial count.
inline int worker_count(int trials) {
    int n = 0;
    if (const char* env = std::getenv("BINQUANT_THREADS")) {
        n = std::atoi(env);
    }
    if (n <= 0) {
        n = static_cast<int>(std::thread::hardware_concurrency());
    }
    if (n <= 0) n = 1;
    return std::min(n, trials);
}

/// Runs all trials concurrently and averages them. Aggregation uses
/// pairwise summation in trial order, so the result does not depend on the
/// scheduling of the workers.
inline MonteCarloAggregate run_monte_carlo(const ExperimentConfig& config) {
    validate(config);
    const int trials = config.trials;
    std::vector<TrialResult> results(static_cast<std::size_t>(trials));

    const int workers = worker_count(trials);
    if (workers <= 1) {
        for (int t = 0; t < trials; ++t) {
            results[static_cast<std::size_t>(t)] = run_trial(config, t);
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
                    results[static_cast<std::size_t>(t)] = run_trial(config, t);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    MonteCarloAggregate agg;
    agg.ks = results.front().ks;
    const std::size_t points = agg.ks.size();
    const std::size_t dim = config.theta0.size();
    const auto nt = static_cast<std::size_t>(trials);
    agg.mean_e_sq.resize(points);
    agg.mean_v_sq.resize(points);
    agg.mean_theta.assign(points, std::vector<double>(dim));
    for (std::size_t i = 0; i < points; ++i) {
        agg.mean_e_sq[i] = detail::pairwise_sum(
                               0, nt, [&](std::size_t t) { return results[t].e_sq[i]; }) /
                           static_cast<double>(trials);
        agg.mean_v_sq[i] = detail::pairwise_sum(
                               0, nt, [&](std::size_t t) { return results[t].v_sq[i]; }) /
                           static_cast<double>(trials);
        for (std::size_t c = 0; c < dim; ++c) {
            agg.mean_theta[i][c] =
                detail::pairwise_sum(
                    0, nt, [&](std::size_t t) { return results[t].theta_traj[i][c]; }) /
                static_cast<double>(trials);
        }
    }
    agg.per_trial = std::move(results);
    return agg;
}

/// Least-squares slope of log(value) against log(k) over samples with
/// k in [k_lo, k_hi].
inline double fit_mse_slope(const std::vector<std::int64_t>& ks,
                            const std::vector<double>& values, double k_lo,
                            double k_hi) {
    if (ks.size() != values.size()) {
        throw DomainError("fit_mse_slope: series length mismatch");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::int64_t n = 0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const double k = static_cast<double>(ks[i]);
        if (k < k_lo || k > k_hi) continue;
        if (!(values[i] > 0.0)) {
            throw DomainError("fit_mse_slope: non-positive value in window");
        }
        const double x = std::log(k);
        const double y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw DomainError("fit_mse_slope: fewer than two samples in window");
    const double nd = static_cast<double>(n);
    return (nd * sxy - sx * sy) / (nd * sxx - sx * sx);
}

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

/// Writes the aggregate as RFC-4180-style CSV ('.' decimal separator, LF
/// line endings): k, mean_e_sq, mean_v_sq, one column per mean parameter
/// component. Byte-stable for identical inputs.
inline void export_csv(const MonteCarloAggregate& agg, const std::string& path) {
    std::ostringstream out;
    out << "k,mean_e_sq,mean_v_sq";
    const std::size_t dim = agg.mean_theta.empty() ? 0 : agg.mean_theta.front().size();
    for (std::size_t c = 0; c < dim; ++c) {
        out << ",mean_theta_" << (c + 1);
    }
    out << "\n";
    for (std::size_t i = 0; i < agg.ks.size(); ++i) {
        out << agg.ks[i] << ',' << detail::format_double(agg.mean_e_sq[i]) << ','
            << detail::format_double(agg.mean_v_sq[i]);
        for (std::size_t c = 0; c < dim; ++c) {
            out << ',' << detail::format_double(agg.mean_theta[i][c]);
        }
        out << "\n";
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error("export_csv: cannot open " + path);
    file << out.str();
    if (!file) throw Error("export_csv: write failed for " + path);
}

inline nlohmann::json aggregate_to_json(const MonteCarloAggregate& agg) {
    nlohmann::json j;
    j["ks"] = agg.ks;
    j["mean_e_sq"] = agg.mean_e_sq;
    j["mean_v_sq"] = agg.mean_v_sq;
    j["mean_theta"] = agg.mean_theta;
    j["trials"] = nlohmann::json::array();
    for (const auto& trial : agg.per_trial) {
        j["trials"].push_back({{"seed", trial.seed},
                               {"s_freq", trial.s_freq},
                               {"e_sq", trial.e_sq},
                               {"v_sq", trial.v_sq},
                               {"theta_traj", trial.theta_traj}});
    }
    return j;
}

/// JSON export: the aggregate plus, when given, the convergence report.
inline void export_json(const MonteCarloAggregate& agg,
                        const ConvergenceReport* report,
                        const std::string& path) {
    nlohmann::json j = aggregate_to_json(agg);
    j["report"] = report ? nlohmann::json(*report) : nlohmann::json(nullptr);
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error("export_json: cannot open " + path);
    file << j.dump(2) << "\n";
    if (!file) throw Error("export_json: write failed for " + path);
}

// ---------------------------------------------------------------------------
// Configuration files
// ---------------------------------------------------------------------------

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j,
                                           const std::string& path,
                                           const char* key) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw ConfigError(path.empty() ? key : path + "." + key, "missing field");
    }
    return *it;
}

template <typename T>
T as(const nlohmann::json& j, const std::string& field) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(field, "wrong type");
    }
}

}  // namespace detail

/// Parses a configuration object. `origin` is prefixed to field paths in
/// error messages. "gamma": "auto" resolves to 1.1 times the certified
/// minimum step size; that fails with ConfigError when the convergence
/// condition is not positive.
inline ExperimentConfig parse_config(const nlohmann::json& j,
                                     const std::string& origin = "") {
    using detail::as;
    using detail::require_field;
    auto field = [&](const char* name) {
        return origin.empty() ? std::string(name) : origin + "." + name;
    };

    const auto& jp = require_field(j, origin, "true_params");
    ArmaParams params;
    params.a = as<std::vector<double>>(require_field(jp, field("true_params"), "a"),
                                       field("true_params.a"));
    params.b = as<std::vector<double>>(require_field(jp, field("true_params"), "b"),
                                       field("true_params.b"));

    const auto& js = require_field(j, origin, "set");
    const auto set_type = as<std::string>(require_field(js, field("set"), "type"),
                                          field("set.type"));
    ConvexSet set = [&] {
        try {
            if (set_type == "box") {
                return ConvexSet::box(
                    as<std::vector<double>>(require_field(js, field("set"), "lo"),
                                            field("set.lo")),
                    as<std::vector<double>>(require_field(js, field("set"), "hi"),
                                            field("set.hi")));
            }
            if (set_type == "ball") {
                return ConvexSet::ball(
                    as<std::vector<double>>(require_field(js, field("set"), "center"),
                                            field("set.center")),
                    as<double>(require_field(js, field("set"), "radius"),
                               field("set.radius")));
            }
            throw ConfigError(field("set.type"), "must be 'box' or 'ball'");
        } catch (const DomainError& e) {
            throw ConfigError(field("set"), e.what());
        }
    }();

    const auto& jn = require_field(j, origin, "noise");
    const auto family = as<std::string>(require_field(jn, field("noise"), "family"),
                                        field("noise.family"));
    NoiseModel noise = [&] {
        try {
            if (family == "gaussian") {
                if (jn.contains("sigma2")) {
                    return NoiseModel::gaussian(
                        std::sqrt(as<double>(jn["sigma2"], field("noise.sigma2"))));
                }
                return NoiseModel::gaussian(
                    as<double>(require_field(jn, field("noise"), "sigma"),
                               field("noise.sigma")));
            }
            if (family == "laplace") {
                return NoiseModel::laplace(
                    as<double>(require_field(jn, field("noise"), "scale"),
                               field("noise.scale")));
            }
            if (family == "uniform") {
                return NoiseModel::uniform(
                    as<double>(require_field(jn, field("noise"), "half_width"),
                               field("noise.half_width")));
            }
            throw ConfigError(field("noise.family"),
                              "must be 'gaussian', 'laplace' or 'uniform'");
        } catch (const DomainError& e) {
            throw ConfigError(field("noise"), e.what());
        }
    }();

    BinarySensor sensor;
    sensor.threshold = as<double>(
        require_field(require_field(j, origin, "sensor"), field("sensor"), "threshold"),
        field("sensor.threshold"));

    const auto& ji = require_field(j, origin, "input");
    const auto input_type = as<std::string>(require_field(ji, field("input"), "type"),
                                            field("input.type"));
    InputGen input;
    if (input_type == "alternating") {
        input = InputGen::alternating(
            as<double>(require_field(ji, field("input"), "base"), field("input.base")),
            as<double>(require_field(ji, field("input"), "jitter"),
                       field("input.jitter")));
    } else if (input_type == "constant_alternating") {
        input = InputGen::constant_alternating(as<double>(
            require_field(ji, field("input"), "level"), field("input.level")));
    } else if (input_type == "prbs") {
        input = InputGen::prbs(as<double>(
            require_field(ji, field("input"), "amplitude"), field("input.amplitude")));
    } else if (input_type == "iid_uniform") {
        input = InputGen::iid_uniform(
            as<double>(require_field(ji, field("input"), "lo"), field("input.lo")),
            as<double>(require_field(ji, field("input"), "hi"), field("input.hi")));
    } else {
        throw ConfigError(field("input.type"), "unknown input generator");
    }

    ExperimentConfig config{params,
                            as<double>(require_field(j, origin, "stability_margin_h"),
                                       field("stability_margin_h")),
                            std::move(set),
                            std::move(noise),
                            sensor,
                            input,
                            /*gamma=*/1.0,
                            as<std::vector<double>>(require_field(j, origin, "theta0"),
                                                    field("theta0")),
                            as<std::int64_t>(require_field(j, origin, "horizon"),
                                             field("horizon")),
                            as<int>(require_field(j, origin, "trials"), field("trials")),
                            as<std::uint64_t>(require_field(j, origin, "master_seed"),
                                              field("master_seed"))};

    if (j.contains("decimation")) {
        config.decimation = as<std::int64_t>(j["decimation"], field("decimation"));
    } else {
        config.decimation = (config.horizon + 1999) / 2000;
    }
    if (j.contains("predictor_timing")) {
        const auto timing = as<std::string>(j["predictor_timing"],
                                            field("predictor_timing"));
        if (timing == "post") {
            config.timing = PredictorTiming::post_update;
        } else if (timing == "pre") {
            config.timing = PredictorTiming::pre_update;
        } else {
            throw ConfigError(field("predictor_timing"), "must be 'post' or 'pre'");
        }
    }
    if (j.contains("analysis")) {
        const auto& ja = j["analysis"];
        if (ja.contains("pe_window_m")) {
            config.analysis.pe_window_m = as<int>(ja["pe_window_m"],
                                                  field("analysis.pe_window_m"));
        }
        if (ja.contains("gram_window_N")) {
            config.analysis.gram_window_N = as<int>(ja["gram_window_N"],
                                                    field("analysis.gram_window_N"));
        }
        if (ja.contains("horizon")) {
            config.analysis.horizon = as<std::int64_t>(ja["horizon"],
                                                       field("analysis.horizon"));
        }
        if (ja.contains("warmup")) {
            config.analysis.warmup = as<std::int64_t>(ja["warmup"],
                                                      field("analysis.warmup"));
        }
    }

    // An omitted gamma defaults to "auto": 1.1 times the certified bound.
    bool auto_gamma = !j.contains("gamma");
    if (!auto_gamma && j["gamma"].is_string()) {
        if (as<std::string>(j["gamma"], field("gamma")) != "auto") {
            throw ConfigError(field("gamma"), "must be a number or \"auto\"");
        }
        auto_gamma = true;
    }
    if (auto_gamma) {
        validate(config);  // gamma defaulted to 1.0 above, so this is checkable
        try {
            config.gamma = 1.1 * min_step_size(analyze(config));
        } catch (const ConditionViolated&) {
            throw ConfigError(field("gamma"),
                              "\"auto\" requested but the convergence condition "
                              "certifies no step size");
        }
    } else {
        config.gamma = as<double>(j["gamma"], field("gamma"));
    }

    try {
        validate(config);
    } catch (const ConfigError& e) {
        if (origin.empty()) throw;
        throw ConfigError(origin + "." + e.field(),
                          std::string(e.what()).substr(e.field().size() + 2));
    }
    return config;
}

/// Loads and validates a JSON configuration file.
inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        throw ConfigError(path, "cannot open file");
    }
    nlohmann::json j;
    try {
        file >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path, std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace binquant
