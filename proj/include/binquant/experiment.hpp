#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "binquant/arma_model.hpp"
#include "binquant/errors.hpp"
#include "binquant/estimator.hpp"
#include "binquant/noise.hpp"
#include "binquant/projection.hpp"
#include "binquant/rng.hpp"

namespace binquant {

/// Deterministic input generator specification.
struct InputGen {
    enum class Kind { alternating, constant_alternating, prbs, iid_uniform };

    Kind kind = Kind::constant_alternating;
    double base = 0.0;       // alternating: u_k = base + jitter * w_k (odd k)
    double jitter = 0.0;
    double level = 0.0;      // constant_alternating: level on odd k, 0 on even
    double amplitude = 0.0;  // prbs: +-amplitude, equiprobable
    double lo = 0.0;         // iid_uniform on [lo, hi]
    double hi = 0.0;

    static InputGen alternating(double base, double jitter) {
        InputGen g;
        g.kind = Kind::alternating;
        g.base = base;
        g.jitter = jitter;
        return g;
    }
    static InputGen constant_alternating(double level) {
        InputGen g;
        g.kind = Kind::constant_alternating;
        g.level = level;
        return g;
    }
    static InputGen prbs(double amplitude) {
        InputGen g;
        g.kind = Kind::prbs;
        g.amplitude = amplitude;
        return g;
    }
    static InputGen iid_uniform(double lo, double hi) {
        InputGen g;
        g.kind = Kind::iid_uniform;
        g.lo = lo;
        g.hi = hi;
        return g;
    }
};

/// u_k for step k >= 1. Stochastic generators draw from the stream only on
/// the steps that actually need randomness, so trial streams stay aligned.
inline double generate_input(const InputGen& gen, std::int64_t k, RngStream& rng) {
    switch (gen.kind) {
        case InputGen::Kind::alternating:
            return k % 2 == 1 ? gen.base + gen.jitter * rng.uniform01() : 0.0;
        case InputGen::Kind::constant_alternating:
            return k % 2 == 1 ? gen.level : 0.0;
        case InputGen::Kind::prbs:
            return rng.uniform01() < 0.5 ? -gen.amplitude : gen.amplitude;
        case InputGen::Kind::iid_uniform:
            return rng.uniform(gen.lo, gen.hi);
    }
    return 0.0;
}

/// Supremum of |u_k| over all steps and draws.
inline double input_sup(const InputGen& gen) {
    switch (gen.kind) {
        case InputGen::Kind::alternating:
            return std::max(std::abs(gen.base),
                            std::abs(gen.base + gen.jitter));
        case InputGen::Kind::constant_alternating:
            return std::abs(gen.level);
        case InputGen::Kind::prbs:
            return std::abs(gen.amplitude);
        case InputGen::Kind::iid_uniform:
            return std::max(std::abs(gen.lo), std::abs(gen.hi));
    }
    return 0.0;
}

/// Knobs for the convergence-constant computations.
struct AnalysisOptions {
    int pe_window_m = 0;       ///< input PE window; 0 resolves to p + q
    int gram_window_N = 0;     ///< regressor Gram window; 0 resolves to p + m
    std::int64_t horizon = 10000;  ///< simulated steps for empirical quantities
    std::int64_t warmup = 100;     ///< window starts skipped at the beginning
};

/// A full experiment: the true plant, the estimator configuration, and the
/// Monte Carlo schedule.
struct ExperimentConfig {
    ArmaParams true_params;
    double stability_margin_h = 0.5;  ///< declared bound on the AR spectral radius
    ConvexSet set;
    NoiseModel noise;
    BinarySensor sensor;
    InputGen input;
    double gamma = 1.0;
    std::vector<double> theta0;
    std::int64_t horizon = 1;
    int trials = 1;
    std::uint64_t master_seed = 0;
    std::int64_t decimation = 1;
    PredictorTiming timing = PredictorTiming::post_update;
    AnalysisOptions analysis;

    int pe_window() const {
        return analysis.pe_window_m > 0 ? analysis.pe_window_m
                                        : true_params.dim();
    }
    int gram_window() const {
        return analysis.gram_window_N > 0 ? analysis.gram_window_N
                                          : true_params.p() + pe_window();
    }
};

/// Stream index tags. Trials use their trial index directly; internal
/// simulations use high tags so they never collide with a trial stream.
namespace stream_tag {
constexpr std::uint64_t analysis = 0xb1a0'0000'0000'0001ULL;
}

/// Cheap structural validation; throws ConfigError naming the field.
inline void validate(const ExperimentConfig& config) {
    const auto& params = config.true_params;
    if (params.q() < 1) {
        throw ConfigError("true_params.b", "need at least one input coefficient");
    }
    if (params.p() > 0 && params.a.back() == 0.0) {
        throw ConfigError("true_params.a", "a_p must be non-zero (use p-1 instead)");
    }
    if (!(config.stability_margin_h > 0.0 && config.stability_margin_h < 1.0)) {
        throw ConfigError("stability_margin_h", "must lie in (0, 1)");
    }
    if (params.p() > 0) {
        const double rho = spectral_radius(params);
        if (rho >= 1.0) {
            throw ConfigError("true_params.a", "companion spectral radius >= 1");
        }
        if (rho >= config.stability_margin_h) {
            throw ConfigError("true_params.a",
                              "companion spectral radius exceeds stability_margin_h");
        }
    }
    if (config.set.dim() != static_cast<std::size_t>(params.dim())) {
        throw ConfigError("set", "dimension must equal p + q");
    }
    if (!contains(params.theta(), config.set)) {
        throw ConfigError("set", "true parameter must belong to the set");
    }
    if (config.theta0.size() != static_cast<std::size_t>(params.dim())) {
        throw ConfigError("theta0", "dimension must equal p + q");
    }
    if (config.input.kind == InputGen::Kind::iid_uniform &&
        !(config.input.lo <= config.input.hi)) {
        throw ConfigError("input", "iid_uniform needs lo <= hi");
    }
    if (!(config.gamma > 0.0)) {
        throw ConfigError("gamma", "must be positive");
    }
    if (config.horizon < 1) {
        throw ConfigError("horizon", "must be >= 1");
    }
    if (config.trials < 1) {
        throw ConfigError("trials", "must be >= 1");
    }
    if (config.decimation < 1) {
        throw ConfigError("decimation", "must be >= 1");
    }
    if (config.analysis.horizon < config.analysis.warmup + 10) {
        throw ConfigError("analysis.horizon", "too short for the warm-up");
    }
}

}  // namespace binquant
