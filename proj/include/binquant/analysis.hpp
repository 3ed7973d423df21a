#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <tuple>
#include <utility>
#include <vector>

#include "binquant/arma_model.hpp"
#include "binquant/errors.hpp"
#include "binquant/experiment.hpp"
#include "binquant/noise.hpp"
#include "binquant/projection.hpp"

namespace binquant {

/// Upper bounds on the regressor norms: M1 for the true regressor
/// [y_{k-1},...,u_k,...], M2 for the predicted one. Both an analytic
/// worst-case bound (geometric series through the matrix-power envelope)
/// and an empirical bound (measured along noise-free simulations) are kept;
/// the headline values used by the sufficient condition are the smaller of
/// the two, since the condition is sufficient rather than necessary and
/// tighter constants give a more informative verdict.
struct RegressorBounds {
    double M1 = 0.0;
    double M2 = 0.0;
    double M1_analytic = 0.0;
    double M1_empirical = 0.0;
    double M2_analytic = 0.0;
    double M2_empirical = 0.0;
};

/// Every constant entering the convergence condition and the rate bound,
/// for one experiment configuration.
struct ConvergenceReport {
    double h = 0.0;      ///< declared stability margin
    double g_h = 0.0;    ///< bound on sum a_i^2 under the margin
    double M_mat = 0.0;  ///< matrix-power envelope constant (true system)
    double h1 = 0.0;     ///< envelope decay rate (true system)
    double u_max = 0.0;  ///< input bound
    RegressorBounds bounds;
    double B = 0.0;    ///< sup-norm of the parameter set
    double f_m = 0.0;  ///< density minimum on the analysis interval
    double f_M = 0.0;  ///< density maximum on the analysis interval
    double delta1 = 0.0;  ///< input persistent-excitation level
    int m = 0;            ///< input PE window
    double delta = 0.0;   ///< regressor-Gram excitation level
    int N = 0;            ///< regressor Gram window
    double cond7 = 0.0;   ///< left-hand side of the sufficient condition
    double gamma = 0.0;   ///< configured step-size constant
    double eta = 0.0;     ///< rate constant 2 * gamma * cond7
    bool condition_ok = false;
    double gamma_min = std::numeric_limits<double>::quiet_NaN();

    double M1() const noexcept { return bounds.M1; }
    double M2() const noexcept { return bounds.M2; }
};

namespace detail {

/// Minimum over all window starts of lambda_min((1/w) sum of v v^T) for a
/// sliding window of length w, starting at `first_start`.
inline double min_window_gram_eig(const std::vector<Eigen::VectorXd>& vs,
                                  int w, std::int64_t first_start = 0) {
    const auto count = static_cast<std::int64_t>(vs.size());
    if (w < 1 || count - first_start < w) {
        throw DomainError("min_window_gram_eig: window exceeds sequence");
    }
    const auto n = vs.front().size();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    for (std::int64_t i = first_start; i < first_start + w; ++i) {
        gram.noalias() += vs[static_cast<std::size_t>(i)] *
                          vs[static_cast<std::size_t>(i)].transpose();
    }
    double best = std::numeric_limits<double>::infinity();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    for (std::int64_t start = first_start;; ++start) {
        eig.compute(gram / static_cast<double>(w),
                    Eigen::EigenvaluesOnly);
        if (eig.info() != Eigen::Success) {
            throw NumericalError("min_window_gram_eig: eigensolver failed");
        }
        best = std::min(best, eig.eigenvalues()(0));
        if (start + w >= count) break;
        const auto& out = vs[static_cast<std::size_t>(start)];
        const auto& in = vs[static_cast<std::size_t>(start + w)];
        gram.noalias() += in * in.transpose();
        gram.noalias() -= out * out.transpose();
    }
    // Clamp the tiny negative values rounding can produce on singular grams.
    return best < 0.0 && best > -1e-12 ? 0.0 : best;
}

inline std::vector<double> simulate_inputs(const ExperimentConfig& config,
                                           std::int64_t horizon) {
    RngStream rng(config.master_seed, stream_tag::analysis);
    std::vector<double> u(static_cast<std::size_t>(horizon));
    for (std::int64_t k = 1; k <= horizon; ++k) {
        u[static_cast<std::size_t>(k - 1)] = generate_input(config.input, k, rng);
    }
    return u;
}

/// Noise-free regressors phi_1..phi_H of the true plant.
inline std::vector<Eigen::VectorXd> simulate_true_regressors(
    const ExperimentConfig& config, const std::vector<double>& inputs) {
    PlantState state = make_plant_state(config.true_params);
    std::vector<Eigen::VectorXd> phis;
    phis.reserve(inputs.size());
    for (double u : inputs) {
        const auto phi = plant_regressor(state, u);
        phis.push_back(Eigen::Map<const Eigen::VectorXd>(
            phi.data(), static_cast<Eigen::Index>(phi.size())));
        plant_step(state, config.true_params, u, 0.0, config.sensor.threshold);
    }
    return phis;
}

/// Max ||phi|| along the prediction recursion with the estimate frozen at
/// theta_fixed.
inline double frozen_predictor_sup(const ExperimentConfig& config,
                                   const std::vector<double>& theta_fixed,
                                   const std::vector<double>& inputs) {
    const int p = config.true_params.p();
    const int q = config.true_params.q();
    std::vector<double> yh(static_cast<std::size_t>(p), 0.0);
    std::vector<double> uh(static_cast<std::size_t>(std::max(q - 1, 0)), 0.0);
    double sup = 0.0;
    for (double u : inputs) {
        std::vector<double> phi;
        phi.reserve(yh.size() + 1 + uh.size());
        phi.insert(phi.end(), yh.begin(), yh.end());
        phi.push_back(u);
        phi.insert(phi.end(), uh.begin(), uh.end());
        double n2 = 0.0;
        for (double v : phi) n2 += v * v;
        sup = std::max(sup, std::sqrt(n2));
        const double yhat = dot(phi, theta_fixed);
        push_newest(yh, yhat);
        push_newest(uh, u);
    }
    return sup;
}

/// Extreme points of the set used for the frozen-predictor sweep: all
/// vertices for a box, axis extremes plus quasi-random boundary points for
/// a ball.
inline std::vector<std::vector<double>> sweep_points(const ConvexSet& set) {
    const auto n = set.dim();
    std::vector<std::vector<double>> pts;
    if (set.kind() == ConvexSet::Kind::box) {
        if (n > 16) {
            throw DomainError("sweep_points: box dimension too large");
        }
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            std::vector<double> v(n);
            for (std::size_t i = 0; i < n; ++i) {
                v[i] = (mask >> i) & 1u ? set.upper()[i] : set.lower()[i];
            }
            pts.push_back(std::move(v));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            for (double sign : {-1.0, 1.0}) {
                std::vector<double> v = set.center();
                v[i] += sign * set.radius();
                pts.push_back(std::move(v));
            }
        }
        for (int s = 0; s < 64; ++s) {
            auto t = halton_point(s, static_cast<int>(n));
            double n2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                t[i] = 2.0 * t[i] - 1.0;
                n2 += t[i] * t[i];
            }
            if (n2 == 0.0) continue;
            const double scale = set.radius() / std::sqrt(n2);
            std::vector<double> v = set.center();
            for (std::size_t i = 0; i < n; ++i) v[i] += scale * t[i];
            pts.push_back(std::move(v));
        }
    }
    return pts;
}

}  // namespace detail

/// delta_1 = min over window starts of lambda_min((1/m) sum U_i U_i^T) with
/// U_i = [u_i,...,u_{i-p-q+1}]. A positive value certifies persistent
/// excitation at level delta_1 on the passed horizon; windows shorter than
/// the regressor dimension always yield 0.
inline double check_persistent_excitation(const std::vector<double>& inputs,
                                          int m, int p_plus_q) {
    if (m < 1 || p_plus_q < 1) {
        throw DomainError("check_persistent_excitation: m and p_plus_q must be >= 1");
    }
    if (static_cast<std::int64_t>(inputs.size()) <
        static_cast<std::int64_t>(m) + p_plus_q) {
        throw DomainError("check_persistent_excitation: sequence shorter than m + p + q");
    }
    std::vector<Eigen::VectorXd> us;
    us.reserve(inputs.size());
    for (std::size_t i = static_cast<std::size_t>(p_plus_q) - 1; i < inputs.size(); ++i) {
        Eigen::VectorXd u(p_plus_q);
        for (int j = 0; j < p_plus_q; ++j) {
            u(j) = inputs[i - static_cast<std::size_t>(j)];
        }
        us.push_back(std::move(u));
    }
    return detail::min_window_gram_eig(us, m);
}

/// Measures the excitation level transferred to the regressors: simulates
/// the true plant without noise and returns the minimum over the horizon of
/// lambda_min((1/N) sum phi_i phi_i^T) together with the window N. The
/// transfer constant of the underlying lemma is non-constructive, so the
/// level is measured, not derived.
inline std::pair<double, int> estimate_delta(const ExperimentConfig& config) {
    if (config.true_params.p() > 0 &&
        spectral_radius(config.true_params) >= 1.0) {
        throw UnstableSystem("estimate_delta: true system is unstable");
    }
    const int N = config.gram_window();
    const auto inputs = detail::simulate_inputs(config, config.analysis.horizon);
    const auto phis = detail::simulate_true_regressors(config, inputs);
    const double delta =
        detail::min_window_gram_eig(phis, N, config.analysis.warmup);
    return {delta, N};
}

/// Computes M1 and M2 both analytically and empirically; see RegressorBounds.
inline RegressorBounds regressor_bounds(const ExperimentConfig& config) {
    const int p = config.true_params.p();
    const int q = config.true_params.q();
    const double u_max = input_sup(config.input);

    RegressorBounds out;
    const double input_part = static_cast<double>(q) * u_max * u_max;

    if (p == 0) {
        out.M1_analytic = out.M2_analytic = std::sqrt(input_part);
    } else {
        const auto env = lemma1_constants(companion_matrix(config.true_params));
        double b_l1 = 0.0;
        for (double bi : config.true_params.b) b_l1 += std::abs(bi);
        const double y_bound = env.M * u_max * b_l1 / (1.0 - env.h1);
        out.M1_analytic =
            std::sqrt(static_cast<double>(p) * y_bound * y_bound + input_part);

        // Worst case over the whole set: margin h bounds the spectral
        // radius, sqrt(1 + g(h)) the matrix norm.
        const double h = config.stability_margin_h;
        const double norm_bound = std::sqrt(1.0 + g_bound(h, p));
        const double eps = (1.0 - h) / (2.0 * norm_bound);
        const double h1_set = 0.5 * (1.0 + h);
        const double M_set = std::sqrt(static_cast<double>(p)) *
                             std::pow(1.0 + 2.0 / eps, p - 1);
        double b_l1_set = 0.0;
        for (int j = 0; j < q; ++j) {
            const auto idx = static_cast<std::size_t>(p + j);
            b_l1_set += config.set.kind() == ConvexSet::Kind::box
                            ? std::max(std::abs(config.set.lower()[idx]),
                                       std::abs(config.set.upper()[idx]))
                            : std::abs(config.set.center()[idx]) + config.set.radius();
        }
        const double yhat_bound = M_set * u_max * b_l1_set / (1.0 - h1_set);
        out.M2_analytic = std::sqrt(
            static_cast<double>(p) * yhat_bound * yhat_bound + input_part);
    }

    const auto inputs = detail::simulate_inputs(config, config.analysis.horizon);
    const auto phis = detail::simulate_true_regressors(config, inputs);
    for (const auto& phi : phis) {
        out.M1_empirical = std::max(out.M1_empirical, phi.norm());
    }
    for (const auto& vertex : detail::sweep_points(config.set)) {
        out.M2_empirical = std::max(
            out.M2_empirical, detail::frozen_predictor_sup(config, vertex, inputs));
    }

    out.M1 = std::min(out.M1_analytic, out.M1_empirical);
    out.M2 = std::min(out.M2_analytic, out.M2_empirical);
    return out;
}

/// Left-hand side of the sufficient convergence condition,
///   f_m delta - f_M sqrt(g(h)) M2 M (M2 + 2 M1) / (1 - h1).
/// Positive means the mean-square convergence theorem applies.
inline double condition7(const ConvergenceReport& report) {
    double penalty = 0.0;
    if (report.g_h > 0.0) {
        penalty = report.f_M * std::sqrt(report.g_h) * report.M2() *
                  report.M_mat * (report.M2() + 2.0 * report.M1()) /
                  (1.0 - report.h1);
    }
    return report.f_m * report.delta - penalty;
}

/// Rate constant eta = 2 gamma * condition7; eta > 1 puts the recursion in
/// the O(1/k) regime.
inline double eta(double gamma, const ConvergenceReport& report) {
    return 2.0 * gamma * condition7(report);
}

/// Smallest step-size constant certified by the rate theorem:
/// gamma_min = 1 / (2 condition7). Any gamma above it gives eta > 1.
inline double min_step_size(const ConvergenceReport& report) {
    const double c = condition7(report);
    if (!(c > 0.0)) {
        throw ConditionViolated(
            "min_step_size: condition is not positive, no step size certified");
    }
    return 1.0 / (2.0 * c);
}

/// Evaluates every constant of the convergence analysis for a configuration.
inline ConvergenceReport analyze(const ExperimentConfig& config) {
    validate(config);
    const int p = config.true_params.p();
    const int n = config.true_params.dim();

    ConvergenceReport report;
    report.h = config.stability_margin_h;
    report.g_h = g_bound(report.h, p);
    if (p > 0) {
        const auto env = lemma1_constants(companion_matrix(config.true_params));
        report.M_mat = env.M;
        report.h1 = env.h1;
    }
    report.u_max = input_sup(config.input);
    report.bounds = regressor_bounds(config);
    report.B = sup_norm_bound(config.set);

    const auto inputs = detail::simulate_inputs(config, config.analysis.horizon);
    report.m = config.pe_window();
    report.delta1 = check_persistent_excitation(
        std::vector<double>(inputs.begin() + config.analysis.warmup, inputs.end()),
        report.m, n);
    std::tie(report.delta, report.N) = estimate_delta(config);

    const double half = report.B * std::max(report.M1(), report.M2());
    const auto extrema = pdf_extrema(config.noise,
                                     config.sensor.threshold - half,
                                     config.sensor.threshold + half);
    report.f_m = extrema.f_m;
    report.f_M = extrema.f_M;

    report.cond7 = condition7(report);
    report.gamma = config.gamma;
    report.eta = eta(config.gamma, report);
    report.condition_ok = report.cond7 > 0.0;
    if (report.condition_ok) {
        report.gamma_min = min_step_size(report);
    }
    return report;
}

inline void to_json(nlohmann::json& j, const ConvergenceReport& r) {
    j = nlohmann::json{
        {"h", r.h},
        {"g_h", r.g_h},
        {"M_mat", r.M_mat},
        {"h1", r.h1},
        {"u_max", r.u_max},
        {"M1", r.M1()},
        {"M2", r.M2()},
        {"M1_analytic", r.bounds.M1_analytic},
        {"M1_empirical", r.bounds.M1_empirical},
        {"M2_analytic", r.bounds.M2_analytic},
        {"M2_empirical", r.bounds.M2_empirical},
        {"B", r.B},
        {"f_m", r.f_m},
        {"f_M", r.f_M},
        {"delta1", r.delta1},
        {"m", r.m},
        {"delta", r.delta},
        {"N", r.N},
        {"condition7", r.cond7},
        {"gamma", r.gamma},
        {"eta", r.eta},
        {"condition_ok", r.condition_ok},
    };
    if (r.condition_ok) {
        j["gamma_min"] = r.gamma_min;
    } else {
        j["gamma_min"] = nullptr;
    }
}

}  // namespace binquant
