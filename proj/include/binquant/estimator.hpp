#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "binquant/arma_model.hpp"
#include "binquant/errors.hpp"
#include "binquant/noise.hpp"
#include "binquant/projection.hpp"

namespace binquant {

/// Which estimate feeds the stored output prediction yhat_k.
///
/// post_update pairs yhat_k with theta_k (the estimate produced in the same
/// step); pre_update pairs it with theta_{k-1}. post_update is the default:
/// the prediction index then always equals the estimate index.
enum class PredictorTiming { post_update, pre_update };

/// Online identifier for the binary-observation ARMA plant.
///
/// Each call to update() performs one step of the recursive projection
/// algorithm,
///
///   theta_k = Proj( theta_{k-1} + (gamma / k) phi_k
///                   (F(C - phi_k^T theta_{k-1}) - s_k) ),
///
/// where phi_k = [yhat_{k-1},...,yhat_{k-p}, u_k,...,u_{k-q+1}] replaces the
/// unobservable outputs with the estimator's own predictions, F is the known
/// noise distribution and s_k the binary observation. After the parameter
/// step the output prediction yhat_k is stored for future regressors.
///
/// The state is a single-owner value: copying it yields an independent
/// estimator, and there is no shared mutable state behind it, so one
/// estimator per Monte Carlo trial can run on any thread.
class Estimator {
public:
    Estimator(std::vector<double> theta0, ConvexSet set, double gamma,
              NoiseModel noise, BinarySensor sensor, int ar_order,
              int input_order, PredictorTiming timing = PredictorTiming::post_update)
        : set_(std::move(set)),
          noise_(std::move(noise)),
          sensor_(sensor),
          gamma_(gamma),
          p_(ar_order),
          q_(input_order),
          timing_(timing) {
        if (!(gamma > 0.0)) {
            throw DomainError("Estimator: gamma must be positive");
        }
        if (p_ < 0 || q_ < 1) {
            throw DomainError("Estimator: need p >= 0 and q >= 1");
        }
        if (theta0.size() != static_cast<std::size_t>(p_ + q_) ||
            set_.dim() != theta0.size()) {
            throw DomainError("Estimator: theta0 and set must have dimension p + q");
        }
        theta_ = project(theta0, set_);
        yhat_hist_.assign(static_cast<std::size_t>(p_), 0.0);
        u_hist_.assign(static_cast<std::size_t>(q_ - 1), 0.0);
    }

    /// phi_k built from the stored predictions and inputs plus the current
    /// input: [yhat_{k-1},...,yhat_{k-p}, u_k,...,u_{k-q+1}].
    std::vector<double> regressor(double u_k) const {
        std::vector<double> phi;
        phi.reserve(yhat_hist_.size() + 1 + u_hist_.size());
        phi.insert(phi.end(), yhat_hist_.begin(), yhat_hist_.end());
        phi.push_back(u_k);
        phi.insert(phi.end(), u_hist_.begin(), u_hist_.end());
        return phi;
    }

    /// One algorithm step. The per-step parameter motion is at most
    /// (gamma / k) ||phi_k|| because |F - s| <= 1 and the projection is
    /// non-expansive.
    void update(double u_k, bool s_k) {
        const std::vector<double> phi = regressor(u_k);
        const double pre_prediction = detail::dot(phi, theta_);
        const double innovation =
            noise_.cdf(sensor_.threshold - pre_prediction) - (s_k ? 1.0 : 0.0);
        const double step = gamma_ / static_cast<double>(k_ + 1);
        std::vector<double> candidate(theta_.size());
        for (std::size_t i = 0; i < theta_.size(); ++i) {
            candidate[i] = theta_[i] + step * phi[i] * innovation;
        }
        theta_ = project(candidate, set_);
        last_yhat_ = timing_ == PredictorTiming::post_update
                         ? detail::dot(phi, theta_)
                         : pre_prediction;
        detail::push_newest(yhat_hist_, last_yhat_);
        detail::push_newest(u_hist_, u_k);
        ++k_;
    }

    /// Most recent output prediction yhat_k. Bounded for all k because the
    /// estimate never leaves the (stability-respecting) set.
    double predict_output() const {
        if (k_ == 0) {
            throw StateError("predict_output: no update performed yet");
        }
        return last_yhat_;
    }

    const std::vector<double>& theta_hat() const noexcept { return theta_; }
    std::int64_t step_count() const noexcept { return k_; }
    int ar_order() const noexcept { return p_; }
    int input_order() const noexcept { return q_; }
    double gamma() const noexcept { return gamma_; }
    const ConvexSet& set() const noexcept { return set_; }

private:
    ConvexSet set_;
    NoiseModel noise_;
    BinarySensor sensor_;
    double gamma_;
    int p_;
    int q_;
    PredictorTiming timing_;

    std::vector<double> theta_;
    std::vector<double> yhat_hist_;  // yhat_{k-1} ... yhat_{k-p}
    std::vector<double> u_hist_;     // u_{k-1} ... u_{k-q+1}
    double last_yhat_ = 0.0;
    std::int64_t k_ = 0;
};

}  // namespace binquant
