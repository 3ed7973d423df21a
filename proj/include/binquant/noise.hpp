#pragma once

#include <cmath>
#include <string>

#include "binquant/errors.hpp"
#include "binquant/rng.hpp"

namespace binquant {

enum class NoiseFamily { gaussian, laplace, uniform };

inline std::string to_string(NoiseFamily f) {
    switch (f) {
        case NoiseFamily::gaussian: return "gaussian";
        case NoiseFamily::laplace: return "laplace";
        case NoiseFamily::uniform: return "uniform";
    }
    return "?";
}

/// Zero-mean noise with known distribution: a closed enumeration of
/// families (gaussian / laplace / centered uniform) so the density has a
/// computable minimum on any compact interval inside the support.
class NoiseModel {
public:
    static NoiseModel gaussian(double sigma) {
        return NoiseModel(NoiseFamily::gaussian, sigma);
    }
    static NoiseModel laplace(double scale) {
        return NoiseModel(NoiseFamily::laplace, scale);
    }
    static NoiseModel uniform(double half_width) {
        return NoiseModel(NoiseFamily::uniform, half_width);
    }

    NoiseFamily family() const noexcept { return family_; }

    /// sigma for gaussian, b for laplace, half-width for uniform.
    double scale() const noexcept { return scale_; }

    double variance() const noexcept {
        switch (family_) {
            case NoiseFamily::gaussian: return scale_ * scale_;
            case NoiseFamily::laplace: return 2.0 * scale_ * scale_;
            case NoiseFamily::uniform: return scale_ * scale_ / 3.0;
        }
        return 0.0;
    }

    double cdf(double x) const {
        switch (family_) {
            case NoiseFamily::gaussian:
                return 0.5 * std::erfc(-x / (scale_ * kSqrt2));
            case NoiseFamily::laplace:
                return x < 0.0 ? 0.5 * std::exp(x / scale_)
                               : 1.0 - 0.5 * std::exp(-x / scale_);
            case NoiseFamily::uniform: {
                if (x <= -scale_) return 0.0;
                if (x >= scale_) return 1.0;
                return (x + scale_) / (2.0 * scale_);
            }
        }
        return 0.0;
    }

    double pdf(double x) const {
        switch (family_) {
            case NoiseFamily::gaussian: {
                const double t = x / scale_;
                return std::exp(-0.5 * t * t) / (scale_ * kSqrt2Pi);
            }
            case NoiseFamily::laplace:
                return std::exp(-std::abs(x) / scale_) / (2.0 * scale_);
            case NoiseFamily::uniform:
                return std::abs(x) <= scale_ ? 1.0 / (2.0 * scale_) : 0.0;
        }
        return 0.0;
    }

    /// One i.i.d. draw. The transforms consume a fixed number of uniforms
    /// per draw, so a stream replays identically on every platform.
    double sample(RngStream& rng) const {
        switch (family_) {
            case NoiseFamily::gaussian: {
                const double u1 = rng.uniform_open01();
                const double u2 = rng.uniform01();
                return scale_ * std::sqrt(-2.0 * std::log(u1)) *
                       std::cos(2.0 * kPi * u2);
            }
            case NoiseFamily::laplace: {
                const double u = rng.uniform_open01();
                return u <= 0.5 ? scale_ * std::log(2.0 * u)
                                : -scale_ * std::log(2.0 * (1.0 - u));
            }
            case NoiseFamily::uniform:
                return scale_ * (2.0 * rng.uniform01() - 1.0);
        }
        return 0.0;
    }

private:
    NoiseModel(NoiseFamily f, double s) : family_(f), scale_(s) {
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw DomainError("NoiseModel: scale must be positive and finite");
        }
    }

    static constexpr double kPi = 3.14159265358979323846;
    static constexpr double kSqrt2 = 1.41421356237309504880;
    static constexpr double kSqrt2Pi = 2.50662827463100050242;

    NoiseFamily family_;
    double scale_;
};

/// Fixed-threshold binary sensor s = I{z <= threshold}.
struct BinarySensor {
    double threshold = 0.0;
};

inline bool quantize(double z, const BinarySensor& sensor) {
    if (std::isnan(z)) {
        throw DomainError("quantize: z is NaN");
    }
    return z <= sensor.threshold;
}

struct DensityExtrema {
    double f_m;  ///< minimum of the density on the interval
    double f_M;  ///< maximum of the density on the interval
};

/// Extrema of the density on [lo, hi]. All supported families are unimodal
/// with mode 0, so the maximum sits at the point of the interval closest to
/// 0 and the minimum at one of the endpoints.
inline DensityExtrema pdf_extrema(const NoiseModel& noise, double lo, double hi) {
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw DomainError("pdf_extrema: need finite lo <= hi");
    }
    const double mode = std::min(std::max(0.0, lo), hi);
    double f_M = noise.pdf(mode);
    double f_m = std::min(noise.pdf(lo), noise.pdf(hi));
    if (noise.family() == NoiseFamily::uniform) {
        // The density is discontinuous at +-half_width; an interval that
        // leaves the support contains points of zero density.
        const double w = noise.scale();
        if (lo < -w || hi > w) f_m = 0.0;
    }
    return DensityExtrema{f_m, f_M};
}

/// General-purpose extrema by grid search plus golden-section refinement.
/// Not needed for the closed family enumeration; kept as an independent
/// route for cross-checking pdf_extrema.
inline DensityExtrema pdf_extrema_grid(const NoiseModel& noise, double lo,
                                       double hi, double tol = 1e-9) {
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw DomainError("pdf_extrema_grid: need finite lo <= hi");
    }
    constexpr int kGrid = 512;
    const double span = hi - lo;
    auto at = [&](int i) { return lo + span * static_cast<double>(i) / kGrid; };

    auto refine = [&](double a, double b, bool maximize) {
        const double inv_phi = 0.6180339887498949;
        double x1 = b - inv_phi * (b - a);
        double x2 = a + inv_phi * (b - a);
        double f1 = noise.pdf(x1), f2 = noise.pdf(x2);
        while (b - a > tol) {
            const bool move_left = maximize ? (f1 > f2) : (f1 < f2);
            if (move_left) {
                b = x2; x2 = x1; f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = noise.pdf(x1);
            } else {
                a = x1; x1 = x2; f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = noise.pdf(x2);
            }
        }
        return noise.pdf(0.5 * (a + b));
    };

    int imin = 0, imax = 0;
    double fmin = noise.pdf(lo), fmax = fmin;
    for (int i = 1; i <= kGrid; ++i) {
        const double f = noise.pdf(at(i));
        if (f < fmin) { fmin = f; imin = i; }
        if (f > fmax) { fmax = f; imax = i; }
    }
    if (span > 0.0) {
        const double cell = span / kGrid;
        fmin = std::min(fmin, refine(std::max(lo, at(imin) - cell),
                                     std::min(hi, at(imin) + cell), false));
        fmax = std::max(fmax, refine(std::max(lo, at(imax) - cell),
                                     std::min(hi, at(imax) + cell), true));
    }
    return DensityExtrema{fmin, fmax};
}

}  // namespace binquant
