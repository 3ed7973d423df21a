#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "binquant/arma_model.hpp"
#include "binquant/errors.hpp"

namespace binquant {

/// Convex compact parameter domain: an axis-aligned box or a Euclidean
/// ball. Projection is exact and closed-form for both.
class ConvexSet {
public:
    enum class Kind { box, ball };

    static ConvexSet box(std::vector<double> lo, std::vector<double> hi) {
        if (lo.size() != hi.size() || lo.empty()) {
            throw DomainError("ConvexSet::box: lo and hi must match and be non-empty");
        }
        for (std::size_t i = 0; i < lo.size(); ++i) {
            if (!(lo[i] <= hi[i])) {
                throw DomainError("ConvexSet::box: lo <= hi must hold componentwise");
            }
        }
        ConvexSet s;
        s.kind_ = Kind::box;
        s.lo_ = std::move(lo);
        s.hi_ = std::move(hi);
        return s;
    }

    static ConvexSet ball(std::vector<double> center, double radius) {
        if (center.empty()) {
            throw DomainError("ConvexSet::ball: center must be non-empty");
        }
        if (!(radius > 0.0)) {
            throw DomainError("ConvexSet::ball: radius must be positive");
        }
        ConvexSet s;
        s.kind_ = Kind::ball;
        s.lo_ = std::move(center);
        s.radius_ = radius;
        return s;
    }

    Kind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return lo_.size(); }

    const std::vector<double>& lower() const { return lo_; }
    const std::vector<double>& upper() const { return hi_; }
    const std::vector<double>& center() const { return lo_; }
    double radius() const noexcept { return radius_; }

private:
    ConvexSet() = default;

    Kind kind_ = Kind::box;
    std::vector<double> lo_;  // box lower bounds, or ball center
    std::vector<double> hi_;  // box upper bounds (unused for ball)
    double radius_ = 0.0;
};

/// Euclidean projection onto the set: componentwise clamp for a box,
/// radial scaling for a ball. Identity on members, idempotent.
inline std::vector<double> project(const std::vector<double>& x,
                                   const ConvexSet& set) {
    if (x.size() != set.dim()) {
        throw DomainError("project: dimension mismatch");
    }
    std::vector<double> out(x.size());
    if (set.kind() == ConvexSet::Kind::box) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            out[i] = std::min(std::max(x[i], set.lower()[i]), set.upper()[i]);
        }
        return out;
    }
    double d2 = 0.0;
    std::vector<double> diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        diff[i] = x[i] - set.center()[i];
        d2 += diff[i] * diff[i];
    }
    const double d = std::sqrt(d2);
    if (d <= set.radius()) {
        return x;
    }
    // Shrink until the stored representation verifiably lies inside, so
    // projecting twice returns the first result bit for bit.
    double scale = set.radius() / d;
    for (int attempt = 0; attempt < 64; ++attempt) {
        double r2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            out[i] = set.center()[i] + scale * diff[i];
            const double e = out[i] - set.center()[i];
            r2 += e * e;
        }
        if (std::sqrt(r2) <= set.radius()) break;
        scale *= 1.0 - 4.0 * std::numeric_limits<double>::epsilon();
    }
    return out;
}

inline bool contains(const std::vector<double>& x, const ConvexSet& set,
                     double tol = 0.0) {
    if (x.size() != set.dim()) return false;
    if (set.kind() == ConvexSet::Kind::box) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] < set.lower()[i] - tol || x[i] > set.upper()[i] + tol) {
                return false;
            }
        }
        return true;
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double di = x[i] - set.center()[i];
        d2 += di * di;
    }
    return std::sqrt(d2) <= set.radius() + tol;
}

/// B = sup over the set of the Euclidean norm. The norm is convex, so a
/// box attains it at a vertex; per coordinate that is max(|lo|, |hi|).
inline double sup_norm_bound(const ConvexSet& set) {
    if (set.kind() == ConvexSet::Kind::box) {
        double s = 0.0;
        for (std::size_t i = 0; i < set.dim(); ++i) {
            const double m = std::max(std::abs(set.lower()[i]),
                                      std::abs(set.upper()[i]));
            s += m * m;
        }
        return std::sqrt(s);
    }
    double c2 = 0.0;
    for (double ci : set.center()) c2 += ci * ci;
    return std::sqrt(c2) + set.radius();
}

namespace detail {

// Deterministic low-discrepancy point in [0,1)^dim (Halton sequence).
inline std::vector<double> halton_point(int index, int dim) {
    static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29,
                                     31, 37, 41, 43, 47, 53};
    std::vector<double> x(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) {
        const int base = primes[d % 16];
        double f = 1.0, r = 0.0;
        int i = index + 1;
        while (i > 0) {
            f /= base;
            r += f * (i % base);
            i /= base;
        }
        x[static_cast<std::size_t>(d)] = r;
    }
    return x;
}

}  // namespace detail

struct StabilityReport {
    bool ok = false;
    double worst_rho = 0.0;
    std::vector<double> witness;  ///< full-dimension parameter of the worst point
};

/// Checks that the AR part of every tested point of the set keeps the
/// companion spectral radius below h. A box is tested at all 2^p vertices
/// of its AR sub-box (exact for p = 1) plus quasi-random interior points;
/// a ball at axis extremes plus quasi-random boundary and interior points.
/// The verdict is advisory for p >= 2: a clean report samples, it does not
/// certify.
inline StabilityReport verify_stability_subset(const ConvexSet& set, int ar_order,
                                               double h, int samples = 256) {
    if (!(h > 0.0 && h < 1.0)) {
        throw DomainError("verify_stability_subset: h must lie in (0, 1)");
    }
    const int p = ar_order;
    if (p < 0 || static_cast<std::size_t>(p) > set.dim()) {
        throw DomainError("verify_stability_subset: invalid AR order");
    }

    StabilityReport report;
    if (p == 0) {
        report.ok = true;
        return report;
    }
    if (p > 16) {
        throw DomainError("verify_stability_subset: AR order too large");
    }

    auto embed = [&](const std::vector<double>& a_part) {
        std::vector<double> full(set.dim());
        for (int i = 0; i < p; ++i) full[static_cast<std::size_t>(i)] = a_part[static_cast<std::size_t>(i)];
        for (std::size_t i = static_cast<std::size_t>(p); i < set.dim(); ++i) {
            full[i] = set.kind() == ConvexSet::Kind::box
                          ? 0.5 * (set.lower()[i] + set.upper()[i])
                          : set.center()[i];
        }
        return full;
    };

    std::vector<std::vector<double>> candidates;
    if (set.kind() == ConvexSet::Kind::box) {
        for (unsigned mask = 0; mask < (1u << p); ++mask) {
            std::vector<double> a(static_cast<std::size_t>(p));
            for (int i = 0; i < p; ++i) {
                a[static_cast<std::size_t>(i)] = (mask >> i) & 1u
                                                     ? set.upper()[static_cast<std::size_t>(i)]
                                                     : set.lower()[static_cast<std::size_t>(i)];
            }
            candidates.push_back(std::move(a));
        }
        for (int s = 0; s < samples; ++s) {
            const auto t = detail::halton_point(s, p);
            std::vector<double> a(static_cast<std::size_t>(p));
            for (int i = 0; i < p; ++i) {
                const auto idx = static_cast<std::size_t>(i);
                a[idx] = set.lower()[idx] + t[idx] * (set.upper()[idx] - set.lower()[idx]);
            }
            candidates.push_back(std::move(a));
        }
    } else {
        // The AR marginal of a ball is the ball of the same radius around
        // the first p center coordinates.
        const double r = set.radius();
        for (int i = 0; i < p; ++i) {
            for (double sign : {-1.0, 1.0}) {
                std::vector<double> a(set.center().begin(), set.center().begin() + p);
                a[static_cast<std::size_t>(i)] += sign * r;
                candidates.push_back(std::move(a));
            }
        }
        for (int s = 0; s < samples; ++s) {
            const auto t = detail::halton_point(s, p);
            std::vector<double> a(static_cast<std::size_t>(p));
            double n2 = 0.0;
            for (int i = 0; i < p; ++i) {
                const auto idx = static_cast<std::size_t>(i);
                a[idx] = 2.0 * t[idx] - 1.0;
                n2 += a[idx] * a[idx];
            }
            // Alternate interior points and radial pushes to the boundary.
            const double n = std::sqrt(n2);
            const double scale = (n > 1.0 || (s % 2 == 0 && n > 0.0)) ? 1.0 / n : 1.0;
            for (int i = 0; i < p; ++i) {
                const auto idx = static_cast<std::size_t>(i);
                a[idx] = set.center()[idx] + r * scale * a[idx];
            }
            candidates.push_back(std::move(a));
        }
    }

    report.ok = true;
    for (auto& a : candidates) {
        const double rho = spectral_radius(companion_matrix(ArmaParams{a, {0.0}}));
        if (rho > report.worst_rho || report.witness.empty()) {
            report.worst_rho = rho;
            report.witness = embed(a);
        }
        if (!(rho < h)) report.ok = false;
    }
    return report;
}

}  // namespace binquant
