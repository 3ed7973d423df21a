#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "binquant/errors.hpp"

namespace binquant {

/// Parameter vector theta = [a_1..a_p, b_1..b_q] of the scalar ARMA plant
///
///   y_k = a_1 y_{k-1} + ... + a_p y_{k-p} + b_1 u_k + ... + b_q u_{k-q+1}.
///
/// p = 0 is the explicit FIR degenerate mode (no feedback part).
struct ArmaParams {
    std::vector<double> a;  ///< AR coefficients a_1..a_p
    std::vector<double> b;  ///< input coefficients b_1..b_q

    int p() const noexcept { return static_cast<int>(a.size()); }
    int q() const noexcept { return static_cast<int>(b.size()); }
    int dim() const noexcept { return p() + q(); }

    /// theta as one flat vector, AR part first.
    std::vector<double> theta() const {
        std::vector<double> t(a);
        t.insert(t.end(), b.begin(), b.end());
        return t;
    }
};

/// p x p companion matrix: first row a_1..a_p, ones on the subdiagonal.
/// Its eigenvalues are the reciprocals of the roots of 1 - z A(z).
struct CompanionMatrix {
    Eigen::MatrixXd entries;

    int order() const noexcept { return static_cast<int>(entries.rows()); }
};

inline CompanionMatrix companion_matrix(const ArmaParams& params) {
    const int p = params.p();
    if (p == 0) {
        throw DegenerateFir("companion_matrix: p = 0, no AR part");
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
    for (int j = 0; j < p; ++j) {
        m(0, j) = params.a[static_cast<std::size_t>(j)];
    }
    for (int i = 1; i < p; ++i) {
        m(i, i - 1) = 1.0;
    }
    return CompanionMatrix{std::move(m)};
}

/// All eigenvalues of the companion matrix (QR iteration through Eigen).
inline std::vector<std::complex<double>> eigenvalues(const CompanionMatrix& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m.entries,
                                               /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigenvalues: QR iteration did not converge");
    }
    std::vector<std::complex<double>> out(static_cast<std::size_t>(m.order()));
    for (int i = 0; i < m.order(); ++i) {
        out[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    }
    return out;
}

inline double spectral_radius(const CompanionMatrix& m) {
    double rho = 0.0;
    for (const auto& lambda : eigenvalues(m)) {
        rho = std::max(rho, std::abs(lambda));
    }
    return rho;
}

/// Spectral radius of the AR part; 0 for the FIR mode p = 0.
inline double spectral_radius(const ArmaParams& params) {
    if (params.p() == 0) return 0.0;
    return spectral_radius(companion_matrix(params));
}

/// Euclidean operator norm ||A|| (largest singular value).
inline double matrix_norm(const CompanionMatrix& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.entries);
    return svd.singularValues()(0);
}

/// g(h) = sum_{i=1..p} C(p,i)^2 h^{2i}: the known upper bound on
/// sum a_i^2 when every companion eigenvalue has modulus below h.
/// The first term is p^2 h^2, the last h^{2p}; p = 0 gives 0.
inline double g_bound(double h, int p) {
    if (!(h > 0.0 && h < 1.0)) {
        throw DomainError("g_bound: h must lie in (0, 1)");
    }
    if (p < 0) {
        throw DomainError("g_bound: p must be non-negative");
    }
    double sum = 0.0;
    double binom = 1.0;  // C(p, i), updated multiplicatively
    double h2i = 1.0;
    for (int i = 1; i <= p; ++i) {
        binom *= static_cast<double>(p - i + 1) / static_cast<double>(i);
        h2i *= h * h;
        sum += binom * binom * h2i;
    }
    return sum;
}

/// Constants (M, h1) with ||A^k|| <= M h1^k for all k >= 0.
struct Lemma1Constants {
    double M;
    double h1;
};

/// Computes the matrix-power envelope constants. The default policy picks
/// epsilon = (1 - rho) / (2 ||A||), giving h1 = (1 + rho) / 2 < 1; a caller
/// may supply an explicit epsilon instead (h1 = rho + epsilon ||A|| must stay
/// below 1). M = sqrt(p) (1 + 2/epsilon)^(p-1).
inline Lemma1Constants lemma1_constants(
    const CompanionMatrix& m, std::optional<double> epsilon = std::nullopt) {
    const double rho = spectral_radius(m);
    if (rho >= 1.0) {
        throw UnstableSystem("lemma1_constants: spectral radius >= 1");
    }
    const double norm = matrix_norm(m);
    double eps;
    if (epsilon.has_value()) {
        eps = *epsilon;
        if (!(eps > 0.0)) {
            throw DomainError("lemma1_constants: epsilon must be positive");
        }
    } else {
        eps = norm > 0.0 ? (1.0 - rho) / (2.0 * norm) : 1.0;
    }
    const double h1 = rho + eps * norm;
    if (h1 >= 1.0) {
        throw DomainError("lemma1_constants: chosen epsilon gives h1 >= 1");
    }
    const int p = m.order();
    const double M =
        std::sqrt(static_cast<double>(p)) * std::pow(1.0 + 2.0 / eps, p - 1);
    return Lemma1Constants{M, h1};
}

/// Ring-buffer state of the true plant: the last p outputs and the last
/// q - 1 inputs, newest first, zero-initialized at k = 0.
struct PlantState {
    std::vector<double> y_hist;  ///< y_{k-1} ... y_{k-p}
    std::vector<double> u_hist;  ///< u_{k-1} ... u_{k-q+1}
    std::int64_t k = 0;
};

inline PlantState make_plant_state(const ArmaParams& params) {
    PlantState s;
    s.y_hist.assign(static_cast<std::size_t>(params.p()), 0.0);
    s.u_hist.assign(static_cast<std::size_t>(std::max(params.q() - 1, 0)), 0.0);
    return s;
}

/// True regressor phi_k = [y_{k-1},...,y_{k-p}, u_k,...,u_{k-q+1}].
inline std::vector<double> plant_regressor(const PlantState& state, double u_k) {
    std::vector<double> phi;
    phi.reserve(state.y_hist.size() + 1 + state.u_hist.size());
    phi.insert(phi.end(), state.y_hist.begin(), state.y_hist.end());
    phi.push_back(u_k);
    phi.insert(phi.end(), state.u_hist.begin(), state.u_hist.end());
    return phi;
}

namespace detail {

inline void push_newest(std::vector<double>& hist, double value) {
    if (hist.empty()) return;
    for (std::size_t i = hist.size() - 1; i > 0; --i) {
        hist[i] = hist[i - 1];
    }
    hist[0] = value;
}

inline double dot(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

}  // namespace detail

struct PlantOutput {
    double y;  ///< noise-free output y_k = phi_k^T theta
    double z;  ///< measured value z_k = y_k + d_k
    bool s;    ///< binary observation s_k = I{z_k <= threshold}
};

/// Advances the plant one step: y_k = phi_k^T theta, z_k = y_k + d_k,
/// s_k = 1 iff z_k <= threshold (inclusive). Total on any valid state.
inline PlantOutput plant_step(PlantState& state, const ArmaParams& params,
                              double u_k, double d_k, double threshold) {
    const std::vector<double> phi = plant_regressor(state, u_k);
    const double y = detail::dot(phi, params.theta());
    const double z = y + d_k;
    detail::push_newest(state.y_hist, y);
    detail::push_newest(state.u_hist, u_k);
    ++state.k;
    return PlantOutput{y, z, z <= threshold};
}

}  // namespace binquant
