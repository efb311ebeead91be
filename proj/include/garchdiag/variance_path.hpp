#pragma once

#include "garchdiag/errors.hpp"
#include "garchdiag/garch_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace garchdiag {

/// Coefficients c_0..c_m of sigma^2_t(u) = c_0(u) + sum_{i>=1} c_i(u) X^2_{t-i}.
struct CoefficientVector {
    std::vector<double> c;
    GarchParams params_used;
};

/**
 * @brief Residuals eps_hat_t = X_t / sigma_hat_t for t = 1..n.
 *
 * `eps_hat[t-1]` and `sigma2_hat[t-1]` belong to time t; `x_ref` is the full
 * input X_0..X_n.
 */
struct ResidualSeries {
    std::vector<double> eps_hat;
    std::vector<double> sigma2_hat;
    GarchParams theta_hat;
    std::vector<double> x_ref;
};

struct PsiEstimate {
    std::vector<double> psi;
    std::size_t n_used = 0;
};

namespace detail {

inline void require_beta_sum_below_one(const GarchParams& params) {
    if (!(params.beta_sum() < 1.0)) {
        throw Error(ErrorCode::BetaSumAtLeastOne,
                    "sum(beta) = " + std::to_string(params.beta_sum()));
    }
}

inline void require_observations(std::span<const double> x) {
    if (x.size() < 2) {
        throw Error(ErrorCode::SeriesTooShort, "need X_0 plus at least one observation");
    }
}

}  // namespace detail

/**
 * @brief c_0(u) = s_0 / (1 - sum t_j) and c_1..c_m.
 *
 * Both published branches (q >= p and q < p) and the tail recursion for
 * i > max(p,q) collapse to one rule:
 *   c_i = s_i [i <= p] + sum_{j=1}^{min(q, i-1)} t_j c_{i-j},   i >= 1.
 */
inline CoefficientVector c_coefficients(const GarchParams& params, std::size_t m) {
    detail::require_beta_sum_below_one(params);
    CoefficientVector out;
    out.params_used = params;
    out.c.resize(m + 1);
    out.c[0] = params.alpha0 / (1.0 - params.beta_sum());
    const std::size_t p = params.p();
    const std::size_t q = params.q();
    for (std::size_t i = 1; i <= m; ++i) {
        double ci = (i <= p) ? params.alpha[i - 1] : 0.0;
        const std::size_t jmax = std::min(q, i - 1);
        for (std::size_t j = 1; j <= jmax; ++j) ci += params.beta[j - 1] * out.c[i - j];
        out.c[i] = ci;
    }
    return out;
}

/// Coefficients up to the first index past max(p,q) where the last
/// max(q,1) entries all fall below `rel_tol * c_0`, or up to `max_index`.
inline CoefficientVector c_coefficients_to_horizon(const GarchParams& params,
                                                   std::size_t max_index,
                                                   double rel_tol = 1e-14) {
    detail::require_beta_sum_below_one(params);
    const std::size_t r = std::max(params.p(), params.q());
    const std::size_t window = std::max<std::size_t>(params.q(), 1);
    std::size_t m = std::min<std::size_t>(max_index, std::max<std::size_t>(r, 64));
    for (;;) {
        auto cv = c_coefficients(params, m);
        const double cut = rel_tol * cv.c[0];
        for (std::size_t i = r + 1; i <= m; ++i) {
            bool small = i >= window;
            for (std::size_t w = 0; small && w < window; ++w) small = cv.c[i - w] < cut;
            if (small) {
                cv.c.resize(i + 1);
                return cv;
            }
        }
        if (m >= max_index) return cv;
        m = std::min(max_index, 2 * m);
    }
}

/**
 * @brief Truncated conditional variances sigma_hat^2_1..sigma_hat^2_n.
 *
 * sigma_hat^2_t = c_0 + sum_{i=1}^{t} c_i X^2_{t-i}. The weighted sum
 * S_t obeys S_t = sum_{i<=min(p,t)} s_i X^2_{t-i} + sum_{j<=min(q,t-1)} t_j S_{t-j}
 * with S_0 = 0, which reproduces the full truncated convolution exactly in
 * O(n (p+q)).
 */
inline std::vector<double> sigma2_hat_path(const GarchParams& theta_hat,
                                           std::span<const double> x) {
    detail::require_beta_sum_below_one(theta_hat);
    detail::require_observations(x);
    const std::size_t n = x.size() - 1;
    const std::size_t p = theta_hat.p();
    const std::size_t q = theta_hat.q();
    const double c0 = theta_hat.alpha0 / (1.0 - theta_hat.beta_sum());

    std::vector<double> weighted(n + 1, 0.0);  // weighted[t] = S_t
    std::vector<double> out(n);
    for (std::size_t t = 1; t <= n; ++t) {
        double s = 0.0;
        const std::size_t imax = std::min(p, t);
        for (std::size_t i = 1; i <= imax; ++i) s += theta_hat.alpha[i - 1] * x[t - i] * x[t - i];
        const std::size_t jmax = std::min(q, t - 1);
        for (std::size_t j = 1; j <= jmax; ++j) s += theta_hat.beta[j - 1] * weighted[t - j];
        weighted[t] = s;
        out[t - 1] = c0 + s;
    }
    return out;
}

/// Same quantity as sigma2_hat_path by direct convolution with c_i up to the
/// coefficient horizon; O(n * horizon).
inline std::vector<double> sigma2_hat_path_convolution(const GarchParams& theta_hat,
                                                       std::span<const double> x) {
    detail::require_observations(x);
    const std::size_t n = x.size() - 1;
    const auto cv = c_coefficients_to_horizon(theta_hat, n);
    const std::size_t horizon = cv.c.size() - 1;
    std::vector<double> out(n);
    for (std::size_t t = 1; t <= n; ++t) {
        double v = cv.c[0];
        const std::size_t imax = std::min(t, horizon);
        for (std::size_t i = 1; i <= imax; ++i) v += cv.c[i] * x[t - i] * x[t - i];
        out[t - 1] = v;
    }
    return out;
}

inline ResidualSeries residuals(const GarchParams& theta_hat, std::span<const double> x) {
    ResidualSeries out;
    out.sigma2_hat = sigma2_hat_path(theta_hat, x);
    out.eps_hat.resize(out.sigma2_hat.size());
    for (std::size_t t = 1; t < x.size(); ++t) {
        out.eps_hat[t - 1] = x[t] / std::sqrt(out.sigma2_hat[t - 1]);
    }
    out.theta_hat = theta_hat;
    out.x_ref.assign(x.begin(), x.end());
    return out;
}

namespace detail {

// Per-coordinate central-difference increments h_j = step * theta_j, checked
// against the parameter space.
inline std::vector<double> fd_increments(const GarchParams& theta, double step,
                                         const ParameterSpace& space) {
    if (!(step > 0.0)) throw Error(ErrorCode::StepTooLarge, "step must be positive");
    const auto v = theta.to_vector();
    std::vector<double> h(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        h[j] = step * std::abs(v[j]);
        if (!(v[j] - h[j] >= space.lower && v[j] + h[j] <= space.upper) || h[j] == 0.0) {
            throw Error(ErrorCode::StepTooLarge,
                        theta.coordinate_name(j) + " +/- step leaves the parameter space");
        }
        if (j > theta.p() && theta.beta_sum() + h[j] > space.rho0) {
            throw Error(ErrorCode::StepTooLarge,
                        theta.coordinate_name(j) + " + step pushes sum(beta) past rho0");
        }
    }
    return h;
}

inline GarchParams bumped(const GarchParams& theta, std::size_t j, double delta) {
    auto v = theta.to_vector();
    v[j] += delta;
    return GarchParams::from_vector(v, theta.p(), theta.q());
}

}  // namespace detail

/**
 * @brief Central finite-difference gradient of log sigma_hat^2_t at `theta`.
 *
 * Coordinate order (alpha0, alpha_1..alpha_p, beta_1..beta_q); `step` is
 * relative to each coordinate. `t` runs from 1 to n.
 */
inline std::vector<double> grad_log_sigma2(const GarchParams& theta, std::span<const double> x,
                                           std::size_t t, double step = 1e-6,
                                           const ParameterSpace& space = {}) {
    detail::require_observations(x);
    if (t < 1 || t >= x.size()) {
        throw Error(ErrorCode::InvalidArgument, "t must lie in 1..n");
    }
    const auto h = detail::fd_increments(theta, step, space);
    const auto prefix = x.first(t + 1);
    std::vector<double> g(theta.dim());
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double up = sigma2_hat_path(detail::bumped(theta, j, h[j]), prefix)[t - 1];
        const double dn = sigma2_hat_path(detail::bumped(theta, j, -h[j]), prefix)[t - 1];
        g[j] = (std::log(up) - std::log(dn)) / (2.0 * h[j]);
    }
    return g;
}

/// Average of grad_log_sigma2 over t = warmup+1..n.
inline PsiEstimate estimate_psi(const GarchParams& theta_hat, std::span<const double> x,
                                std::size_t warmup = 100, double step = 1e-6,
                                const ParameterSpace& space = {}) {
    detail::require_observations(x);
    const std::size_t n = x.size() - 1;
    if (n <= warmup) {
        throw Error(ErrorCode::SeriesTooShort, "n = " + std::to_string(n) +
                                                   " leaves nothing after warm-up of " +
                                                   std::to_string(warmup));
    }
    const auto h = detail::fd_increments(theta_hat, step, space);
    PsiEstimate out;
    out.psi.assign(theta_hat.dim(), 0.0);
    out.n_used = n - warmup;
    for (std::size_t j = 0; j < out.psi.size(); ++j) {
        const auto up = sigma2_hat_path(detail::bumped(theta_hat, j, h[j]), x);
        const auto dn = sigma2_hat_path(detail::bumped(theta_hat, j, -h[j]), x);
        double acc = 0.0;
        for (std::size_t t = warmup + 1; t <= n; ++t) {
            acc += (std::log(up[t - 1]) - std::log(dn[t - 1])) / (2.0 * h[j]);
        }
        out.psi[j] = acc / static_cast<double>(out.n_used);
    }
    return out;
}

}  // namespace garchdiag
