#pragma once

#include "garchdiag/errors.hpp"
#include "garchdiag/garch_core.hpp"
#include "garchdiag/variance_path.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace garchdiag {

struct FitResult {
    GarchParams theta_hat;
    double loglik = 0.0;
    std::size_t iterations = 0;  ///< objective evaluations over all restarts
    bool converged = false;
    std::size_t n = 0;
};

struct FitOptions {
    std::size_t restarts = 3;
    double ftol = 1e-8;
    std::size_t max_evals = 2000;  ///< per restart
    double initial_step = 0.5;     ///< simplex edge in transformed coordinates
    double restart_spread = 0.3;
    std::uint64_t seed = 0;
};

inline constexpr std::size_t kMinFitLength = 50;

/// Gaussian quasi log-likelihood -1/2 sum_t [log s_t + X_t^2 / s_t] on the
/// truncated variance path.
inline double quasi_log_likelihood(const GarchParams& u, std::span<const double> x) {
    const auto s2 = sigma2_hat_path(u, x);
    double acc = 0.0;
    for (std::size_t t = 1; t < x.size(); ++t) {
        const double v = s2[t - 1];
        acc += std::log(v) + x[t] * x[t] / v;
    }
    return -0.5 * acc;
}

/// alpha0 = 0.1 * var(X), alpha_i = 0.05 / p, beta_j = 0.8 / q, pulled into the box.
inline GarchParams default_init(std::span<const double> x, std::size_t p, std::size_t q,
                                const ParameterSpace& space = {}) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= n;
    const double margin = 10.0 * space.lower;
    GarchParams init;
    init.alpha0 = std::clamp(0.1 * var, margin, space.upper / 2);
    init.alpha.assign(p, std::max(0.05 / static_cast<double>(std::max<std::size_t>(p, 1)), margin));
    init.beta.assign(q, std::max(0.8 / static_cast<double>(std::max<std::size_t>(q, 1)), margin));
    return init;
}

namespace detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double logit_clamped(double f) {
    f = std::clamp(f, 1e-12, 1.0 - 1e-12);
    return std::log(f / (1.0 - f));
}

/**
 * Unconstrained coordinates for the box.
 *  - alpha0, alpha_i: log-scale position inside [log lower, log upper], via logistic.
 *  - beta: z_B sets the total in [q*lower, rho0]; z_2..z_q are softmax weights
 *    (first weight pinned) splitting the excess over q*lower.
 */
class BoxTransform {
public:
    BoxTransform(std::size_t p, std::size_t q, const ParameterSpace& space)
        : p_(p), q_(q), space_(space),
          log_lo_(std::log(space.lower)), log_hi_(std::log(space.upper)) {}

    [[nodiscard]] std::size_t dim() const noexcept { return 1 + p_ + q_; }

    [[nodiscard]] GarchParams to_params(std::span<const double> z) const {
        GarchParams out;
        out.alpha0 = positive(z[0]);
        out.alpha.resize(p_);
        for (std::size_t i = 0; i < p_; ++i) out.alpha[i] = positive(z[1 + i]);
        out.beta.resize(q_);
        if (q_ > 0) {
            const double qlo = static_cast<double>(q_) * space_.lower;
            const double total = qlo + (space_.rho0 - qlo) * sigmoid(z[1 + p_]);
            std::vector<double> w(q_, 1.0);
            double zmax = 0.0;
            for (std::size_t j = 1; j < q_; ++j) zmax = std::max(zmax, z[1 + p_ + j]);
            double wsum = 0.0;
            for (std::size_t j = 0; j < q_; ++j) {
                w[j] = std::exp((j == 0 ? 0.0 : z[1 + p_ + j]) - zmax);
                wsum += w[j];
            }
            for (std::size_t j = 0; j < q_; ++j) {
                out.beta[j] = std::clamp(space_.lower + (total - qlo) * w[j] / wsum,
                                         space_.lower, space_.upper);
            }
        }
        return out;
    }

    [[nodiscard]] std::vector<double> to_unconstrained(const GarchParams& theta) const {
        std::vector<double> z(dim());
        z[0] = unpositive(theta.alpha0);
        for (std::size_t i = 0; i < p_; ++i) z[1 + i] = unpositive(theta.alpha[i]);
        if (q_ > 0) {
            const double qlo = static_cast<double>(q_) * space_.lower;
            z[1 + p_] = logit_clamped((theta.beta_sum() - qlo) / (space_.rho0 - qlo));
            const double first = std::max(theta.beta[0] - space_.lower, 1e-300);
            for (std::size_t j = 1; j < q_; ++j) {
                z[1 + p_ + j] =
                    std::log(std::max(theta.beta[j] - space_.lower, 1e-300) / first);
            }
        }
        return z;
    }

private:
    [[nodiscard]] double positive(double z) const {
        const double v = std::exp(log_lo_ + (log_hi_ - log_lo_) * sigmoid(z));
        return std::clamp(v, space_.lower, space_.upper);
    }
    [[nodiscard]] double unpositive(double v) const {
        v = std::clamp(v, space_.lower, space_.upper);
        return logit_clamped((std::log(v) - log_lo_) / (log_hi_ - log_lo_));
    }

    std::size_t p_;
    std::size_t q_;
    ParameterSpace space_;
    double log_lo_;
    double log_hi_;
};

struct SimplexResult {
    std::vector<double> best;
    double value = std::numeric_limits<double>::infinity();
    std::size_t evals = 0;
    bool converged = false;
};

// Nelder-Mead minimisation with the usual coefficients (1, 2, 0.5, 0.5).
// Stops when 2|f_worst - f_best| <= ftol (|f_worst| + |f_best|) or the budget runs out.
inline SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                                 std::vector<double> start, double step, double ftol,
                                 std::size_t max_evals) {
    const std::size_t d = start.size();
    std::vector<std::vector<double>> pts(d + 1, start);
    for (std::size_t i = 0; i < d; ++i) pts[i + 1][i] += step;
    std::vector<double> vals(d + 1);
    SimplexResult res;
    auto eval = [&](std::span<const double> z) {
        ++res.evals;
        const double v = f(z);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    for (std::size_t i = 0; i <= d; ++i) vals[i] = eval(pts[i]);

    std::vector<std::size_t> order(d + 1);
    std::vector<double> centroid(d), trial(d), trial2(d);
    while (true) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t lo = order.front();
        const std::size_t hi = order.back();
        const std::size_t nh = order[d - 1];
        const double spread = std::abs(vals[hi] - vals[lo]);
        if (std::isfinite(vals[hi]) &&
            2.0 * spread <= ftol * (std::abs(vals[hi]) + std::abs(vals[lo])) + 1e-300) {
            res.converged = true;
            break;
        }
        if (res.evals >= max_evals) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == hi) continue;
            for (std::size_t k = 0; k < d; ++k) centroid[k] += pts[i][k];
        }
        for (auto& c : centroid) c /= static_cast<double>(d);

        for (std::size_t k = 0; k < d; ++k) trial[k] = centroid[k] + (centroid[k] - pts[hi][k]);
        const double fr = eval(trial);
        if (fr < vals[lo]) {
            for (std::size_t k = 0; k < d; ++k)
                trial2[k] = centroid[k] + 2.0 * (centroid[k] - pts[hi][k]);
            const double fe = eval(trial2);
            if (fe < fr) {
                pts[hi] = trial2;
                vals[hi] = fe;
            } else {
                pts[hi] = trial;
                vals[hi] = fr;
            }
            continue;
        }
        if (fr < vals[nh]) {
            pts[hi] = trial;
            vals[hi] = fr;
            continue;
        }
        const bool outside = fr < vals[hi];
        for (std::size_t k = 0; k < d; ++k) {
            trial2[k] = outside ? centroid[k] + 0.5 * (trial[k] - centroid[k])
                                : centroid[k] + 0.5 * (pts[hi][k] - centroid[k]);
        }
        const double fc = eval(trial2);
        if (fc < std::min(fr, vals[hi])) {
            pts[hi] = trial2;
            vals[hi] = fc;
            continue;
        }
        if (outside) {
            pts[hi] = trial;
            vals[hi] = fr;
        }
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == lo) continue;
            for (std::size_t k = 0; k < d; ++k) pts[i][k] = pts[lo][k] + 0.5 * (pts[i][k] - pts[lo][k]);
            vals[i] = eval(pts[i]);
        }
    }
    const std::size_t best =
        static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    res.best = pts[best];
    res.value = vals[best];
    return res;
}

}  // namespace detail

/**
 * @brief Gaussian QMLE of theta over the box `space`.
 *
 * One Nelder-Mead run from `init`, then `opts.restarts` runs from the best
 * point so far, each jittered by N(0, restart_spread^2) in transformed
 * coordinates. A budget overrun is reported through `converged = false`
 * rather than thrown.
 */
inline FitResult fit(std::span<const double> x, const GarchParams& init,
                     const ParameterSpace& space = {}, const FitOptions& opts = {}) {
    if (x.size() < kMinFitLength + 1) {
        throw Error(ErrorCode::SeriesTooShort, "fit needs n >= " + std::to_string(kMinFitLength) +
                                                   ", got " +
                                                   std::to_string(x.empty() ? 0 : x.size() - 1));
    }
    validate_params(init, space);
    const detail::BoxTransform tr(init.p(), init.q(), space);
    const auto objective = [&](std::span<const double> z) {
        return -quasi_log_likelihood(tr.to_params(z), x);
    };

    const double init_ll = quasi_log_likelihood(init, x);
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> jitter(0.0, opts.restart_spread);

    auto best = detail::nelder_mead(objective, tr.to_unconstrained(init), opts.initial_step,
                                    opts.ftol, opts.max_evals);
    std::size_t evals = best.evals;
    for (std::size_t r = 0; r < opts.restarts; ++r) {
        auto start = best.best;
        for (auto& z : start) z += jitter(rng);
        auto run = detail::nelder_mead(objective, std::move(start), opts.initial_step, opts.ftol,
                                       opts.max_evals);
        evals += run.evals;
        if (run.value < best.value) best = std::move(run);
    }

    FitResult out;
    out.n = x.size() - 1;
    out.iterations = evals;
    out.converged = best.converged;
    out.theta_hat = tr.to_params(best.best);
    out.loglik = quasi_log_likelihood(out.theta_hat, x);
    if (!(out.loglik >= init_ll)) {
        out.theta_hat = init;
        out.loglik = init_ll;
    }
    return out;
}

/// Fit from default_init.
inline FitResult fit(std::span<const double> x, std::size_t p = 1, std::size_t q = 1,
                     const ParameterSpace& space = {}, const FitOptions& opts = {}) {
    return fit(x, default_init(x, p, q, space), space, opts);
}

}  // namespace garchdiag
