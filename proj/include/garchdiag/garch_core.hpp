#pragma once

#include "garchdiag/errors.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace garchdiag {

/**
 * @brief GARCH(p,q) coefficient vector theta = (alpha0, alpha_1..alpha_p, beta_1..beta_q).
 *
 * The model orders are the lengths of `alpha` and `beta`. Flat coordinate
 * order is always (alpha0, alpha_1..alpha_p, beta_1..beta_q).
 */
struct GarchParams {
    double alpha0 = 0.0;
    std::vector<double> alpha;
    std::vector<double> beta;

    [[nodiscard]] std::size_t p() const noexcept { return alpha.size(); }
    [[nodiscard]] std::size_t q() const noexcept { return beta.size(); }
    [[nodiscard]] std::size_t dim() const noexcept { return 1 + alpha.size() + beta.size(); }

    [[nodiscard]] double alpha_sum() const noexcept {
        return std::accumulate(alpha.begin(), alpha.end(), 0.0);
    }
    [[nodiscard]] double beta_sum() const noexcept {
        return std::accumulate(beta.begin(), beta.end(), 0.0);
    }

    [[nodiscard]] std::vector<double> to_vector() const {
        std::vector<double> v;
        v.reserve(dim());
        v.push_back(alpha0);
        v.insert(v.end(), alpha.begin(), alpha.end());
        v.insert(v.end(), beta.begin(), beta.end());
        return v;
    }

    [[nodiscard]] static GarchParams from_vector(std::span<const double> v, std::size_t p,
                                                 std::size_t q) {
        if (v.size() != 1 + p + q) {
            throw Error(ErrorCode::InvalidArgument,
                        "expected " + std::to_string(1 + p + q) + " coordinates, got " +
                            std::to_string(v.size()));
        }
        GarchParams out;
        out.alpha0 = v[0];
        out.alpha.assign(v.begin() + 1, v.begin() + 1 + static_cast<std::ptrdiff_t>(p));
        out.beta.assign(v.begin() + 1 + static_cast<std::ptrdiff_t>(p), v.end());
        return out;
    }

    /// Name of flat coordinate `idx`, e.g. "alpha0", "alpha[2]", "beta[1]".
    [[nodiscard]] std::string coordinate_name(std::size_t idx) const {
        if (idx == 0) return "alpha0";
        if (idx <= p()) return "alpha[" + std::to_string(idx) + "]";
        return "beta[" + std::to_string(idx - p()) + "]";
    }

    bool operator==(const GarchParams&) const = default;
};

/// Compact box-constrained parameter set with t_1 + ... + t_q <= rho0.
struct ParameterSpace {
    double rho0 = 0.999;
    double lower = 1e-8;
    double upper = 10.0;

    void check(std::size_t q) const {
        if (!(lower > 0.0 && lower < upper)) {
            throw Error(ErrorCode::InvalidArgument, "parameter space needs 0 < lower < upper");
        }
        if (!(rho0 > 0.0 && rho0 < 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "parameter space needs 0 < rho0 < 1");
        }
        if (!(static_cast<double>(q) * lower < rho0)) {
            throw Error(ErrorCode::InvalidArgument, "parameter space needs q*lower < rho0");
        }
    }
};

/// Returns `params` unchanged when it lies in the interior of `space`.
inline GarchParams validate_params(const GarchParams& params, const ParameterSpace& space = {}) {
    space.check(params.q());
    const auto v = params.to_vector();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw Error(ErrorCode::OutsideBox, params.coordinate_name(i) + " is not finite");
        }
        const bool bad = (i == 0) ? !(v[i] > 0.0) : (v[i] < 0.0);
        if (bad) {
            throw Error(ErrorCode::NegativeCoefficient,
                        params.coordinate_name(i) + " = " + std::to_string(v[i]));
        }
    }
    if (params.beta_sum() > space.rho0) {
        throw Error(ErrorCode::BetaSumExceedsRho0,
                    "sum(beta) = " + std::to_string(params.beta_sum()) + " > rho0 = " +
                        std::to_string(space.rho0) + " (beta[1.." + std::to_string(params.q()) +
                        "])");
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > space.lower && v[i] < space.upper)) {
            throw Error(ErrorCode::OutsideBox, params.coordinate_name(i) + " = " +
                                                   std::to_string(v[i]) + " not in (" +
                                                   std::to_string(space.lower) + ", " +
                                                   std::to_string(space.upper) + ")");
        }
    }
    return params;
}

enum class InnovationFamily { StandardNormal, StudentT };

/// Innovation law. Student-t variates are rescaled to unit variance.
struct InnovationSpec {
    InnovationFamily family = InnovationFamily::StandardNormal;
    double dof = 0.0;

    [[nodiscard]] static InnovationSpec normal() { return {}; }
    [[nodiscard]] static InnovationSpec student_t(double dof) {
        return {InnovationFamily::StudentT, dof};
    }

    [[nodiscard]] std::string label() const {
        if (family == InnovationFamily::StandardNormal) return "normal";
        std::string d = std::to_string(dof);
        d.erase(d.find_last_not_of('0') + 1);
        if (!d.empty() && d.back() == '.') d.pop_back();
        return "t(" + d + ")";
    }

    bool operator==(const InnovationSpec&) const = default;
};

/// i.i.d. mean-zero, unit-variance draws; deterministic in `seed`.
inline std::vector<double> sample_innovations(const InnovationSpec& spec, std::size_t n,
                                              std::uint64_t seed) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "sample_innovations needs n >= 1");
    std::mt19937_64 rng(seed);
    std::vector<double> out(n);
    if (spec.family == InnovationFamily::StandardNormal) {
        std::normal_distribution<double> dist(0.0, 1.0);
        for (auto& e : out) e = dist(rng);
        return out;
    }
    if (!(spec.dof > 2.0)) {
        throw Error(ErrorCode::DofTooSmall,
                    "Student-t dof = " + std::to_string(spec.dof) + " must exceed 2");
    }
    std::student_t_distribution<double> dist(spec.dof);
    const double scale = std::sqrt((spec.dof - 2.0) / spec.dof);
    for (auto& e : out) e = scale * dist(rng);
    return out;
}

enum class ScenarioKind { Null, MeanChange, VarianceChange };

/// Data-generating scenario: the null, or a single break at [n u*].
struct Scenario {
    ScenarioKind kind = ScenarioKind::Null;
    double mu = 0.0;
    double u_star = 0.5;
    GarchParams theta_prime;

    [[nodiscard]] static Scenario null() { return {}; }
    [[nodiscard]] static Scenario mean_change(double mu, double u_star) {
        return {ScenarioKind::MeanChange, mu, u_star, {}};
    }
    [[nodiscard]] static Scenario variance_change(GarchParams theta_prime, double u_star) {
        return {ScenarioKind::VarianceChange, 0.0, u_star, std::move(theta_prime)};
    }

    [[nodiscard]] std::string label() const;

    bool operator==(const Scenario&) const = default;
};

namespace detail {

inline std::string format_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace detail

inline std::string Scenario::label() const {
    switch (kind) {
        case ScenarioKind::Null: return "null";
        case ScenarioKind::MeanChange:
            return "mean-change(mu=" + detail::format_coord(mu) +
                   ";u=" + detail::format_coord(u_star) + ")";
        case ScenarioKind::VarianceChange: {
            std::string s = "variance-change(theta'=";
            const auto v = theta_prime.to_vector();
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) s += ';';
                s += detail::format_coord(v[i]);
            }
            return s + ";u=" + detail::format_coord(u_star) + ")";
        }
    }
    return "unknown";
}

/// Retained path X_0..X_n with the matching sigma^2_t and true innovations.
struct SimulatedPath {
    std::vector<double> x;
    std::vector<double> sigma2;
    std::vector<double> eps;
    Scenario scenario;
    std::uint64_t seed = 0;

    /// Number of observations after X_0.
    [[nodiscard]] std::size_t n() const noexcept { return x.empty() ? 0 : x.size() - 1; }
};

/// Integer part [n u] of a break fraction.
[[nodiscard]] inline std::size_t break_index(std::size_t n, double u_star) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * u_star + 1e-9));
}

namespace detail {

inline double unconditional_variance(const GarchParams& p) {
    const double persistence = p.alpha_sum() + p.beta_sum();
    if (!(persistence < 1.0)) {
        throw Error(ErrorCode::NonstationaryParams,
                    "sum(alpha) + sum(beta) = " + std::to_string(persistence) + " >= 1");
    }
    return p.alpha0 / (1.0 - persistence);
}

// Runs the conditional-variance recursion over burn_in + n + 1 steps. Retained
// index t = s - burn_in; `post` drives sigma^2_t for t > brk and, for a mean
// change, X_t picks up the shift mu. The variance recursion always sees the
// unshifted sigma_t * eps_t, i.e. (X - mu)^2 for post-break lags.
inline SimulatedPath run_recursion(const GarchParams& pre, const GarchParams& post, double mu,
                                   std::size_t brk, const InnovationSpec& spec, std::size_t n,
                                   std::size_t burn_in, std::uint64_t seed) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "simulate needs n >= 1");
    if (pre.p() != post.p() || pre.q() != post.q()) {
        throw Error(ErrorCode::InvalidArgument, "pre- and post-break orders differ");
    }
    const double v0 = unconditional_variance(pre);
    (void)unconditional_variance(post);

    const std::size_t total = burn_in + n + 1;
    const auto eps = sample_innovations(spec, total, seed);
    std::vector<double> y(total);
    std::vector<double> s2(total);
    const std::size_t p = pre.p();
    const std::size_t q = pre.q();

    for (std::size_t s = 0; s < total; ++s) {
        const bool after = s >= burn_in && (s - burn_in) > brk;
        const GarchParams& th = after ? post : pre;
        double v;
        if (s == 0) {
            v = v0;
        } else {
            v = th.alpha0;
            for (std::size_t i = 1; i <= p; ++i) {
                if (i <= s) v += th.alpha[i - 1] * y[s - i] * y[s - i];
            }
            for (std::size_t j = 1; j <= q; ++j) {
                v += th.beta[j - 1] * (j <= s ? s2[s - j] : v0);
            }
        }
        s2[s] = v;
        y[s] = std::sqrt(v) * eps[s];
    }

    SimulatedPath path;
    path.seed = seed;
    path.x.assign(y.begin() + static_cast<std::ptrdiff_t>(burn_in), y.end());
    path.sigma2.assign(s2.begin() + static_cast<std::ptrdiff_t>(burn_in), s2.end());
    path.eps.assign(eps.begin() + static_cast<std::ptrdiff_t>(burn_in), eps.end());
    if (mu != 0.0) {
        for (std::size_t t = brk + 1; t <= n; ++t) path.x[t] += mu;
    }
    return path;
}

inline void check_break(double u_star) {
    if (!(u_star > 0.0 && u_star < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "u_star must lie in (0,1)");
    }
}

}  // namespace detail

/// Null path. sigma^2 starts at the unconditional variance with zero X lags,
/// and the first `burn_in` steps are dropped.
inline SimulatedPath simulate(const GarchParams& params, const InnovationSpec& spec,
                              std::size_t n, std::size_t burn_in, std::uint64_t seed) {
    auto path = detail::run_recursion(params, params, 0.0, n, spec, n, burn_in, seed);
    path.scenario = Scenario::null();
    return path;
}

inline SimulatedPath simulate_mean_change(const GarchParams& params, const InnovationSpec& spec,
                                          double mu, double u_star, std::size_t n,
                                          std::size_t burn_in, std::uint64_t seed) {
    detail::check_break(u_star);
    auto path = detail::run_recursion(params, params, mu, break_index(n, u_star), spec, n,
                                      burn_in, seed);
    path.scenario = Scenario::mean_change(mu, u_star);
    return path;
}

inline SimulatedPath simulate_variance_change(const GarchParams& params,
                                              const GarchParams& params_prime,
                                              const InnovationSpec& spec, double u_star,
                                              std::size_t n, std::size_t burn_in,
                                              std::uint64_t seed) {
    detail::check_break(u_star);
    auto path = detail::run_recursion(params, params_prime, 0.0, break_index(n, u_star), spec,
                                      n, burn_in, seed);
    path.scenario = Scenario::variance_change(params_prime, u_star);
    return path;
}

inline SimulatedPath simulate_scenario(const GarchParams& params, const Scenario& scenario,
                                       const InnovationSpec& spec, std::size_t n,
                                       std::size_t burn_in, std::uint64_t seed) {
    switch (scenario.kind) {
        case ScenarioKind::Null: return simulate(params, spec, n, burn_in, seed);
        case ScenarioKind::MeanChange:
            return simulate_mean_change(params, spec, scenario.mu, scenario.u_star, n, burn_in,
                                        seed);
        case ScenarioKind::VarianceChange:
            return simulate_variance_change(params, scenario.theta_prime, spec, scenario.u_star,
                                            n, burn_in, seed);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown scenario");
}

}  // namespace garchdiag
