#pragma once

#include "garchdiag/diagnostics.hpp"
#include "garchdiag/errors.hpp"
#include "garchdiag/garch_core.hpp"
#include "garchdiag/psp.hpp"
#include "garchdiag/qmle.hpp"
#include "garchdiag/variance_path.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace garchdiag {

enum class StatisticKind { Cusum1, Cusum2_1, Cusum2_2, JarqueBera };

[[nodiscard]] inline std::string_view to_string(StatisticKind s) noexcept {
    switch (s) {
        case StatisticKind::Cusum1: return "cusum1";
        case StatisticKind::Cusum2_1: return "cusum2_1";
        case StatisticKind::Cusum2_2: return "cusum2_2";
        case StatisticKind::JarqueBera: return "jb";
    }
    return "unknown";
}

inline StatisticKind parse_statistic(std::string_view s) {
    if (s == "cusum1") return StatisticKind::Cusum1;
    if (s == "cusum2_1") return StatisticKind::Cusum2_1;
    if (s == "cusum2_2") return StatisticKind::Cusum2_2;
    if (s == "jb") return StatisticKind::JarqueBera;
    throw Error(ErrorCode::InvalidArgument, "unknown statistic '" + std::string(s) + "'");
}

/// Runs one of the four residual tests at `level` (JB uses the chi^2(2) point).
inline TestReport run_statistic(StatisticKind kind, std::span<const double> eps_hat,
                                double level, bool drop_scale = false,
                                bool jb_correction = false) {
    switch (kind) {
        case StatisticKind::Cusum1: return cusum_mean_test(eps_hat, drop_scale, level);
        case StatisticKind::Cusum2_1: return cusum_var_test_1(eps_hat, level);
        case StatisticKind::Cusum2_2: return cusum_var_test_2(eps_hat, level);
        case StatisticKind::JarqueBera: return jarque_bera(eps_hat, level, jb_correction);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown statistic");
}

struct McExperimentConfig {
    GarchParams theta;
    std::vector<Scenario> scenarios{Scenario::null()};
    InnovationSpec innovation;
    std::vector<std::size_t> n_list;
    std::size_t replicates = 500;
    double level = 0.05;
    StatisticKind statistic = StatisticKind::Cusum2_2;
    std::uint64_t master_seed = 0;
    std::size_t burn_in = 1000;
    ParameterSpace space;
    FitOptions fit_options;

    void validate() const {
        if (replicates < 1) throw Error(ErrorCode::InvalidArgument, "replicates must be >= 1");
        if (n_list.empty()) throw Error(ErrorCode::InvalidArgument, "n_list is empty");
        for (auto n : n_list) {
            if (n < 100) {
                throw Error(ErrorCode::InvalidArgument,
                            "sample size " + std::to_string(n) + " is below 100");
            }
        }
        if (scenarios.empty()) throw Error(ErrorCode::InvalidArgument, "no scenarios");
        if (!(level > 0.0 && level < 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "level must lie in (0,1)");
        }
        validate_params(theta, space);
        for (const auto& s : scenarios) {
            if (s.kind == ScenarioKind::VarianceChange) validate_params(s.theta_prime, space);
        }
    }
};

struct McRow {
    std::string scenario;
    std::size_t n = 0;
    double rejection_rate = 0.0;
    double monte_carlo_se = 0.0;
    double fit_failure_rate = 0.0;
    std::size_t replicates = 0;

    bool operator==(const McRow&) const = default;
};

struct McTable {
    std::vector<McRow> rows;

    bool operator==(const McTable&) const = default;
};

struct ReplicateOutcome {
    double statistic = 0.0;
    bool reject = false;
    bool fit_converged = false;
    bool failed = false;  ///< statistic could not be computed

    bool operator==(const ReplicateOutcome&) const = default;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Calls fn(i) for i in [0, count) on `threads` workers (0 = hardware concurrency).
inline void parallel_for(std::size_t count, std::size_t threads,
                         const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(count, 1));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Seed for replicate r of (scenario, n): a splitmix64 chain over
/// master_seed, FNV-1a(scenario label), n and r.
[[nodiscard]] inline std::uint64_t replicate_seed(std::uint64_t master_seed,
                                                  std::string_view scenario, std::size_t n,
                                                  std::size_t r) {
    std::uint64_t h = detail::splitmix64(master_seed);
    h = detail::splitmix64(h ^ detail::fnv1a(scenario));
    h = detail::splitmix64(h ^ static_cast<std::uint64_t>(n));
    return detail::splitmix64(h ^ static_cast<std::uint64_t>(r));
}

/// simulate -> fit -> residuals -> statistic for one replicate.
inline ReplicateOutcome run_replicate(const McExperimentConfig& config, const Scenario& scenario,
                                      std::size_t n, std::size_t r) {
    const std::uint64_t seed = replicate_seed(config.master_seed, scenario.label(), n, r);
    ReplicateOutcome out;
    try {
        const auto path =
            simulate_scenario(config.theta, scenario, config.innovation, n, config.burn_in, seed);
        auto opts = config.fit_options;
        opts.seed = detail::splitmix64(seed);
        const auto fr = fit(path.x, config.theta.p(), config.theta.q(), config.space, opts);
        out.fit_converged = fr.converged;
        const auto res = residuals(fr.theta_hat, path.x);
        const auto report = run_statistic(config.statistic, res.eps_hat, config.level);
        out.statistic = report.statistic;
        out.reject = report.reject;
    } catch (const Error&) {
        out.failed = true;
    }
    return out;
}

inline std::vector<ReplicateOutcome> run_replicates(const McExperimentConfig& config,
                                                    const Scenario& scenario, std::size_t n,
                                                    std::size_t threads = 0) {
    std::vector<ReplicateOutcome> out(config.replicates);
    detail::parallel_for(config.replicates, threads,
                         [&](std::size_t r) { out[r] = run_replicate(config, scenario, n, r); });
    return out;
}

inline McRow summarize(const std::string& scenario, std::size_t n,
                       const std::vector<ReplicateOutcome>& outcomes) {
    McRow row;
    row.scenario = scenario;
    row.n = n;
    row.replicates = outcomes.size();
    std::size_t rejects = 0, failures = 0;
    for (const auto& o : outcomes) {
        rejects += o.reject ? 1 : 0;
        failures += (o.failed || !o.fit_converged) ? 1 : 0;
    }
    const double reps = static_cast<double>(outcomes.size());
    row.rejection_rate = static_cast<double>(rejects) / reps;
    row.monte_carlo_se = std::sqrt(row.rejection_rate * (1.0 - row.rejection_rate) / reps);
    row.fit_failure_rate = static_cast<double>(failures) / reps;
    return row;
}

/**
 * @brief Empirical rejection rates for every (scenario, n) in the config.
 *
 * Replicate seeds depend only on (master_seed, scenario, n, r), so the table
 * is identical for any worker count. Non-converged fits are kept and counted
 * in fit_failure_rate; a replicate whose statistic cannot be computed counts
 * as a failure and a non-rejection.
 */
inline McTable run_experiment(const McExperimentConfig& config, std::size_t threads = 0) {
    config.validate();
    McTable table;
    for (const auto& scenario : config.scenarios) {
        for (const auto n : config.n_list) {
            const auto outcomes = run_replicates(config, scenario, n, threads);
            table.rows.push_back(summarize(scenario.label(), n, outcomes));
        }
    }
    return table;
}

/// Linear-interpolation sample quantile (type 7).
inline double sample_quantile(std::vector<double> sorted, double prob) {
    if (sorted.empty()) throw Error(ErrorCode::InvalidArgument, "no values");
    std::sort(sorted.begin(), sorted.end());
    const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(prob, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Empirical null quantiles of the configured statistic at n_list.front().
inline std::vector<double> null_quantiles(const McExperimentConfig& config,
                                          std::span<const double> probs,
                                          std::size_t threads = 0) {
    config.validate();
    const auto outcomes = run_replicates(config, Scenario::null(), config.n_list.front(), threads);
    std::vector<double> stats;
    stats.reserve(outcomes.size());
    for (const auto& o : outcomes) {
        if (!o.failed) stats.push_back(o.statistic);
    }
    std::sort(stats.begin(), stats.end());
    std::vector<double> out;
    out.reserve(probs.size());
    for (double p : probs) out.push_back(sample_quantile(stats, p));
    return out;
}

struct CorrectionCheckConfig {
    GarchParams theta;
    InnovationSpec innovation;
    std::vector<std::size_t> n_list{1000, 4000};
    std::size_t replicates = 100;
    unsigned k = 2;
    std::uint64_t master_seed = 0;
    std::size_t burn_in = 1000;
    ParameterSpace space;
    FitOptions fit_options;
};

struct CorrectionRow {
    std::size_t n = 0;
    double median_corrected = 0.0;    ///< median over replicates of G
    double median_uncorrected = 0.0;  ///< sup_u n^{-1/2} |S_hat - S| with fitted theta
    double median_known_theta = 0.0;  ///< same gap with theta_hat = theta
    double fit_failure_rate = 0.0;
};

struct CorrectionReport {
    unsigned k = 0;
    double mu_k = 0.0;
    std::vector<CorrectionRow> rows;
};

/// E eps^k for the unit-variance innovation law.
inline double innovation_moment(const InnovationSpec& spec, unsigned k) {
    if (k % 2 == 1) return 0.0;
    const auto l = spec.family == InnovationFamily::StandardNormal
                       ? normal_lambdas(k)
                       : student_t_lambdas(spec.dof, k);
    return l[k];
}

struct CorrectionGaps {
    double corrected = 0.0;
    double uncorrected = 0.0;
    double known_theta = 0.0;
    bool fit_converged = false;
};

/**
 * @brief One replicate of the estimation-effect decomposition.
 *
 * With D_i = sum_{t<=i} (eps_hat_t^k - eps_t^k) and
 * c = <psi_hat, sqrt(n)(theta_hat - theta)>, returns
 * sup_i |D_i / sqrt(n) + k (i/n) mu_k c / 2| alongside sup_i |D_i| / sqrt(n).
 * psi_hat is the ergodic average of grad log sigma^2 at the true theta.
 */
inline CorrectionGaps correction_gaps(const CorrectionCheckConfig& cfg, std::size_t n,
                                      std::size_t r, double mu_k) {
    const std::uint64_t seed = replicate_seed(cfg.master_seed, "correction", n, r);
    const auto path = simulate(cfg.theta, cfg.innovation, n, cfg.burn_in, seed);
    auto opts = cfg.fit_options;
    opts.seed = detail::splitmix64(seed);
    const auto fr = fit(path.x, cfg.theta.p(), cfg.theta.q(), cfg.space, opts);
    const auto res = residuals(fr.theta_hat, path.x);
    const auto known = residuals(cfg.theta, path.x);
    const auto psi = estimate_psi(cfg.theta, path.x, 100, 1e-6, cfg.space);

    const double rootn = std::sqrt(static_cast<double>(n));
    const auto th = cfg.theta.to_vector();
    const auto hat = fr.theta_hat.to_vector();
    double inner = 0.0;
    for (std::size_t j = 0; j < th.size(); ++j) inner += psi.psi[j] * rootn * (hat[j] - th[j]);

    CorrectionGaps g;
    g.fit_converged = fr.converged;
    double d_fit = 0.0, d_known = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double e = detail::ipow(path.eps[i], cfg.k);
        d_fit += detail::ipow(res.eps_hat[i - 1], cfg.k) - e;
        d_known += detail::ipow(known.eps_hat[i - 1], cfg.k) - e;
        const double u = static_cast<double>(i) / static_cast<double>(n);
        g.uncorrected = std::max(g.uncorrected, std::abs(d_fit) / rootn);
        g.known_theta = std::max(g.known_theta, std::abs(d_known) / rootn);
        g.corrected = std::max(
            g.corrected, std::abs(d_fit / rootn + cfg.k * u * mu_k / 2.0 * inner));
    }
    return g;
}

inline CorrectionReport correction_term_check(const CorrectionCheckConfig& cfg,
                                              std::size_t threads = 0) {
    validate_params(cfg.theta, cfg.space);
    if (cfg.k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    CorrectionReport rep;
    rep.k = cfg.k;
    rep.mu_k = innovation_moment(cfg.innovation, cfg.k);
    for (const auto n : cfg.n_list) {
        std::vector<CorrectionGaps> gaps(cfg.replicates);
        detail::parallel_for(cfg.replicates, threads, [&](std::size_t r) {
            gaps[r] = correction_gaps(cfg, n, r, rep.mu_k);
        });
        std::vector<double> c, u, k;
        std::size_t failures = 0;
        for (const auto& g : gaps) {
            c.push_back(g.corrected);
            u.push_back(g.uncorrected);
            k.push_back(g.known_theta);
            failures += g.fit_converged ? 0 : 1;
        }
        rep.rows.push_back({n, detail::median(c), detail::median(u), detail::median(k),
                            static_cast<double>(failures) / static_cast<double>(cfg.replicates)});
    }
    return rep;
}

}  // namespace garchdiag
