#pragma once

#include "garchdiag/errors.hpp"
#include "garchdiag/psp.hpp"

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace garchdiag {

/// Outcome of one hypothesis test. `reject` is always statistic > critical_value.
struct TestReport {
    std::string name;
    double statistic = 0.0;
    double p_value = 1.0;
    double critical_value = 0.0;
    double level = 0.05;
    bool reject = false;
    std::size_t n = 0;
    std::map<std::string, std::string> provenance;
};

/**
 * @brief P(sup_{0<=u<=1} |B0(u)| > x) for a Brownian bridge B0.
 *
 * For x >= 1 uses 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 x^2); below that the
 * alternating series converges slowly, so the equivalent theta-function form
 * 1 - sqrt(2 pi)/x sum_{j>=1} exp(-(2j-1)^2 pi^2 / (8 x^2)) is used.
 * Both are truncated once terms drop under 1e-12.
 */
inline double sup_bb_pvalue(double x) {
    if (!(x > 0.0)) return 1.0;
    constexpr double tol = 1e-12;
    double s = 0.0;
    if (x >= 1.0) {
        for (int j = 1; j < 1000; ++j) {
            const double term = std::exp(-2.0 * j * j * x * x);
            s += (j % 2 == 1) ? term : -term;
            if (term < tol) break;
        }
        return std::clamp(2.0 * s, 0.0, 1.0);
    }
    const double pi2 = std::numbers::pi * std::numbers::pi;
    for (int j = 1; j < 1000; ++j) {
        const double odd = 2.0 * j - 1.0;
        const double term = std::exp(-odd * odd * pi2 / (8.0 * x * x));
        s += term;
        if (term < tol) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * s, 0.0, 1.0);
}

/// Upper-`level` point of sup|B0| by bisection on sup_bb_pvalue.
inline double sup_bb_critical_value(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "level must lie in (0,1)");
    }
    double lo = 0.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sup_bb_pvalue(mid) > level) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// chi^2(2) survival function, exp(-x/2).
inline double chi2_2_pvalue(double x) { return x <= 0.0 ? 1.0 : std::exp(-0.5 * x); }

inline double chi2_2_critical_value(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "level must lie in (0,1)");
    }
    return -2.0 * std::log(level);
}

/// Monte Carlo finite-sample 5% point of JB; only defined for n >= 100.
inline double jb_corrected_critical_value(std::size_t n) {
    if (n < 100) {
        throw Error(ErrorCode::CorrectionDomain,
                    "finite-sample JB correction needs n >= 100, got " + std::to_string(n));
    }
    const double r = 1.0 / std::sqrt(static_cast<double>(n));
    return 5.991645 - 15.17 * r + 345.9 * r * r - 3110.8 * r * r * r;
}

namespace detail {

inline std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct CusumMax {
    double value = 0.0;
    std::size_t argmax = 0;
};

// max_{1<=i<n} |v_i| over a bridge-like sequence.
inline CusumMax interior_max(const std::vector<double>& v) {
    CusumMax out;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const double a = std::abs(v[i - 1]);
        if (a > out.value) {
            out.value = a;
            out.argmax = i;
        }
    }
    return out;
}

inline TestReport sup_bb_report(std::string name, const CusumMax& m, double scale,
                                std::size_t n, double level) {
    TestReport r;
    r.name = std::move(name);
    r.n = n;
    r.level = level;
    r.statistic = m.value / scale;
    r.p_value = sup_bb_pvalue(r.statistic);
    r.critical_value = sup_bb_critical_value(level);
    r.reject = r.statistic > r.critical_value;
    r.provenance["reference"] = "sup|B0|";
    r.provenance["break_estimate"] = fmt6(static_cast<double>(m.argmax) / static_cast<double>(n));
    return r;
}

inline void require_cusum_length(std::span<const double> e) {
    if (e.size() < 2) throw Error(ErrorCode::InvalidArgument, "CUSUM tests need n >= 2");
}

}  // namespace detail

/// max_{1<=i<n} |sum_{t<=i} e_t - i mean| / (sigma_hat sqrt n); with
/// drop_scale the sigma_hat factor is omitted.
inline TestReport cusum_mean_test(std::span<const double> eps_hat, bool drop_scale = false,
                                  double level = 0.05) {
    detail::require_cusum_length(eps_hat);
    const std::size_t n = eps_hat.size();
    const auto bridge = cusum_transform(moment_psp(eps_hat, 1));
    double scale = std::sqrt(static_cast<double>(n));
    if (!drop_scale) {
        const double m = detail::mean_of(eps_hat);
        double v = 0.0;
        for (double e : eps_hat) v += (e - m) * (e - m);
        v /= static_cast<double>(n);
        if (!(v > 0.0)) throw Error(ErrorCode::DegenerateSample, "residual sample variance is zero");
        scale *= std::sqrt(v);
    }
    auto r = detail::sup_bb_report("cusum1", detail::interior_max(bridge.values), scale, n, level);
    r.provenance["k"] = "1";
    r.provenance["drop_scale"] = drop_scale ? "true" : "false";
    return r;
}

namespace detail {

inline double nu2_or_throw(std::span<const double> eps_hat) {
    const auto st = sample_stats(eps_hat);
    if (!(st.nu2_hat > 0.0)) {
        throw Error(ErrorCode::DegenerateNu2, "nu2_hat is zero (all centred squares equal)");
    }
    return st.nu2_hat;
}

}  // namespace detail

/// Uncentred squares: max_{1<=i<n} |sum_{t<=i} e_t^2 - i mean(e^2)| / (nu2_hat sqrt n).
inline TestReport cusum_var_test_1(std::span<const double> eps_hat, double level = 0.05) {
    detail::require_cusum_length(eps_hat);
    const double nu2 = detail::nu2_or_throw(eps_hat);
    const std::size_t n = eps_hat.size();
    const auto bridge = cusum_transform(moment_psp(eps_hat, 2));
    auto r = detail::sup_bb_report("cusum2_1", detail::interior_max(bridge.values),
                                   nu2 * std::sqrt(static_cast<double>(n)), n, level);
    r.provenance["k"] = "2";
    return r;
}

/// Squares centred at the residual mean:
/// max_{1<=i<n} |sum_{t<=i} (e_t - mean)^2 - i sigma_hat^2| / (nu2_hat sqrt n).
inline TestReport cusum_var_test_2(std::span<const double> eps_hat, double level = 0.05) {
    detail::require_cusum_length(eps_hat);
    const double nu2 = detail::nu2_or_throw(eps_hat);
    const std::size_t n = eps_hat.size();
    const auto bridge = cusum_transform(centered_psp(eps_hat, 2));
    auto r = detail::sup_bb_report("cusum2_2", detail::interior_max(bridge.values),
                                   nu2 * std::sqrt(static_cast<double>(n)), n, level);
    r.provenance["k"] = "2";
    return r;
}

inline constexpr std::size_t kMinJbLength = 4;

/// JB = (n/6) skew^2 + (n/24) (kurt - 3)^2 with the chi^2(2) p-value. The
/// critical value is the chi^2(2) quantile, or the finite-sample polynomial
/// (5% level only) when `finite_sample_correction` is set.
inline TestReport jarque_bera(std::span<const double> eps_hat, double level = 0.05,
                              bool finite_sample_correction = false) {
    const std::size_t n = eps_hat.size();
    if (n < kMinJbLength) {
        throw Error(ErrorCode::InvalidArgument,
                    "jarque_bera needs n >= " + std::to_string(kMinJbLength));
    }
    if (finite_sample_correction && n < 100) {
        throw Error(ErrorCode::CorrectionDomain,
                    "finite-sample JB correction needs n >= 100, got " + std::to_string(n));
    }
    const auto st = sample_stats(eps_hat);
    const double nn = static_cast<double>(n);
    TestReport r;
    r.name = "jb";
    r.n = n;
    r.level = level;
    r.statistic = (nn / 6.0) * st.skew * st.skew + (nn / 24.0) * (st.kurt - 3.0) * (st.kurt - 3.0);
    r.p_value = chi2_2_pvalue(r.statistic);
    r.critical_value = finite_sample_correction ? jb_corrected_critical_value(n)
                                                : chi2_2_critical_value(level);
    r.reject = r.statistic > r.critical_value;
    r.provenance["reference"] = "chi2(2)";
    r.provenance["skewness"] = detail::fmt6(st.skew);
    r.provenance["kurtosis"] = detail::fmt6(st.kurt);
    r.provenance["correction"] = finite_sample_correction ? "true" : "false";
    return r;
}

/// (n/sigma_gamma^2)(skew - lambda3)^2 + (n/sigma_kappa^2)(kurt - lambda4)^2, with the
/// variances built from lambda_0..lambda_8 = (1, 0, 1, lambda3, lambda4, lambda_higher...).
inline TestReport omnibus(std::span<const double> eps_hat, double lambda3, double lambda4,
                          std::span<const double> lambda_higher, double level = 0.05) {
    if (lambda_higher.size() != 4) {
        throw Error(ErrorCode::InvalidArgument, "omnibus needs lambda_5..lambda_8");
    }
    const std::vector<double> l{1.0, 0.0, 1.0, lambda3, lambda4, lambda_higher[0],
                                lambda_higher[1], lambda_higher[2], lambda_higher[3]};
    const auto var = omnibus_variances(l);
    if (!(var.sigma_gamma2 > 0.0) || !(var.sigma_kappa2 > 0.0)) {
        throw Error(ErrorCode::DegenerateVariance,
                    "sigma_gamma^2 = " + detail::fmt6(var.sigma_gamma2) +
                        ", sigma_kappa^2 = " + detail::fmt6(var.sigma_kappa2));
    }
    const std::size_t n = eps_hat.size();
    if (n < kMinJbLength) {
        throw Error(ErrorCode::InvalidArgument, "omnibus needs n >= " + std::to_string(kMinJbLength));
    }
    const auto st = sample_stats(eps_hat);
    const double nn = static_cast<double>(n);
    TestReport r;
    r.name = "omnibus";
    r.n = n;
    r.level = level;
    r.statistic = (nn / var.sigma_gamma2) * (st.skew - lambda3) * (st.skew - lambda3) +
                  (nn / var.sigma_kappa2) * (st.kurt - lambda4) * (st.kurt - lambda4);
    r.p_value = chi2_2_pvalue(r.statistic);
    r.critical_value = chi2_2_critical_value(level);
    r.reject = r.statistic > r.critical_value;
    r.provenance["reference"] = "chi2(2)";
    r.provenance["sigma_gamma2"] = detail::fmt6(var.sigma_gamma2);
    r.provenance["sigma_kappa2"] = detail::fmt6(var.sigma_kappa2);
    return r;
}

}  // namespace garchdiag
