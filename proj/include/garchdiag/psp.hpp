#pragma once

#include "garchdiag/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace garchdiag {

enum class ProcessKind { RawS, CenteredT, Cusum, SelfNormalized };

/**
 * @brief Right-continuous step function on [0,1] stored at the grid i/n.
 *
 * `values[i-1]` is the value at u = i/n; the value at u < 1/n is 0.
 */
struct StepProcess {
    std::vector<double> values;
    unsigned k = 1;
    ProcessKind kind = ProcessKind::RawS;

    [[nodiscard]] std::size_t n() const noexcept { return values.size(); }

    [[nodiscard]] double at(double u) const {
        if (values.empty()) return 0.0;
        const double nu = std::floor(static_cast<double>(n()) * std::clamp(u, 0.0, 1.0) + 1e-12);
        const auto i = static_cast<std::size_t>(nu);
        return i == 0 ? 0.0 : values[std::min(i, n()) - 1];
    }

    [[nodiscard]] double sup_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

inline constexpr unsigned kMaxMomentOrder = 8;

/// Residual moment summary; every average uses divisor n.
struct SampleStats {
    std::size_t n = 0;
    double mean = 0.0;
    double var = 0.0;                                  ///< sigma_hat^2_(n)
    std::array<double, kMaxMomentOrder + 1> mu_hat{};  ///< raw moments, mu_hat[0] = 1
    std::array<double, kMaxMomentOrder + 1> lambda_hat{};
    double nu2_hat = 0.0;
    double skew = 0.0;
    double kurt = 0.0;
};

namespace detail {

inline double ipow(double x, unsigned k) {
    double r = 1.0;
    for (unsigned i = 0; i < k; ++i) r *= x;
    return r;
}

inline double mean_of(std::span<const double> e) {
    return std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
}

inline void require_order(unsigned k) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "moment order k must be >= 1");
}

}  // namespace detail

/// v_i = sum_{t<=i} eps_hat_t^k.
inline StepProcess moment_psp(std::span<const double> eps_hat, unsigned k) {
    detail::require_order(k);
    StepProcess out{std::vector<double>(eps_hat.size()), k, ProcessKind::RawS};
    double acc = 0.0;
    for (std::size_t i = 0; i < eps_hat.size(); ++i) {
        acc += detail::ipow(eps_hat[i], k);
        out.values[i] = acc;
    }
    return out;
}

/// v_i = sum_{t<=i} (eps_hat_t - mean)^k, mean over the full sample. For k = 1
/// the last value is set to exactly 0.
inline StepProcess centered_psp(std::span<const double> eps_hat, unsigned k) {
    detail::require_order(k);
    StepProcess out{std::vector<double>(eps_hat.size()), k, ProcessKind::CenteredT};
    if (eps_hat.empty()) return out;
    const double m = detail::mean_of(eps_hat);
    double acc = 0.0;
    for (std::size_t i = 0; i < eps_hat.size(); ++i) {
        acc += detail::ipow(eps_hat[i] - m, k);
        out.values[i] = acc;
    }
    if (k == 1) out.values.back() = 0.0;
    return out;
}

/// v_i <- v_i - (i/n) v_n.
inline StepProcess cusum_transform(const StepProcess& s) {
    StepProcess out = s;
    out.kind = ProcessKind::Cusum;
    const std::size_t n = s.n();
    if (n == 0) return out;
    const double end = s.values.back();
    for (std::size_t i = 1; i < n; ++i) {
        out.values[i - 1] = s.values[i - 1] - (static_cast<double>(i) / static_cast<double>(n)) * end;
    }
    out.values.back() = 0.0;
    return out;
}

inline SampleStats sample_stats(std::span<const double> eps_hat) {
    if (eps_hat.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "sample_stats needs n >= 2");
    }
    SampleStats st;
    st.n = eps_hat.size();
    const double n = static_cast<double>(st.n);
    st.mean = detail::mean_of(eps_hat);

    std::array<double, kMaxMomentOrder + 1> raw{};
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double e : eps_hat) {
        double pw = 1.0;
        for (unsigned k = 1; k <= kMaxMomentOrder; ++k) {
            pw *= e;
            raw[k] += pw;
        }
        const double d = e - st.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    st.mu_hat[0] = 1.0;
    for (unsigned k = 1; k <= kMaxMomentOrder; ++k) st.mu_hat[k] = raw[k] / n;
    st.var = m2 / n;
    if (!(st.var > 0.0)) {
        throw Error(ErrorCode::DegenerateSample, "residual sample variance is zero");
    }
    const double sd = std::sqrt(st.var);
    for (unsigned k = 0; k <= kMaxMomentOrder; ++k) st.lambda_hat[k] = st.mu_hat[k] / detail::ipow(sd, k);

    double nu = 0.0;
    for (double e : eps_hat) {
        const double d = (e - st.mean) * (e - st.mean) - st.var;
        nu += d * d;
    }
    st.nu2_hat = std::sqrt(nu / n);
    st.skew = (m3 / n) / (st.var * sd);
    st.kurt = (m4 / n) / (st.var * st.var);
    return st;
}

/// v_i = (T_hat^(k)(i/n) / sigma_hat^k - i * lambda_k_ref) / sqrt(n).
inline StepProcess self_normalized_psp(std::span<const double> eps_hat, unsigned k,
                                       double lambda_k_ref) {
    const auto st = sample_stats(eps_hat);
    auto t = centered_psp(eps_hat, k);
    const double scale = detail::ipow(std::sqrt(st.var), k);
    const double rootn = std::sqrt(static_cast<double>(st.n));
    for (std::size_t i = 1; i <= t.n(); ++i) {
        t.values[i - 1] = (t.values[i - 1] / scale - static_cast<double>(i) * lambda_k_ref) / rootn;
    }
    t.kind = ProcessKind::SelfNormalized;
    return t;
}

/**
 * @brief Order k and standardised moments lambda_0, lambda_1, ...
 *
 * The covariance formula reads lambda up to index max(2k, k+2, 4).
 */
struct GaussianCovSpec {
    unsigned k = 1;
    std::vector<double> lambda;

    [[nodiscard]] std::size_t required_size() const {
        return std::max<std::size_t>({2u * k, k + 2u, 4u}) + 1;
    }
};

/// Limit covariance E B^(k)(u) B^(k)(v) of the self-normalised process.
inline double bk_covariance(const GaussianCovSpec& spec, double u, double v) {
    detail::require_order(spec.k);
    if (spec.lambda.size() < spec.required_size()) {
        throw Error(ErrorCode::InvalidArgument,
                    "bk_covariance needs lambda_0..lambda_" +
                        std::to_string(spec.required_size() - 1));
    }
    const auto& l = spec.lambda;
    const double k = spec.k;
    const std::size_t ki = spec.k;
    const double uv = u * v;
    const double lk = l[ki];
    return (l[2 * ki] - lk * lk) * std::min(u, v) +
           k * l[ki - 1] * (k * l[ki - 1] + k * lk * l[3] - 2.0 * l[ki + 1]) * uv +
           k * lk * ((1.0 - k / 4.0) * lk + k * lk * l[4] / 4.0 - l[ki + 2]) * uv;
}

struct OmnibusVariances {
    double sigma_gamma2 = 0.0;
    double sigma_kappa2 = 0.0;
};

/// sigma_gamma^2 = E B^(3)(1)^2 and sigma_kappa^2 = E B^(4)(1)^2 from lambda_0..lambda_8.
inline OmnibusVariances omnibus_variances(std::span<const double> l) {
    if (l.size() < 9) {
        throw Error(ErrorCode::InvalidArgument, "omnibus_variances needs lambda_0..lambda_8");
    }
    OmnibusVariances out;
    out.sigma_gamma2 = (l[6] - l[3] * l[3]) + 3.0 * (3.0 + 3.0 * l[3] * l[3] - 2.0 * l[4]) +
                       3.0 * l[3] * (l[3] / 4.0 + 3.0 * l[3] * l[4] / 4.0 - l[5]);
    out.sigma_kappa2 = (l[8] - l[4] * l[4]) + 4.0 * l[3] * (4.0 * l[3] + 4.0 * l[3] * l[4] - 2.0 * l[5]) +
                       4.0 * l[4] * (l[4] * l[4] - l[6]);
    return out;
}

/// Standard normal lambda_0..lambda_m: odd ones vanish, lambda_{2j} = (2j-1)!!.
inline std::vector<double> normal_lambdas(std::size_t m = kMaxMomentOrder) {
    std::vector<double> l(m + 1, 0.0);
    l[0] = 1.0;
    for (std::size_t j = 2; j <= m; j += 2) l[j] = l[j - 2] * static_cast<double>(j - 1);
    return l;
}

/// Unit-variance Student-t(dof) lambda_0..lambda_m; even orders need dof > order.
inline std::vector<double> student_t_lambdas(double dof, std::size_t m = kMaxMomentOrder) {
    if (!(dof > static_cast<double>(m - m % 2))) {
        throw Error(ErrorCode::DofTooSmall, "moment of order " + std::to_string(m - m % 2) +
                                                " needs dof > order");
    }
    std::vector<double> l(m + 1, 0.0);
    l[0] = 1.0;
    // E T^{2j} = dof^j prod_{i=1..j} (2i-1)/(dof-2i); rescaled by ((dof-2)/dof)^j.
    for (std::size_t j = 1; 2 * j <= m; ++j) {
        const double i = static_cast<double>(j);
        l[2 * j] = l[2 * j - 2] * (dof - 2.0) * (2.0 * i - 1.0) / (dof - 2.0 * i);
    }
    return l;
}

}  // namespace garchdiag
