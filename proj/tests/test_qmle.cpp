#include "garchdiag/garch_core.hpp"
#include "garchdiag/qmle.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace garchdiag;

namespace {

const GarchParams kTheta{0.0002, {0.1}, {0.7}};

double max_abs_error(const GarchParams& a, const GarchParams& b) {
    const auto va = a.to_vector();
    const auto vb = b.to_vector();
    double m = 0.0;
    for (std::size_t j = 0; j < va.size(); ++j) m = std::max(m, std::abs(va[j] - vb[j]));
    return m;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST(QuasiLogLikelihood, HandValue) {
    const std::vector<double> x{0.01, 0.02, 0.03};
    const double expected = -0.5 * ((std::log(0.0002 / 0.3 + 0.1 * 0.0001) + 0.0004 / (0.0002 / 0.3 + 0.1 * 0.0001)) +
                                    (std::log(0.0002 / 0.3 + 0.1 * 0.0004 + 0.07 * 0.0001) +
                                     0.0009 / (0.0002 / 0.3 + 0.1 * 0.0004 + 0.07 * 0.0001)));
    EXPECT_NEAR(quasi_log_likelihood(kTheta, x), expected, 1e-12);
    EXPECT_NEAR(quasi_log_likelihood(kTheta, x), 6.345600, 5e-7);
}

TEST(QuasiLogLikelihood, ScalingIdentity) {
    const GarchParams flat{0.0004, {1e-8}, {1e-8}};
    const auto path = simulate({0.0002, {0.1}, {0.7}}, {}, 200, 100, 4);
    const double lam = 3.0;
    std::vector<double> scaled(path.x);
    for (double& v : scaled) v *= lam;
    GarchParams flat_scaled = flat;
    flat_scaled.alpha0 *= lam * lam;
    // alpha_i, beta_j at 1e-8 leave a relative residue of order 1e-8.
    const double diff = quasi_log_likelihood(flat_scaled, scaled) - quasi_log_likelihood(flat, path.x);
    EXPECT_NEAR(diff, -0.5 * 200.0 * std::log(lam * lam), 1e-5);
}

TEST(QuasiLogLikelihood, ZeroCase) {
    const GarchParams th{0.5, {0.1}, {0.5}};  // c0 = 1
    const std::vector<double> x{0.0, 0.0};
    EXPECT_DOUBLE_EQ(quasi_log_likelihood(th, x), 0.0);
}

TEST(DefaultInit, InsideSpace) {
    const auto path = simulate(kTheta, {}, 500, 100, 1);
    for (auto [p, q] : {std::pair{1u, 1u}, {2u, 1u}, {1u, 2u}, {2u, 2u}}) {
        const auto init = default_init(path.x, p, q);
        EXPECT_NO_THROW(validate_params(init));
        EXPECT_EQ(init.p(), p);
        EXPECT_EQ(init.q(), q);
    }
}

TEST(Fit, TooShort) {
    const std::vector<double> x(50, 0.01);
    try {
        fit(x);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SeriesTooShort);
    }
}

TEST(Fit, ZeroSeriesDoesNotCrash) {
    const std::vector<double> x(301, 0.0);
    FitResult r;
    // The likelihood is unbounded as alpha0 -> 0; a boundary fit is acceptable.
    ASSERT_NO_THROW(r = fit(x));
    const ParameterSpace space{};
    for (double v : r.theta_hat.to_vector()) {
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_GE(v, space.lower);
        EXPECT_LE(v, space.upper);
    }
    EXPECT_LE(r.theta_hat.beta_sum(), space.rho0);
}

TEST(Fit, NeverWorseThanInit) {
    const auto path = simulate(kTheta, {}, 1000, 500, 12);
    const auto init = default_init(path.x, 1, 1);
    const auto r = fit(path.x, init);
    EXPECT_GE(r.loglik, quasi_log_likelihood(init, path.x));
    EXPECT_NEAR(r.loglik, quasi_log_likelihood(r.theta_hat, path.x), 1e-9 * std::abs(r.loglik));
    EXPECT_EQ(r.n, 1000u);
    EXPECT_GT(r.iterations, 0u);
}

TEST(Fit, DeterministicForSeed) {
    const auto path = simulate(kTheta, {}, 800, 500, 13);
    FitOptions o;
    o.seed = 99;
    const auto a = fit(path.x, 1, 1, {}, o);
    const auto b = fit(path.x, 1, 1, {}, o);
    EXPECT_EQ(a.theta_hat, b.theta_hat);
    EXPECT_EQ(a.loglik, b.loglik);
}

TEST(Fit, AgreesWithTightOptimiser) {
    const auto path = simulate(kTheta, {}, 3000, 1000, 14);
    const auto loose = fit(path.x);
    FitOptions tight;
    tight.ftol = 1e-14;
    tight.max_evals = 20000;
    tight.restarts = 6;
    const auto ref = fit(path.x, kTheta, {}, tight);
    EXPECT_LE(loose.loglik, ref.loglik + 1e-6);
    EXPECT_GT(loose.loglik, ref.loglik - 0.05);
}

TEST(Fit, AccuracyOverReplicates) {
    int hits = 0;
    for (std::uint64_t r = 0; r < 100; ++r) {
        const auto path = simulate(kTheta, {}, 5000, 1000, 5000 + r);
        FitOptions o;
        o.seed = r;
        const auto f = fit(path.x, 1, 1, {}, o);
        const bool ok = std::abs(f.theta_hat.alpha0 - 0.0002) < 0.0002 &&
                        std::abs(f.theta_hat.alpha[0] - 0.1) < 0.08 &&
                        std::abs(f.theta_hat.beta[0] - 0.7) < 0.15;
        hits += ok ? 1 : 0;
    }
    EXPECT_GE(hits, 90);
}

TEST(Fit, RootNRate) {
    std::vector<double> small, large;
    for (std::uint64_t r = 0; r < 100; ++r) {
        FitOptions o;
        o.seed = r;
        const auto a = simulate(kTheta, {}, 2000, 1000, 7000 + r);
        const auto b = simulate(kTheta, {}, 8000, 1000, 9000 + r);
        small.push_back(max_abs_error(fit(a.x, 1, 1, {}, o).theta_hat, kTheta));
        large.push_back(max_abs_error(fit(b.x, 1, 1, {}, o).theta_hat, kTheta));
    }
    EXPECT_LE(median_of(large), 0.6 * median_of(small));
}

TEST(Fit, HigherOrderModelRuns) {
    const GarchParams th{0.0001, {0.08, 0.04}, {0.5, 0.2}};
    const auto path = simulate(th, {}, 3000, 1000, 15);
    const auto r = fit(path.x, 2, 2);
    EXPECT_EQ(r.theta_hat.p(), 2u);
    EXPECT_EQ(r.theta_hat.q(), 2u);
    EXPECT_NO_THROW(validate_params(r.theta_hat));
    EXPECT_GE(r.loglik, quasi_log_likelihood(default_init(path.x, 2, 2), path.x));
}

TEST(BoxTransform, RoundTrip) {
    const ParameterSpace space{};
    for (const auto& th : {kTheta, GarchParams{0.5, {0.2, 0.01}, {0.3, 0.4}}, GarchParams{1e-6, {1e-7}, {0.99}}}) {
        const detail::BoxTransform tr(th.p(), th.q(), space);
        const auto back = tr.to_params(tr.to_unconstrained(th));
        const auto a = th.to_vector();
        const auto b = back.to_vector();
        for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(b[j], a[j], 1e-9 * a[j]) << j;
        EXPECT_NO_THROW(validate_params(back, space));
    }
}
