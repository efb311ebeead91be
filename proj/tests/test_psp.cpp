#include "garchdiag/psp.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace garchdiag;

namespace {

void expect_values(const StepProcess& s, const std::vector<double>& want, double tol = 1e-12) {
    ASSERT_EQ(s.values.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(s.values[i], want[i], tol) << i;
}

const double kR2 = std::sqrt(2.0);

}  // namespace

TEST(MomentPsp, HandValues) {
    const std::vector<double> e{1.0, -1.0, 2.0};
    expect_values(moment_psp(e, 2), {1, 2, 6});
    expect_values(moment_psp(e, 1), {1, 0, 2});
    expect_values(moment_psp(std::vector<double>(5, 0.0), 1), {0, 0, 0, 0, 0});
    EXPECT_THROW(moment_psp(e, 0), Error);
}

TEST(MomentPsp, StepFunctionLookup) {
    const std::vector<double> e{1.0, -1.0, 2.0};
    const auto s = moment_psp(e, 2);
    EXPECT_EQ(s.at(0.0), 0.0);
    EXPECT_EQ(s.at(0.3), 0.0);
    EXPECT_EQ(s.at(1.0 / 3.0 + 1e-12), 1.0);
    EXPECT_EQ(s.at(0.7), 2.0);
    EXPECT_EQ(s.at(1.0), 6.0);
    EXPECT_EQ(s.sup_abs(), 6.0);
}

TEST(CenteredPsp, HandValues) {
    expect_values(centered_psp(std::vector<double>{1, -1, 1, -1}, 2), {1, 2, 3, 4});
    for (unsigned k = 1; k <= 4; ++k) expect_values(centered_psp(std::vector<double>{2, 2, 2}, k), {0, 0, 0});
}

TEST(CenteredPsp, FirstOrderEndsAtZero) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(0.7, 2.0);
    std::vector<double> e(777);
    for (double& v : e) v = nd(rng);
    EXPECT_EQ(centered_psp(e, 1).values.back(), 0.0);
}

TEST(CusumTransform, HandValues) {
    StepProcess s{{1, 2, 6}, 2, ProcessKind::RawS};
    expect_values(cusum_transform(s), {-1, -2, 0});
    StepProcess b{{0.5, -1.0, 0.0}, 1, ProcessKind::CenteredT};
    expect_values(cusum_transform(b), {0.5, -1.0, 0.0});
}

TEST(SampleStats, Alternating) {
    const auto st = sample_stats(std::vector<double>{1, -1, 1, -1});
    EXPECT_DOUBLE_EQ(st.mean, 0.0);
    EXPECT_DOUBLE_EQ(st.var, 1.0);
    EXPECT_DOUBLE_EQ(st.skew, 0.0);
    EXPECT_DOUBLE_EQ(st.kurt, 1.0);
    EXPECT_DOUBLE_EQ(st.nu2_hat, 0.0);
    EXPECT_DOUBLE_EQ(st.lambda_hat[2], 1.0);
}

TEST(SampleStats, SqrtTwoExample) {
    const auto st = sample_stats(std::vector<double>{0, 0, kR2, -kR2});
    EXPECT_NEAR(st.var, 1.0, 1e-15);
    EXPECT_NEAR(st.nu2_hat, 1.0, 1e-15);
}

TEST(SampleStats, LargeNormalKurtosis) {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> nd;
    std::vector<double> e(100'000);
    for (double& v : e) v = nd(rng);
    const auto st = sample_stats(e);
    EXPECT_NEAR(st.kurt, 3.0, 0.1);
    EXPECT_NEAR(st.skew, 0.0, 0.05);
}

TEST(SampleStats, Errors) {
    EXPECT_THROW(sample_stats(std::vector<double>{1.0}), Error);
    try {
        sample_stats(std::vector<double>{3, 3, 3});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateSample);
    }
}

TEST(SelfNormalizedPsp, HandValues) {
    expect_values(self_normalized_psp(std::vector<double>{0, 0, kR2, -kR2}, 2, 1.0), {-0.5, -1.0, -0.5, 0.0},
                  1e-14);
}

TEST(SelfNormalizedPsp, FirstOrderIsScaledCentredSum) {
    const std::vector<double> e{0.3, -1.2, 2.5, 0.1, -0.4, 0.9};
    const auto st = sample_stats(e);
    const auto t = centered_psp(e, 1);
    const auto sn = self_normalized_psp(e, 1, 0.0);
    for (std::size_t i = 0; i < e.size(); ++i) {
        EXPECT_NEAR(sn.values[i], t.values[i] / (std::sqrt(st.var) * std::sqrt(6.0)), 1e-14);
    }
}

TEST(SelfNormalizedPsp, EndpointIdentity) {
    // v_n = sqrt(n) (lambda_hat_k - ref) with lambda_hat_k the centred standardised moment.
    const std::vector<double> e{0.3, -1.2, 2.5, 0.1, -0.4, 0.9, 1.7};
    const auto st = sample_stats(e);
    const double ref = 0.25;
    const auto sn = self_normalized_psp(e, 3, ref);
    EXPECT_NEAR(sn.values.back(), std::sqrt(7.0) * (st.skew - ref), 1e-13);
}

TEST(BkCovariance, FirstOrderIsBrownianBridge) {
    const GaussianCovSpec spec{1, normal_lambdas()};
    for (double u : {0.0, 0.1, 0.5, 0.9, 1.0}) {
        for (double v : {0.0, 0.3, 0.5, 1.0}) {
            EXPECT_NEAR(bk_covariance(spec, u, v), std::min(u, v) - u * v, 1e-15);
        }
    }
}

TEST(BkCovariance, SecondOrderNormal) {
    const GaussianCovSpec spec{2, normal_lambdas()};
    for (double u : {0.1, 0.5, 0.9}) {
        for (double v : {0.2, 0.5, 1.0}) {
            EXPECT_NEAR(bk_covariance(spec, u, v), 2.0 * (std::min(u, v) - u * v), 1e-14);
        }
    }
}

TEST(BkCovariance, ThirdOrderNormalAtOne) {
    EXPECT_NEAR(bk_covariance({3, normal_lambdas()}, 1.0, 1.0), 6.0, 1e-13);
    EXPECT_NEAR(bk_covariance({4, normal_lambdas()}, 1.0, 1.0), 24.0, 1e-12);
}

TEST(BkCovariance, TooFewLambdas) {
    EXPECT_THROW(bk_covariance({3, {1, 0, 1, 0, 3}}, 0.5, 0.5), Error);
}

TEST(OmnibusVariances, Normal) {
    const auto v = omnibus_variances(normal_lambdas());
    EXPECT_NEAR(v.sigma_gamma2, 6.0, 1e-13);
    EXPECT_NEAR(v.sigma_kappa2, 24.0, 1e-12);
    EXPECT_THROW(omnibus_variances(std::vector<double>{1, 0, 1}), Error);
}

TEST(OmnibusVariances, MatchesCovarianceAtOne) {
    const std::vector<double> l{1, 0, 1, 0.4, 4.2, 2.0, 30.0, 40.0, 500.0};
    const auto v = omnibus_variances(l);
    EXPECT_NEAR(v.sigma_gamma2, bk_covariance({3, l}, 1.0, 1.0), 1e-12);
    EXPECT_NEAR(v.sigma_kappa2, bk_covariance({4, l}, 1.0, 1.0), 1e-10);
}

TEST(OmnibusVariances, SymmetricSimplification) {
    const auto l = student_t_lambdas(10.0);
    const auto v = omnibus_variances(l);
    EXPECT_NEAR(v.sigma_gamma2, l[6] + 9.0 - 6.0 * l[4], 1e-12);
}

TEST(Lambdas, NormalAndStudentT) {
    const auto n = normal_lambdas();
    EXPECT_EQ(n, (std::vector<double>{1, 0, 1, 0, 3, 0, 15, 0, 105}));
    const auto t = student_t_lambdas(8.0, 4);
    EXPECT_DOUBLE_EQ(t[2], 1.0);
    EXPECT_DOUBLE_EQ(t[4], 4.5);  // 3 (nu - 2) / (nu - 4)
    EXPECT_THROW(student_t_lambdas(8.0, 8), Error);
    EXPECT_NO_THROW(student_t_lambdas(9.0, 8));
}
