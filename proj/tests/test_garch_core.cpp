#include "garchdiag/garch_core.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

using namespace garchdiag;

namespace {

const GarchParams kTheta{0.0002, {0.1}, {0.7}};

double mean_sq(const std::vector<double>& x, std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t t = from; t < to; ++t) s += x[t] * x[t];
    return s / static_cast<double>(to - from);
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(ValidateParams, AcceptsTableOneTheta) {
    const ParameterSpace space{0.9, 1e-6, 10.0};
    EXPECT_EQ(validate_params(kTheta, space), kTheta);
}

TEST(ValidateParams, RejectsBetaSumAboveRho0) {
    const ParameterSpace space{0.9, 1e-6, 10.0};
    EXPECT_EQ(code_of([&] { validate_params({0.0002, {0.1}, {0.95}}, space); }),
              ErrorCode::BetaSumExceedsRho0);
}

TEST(ValidateParams, RejectsNegativeCoefficientAndNamesIt) {
    try {
        validate_params({0.0002, {-0.1}, {0.7}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NegativeCoefficient);
        EXPECT_NE(std::string(e.what()).find("alpha[1]"), std::string::npos);
    }
}

TEST(ValidateParams, RejectsBoundaryAndOutsideBox) {
    const ParameterSpace space{0.9, 1e-6, 10.0};
    EXPECT_EQ(code_of([&] { validate_params({0.0002, {1e-6}, {0.7}}, space); }),
              ErrorCode::OutsideBox);
    EXPECT_EQ(code_of([&] { validate_params({12.0, {0.1}, {0.7}}, space); }),
              ErrorCode::OutsideBox);
    EXPECT_EQ(code_of([&] { validate_params({0.0, {0.1}, {0.7}}, space); }),
              ErrorCode::NegativeCoefficient);
}

TEST(ValidateParams, DefaultSpaceAdmitsTableValues) {
    for (const auto& th : {GarchParams{0.0002, {0.1}, {0.8}}, GarchParams{0.0002, {0.1}, {0.867}},
                           GarchParams{0.0003, {0.1}, {0.7}}, GarchParams{0.0002, {0.167}, {0.8}}}) {
        EXPECT_NO_THROW(validate_params(th));
    }
}

TEST(SampleInnovations, DeterministicPerSeed) {
    EXPECT_EQ(sample_innovations({}, 100, 5), sample_innovations({}, 100, 5));
    EXPECT_NE(sample_innovations({}, 100, 5), sample_innovations({}, 100, 6));
}

TEST(SampleInnovations, StudentTIsScaledToUnitVariance) {
    // Raw t(8) has variance 8/6; the scale factor is sqrt(6/8).
    const auto spec = InnovationSpec::student_t(8.0);
    const auto draws = sample_innovations(spec, 1'000'000, 11);
    const double m = std::accumulate(draws.begin(), draws.end(), 0.0) / draws.size();
    double v = 0.0;
    for (double d : draws) v += (d - m) * (d - m);
    v /= draws.size();
    EXPECT_NEAR(m, 0.0, 0.005);
    EXPECT_NEAR(v, 1.0, 0.01);
    EXPECT_NEAR(std::sqrt((8.0 - 2.0) / 8.0), 0.86603, 1e-5);
}

TEST(SampleInnovations, DofTooSmall) {
    EXPECT_EQ(code_of([] { sample_innovations(InnovationSpec::student_t(2.0), 10, 1); }),
              ErrorCode::DofTooSmall);
}

TEST(Simulate, PathShapeAndIdentity) {
    const auto path = simulate(kTheta, {}, 500, 100, 3);
    ASSERT_EQ(path.x.size(), 501u);
    ASSERT_EQ(path.sigma2.size(), 501u);
    ASSERT_EQ(path.eps.size(), 501u);
    for (std::size_t t = 0; t <= 500; ++t) {
        EXPECT_GE(path.sigma2[t], kTheta.alpha0);
        EXPECT_NEAR(path.x[t] / std::sqrt(path.sigma2[t]), path.eps[t], 1e-12);
    }
}

TEST(Simulate, BitIdenticalRepeat) {
    const auto a = simulate(kTheta, {}, 300, 50, 42);
    const auto b = simulate(kTheta, {}, 300, 50, 42);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.sigma2, b.sigma2);
}

TEST(Simulate, DegenerateRecursionIsConstantVariance) {
    const GarchParams tiny{0.0004, {1e-7, 1e-7}, {1e-7}};
    const auto path = simulate(tiny, {}, 200, 10, 9);
    for (std::size_t t = 0; t <= 200; ++t) {
        EXPECT_NEAR(path.sigma2[t], 0.0004, 1e-9);
        EXPECT_NEAR(path.x[t], std::sqrt(0.0004) * path.eps[t], 1e-6 * std::abs(path.x[t]));
    }
}

TEST(Simulate, UnconditionalSecondMoment) {
    // E X^2 = alpha0 / (1 - alpha1 - beta1) = 0.001.
    const auto path = simulate(kTheta, {}, 200'000, 1000, 2024);
    const double m1 = mean_sq(path.x, 1, 100'001);
    const double m2 = mean_sq(path.x, 1, 200'001);
    EXPECT_NEAR(m1, 0.001, 0.0001);
    EXPECT_NEAR(m2, 0.001, 0.0001);
    EXPECT_LT(std::abs(m1 - m2) / m2, 0.1);
}

TEST(Simulate, NonstationaryRejected) {
    EXPECT_EQ(code_of([] { simulate({0.0002, {0.3}, {0.7}}, {}, 10, 10, 1); }),
              ErrorCode::NonstationaryParams);
}

TEST(SimulateMeanChange, ZeroShiftMatchesNull) {
    const auto a = simulate(kTheta, {}, 400, 100, 77);
    const auto b = simulate_mean_change(kTheta, {}, 0.0, 0.5, 400, 100, 77);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.sigma2, b.sigma2);
}

TEST(SimulateMeanChange, PostBreakMean) {
    const std::size_t n = 200'000;
    const auto path = simulate_mean_change(kTheta, {}, 0.05, 0.5, n, 1000, 5);
    double post = 0.0;
    for (std::size_t t = n / 2 + 1; t <= n; ++t) post += path.x[t];
    post /= static_cast<double>(n / 2);
    EXPECT_NEAR(post, 0.05, 0.001);
}

TEST(SimulateMeanChange, OnlyLastObservationShiftedNearEnd) {
    const auto null = simulate(kTheta, {}, 1000, 100, 8);
    const auto path = simulate_mean_change(kTheta, {}, 1.0, 0.999, 1000, 100, 8);
    EXPECT_EQ(break_index(1000, 0.999), 999u);
    for (std::size_t t = 0; t < 1000; ++t) EXPECT_EQ(path.x[t], null.x[t]);
    EXPECT_DOUBLE_EQ(path.x[1000], null.x[1000] + 1.0);
    EXPECT_EQ(path.sigma2, null.sigma2);
}

TEST(SimulateVarianceChange, SameParamsMatchNull) {
    const auto a = simulate(kTheta, {}, 400, 100, 13);
    const auto b = simulate_variance_change(kTheta, kTheta, {}, 0.5, 400, 100, 13);
    EXPECT_EQ(a.x, b.x);
}

TEST(SimulateVarianceChange, PostBreakSecondMoment) {
    const GarchParams prime{0.0003, {0.1}, {0.7}};
    const std::size_t n = 400'000;
    const auto path = simulate_variance_change(kTheta, prime, {}, 0.5, n, 1000, 99);
    EXPECT_NEAR(mean_sq(path.x, n / 2 + 1000, n + 1), 0.0015, 0.00015);
    EXPECT_NEAR(mean_sq(path.x, 1, n / 2), 0.001, 0.0001);
}

TEST(SimulateVarianceChange, BreakIndexArithmetic) {
    // sigma^2_t for t <= 1500 follows theta, afterwards theta'.
    const GarchParams prime{0.0003, {0.1}, {0.7}};
    const auto null = simulate(kTheta, {}, 3000, 100, 21);
    const auto path = simulate_variance_change(kTheta, prime, {}, 0.5, 3000, 100, 21);
    EXPECT_EQ(break_index(3000, 0.5), 1500u);
    for (std::size_t t = 0; t <= 1500; ++t) ASSERT_EQ(path.sigma2[t], null.sigma2[t]) << t;
    EXPECT_NE(path.sigma2[1501], null.sigma2[1501]);
    const double expected = 0.0003 + 0.1 * path.x[1500] * path.x[1500] + 0.7 * path.sigma2[1500];
    EXPECT_NEAR(path.sigma2[1501], expected, 1e-15);
}

TEST(SimulateScenario, LabelsDiffer) {
    EXPECT_EQ(Scenario::null().label(), "null");
    EXPECT_NE(Scenario::mean_change(0.05, 0.5).label(),
              Scenario::variance_change({0.0003, {0.1}, {0.7}}, 0.5).label());
    EXPECT_EQ(Scenario::variance_change({0.0003, {0.1}, {0.7}}, 0.5).label(),
              "variance-change(theta'=0.0003;0.1;0.7;u=0.5)");
}
