#include "support.hpp"

#include <gtest/gtest.h>

using namespace qotto;

namespace {

struct Decay {
    cplx rate;
    void operator()(const VecX& x, VecX& y) const { y = -rate * x; }
};

struct Oscillator {
    void operator()(const VecX& x, VecX& y) const {
        y.resize(2);
        y(0) = x(1);
        y(1) = -x(0);
    }
};

} // namespace

TEST(DormandPrince, ExponentialDecayToTolerance) {
    VecX y0(1);
    y0(0) = 1.0;
    DormandPrince<Decay> dp(Decay{cplx{0.3, 2.0}}, y0, 0.0, IntegratorOptions{1e-10, 1e-12});
    for (double t : {0.1, 1.0, 7.5, 20.0}) {
        dp.advance_to(t);
        EXPECT_DOUBLE_EQ(dp.time(), t);
        EXPECT_LT(std::abs(dp.state()(0) - std::exp(-cplx{0.3, 2.0} * t)), 1e-8);
    }
}

TEST(DormandPrince, OscillatorConservesAmplitude) {
    VecX y0(2);
    y0 << 1.0, 0.0;
    DormandPrince<Oscillator> dp(Oscillator{}, y0, 0.0, IntegratorOptions{1e-10, 1e-12});
    dp.advance_to(100.0);
    EXPECT_NEAR(dp.state()(0).real(), std::cos(100.0), 1e-7);
    EXPECT_NEAR(dp.state()(1).real(), -std::sin(100.0), 1e-7);
    EXPECT_GT(dp.stats().accepted, 0u);
}

TEST(DormandPrince, TighterToleranceIsMoreAccurate) {
    VecX y0(1);
    y0(0) = 1.0;
    double prev = 1.0;
    for (double rtol : {1e-4, 1e-7, 1e-10}) {
        DormandPrince<Decay> dp(Decay{cplx{1.0, 5.0}}, y0, 0.0, IntegratorOptions{rtol, rtol * 1e-2});
        dp.advance_to(3.0);
        const double err = std::abs(dp.state()(0) - std::exp(-cplx{1.0, 5.0} * 3.0));
        EXPECT_LT(err, prev);
        prev = err;
    }
}

TEST(DormandPrince, ResetRestartsFromGivenState) {
    VecX y0(1);
    y0(0) = 1.0;
    DormandPrince<Decay> dp(Decay{cplx{1.0, 0.0}}, y0, 0.0);
    dp.advance_to(2.0);
    VecX y1(1);
    y1(0) = 3.0;
    dp.reset(y1, 10.0);
    dp.advance_to(11.0);
    EXPECT_NEAR(dp.state()(0).real(), 3.0 * std::exp(-1.0), 1e-7);
}

TEST(DormandPrince, BackwardTargetRejected) {
    VecX y0(1);
    y0(0) = 1.0;
    DormandPrince<Decay> dp(Decay{cplx{1.0, 0.0}}, y0, 1.0);
    EXPECT_THROW(dp.advance_to(0.5), InvalidArgument);
}

TEST(DormandPrince, StepBudgetExhaustionIsReported) {
    VecX y0(1);
    y0(0) = 1.0;
    IntegratorOptions opt;
    opt.max_steps = 5;
    DormandPrince<Decay> dp(Decay{cplx{0.0, 50.0}}, y0, 0.0, opt);
    EXPECT_THROW(dp.advance_to(100.0), IntegrationFailure);
}

TEST(IntegratorOptions, ValidationRejectsNonsense) {
    IntegratorOptions o;
    o.rtol = -1.0;
    EXPECT_THROW(o.validate(), InvalidArgument);
    o = IntegratorOptions{};
    o.atol = 0.0;
    o.rtol = 0.0;
    EXPECT_THROW(o.validate(), InvalidArgument);
}
