#include "support.hpp"

#include <gtest/gtest.h>

using namespace qotto;

namespace {

// Qubit fidelity from Tr(rho sigma) and the determinants.
double fidelity_oracle(const Mat2& r, const Mat2& s) {
    const double tr = (r * s).trace().real();
    const double dr = std::max(0.0, r.determinant().real());
    const double ds = std::max(0.0, s.determinant().real());
    return std::sqrt(std::max(0.0, tr + 2.0 * std::sqrt(dr * ds)));
}

HierarchyGenerator hot_generator(double alpha) {
    return build_generator(qtest::default_system(1.0), expand_correlation(qtest::hot_bath(alpha), 3),
                           TruncationSpec{auto_depth(alpha, BathLabel::hot), TruncationScheme::tier_sum, 1});
}

HierarchyGenerator cold_generator(double alpha) {
    return build_generator(qtest::default_system(0.5), expand_correlation(qtest::cold_bath(alpha), 8),
                           TruncationSpec{auto_depth(alpha, BathLabel::cold), TruncationScheme::tier_sum, 1});
}

} // namespace

TEST(Population, ExcitedProjectorGivesOne) {
    const auto s = qtest::default_system();
    EXPECT_NEAR(excited_population(s.excited_projector(), s), 1.0, 1e-15);
    EXPECT_NEAR(excited_population(0.5 * identity2(), s), 0.5, 1e-15);
}

TEST(Population, ThermalStateValues) {
    const auto s = qtest::default_system();
    EXPECT_NEAR(excited_population(s.gibbs_state(0.5), s), 0.37754, 1e-5);
    EXPECT_NEAR(thermal_population(0.5, 1.0), 0.37754, 1e-5);
    EXPECT_NEAR(thermal_population(2.5, 0.5), 0.22270, 1e-5);
    EXPECT_LT(thermal_population(1e3, 1.0), 1e-300);
    EXPECT_NEAR(thermal_population(1e-9, 1.0), 0.5, 1e-9);
    EXPECT_THROW(thermal_population(-1.0, 1.0), InvalidArgument);
}

TEST(Population, RawValueIsNotClamped) {
    const auto s = qtest::default_system();
    const Mat2 r = 1.000001 * s.excited_projector();
    EXPECT_GT(excited_population(r, s), 1.0);
    EXPECT_EQ(clamp_population(excited_population(r, s)), 1.0);
}

TEST(System, HamiltonianSpectrumIsZeroAndOmega) {
    for (double w : {0.3, 1.0, 2.0}) {
        const auto s = qtest::default_system(w);
        Eigen::SelfAdjointEigenSolver<Mat2> es(s.hamiltonian());
        EXPECT_NEAR(es.eigenvalues()(0), 0.0, 1e-14);
        EXPECT_NEAR(es.eigenvalues()(1), w, 1e-14);
        EXPECT_NEAR((s.hamiltonian() * s.excited_state() - w * s.excited_state().cast<cplx>()).norm(), 0.0, 1e-14);
    }
}

TEST(System, ValidationNamesTheInvariant) {
    SystemSpec s;
    s.r_x = 0.9;
    try {
        s.validate();
        FAIL();
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("r_x^2 + r_z^2 = 1"), std::string::npos);
    }
}

TEST(Fidelity, IdentityAndOrthogonalCases) {
    for (int i = 0; i < 20; ++i) {
        const Mat2 r = qtest::random_density();
        EXPECT_NEAR(fidelity(r, r), 1.0, 1e-12);
    }
    Mat2 up = Mat2::Zero(), down = Mat2::Zero();
    up(0, 0) = 1.0;
    down(1, 1) = 1.0;
    EXPECT_NEAR(fidelity(up, down), 0.0, 1e-12);
}

TEST(Fidelity, MatchesClosedFormOracle) {
    for (int i = 0; i < 20; ++i) {
        const Mat2 a = qtest::random_density();
        const Mat2 b = qtest::random_density();
        EXPECT_NEAR(fidelity(a, b), fidelity_oracle(a, b), 1e-10) << "pair " << i;
    }
}

TEST(Fidelity, PureArgumentReducesToExpectationValue) {
    for (int i = 0; i < 20; ++i) {
        Eigen::Vector2cd v(qtest::gaussian_c(), qtest::gaussian_c());
        v.normalize();
        const Mat2 a = qtest::random_density();
        const double oracle = std::sqrt((v.adjoint() * a * v)(0, 0).real());
        // The vanishing eigenvalue carries rounding noise of ~1e-17, whose square root
        // bounds the attainable agreement.
        EXPECT_NEAR(fidelity(a, v * v.adjoint()), oracle, 1e-7) << "pair " << i;
    }
}

TEST(Fidelity, SymmetricAndUnitarilyInvariant) {
    for (int i = 0; i < 20; ++i) {
        const Mat2 a = qtest::random_density();
        const Mat2 b = qtest::random_density();
        const Mat2 u = qtest::random_unitary();
        EXPECT_NEAR(fidelity(a, b), fidelity(b, a), 1e-12);
        EXPECT_NEAR(fidelity(a, b), fidelity(u * a * u.adjoint(), u * b * u.adjoint()), 1e-12);
    }
}

TEST(Fidelity, RejectsNonDensityMatrices) {
    const Mat2 ok = 0.5 * identity2();
    EXPECT_THROW(fidelity(2.0 * ok, ok), InvalidArgument);
    Mat2 nh = ok;
    nh(0, 1) = 0.1;
    EXPECT_THROW(fidelity(nh, ok), InvalidArgument);
    Mat2 neg = Mat2::Zero();
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    EXPECT_THROW(fidelity(ok, neg), InvalidArgument);
}

TEST(TraceDistance, BoundsAndExtremes) {
    Mat2 up = Mat2::Zero(), down = Mat2::Zero();
    up(0, 0) = 1.0;
    down(1, 1) = 1.0;
    EXPECT_NEAR(trace_distance(up, down), 1.0, 1e-14);
    for (int i = 0; i < 20; ++i) {
        const Mat2 a = qtest::random_density(), b = qtest::random_density();
        const double d = trace_distance(a, b);
        const double f = fidelity(a, b);
        // Fuchs-van de Graaf inequalities.
        EXPECT_LE(1.0 - f, d + 1e-12);
        EXPECT_LE(d, std::sqrt(std::max(0.0, 1.0 - f * f)) + 1e-12);
    }
}

TEST(Equilibration, SteadyStartGivesZero) {
    const auto gen = hot_generator(1e-3);
    const auto ss = steady_state(gen);
    const auto rep = equilibration_time(gen, ss, reduced_state(ss));
    EXPECT_EQ(rep.tau_eq, 0.0);
    EXPECT_TRUE(rep.converged);
}

TEST(Equilibration, GapCrossesToleranceAtTau) {
    const auto gen = cold_generator(1e-2);
    const Mat2 ss = reduced_state(steady_state(gen));
    const Mat2 start = qtest::default_system(1.0).gibbs_state(0.5);
    EquilibrationOptions eo;
    const auto rep = equilibration_time(gen, product_state(gen, start), ss, eo);
    ASSERT_TRUE(rep.converged);
    EXPECT_GT(rep.tau_eq, 0.0);
    EXPECT_EQ(rep.tolerance, 1e-8);
    EXPECT_GE(fidelity_gap(reduced_state(rep.state_at_tau), ss), eo.eps_tol * (1.0 - 1e-6));
    EXPECT_NEAR(rep.state_at_tau.time, rep.tau_eq, 1e-9 * rep.tau_eq);
    EXPECT_GE(rep.horizon, std::max(2.0 * rep.tau_eq, 10.0) - 1e-9);
    ASSERT_FALSE(rep.gap_trace.empty());
    for (const auto& [t, g] : rep.gap_trace)
        if (t > rep.tau_eq * (1.0 + 2e-3)) EXPECT_LT(g, eo.eps_tol) << "t=" << t;
}

TEST(Equilibration, TauNonDecreasingAsToleranceTightens) {
    for (const auto& gen : {hot_generator(1e-2), cold_generator(1e-3)}) {
        const Mat2 ss = reduced_state(steady_state(gen));
        const SystemSpec other = gen.system().with_omega(gen.system().omega == 1.0 ? 0.5 : 1.0);
        const Mat2 start = other.gibbs_state(gen.system().omega == 1.0 ? 2.5 : 0.5);
        double prev = 0.0;
        for (double eps : {1e-6, 1e-7, 1e-8}) {
            EquilibrationOptions eo;
            eo.eps_tol = eps;
            eo.record_trace = false;
            const double tau = equilibration_time(gen, product_state(gen, start), ss, eo).tau_eq;
            EXPECT_GE(tau, prev) << "eps=" << eps;
            prev = tau;
        }
    }
}

TEST(Equilibration, BudgetExhaustionCarriesBestEstimate) {
    const auto gen = cold_generator(1e-4);
    const Mat2 ss = reduced_state(steady_state(gen));
    EquilibrationOptions eo;
    eo.t_max = 50.0;
    try {
        equilibration_time(gen, product_state(gen, 0.5 * identity2()), ss, eo);
        FAIL();
    } catch (const BudgetExhausted& e) {
        EXPECT_GT(e.best_tau(), 0.0);
    }
    eo.throw_on_budget = false;
    const auto rep = equilibration_time(gen, product_state(gen, 0.5 * identity2()), ss, eo);
    EXPECT_FALSE(rep.converged);
}
