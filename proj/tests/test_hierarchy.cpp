#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace qotto;

namespace {

// Every vector in {0..cap}^n, filtered by the truncation rule.
std::set<std::vector<int>> brute_force_indices(std::size_t n, int depth, bool tier_sum) {
    std::set<std::vector<int>> out;
    std::vector<int> v(n, 0);
    while (true) {
        int sum = 0;
        for (int x : v) sum += x;
        if (!tier_sum || sum <= depth) out.insert(v);
        std::size_t i = 0;
        while (i < n && v[i] == depth) v[i++] = 0;
        if (i == n) break;
        ++v[i];
    }
    return out;
}

HierarchyGenerator weak_hot(double alpha, int depth = 6, int cutoff = 3) {
    return build_generator(qtest::default_system(1.0), expand_correlation(qtest::hot_bath(alpha), cutoff),
                           TruncationSpec{depth, TruncationScheme::tier_sum, 1});
}

HierarchyGenerator cold_gen(double alpha, int depth = 6, int cutoff = 8) {
    return build_generator(qtest::default_system(0.5), expand_correlation(qtest::cold_bath(alpha), cutoff),
                           TruncationSpec{depth, TruncationScheme::tier_sum, 1});
}

// Closed-form qubit propagator for H = (w/2)(n.sigma + 1).
Mat2 unitary_oracle(const SystemSpec& s, double t) {
    const Mat2 ns = s.r_x * pauli_x() + s.r_z * pauli_z();
    const double th = 0.5 * s.omega * t;
    return std::exp(-I_unit * th) * (std::cos(th) * identity2() - I_unit * std::sin(th) * ns);
}

HierarchyState random_hierarchy_state(const HierarchyGenerator& gen) {
    HierarchyState s = product_state(gen, qtest::random_density());
    for (Eigen::Index i = 4; i < s.ados.size(); ++i) s.ados(i) = 0.1 * qtest::gaussian_c();
    return s;
}

} // namespace

TEST(Enumeration, ClosedSystemHasOnlyTheZeroIndex) {
    const auto idx = enumerate_ados(0, 6);
    ASSERT_EQ(idx.size(), 1u);
    EXPECT_TRUE(idx[0].indices.empty());
    EXPECT_EQ(idx[0].tier(), 0);
}

TEST(Enumeration, TwoExponentsDepthOne) {
    const auto idx = enumerate_ados(2, 1);
    ASSERT_EQ(idx.size(), 3u);
    EXPECT_EQ(idx[0].indices, (std::vector<int>{0, 0}));
    EXPECT_EQ(idx[1].indices, (std::vector<int>{1, 0}));
    EXPECT_EQ(idx[2].indices, (std::vector<int>{0, 1}));
}

TEST(Enumeration, TierSumMatchesBruteForce) {
    for (std::size_t n : {1u, 2u, 3u, 5u})
        for (int m : {0, 1, 2, 4}) {
            const auto idx = enumerate_ados(n, m);
            std::set<std::vector<int>> got;
            for (const auto& a : idx) {
                EXPECT_LE(a.tier(), m);
                got.insert(a.indices);
            }
            EXPECT_EQ(got.size(), idx.size()) << "duplicates";
            EXPECT_EQ(got, brute_force_indices(n, m, true)) << "n=" << n << " M=" << m;
        }
    EXPECT_EQ(enumerate_ados(5, 4).size(), 126u);
}

TEST(Enumeration, PerIndexCapMatchesBruteForce) {
    std::set<std::vector<int>> got;
    for (const auto& a : enumerate_ados(3, 2, TruncationScheme::per_index)) got.insert(a.indices);
    EXPECT_EQ(got, brute_force_indices(3, 2, false));
    EXPECT_EQ(got.size(), 27u);
}

TEST(Enumeration, TierAscendingAndZeroFirst) {
    const auto idx = enumerate_ados(4, 3);
    EXPECT_EQ(idx[0].tier(), 0);
    for (std::size_t i = 1; i < idx.size(); ++i) EXPECT_LE(idx[i - 1].tier(), idx[i].tier());
}

TEST(Enumeration, MatsubaraCapLimitsGroupTier) {
    const std::vector<bool> mats{false, false, true, true, true};
    const auto idx = enumerate_ados(5, 4, TruncationScheme::tier_sum, mats, 1);
    std::size_t expected = 0;
    for (const auto& v : brute_force_indices(5, 4, true))
        if (v[2] + v[3] + v[4] <= 1) ++expected;
    EXPECT_EQ(idx.size(), expected);
    for (const auto& a : idx) EXPECT_LE(a.indices[2] + a.indices[3] + a.indices[4], 1);
}

TEST(Enumeration, BudgetAndDepthErrors) {
    EXPECT_THROW(enumerate_ados(8, 8, TruncationScheme::tier_sum, {}, -1, 100), BudgetExceeded);
    EXPECT_THROW(enumerate_ados(2, -1), InvalidArgument);
}

TEST(Generator, ZeroCouplingIsTheClosedLiouvillian) {
    const SystemSpec s = qtest::default_system(0.7);
    for (int depth : {0, 3}) {
        BathExpansion empty;
        const auto gen = build_generator(s, empty, TruncationSpec{depth});
        ASSERT_EQ(gen.ado_count(), 1u);
        const Mat4 expected = -I_unit * commutator_superop(s.hamiltonian());
        const Mat4 got = Eigen::MatrixXcd(gen.matrix());
        EXPECT_LT((got - expected).norm(), 1e-15);
    }
}

TEST(Generator, MaximallyMixedStateIsInstantaneouslyStationary) {
    SystemSpec s;
    s.r_x = 0.0;
    s.r_z = 1.0;
    const auto gen = build_generator(s, expand_correlation(qtest::hot_bath(), 3), TruncationSpec{4});
    const auto x = product_state(gen, 0.5 * identity2());
    VecX y;
    gen.apply(x.ados, y);
    EXPECT_LT(unvectorize(y.head<4>()).norm(), 1e-15);
}

TEST(Generator, TraceOfSystemDerivativeVanishesForRandomStates) {
    const auto gen = weak_hot(1e-1, 4);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = random_hierarchy_state(gen);
        VecX y;
        gen.apply(x.ados, y);
        EXPECT_LT(std::abs(unvectorize(y.head<4>()).trace()), 1e-13) << "trial " << trial;
    }
}

TEST(Generator, PreservesConjugateConsistencyOfPhysicalStates) {
    // Repeated application to a factorized Hermitian state gives the time
    // derivatives of a physical trajectory; the system block stays Hermitian.
    const auto gen = cold_gen(1e-1, 6);
    for (int trial = 0; trial < 10; ++trial) {
        VecX x = product_state(gen, qtest::random_density()).ados;
        for (int order = 1; order <= 5; ++order) {
            VecX y;
            gen.apply(x, y);
            const Mat2 d = unvectorize(y.head<4>());
            EXPECT_LT(hermiticity_defect(d), 1e-12 * std::max(1.0, d.norm())) << "order " << order;
            x = y / std::max(1.0, y.cwiseAbs().maxCoeff());
        }
    }
}

TEST(Generator, MergedAndSplitModesGiveTheSameDynamics) {
    const auto ex = expand_correlation(qtest::hot_bath(5e-2), 2);
    const auto merged = build_generator(qtest::default_system(), ex, TruncationSpec{4}, GeneratorOptions{true});
    const auto split = build_generator(qtest::default_system(), ex, TruncationSpec{4}, GeneratorOptions{false});
    EXPECT_LT(merged.ado_count(), split.ado_count());
    const Mat2 rho0 = qtest::random_density();
    const auto a = propagate(product_state(merged, rho0), merged, {5.0, 20.0});
    const auto b = propagate(product_state(split, rho0), split, {5.0, 20.0});
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_LT((reduced_state(a[i]) - reduced_state(b[i])).norm(), 1e-8);
        EXPECT_NEAR(interaction_energy(a[i], merged.system()), interaction_energy(b[i], split.system()), 1e-8);
    }
}

TEST(Propagation, ZeroCouplingMatchesClosedFormUnitary) {
    const SystemSpec s = qtest::default_system(1.0);
    const auto gen = build_closed_generator(s);
    const std::vector<double> grid{0.5, 3.0, 17.0, 100.0};
    for (int trial = 0; trial < 5; ++trial) {
        const Mat2 rho0 = qtest::random_density();
        const auto out = propagate(product_state(gen, rho0), gen, grid, IntegratorOptions{1e-12, 1e-13});
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Mat2 u = unitary_oracle(s, grid[i]);
            EXPECT_LT((reduced_state(out[i]) - u * rho0 * u.adjoint()).norm(), 1e-9) << "t=" << grid[i];
        }
    }
}

TEST(Propagation, ExcitedEigenstateIsStationaryWithoutCoupling) {
    const SystemSpec s = qtest::default_system(1.0);
    const auto gen = build_closed_generator(s);
    const auto out = propagate(product_state(gen, s.excited_projector()), gen, {1.0, 10.0, 1000.0});
    for (const auto& st : out) EXPECT_NEAR(excited_population(reduced_state(st), s), 1.0, 1e-10);
}

TEST(Propagation, FreshProductStateReturnsInjectedState) {
    const auto gen = weak_hot(1e-2);
    const Mat2 rho = qtest::random_density();
    const auto x = product_state(gen, rho);
    EXPECT_EQ((reduced_state(x) - rho).norm(), 0.0);
    EXPECT_EQ(interaction_energy(x, gen.system()), 0.0);
}

TEST(Propagation, TraceAndHermiticityAlongRandomTrajectories) {
    for (double alpha : {1e-3, 1e-1}) {
        const auto gen = cold_gen(alpha, alpha > 1e-2 ? 10 : 6);
        for (int trial = 0; trial < 3; ++trial) {
            std::vector<double> grid;
            for (int i = 1; i <= 40; ++i) grid.push_back(10.0 * i);
            const auto out = propagate(product_state(gen, qtest::random_density()), gen, grid);
            for (const auto& st : out) {
                const Mat2 r = reduced_state(st);
                EXPECT_LT(std::abs(r.trace() - 1.0), 1e-10);
                EXPECT_LT(hermiticity_defect(r), 1e-10);
            }
        }
    }
}

TEST(Propagation, RejectsBackwardGrid) {
    const auto gen = weak_hot(1e-2);
    EXPECT_THROW(propagate(product_state(gen, 0.5 * identity2()), gen, {2.0, 1.0}), InvalidArgument);
}

TEST(SteadyState, ClosedSystemIsDegenerate) {
    EXPECT_THROW(steady_state(build_closed_generator(qtest::default_system())), DegenerateSteadyState);
}

TEST(SteadyState, WeakCouplingApproachesGibbs) {
    const auto gen = weak_hot(1e-4);
    const Mat2 rho = reduced_state(steady_state(gen));
    EXPECT_LT(trace_distance(rho, gen.system().gibbs_state(0.5)), 1e-2);
}

TEST(SteadyState, ReducedStateIsADensityMatrix) {
    for (double alpha : {1e-5, 1e-3, 1e-1}) {
        for (const auto& gen : {weak_hot(alpha, alpha > 1e-2 ? 10 : 6), cold_gen(alpha, alpha > 1e-2 ? 10 : 6)}) {
            const Mat2 r = reduced_state(steady_state(gen));
            EXPECT_LT(std::abs(r.trace() - 1.0), 1e-10);
            EXPECT_LT(hermiticity_defect(r), 1e-10);
            Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (r + r.adjoint()));
            EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
        }
    }
}

TEST(SteadyState, AgreesWithLongTimePropagation) {
    const auto gen = weak_hot(1e-2);
    const Mat2 ss = reduced_state(steady_state(gen));
    for (int trial = 0; trial < 5; ++trial) {
        const auto init = product_state(gen, qtest::random_density());
        EquilibrationOptions eo;
        eo.record_trace = false;
        const auto rep = equilibration_time(gen, init, ss, eo);
        const auto out = propagate(init, gen, {3.0 * rep.tau_eq});
        EXPECT_GT(fidelity(reduced_state(out[0]), ss), 1.0 - 1e-8) << "trial " << trial;
    }
}

TEST(SteadyState, InteractionEnergyIsNonPositive) {
    for (double alpha : {1e-3, 1e-2, 1e-1}) {
        const int m = alpha > 1e-2 ? 10 : 6;
        for (const auto& gen : {weak_hot(alpha, m), cold_gen(alpha, m)})
            EXPECT_LE(interaction_energy(steady_state(gen), gen.system()), 1e-8) << "alpha=" << alpha;
    }
}

TEST(InteractionEnergy, PositiveValuesAreNotClipped) {
    const auto gen = weak_hot(1e-2, 2);
    auto x = product_state(gen, 0.5 * identity2());
    const std::size_t off = gen.layout()->tier_one.front();
    x.ados.segment<4>(4 * static_cast<Eigen::Index>(off)) = vectorize(Mat2(0.01 * pauli_z()));
    EXPECT_NEAR(interaction_energy(x, gen.system()), 0.02, 1e-15);
}

TEST(InteractionEnergy, ImaginaryResidueIsAConventionError) {
    const auto gen = weak_hot(1e-2, 2);
    auto x = product_state(gen, 0.5 * identity2());
    const std::size_t off = gen.layout()->tier_one.front();
    x.ados.segment<4>(4 * static_cast<Eigen::Index>(off)) = vectorize(Mat2(I_unit * pauli_z()));
    EXPECT_THROW(interaction_energy(x, gen.system()), ConventionError);
}

TEST(Convergence, DepthAndCutoffDriftBelowTolerance) {
    const double alpha = 1e-2;
    struct Obs {
        double p, e;
    };
    auto observe = [](const HierarchyGenerator& g) {
        const auto ss = steady_state(g);
        return Obs{excited_population(reduced_state(ss), g.system()), interaction_energy(ss, g.system())};
    };
    const Obs hot = observe(weak_hot(alpha, 6, 3));
    const Obs hot_m = observe(weak_hot(alpha, 7, 3));
    const Obs hot_k = observe(weak_hot(alpha, 6, 4));
    EXPECT_LT(std::abs(hot.p - hot_m.p), 1e-6);
    EXPECT_LT(std::abs(hot.e - hot_m.e), 1e-6);
    EXPECT_LT(std::abs(hot.p - hot_k.p), 1e-6);
    EXPECT_LT(std::abs(hot.e - hot_k.e), 1e-6);

    const Obs cold = observe(cold_gen(alpha, 6, 8));
    const Obs cold_m = observe(cold_gen(alpha, 7, 8));
    const Obs cold_k = observe(cold_gen(alpha, 6, 9));
    EXPECT_LT(std::abs(cold.p - cold_m.p), 1e-6);
    EXPECT_LT(std::abs(cold.e - cold_m.e), 1e-6);
    EXPECT_LT(std::abs(cold.p - cold_k.p), 1e-6);
    EXPECT_LT(std::abs(cold.e - cold_k.e), 1e-6);
}

TEST(Convergence, DepthAndCutoffDriftAlongTransients) {
    // Isochore trajectories from the opposite bath's thermal state at the
    // automatic depth; every sample must move by < 1e-6 under M+1 and K+1.
    const double alpha = 1e-2;
    std::vector<double> grid;
    for (int i = 1; i <= 60; ++i) grid.push_back(5.0 * i);
    struct Case {
        BathLabel label;
        double omega;
        BathSpec bath;
        int cutoff;
        Mat2 start;
    };
    const Case cases[] = {
        {BathLabel::hot, 1.0, qtest::hot_bath(alpha), 3, qtest::default_system(0.5).gibbs_state(2.5)},
        {BathLabel::cold, 0.5, qtest::cold_bath(alpha), 8, qtest::default_system(1.0).gibbs_state(0.5)},
    };
    for (const auto& c : cases) {
        const SystemSpec s = qtest::default_system(c.omega);
        const int m = auto_depth(alpha, c.label);
        auto run = [&](int depth, int cutoff) {
            const auto g = build_generator(s, expand_correlation(c.bath, cutoff),
                                           TruncationSpec{depth, TruncationScheme::tier_sum, 1});
            return sample_trajectory(product_state(g, c.start), g, grid);
        };
        const auto base = run(m, c.cutoff);
        for (const auto& other : {run(m + 1, c.cutoff), run(m, c.cutoff + 1)}) {
            double dp = 0.0, de = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                dp = std::max(dp, std::abs(excited_population(base[i].rho, s) - excited_population(other[i].rho, s)));
                de = std::max(de, std::abs(base[i].interaction_energy - other[i].interaction_energy));
            }
            EXPECT_LT(dp, 1e-6) << to_string(c.label);
            EXPECT_LT(de, 1e-6) << to_string(c.label);
        }
    }
}
