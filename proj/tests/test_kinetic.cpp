#include <gtest/gtest.h>

#include "bbgky/kinetic.hpp"
#include "bbgky/meanfield.hpp"
#include "bbgky/random.hpp"
#include "oracles.hpp"

using namespace bbgky;

using oracle::basis_element;

TEST(Kinetic, FirstGeneratorIsScatteringGroup) {
    const auto s = SystemSpec::cm1();
    const Dynamics dyn(s);
    const double t = 0.4;
    for (int sp = 1; sp <= 2; ++sp) {
        const auto side = static_cast<Eigen::Index>(oracle::side(sp, 2));
        for (Eigen::Index i = 0; i < side; ++i)
            for (Eigen::Index j = 0; j < side; ++j) {
                const auto e = basis_element(sp, 2, i, j);
                EXPECT_LT(max_abs(kinetic_generator(dyn, t, sp, 0, e) - oracle::scattering(s, label_range(1, sp), t, e)), 1e-12);
            }
    }
}

TEST(Kinetic, SecondGeneratorIdentity) {
    // V_2(t, {1..s}, s+1) = A^_2(t, {1..s}, s+1) - A^_1(t, {1..s}) sum_i A^_2(t, i, s+1)
    const auto s = SystemSpec::cm1();
    const Dynamics dyn(s);
    const double t = 0.35;
    for (int sp = 1; sp <= 2; ++sp) {
        const int n = sp + 1;
        const auto side = static_cast<Eigen::Index>(oracle::side(n, 2));
        for (Eigen::Index i = 0; i < side; ++i)
            for (Eigen::Index j = 0; j < side; ++j) {
                const auto e = basis_element(n, 2, i, j);
                const Operator ref = oracle::second_kinetic_generator(s, sp, t, e);
                EXPECT_LT(max_abs(kinetic_generator(dyn, t, sp, 1, e) - ref), 1e-12) << "s=" << sp;
            }
    }
}

TEST(Kinetic, GeneratorsVanishAtTimeZero) {
    const Dynamics dyn(SystemSpec::cm1());
    Rng rng(31);
    const auto x = random_hermitian(3, 2, rng);
    EXPECT_LT(max_abs(kinetic_generator(dyn, 0.0, 1, 2, x)), 1e-13);
    EXPECT_LT(max_abs(kinetic_generator(dyn, 0.0, 2, 1, x)), 1e-13);
    EXPECT_THROW(kinetic_generator(dyn, 0.1, 1, 4, Operator::identity(5, 2)), std::invalid_argument);
}

TEST(Kinetic, StateFunctionalWithoutInteractionIsProduct) {
    const Dynamics dyn(SystemSpec::cm1().with_epsilon(0.0));
    const auto f = cm1_one_particle_state();
    for (int sp = 1; sp <= 2; ++sp) EXPECT_LT(max_abs(state_functional(dyn, 0.7, sp, f, 2) - tensor_power(f, sp)), 1e-13);
}

TEST(Kinetic, StateFunctionalAtTimeZeroIsProduct) {
    const Dynamics dyn(SystemSpec::cm1());
    const auto f = cm1_one_particle_state();
    EXPECT_LT(max_abs(state_functional(dyn, 0.0, 2, f) - tensor_power(f, 2)), 1e-13);
}

TEST(Kinetic, PairCorrelationKernels) {
    Rng rng(32);
    const auto c = symmetrize(random_hermitian(2, 2, rng, 0.2));
    const auto g = kernels_from_pair_correlation(c, 6);
    const auto I1 = Operator::identity(1, 2);
    const Operator ref3 = Operator::identity(3, 2) + oracle::embed(c, {1, 2}, 3) + oracle::embed(c, {1, 3}, 3) +
                          oracle::embed(c, {2, 3}, 3);
    EXPECT_LT(max_abs(g[3] - ref3), 1e-14);
    // cumulants of the kernel sequence: (I, c, 0, ...)
    const auto cl = density_to_clusters(g.with_kind(SequenceKind::density), 6);
    EXPECT_LT(max_abs(cl[1] - I1), 1e-14);
    EXPECT_LT(max_abs(cl[2] - c), 1e-14);
    for (int n = 3; n <= 6; ++n) EXPECT_LT(max_abs(cl[static_cast<std::size_t>(n)]), 1e-13) << "n=" << n;
}

TEST(Integrator, Rk4MatchesExactUnitaryEvolution) {
    Rng rng(33);
    const auto h = random_hermitian(1, 2, rng);
    const auto y0 = random_density(1, 2, rng);
    auto rhs = [&](double, const Operator& y) { return Complex(0.0, -1.0) * commutator(h, y); };
    const std::vector<double> grid{0.0, 0.5, 1.0};
    const auto traj = rk4_integrate(grid, y0, rhs);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Matrix u = oracle::expm_minus_i(h.matrix(), grid[i]);
        EXPECT_LT(oracle::max_abs(traj[i].matrix() - u * y0.matrix() * u.adjoint()), 1e-8);
    }
}

TEST(Integrator, StepRejection) {
    Rng rng(34);
    const auto h = random_hermitian(1, 2, rng, 10.0);
    const auto y0 = random_density(1, 2, rng);
    auto rhs = [&](double, const Operator& y) { return Complex(0.0, -1.0) * commutator(h, y); };
    IntegratorOptions o;
    o.max_step = 0.5;
    o.tolerance = 1e-14;
    o.max_halvings = 1;
    EXPECT_THROW(rk4_integrate({0.0, 1.0}, y0, rhs, o), StepSizeError);
    EXPECT_THROW(rk4_integrate({0.0, 0.0}, y0, rhs), std::invalid_argument);
}

TEST(Kinetic, GqkeWithoutInteractionIsFreeEvolution) {
    const auto spec = SystemSpec::cm1().with_epsilon(0.0);
    const Dynamics dyn(spec);
    const auto f = cm1_one_particle_state();
    const auto traj = gqke_integrate(dyn, {0.0, 0.6}, KineticState{f, 2, {}});
    const Matrix v = oracle::expm_minus_i(spec.K, 0.6);
    EXPECT_LT(oracle::max_abs(traj.back().matrix() - v * f.matrix() * v.adjoint()), 1e-9);
}

TEST(Kinetic, GqkeMatchesOneParticleSeriesAtSmallTimes) {
    const Dynamics dyn(SystemSpec::cm1());
    const KineticState st{cm1_one_particle_state(), 3, {}};
    IntegratorOptions o;
    o.max_step = 0.01;
    const double t = 0.2;
    const auto traj = gqke_integrate(dyn, {0.0, t}, st, o);
    EXPECT_LT(trace_norm(traj.back() - one_particle_series(dyn, t, st, SeriesMode::full_cumulant)), 1e-8);
}

TEST(Vlasov, InputValidationAndStructure) {
    const auto spec = SystemSpec::cm1();
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 0) = 1.5;
    bad(1, 1) = -0.5;
    EXPECT_THROW(vlasov_integrate(spec, {0.0, 0.1}, KineticState{Operator{1, 2, bad}, 2, {}}), std::invalid_argument);
    EXPECT_THROW(vlasov_integrate(spec, {0.0, 0.1}, KineticState{cm1_one_particle_state(), 2, {}}, VlasovKernel::initial_correlations),
                 std::invalid_argument);
    const auto traj = vlasov_integrate(spec, {0.0, 0.5, 1.0}, KineticState{cm1_one_particle_state(), 2, {}});
    for (const auto& f : traj) {
        EXPECT_NEAR(f.trace().real(), 1.0, 1e-12);
        EXPECT_TRUE(is_hermitian(f));
        EXPECT_GT(min_eigenvalue(f), -1e-12);
    }
}

TEST(Vlasov, LimitSeriesApproachesTrajectory) {
    const auto spec = SystemSpec::cm1();
    const Dynamics dyn(spec);
    const KineticState st{cm1_one_particle_state(), 3, {}};
    const double t = 0.1;
    const auto traj = vlasov_integrate(spec, {0.0, t}, st);
    // truncation error O(t^{n_max + 2})
    EXPECT_LT(trace_norm(traj.back() - one_particle_series(dyn, t, st, SeriesMode::limit)), 1e-7);
}

TEST(Vlasov, FullModeRejectsCorrelatedData) {
    const Dynamics dyn(SystemSpec::cm1());
    KineticState st{cm1_one_particle_state(), 2, {}};
    Rng rng(35);
    st.correlations = kernels_from_pair_correlation(symmetrize(random_hermitian(2, 2, rng, 0.1)), 4);
    EXPECT_THROW(one_particle_series(dyn, 0.1, st, SeriesMode::full_cumulant), std::invalid_argument);
    EXPECT_NO_THROW(one_particle_series(dyn, 0.1, st, SeriesMode::limit));
}

TEST(MeanField, PowerLawFit) {
    const std::vector<double> x{1.0, 0.5, 0.25};
    const std::vector<double> y{3.0, 0.75, 0.1875};
    const auto f = fit_power_law(x, y);
    EXPECT_NEAR(f.slope, 2.0, 1e-12);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
    EXPECT_THROW(fit_power_law({1.0}, {1.0}), std::invalid_argument);
    EXPECT_THROW(fit_power_law({1.0, 0.5}, {1.0, 0.0}), std::invalid_argument);
}

TEST(MeanField, SweepOrderIsOne) {
    const auto spec = SystemSpec::cm1();
    const auto f = product_sequence(SequenceKind::density, cm1_one_particle_state(), 4);
    const auto sweeps = meanfield_limit_check(spec, 0.4, 1, {1}, {0.5, 0.25, 0.125}, f);
    ASSERT_EQ(sweeps.size(), 1U);
    EXPECT_NEAR(sweeps[0].fitted_order, 1.0, 0.2);
    EXPECT_THROW(meanfield_limit_check(spec, 0.4, 1, {1}, {0.25, 0.5, 0.125}, f), std::invalid_argument);
}
