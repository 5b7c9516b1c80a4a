#include <gtest/gtest.h>

#include "bbgky/dynamics.hpp"
#include "bbgky/random.hpp"
#include "oracles.hpp"

using namespace bbgky;

namespace {

SystemSpec random_system(Rng& rng, double eps) {
    SystemSpec s;
    s.d = 2;
    s.K = random_hermitian(1, 2, rng).matrix();
    s.Phi = symmetrize(random_hermitian(2, 2, rng)).matrix();
    s.epsilon = eps;
    s.N_max = 4;
    s.n_max = 3;
    return s;
}

}  // namespace

TEST(Dynamics, HamiltonianMatchesOracle) {
    Rng rng(11);
    const auto s = random_system(rng, 0.7);
    const Dynamics dyn(s);
    for (int n = 1; n <= 3; ++n) EXPECT_LT(oracle::max_abs(dyn.hamiltonian(n).matrix() - oracle::hamiltonian(s, n)), 1e-13);
}

TEST(Dynamics, GroupActionMatchesTaylorExponential) {
    Rng rng(12);
    const auto s = random_system(rng, 0.5);
    const Dynamics dyn(s);
    const auto x = random_hermitian(3, 2, rng);
    for (double t : {0.25, 1.3}) {
        EXPECT_LT(max_abs(dyn.group_action(t, x, Direction::state) - oracle::group(s, {1, 2, 3}, t, x)), 1e-12);
        EXPECT_LT(max_abs(dyn.group_action(t, x, {1, 3}, Direction::state) - oracle::group(s, {1, 3}, t, x)), 1e-12);
        // observable direction is the inverse group
        EXPECT_LT(max_abs(dyn.group_action(t, x, Direction::observable) - oracle::group(s, {1, 2, 3}, -t, x)), 1e-12);
    }
}

TEST(Dynamics, FreeAndScatteringGroups) {
    Rng rng(13);
    const auto s = random_system(rng, 0.5);
    const Dynamics dyn(s);
    const auto x = random_hermitian(2, 2, rng);
    const double t = 0.6;
    const Matrix v = oracle::expm_minus_i(s.K, t);
    const Matrix vv = oracle::kron(v, v);
    EXPECT_LT(oracle::max_abs(dyn.group_action(t, x, Direction::state, GroupKind::free).matrix() - vv * x.matrix() * vv.adjoint()),
              1e-12);
    // scattering = U(t) (V x V)(-t)
    const Matrix u = oracle::expm_minus_i(oracle::hamiltonian(s, 2), t);
    const Matrix w = u * vv.adjoint();
    EXPECT_LT(oracle::max_abs(dyn.scattering_group(t, x).matrix() - w * x.matrix() * w.adjoint()), 1e-12);
    // without interaction the scattering group is the identity
    const Dynamics free_dyn(s.with_epsilon(0.0));
    EXPECT_LT(max_abs(free_dyn.scattering_group(t, x) - x), 1e-12);
}

TEST(Dynamics, GroupProperty) {
    Rng rng(14);
    const Dynamics dyn(random_system(rng, 0.9));
    const auto x = random_hermitian(2, 2, rng);
    const auto a = dyn.group_action(0.3, dyn.group_action(0.4, x, Direction::state), Direction::state);
    EXPECT_LT(max_abs(a - dyn.group_action(0.7, x, Direction::state)), 1e-12);
    EXPECT_LT(max_abs(dyn.group_action(0.0, x, Direction::state) - x), 1e-14);
}

TEST(Dynamics, GeneratorIsTimeDerivative) {
    Rng rng(15);
    const Dynamics dyn(random_system(rng, 0.4));
    const auto x = random_hermitian(2, 2, rng);
    const double h = 1e-5;
    for (auto dir : {Direction::state, Direction::observable}) {
        const auto fd = (1.0 / (2 * h)) * (dyn.group_action(h, x, dir) - dyn.group_action(-h, x, dir));
        EXPECT_LT(max_abs(fd - dyn.generator(x, dir)), 1e-8);
    }
    // generator = free part + eps * interaction part
    const auto split = dyn.free_generator(x, {1, 2}, Direction::state) +
                       dyn.spec().epsilon * dyn.interaction_generator(x, 1, 2, Direction::state);
    EXPECT_LT(max_abs(split - dyn.generator(x, Direction::state)), 1e-13);
}

TEST(Dynamics, SecondCumulantIsGroupMinusProduct) {
    Rng rng(16);
    const auto s = random_system(rng, 0.8);
    const Dynamics dyn(s);
    const auto x = random_hermitian(3, 2, rng);
    const double t = 0.5;
    const auto ref = oracle::group(s, {1, 2, 3}, t, x) - oracle::group(s, {3}, t, oracle::group(s, {1, 2}, t, x));
    EXPECT_LT(max_abs(dyn.cumulant(t, {{1, 2}, {3}}, x, Direction::state) - ref), 1e-12);
    EXPECT_LT(max_abs(dyn.cumulant(0.0, {{1, 2}, {3}}, x, Direction::state)), 1e-13);
}

TEST(Dynamics, CumulantsInvertToGroup) {
    Rng rng(17);
    const auto s = random_system(rng, 0.8);
    const Dynamics dyn(s);
    const auto x = random_hermitian(4, 2, rng);
    const std::vector<Labels> blocks{{1}, {2, 4}, {3}};
    const double t = 0.45;
    // sum over partitions of products of cumulants of the merged blocks
    Operator acc = Operator::zero(4, 2);
    for (const auto& p : oracle::partitions(3)) {
        Operator y = x;
        for (const auto& z : p) {
            std::vector<Labels> sub;
            for (int i : z) sub.push_back(blocks[static_cast<std::size_t>(i)]);
            y = dyn.cumulant(t, sub, y, Direction::state);
        }
        acc += y;
    }
    EXPECT_LT(max_abs(acc - oracle::group(s, {1, 2, 3, 4}, t, x)), 1e-11);
}

TEST(Dynamics, CumulantArgumentChecks) {
    const Dynamics dyn(SystemSpec::cm1());
    const auto x = Operator::identity(3, 2);
    EXPECT_THROW(dyn.cumulant(0.1, {{1, 2}, {2}}, x, Direction::state), std::invalid_argument);
    EXPECT_THROW(dyn.cumulant(0.1, {{1}, {4}}, x, Direction::state), std::invalid_argument);
    EXPECT_THROW(dyn.cumulant(0.1, {}, x, Direction::state), std::invalid_argument);
}

TEST(Dynamics, SystemValidation) {
    auto s = SystemSpec::cm1();
    s.Phi(0, 1) = 1.0;  // not Hermitian
    EXPECT_THROW(Dynamics{s}, std::invalid_argument);
    s = SystemSpec::cm1();
    s.Phi(1, 1) = 1.0;  // Hermitian but not exchange symmetric
    EXPECT_THROW(Dynamics{s}, std::invalid_argument);
    s = SystemSpec::cm1();
    s.epsilon = -0.1;
    EXPECT_THROW(Dynamics{s}, std::invalid_argument);
}

TEST(Dynamics, ConvergenceRadiusOfCm1) {
    const Dynamics dyn(SystemSpec::cm1());
    EXPECT_NEAR(dyn.convergence_radius(cm1_one_particle_state()), 1.0, 1e-14);
    EXPECT_TRUE(std::isinf(Dynamics(SystemSpec::cm1().with_epsilon(0.0)).convergence_radius(cm1_one_particle_state())));
}
