#include <gtest/gtest.h>

#include "bbgky/hierarchy.hpp"
#include "bbgky/random.hpp"
#include "oracles.hpp"

using namespace bbgky;

namespace {

/// D_n = sum over partitions of 1..n of prod g_{|X|}(X), built from the
/// brute-force partition list and index-formula embeddings.
Operator oracle_cluster_density(const OperatorSequence& g, int n) {
    const int d = g.d();
    const auto side = static_cast<Eigen::Index>(oracle::side(n, d));
    Matrix acc = Matrix::Zero(side, side);
    for (const auto& p : oracle::partitions(n)) {
        Matrix prod = Matrix::Identity(side, side);
        for (const auto& block : p) {
            Labels labels;
            for (int i : block) labels.push_back(i + 1);
            prod = prod * oracle::embed(g[static_cast<int>(block.size())], labels, n).matrix();
        }
        acc += prod;
    }
    return {n, d, acc};
}

/// F_s = (sum_n 1/n! Tr_{s+1..s+n} D_{s+n}) / (sum_n 1/n! Tr D_n).
OperatorSequence oracle_reduce(const OperatorSequence& D) {
    Complex z = D[0].matrix()(0, 0);
    for (int n = 1; n <= D.max_n(); ++n) z += D[n].trace() / factorial(n);
    std::vector<Operator> e{Operator::scalar(1.0, D.d())};
    for (int s = 1; s <= D.max_n(); ++s) {
        Operator acc = Operator::zero(s, D.d());
        for (int n = 0; s + n <= D.max_n(); ++n) acc += (1.0 / factorial(n)) * oracle::partial_trace(D[s + n], label_range(1, s));
        e.push_back((1.0 / z) * acc);
    }
    return {SequenceKind::reduced_density, D.d(), std::move(e), true};
}

/// Exact reduced densities: evolve each D_n with the full group (Taylor exponential).
OperatorSequence oracle_exact(const SystemSpec& s, double t, const OperatorSequence& D) {
    const Dynamics dyn(s);
    std::vector<Operator> e{D[0]};
    for (int n = 1; n <= D.max_n(); ++n) {
        const Matrix u = oracle::expm_minus_i(dyn.hamiltonian(n).matrix(), t);
        e.push_back(Operator{n, D.d(), u * D[n].matrix() * u.adjoint()});
    }
    return oracle_reduce(OperatorSequence(SequenceKind::density, D.d(), std::move(e), true));
}

}  // namespace

TEST(Clusters, RoundTripAndExplicitExpansion) {
    Rng rng(21);
    const auto D = random_symmetric_sequence(SequenceKind::density, 2, 4, rng);
    const auto g = density_to_clusters(D);
    EXPECT_LT(max_trace_norm_difference(clusters_to_density(g), D), 1e-12);
    for (int n = 1; n <= 4; ++n) EXPECT_LT(max_abs(oracle_cluster_density(g, n) - D[n]), 1e-12) << n;
}

TEST(Clusters, ReductionMatchesOracle) {
    Rng rng(22);
    const auto D = random_n_particle_state(2, 3, rng);
    EXPECT_LT(max_trace_norm_difference(reduce_density(D), oracle_reduce(D)), 1e-13);
    // only D_3 present: F_s = 3!/(3-s)! times the s-particle marginal
    const auto F = reduce_density(D);
    EXPECT_NEAR(F[1].trace().real(), 3.0, 1e-12);
    EXPECT_NEAR(F[3].trace().real(), 6.0, 1e-12);
}

TEST(Clusters, ReducedCorrelationsOfProductAreSingle) {
    const auto f = cm1_one_particle_state();
    const auto F = product_sequence(SequenceKind::reduced_density, f, 3);
    const auto G = reduced_correlations_from_F(F);
    EXPECT_LT(max_abs(G[1] - f), 1e-14);
    EXPECT_LT(max_abs(G[2]), 1e-14);
    EXPECT_LT(max_abs(G[3]), 1e-14);
}

TEST(Bbgky, SeriesMatchesExactEvolution) {
    Rng rng(23);
    const auto spec = SystemSpec::cm1();
    const Dynamics dyn(spec);
    const auto D = random_n_particle_state(2, 3, rng);
    for (double t : {0.2, 0.9}) {
        const auto series = bbgky_series_solution(dyn, t, reduce_density(D));
        EXPECT_LT(max_trace_norm_difference(series, oracle_exact(spec, t, D)), 1e-10) << t;
    }
}

TEST(Bbgky, IterationAndCorrelationRoutesAgree) {
    Rng rng(24);
    const Dynamics dyn(SystemSpec::cm1());
    const auto F = reduce_density(random_traceless_density(2, 3, rng));
    const double t = 0.4;
    const auto a = bbgky_series_solution(dyn, t, F);
    EXPECT_LT(max_trace_norm_difference(a, bbgky_iteration_solution(dyn, t, F, 2)), 1e-8);
    EXPECT_LT(max_trace_norm_difference(a, bbgky_series_solution(dyn, t, F, BbgkyRoute::via_correlations)), 1e-8);
}

TEST(Bbgky, SeriesSolvesTheHierarchy) {
    Rng rng(25);
    const Dynamics dyn(SystemSpec::cm1());
    const auto F = reduce_density(random_n_particle_state(2, 3, rng));
    const double t = 0.3, h = 1e-4;
    const auto mid = bbgky_series_solution(dyn, t, F);
    const auto rhs = hierarchy_rhs(HierarchyKind::bbgky, mid, dyn);
    const auto p = bbgky_series_solution(dyn, t + h, F), m = bbgky_series_solution(dyn, t - h, F);
    for (int s = 1; s <= 3; ++s) EXPECT_LT(trace_norm((1.0 / (2 * h)) * (p[s] - m[s]) - rhs[s]), 1e-6) << s;
}

TEST(Bbgky, GuardRejectsTimesBeyondTheRadius) {
    const Dynamics dyn(SystemSpec::cm1());
    const auto F = product_sequence(SequenceKind::reduced_density, cm1_one_particle_state(), 6);
    EXPECT_NO_THROW(bbgky_series_solution(dyn, 0.5, F));
    EXPECT_THROW(bbgky_series_solution(dyn, 1.2, F), GuardError);
    SeriesOptions o;
    o.guard = false;
    EXPECT_NO_THROW(bbgky_series_solution(dyn, 1.2, F, BbgkyRoute::cumulant, o));
}

TEST(DualBbgky, MatchesExactEvolutionAndDuality) {
    Rng rng(26);
    const auto spec = SystemSpec::cm1();
    const Dynamics dyn(spec);
    const int N = spec.N_max;
    const auto B0 = random_symmetric_sequence(SequenceKind::reduced_observable, 2, N, rng);
    const auto D = random_n_particle_state(2, N, rng);
    const auto F0 = reduce_density(D);
    const double t = 0.6;
    // <B(t), F0> = <B0, F(t)> with F(t) from the exact oracle evolution
    const double lhs = expectation(dual_bbgky_solution(dyn, t, B0, ObservableType::make_general(), N), F0);
    const double rhs = expectation(B0, oracle_exact(spec, t, D));
    EXPECT_NEAR(lhs, rhs, 1e-10);
}

TEST(DualBbgky, AdditiveHintAndValidation) {
    const Dynamics dyn(SystemSpec::cm1());
    const auto b = k_ary_reduced_observable(Operator::identity(1, 2), 3);
    const auto general = dual_bbgky_solution(dyn, 0.5, b, ObservableType::make_general(), 3);
    const auto additive = dual_bbgky_solution(dyn, 0.5, b, ObservableType::make_additive(), 3);
    EXPECT_LT(max_trace_norm_difference(general, additive), 1e-12);
    // the identity is conserved: B_1(t) = I, higher components vanish
    EXPECT_LT(max_abs(additive[1] - Operator::identity(1, 2)), 1e-12);
    EXPECT_LT(max_abs(additive[2]), 1e-12);
    EXPECT_THROW(dual_bbgky_solution(dyn, 0.5, b, ObservableType::make_k_ary(2), 3), std::invalid_argument);
}

TEST(Correlations, VonNeumannAndNonlinearResiduals) {
    Rng rng(27);
    const Dynamics dyn(SystemSpec::cm1());
    const auto D = random_n_particle_state(2, 3, rng);
    const double t = 0.3, h = 1e-4;
    const auto g0 = density_to_clusters(D, 3);
    const auto at = [&](double tt) { return evolve_correlations(dyn, tt, g0); };
    const auto rhs = hierarchy_rhs(HierarchyKind::von_neumann_hierarchy, at(t), dyn);
    for (int s = 1; s <= 3; ++s) EXPECT_LT(trace_norm((1.0 / (2 * h)) * (at(t + h)[s] - at(t - h)[s]) - rhs[s]), 1e-6);

    const auto F0 = reduce_density(D);
    const auto G = [&](double tt) { return reduced_correlations_from_F(bbgky_series_solution(dyn, tt, F0)); };
    const auto rn = hierarchy_rhs(HierarchyKind::nonlinear_bbgky, G(t), dyn);
    for (int s = 1; s <= 2; ++s) EXPECT_LT(trace_norm((1.0 / (2 * h)) * (G(t + h)[s] - G(t - h)[s]) - rn[s]), 1e-6);
}

TEST(Correlations, RhsRejectsWrongSequenceKind) {
    const Dynamics dyn(SystemSpec::cm1());
    const auto F = product_sequence(SequenceKind::reduced_density, cm1_one_particle_state(), 3);
    EXPECT_THROW(hierarchy_rhs(HierarchyKind::dual_bbgky, F, dyn), std::invalid_argument);
}
