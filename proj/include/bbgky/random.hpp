// random.hpp - deterministic random test data: Hermitian operators,
// permutation-symmetric density and correlation sequences.

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>

#include "bbgky/linalg.hpp"
#include "bbgky/sequence.hpp"

namespace bbgky {

using Rng = std::mt19937_64;

inline Operator random_hermitian(int n, int d, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> normal;
    const auto side = static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(d), n));
    Matrix x(side, side);
    for (Eigen::Index i = 0; i < side; ++i)
        for (Eigen::Index j = 0; j < side; ++j) x(i, j) = Complex(normal(rng), normal(rng));
    return {n, d, 0.5 * scale * (x + x.adjoint())};
}

/// Average of the operator over all permutations of its labels.
inline Operator symmetrize(const Operator& a) {
    const int n = a.n();
    if (n <= 1) return a;
    Labels p = label_range(1, n);
    Operator acc = Operator::zero(n, a.d());
    int count = 0;
    do {
        acc += embed(a, p, n);
        ++count;
    } while (std::next_permutation(p.begin(), p.end()));
    return (1.0 / count) * acc;
}

/// Positive, unit-trace, permutation-symmetric n-particle density operator.
inline Operator random_density(int n, int d, Rng& rng) {
    const Operator h = random_hermitian(n, d, rng);
    Operator p{n, d, h.matrix() * h.matrix().adjoint()};
    p = symmetrize(p);
    return (1.0 / p.trace().real()) * p;
}

/// Symmetric Hermitian sequence with entry 0 equal to 1 (any kind).
inline OperatorSequence random_symmetric_sequence(SequenceKind kind, int d, int max_n, Rng& rng, double scale = 0.3,
                                                  bool finite = true) {
    std::vector<Operator> e{Operator::scalar(1.0, d)};
    for (int n = 1; n <= max_n; ++n) e.push_back(symmetrize(random_hermitian(n, d, rng, scale)));
    return {kind, d, std::move(e), finite};
}

/// Finite-N density data with Tr D_n = 0 for n >= 1: every cluster term
/// beyond N vanishes under the trace, so correlation-driven series terminate.
inline OperatorSequence random_traceless_density(int d, int N, Rng& rng, double scale = 0.3) {
    std::vector<Operator> e{Operator::scalar(1.0, d)};
    for (int n = 1; n <= N; ++n) {
        Operator a = symmetrize(random_hermitian(n, d, rng));
        a -= (a.trace() / static_cast<double>(a.side())) * Operator::identity(n, d);
        e.push_back(scale * a);
    }
    return {SequenceKind::density, d, std::move(e), true};
}

/// Physical N-particle state as a density sequence (D_N = symmetric density, others zero).
inline OperatorSequence random_n_particle_state(int d, int N, Rng& rng) {
    auto seq = OperatorSequence::zeros(SequenceKind::density, d, N);
    seq[0] = Operator::scalar(0.0, d);
    seq[N] = random_density(N, d, rng);
    return seq;
}

}  // namespace bbgky
