// clusters.hpp - cluster expansions, reduced operators and mean-value
// functionals.

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbgky/combinatorics.hpp"
#include "bbgky/linalg.hpp"
#include "bbgky/sequence.hpp"

namespace bbgky {

namespace detail {

inline void require_kind(const OperatorSequence& s, SequenceKind k, const char* what) {
    if (s.kind() != k)
        throw std::invalid_argument(std::string(what) + ": expected " + std::string(to_string(k)) + " sequence, got " +
                                    std::string(to_string(s.kind())));
}

inline Labels union_of(const std::vector<Labels>& blocks) {
    Labels out;
    for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
    return out;
}

}  // namespace detail

/// D_n = sum_P prod_{X in P} g_{|X|}(X).
inline OperatorSequence clusters_to_density(const OperatorSequence& g) {
    detail::require_kind(g, SequenceKind::correlation, "clusters_to_density");
    std::vector<Operator> e{Operator::scalar(1.0, g.d())};
    for (int n = 1; n <= g.max_n(); ++n) e.push_back(partition_sum(g, n, [](int) { return 1.0; }));
    return {SequenceKind::density, g.d(), std::move(e), g.finite()};
}

/// g_n = sum_P (-1)^{|P|-1}(|P|-1)! prod_{X in P} D_{|X|}(X).
/// Entries up to max_n (default D.max_n()); a finite-N density has
/// non-vanishing cumulants beyond N.
inline OperatorSequence density_to_clusters(const OperatorSequence& D, int max_n = -1) {
    detail::require_kind(D, SequenceKind::density, "density_to_clusters");
    if (max_n < 0) max_n = D.max_n();
    std::vector<Operator> e{Operator::scalar(1.0, D.d())};
    for (int n = 1; n <= max_n; ++n)
        e.push_back(partition_sum(D, n, [](int p) { return static_cast<double>(cumulant_coefficient(p)); }));
    return {SequenceKind::correlation, D.d(), std::move(e), false};
}

/// Cumulant of a density-like sequence with the labels 1..s fused into one
/// item: g_{1+m}({1..s}, s+1, ..., s+m) = sum over partitions P of the items
/// of (-1)^{|P|-1}(|P|-1)! prod_X D_{|theta(X)|}(theta(X)).
inline Operator cluster_cumulant(const OperatorSequence& D, int s, int m) {
    if (s < 1 || m < 0) throw std::invalid_argument("cluster_cumulant: need s >= 1, m >= 0");
    const int n = s + m;
    std::vector<Labels> items{label_range(1, s)};
    for (int l = s + 1; l <= n; ++l) items.push_back({l});
    Operator acc = Operator::zero(n, D.d());
    for (const auto& p : set_partitions(items)) {
        std::vector<Labels> blocks;
        for (const auto& x : p.blocks) blocks.push_back(detail::union_of(x));
        const double w = static_cast<double>(cumulant_coefficient(static_cast<int>(p.size())));
        acc += w * block_product(blocks, n, D.d(), [&](const Labels& x) { return D.component(static_cast<int>(x.size())); });
    }
    return acc;
}

/// (I, D) = sum_n (1/n!) Tr D_n.
inline Complex normalization(const OperatorSequence& D) {
    Complex z = 0.0;
    for (int n = 0; n <= D.max_n(); ++n) z += D[n].trace() / factorial(n);
    return z;
}

/// F_s = (I,D)^{-1} sum_n (1/n!) Tr_{s+1..s+n} D_{s+n}.
inline OperatorSequence reduce_density(const OperatorSequence& D) {
    detail::require_kind(D, SequenceKind::density, "reduce_density");
    if (!D.finite()) throw std::invalid_argument("reduce_density: needs a finite-particle density sequence");
    const Complex z = normalization(D);
    if (std::abs(z) < 1e-300) throw std::invalid_argument("reduce_density: zero normalization (I, D)");
    std::vector<Operator> e{Operator::scalar(1.0, D.d())};
    for (int s = 1; s <= D.max_n(); ++s) {
        Operator acc = Operator::zero(s, D.d());
        for (int n = 0; s + n <= D.max_n(); ++n) acc += (1.0 / factorial(n)) * trace_out_tail(D[s + n], s);
        e.push_back((1.0 / z) * acc);
    }
    return {SequenceKind::reduced_density, D.d(), std::move(e), true};
}

/// Inverse of reduce_density for finite-particle data, normalized to D_0 = 1:
/// D_n proportional to sum_k ((-1)^k/k!) Tr_{n+1..n+k} F_{n+k}.
inline OperatorSequence density_from_reduced(const OperatorSequence& F) {
    detail::require_kind(F, SequenceKind::reduced_density, "density_from_reduced");
    if (!F.finite()) throw std::invalid_argument("density_from_reduced: needs finite-particle reduced data");
    const int N = F.max_n();
    auto tilde = [&](int n) {
        Operator acc = Operator::zero(n, F.d());
        for (int k = 0; n + k <= N; ++k) {
            const double w = (k % 2 == 0 ? 1.0 : -1.0) / factorial(k);
            const Operator& f = n + k == 0 ? F[0] : F[n + k];
            acc += w * (n == 0 ? Operator::scalar(f.trace(), F.d()) : trace_out_tail(f, n));
        }
        return acc;
    };
    const Complex d0 = tilde(0).trace();
    if (std::abs(d0) < 1e-300) throw std::invalid_argument("density_from_reduced: degenerate reduced sequence");
    std::vector<Operator> e{Operator::scalar(1.0, F.d())};
    for (int n = 1; n <= N; ++n) e.push_back((1.0 / d0) * tilde(n));
    return {SequenceKind::density, F.d(), std::move(e), true};
}

/// B_s = sum_{Y subset of 1..s} (-1)^{s-|Y|} A_{|Y|}(Y).
inline OperatorSequence reduce_observable(const OperatorSequence& A, int s_max = -1) {
    detail::require_kind(A, SequenceKind::observable, "reduce_observable");
    if (s_max < 0) s_max = A.max_n();
    std::vector<Operator> e{A[0]};
    for (int s = 1; s <= s_max; ++s) {
        Operator acc = Operator::zero(s, A.d());
        const Labels all = label_range(1, s);
        for (int k = 0; k <= s; ++k) {
            const double sign = (s - k) % 2 == 0 ? 1.0 : -1.0;
            const Operator a = A.component(k);
            for (const auto& y : subsets_of_size(all, k)) {
                if (k == 0) acc += (sign * a.matrix()(0, 0)) * Operator::identity(s, A.d());
                else acc += sign * embed(a, y, s);
            }
        }
        e.push_back(std::move(acc));
    }
    return {SequenceKind::reduced_observable, A.d(), std::move(e), A.finite()};
}

/// A_n = sum_{Y subset of 1..n} B_{|Y|}(Y); inverse of reduce_observable.
inline OperatorSequence expand_observable(const OperatorSequence& B, int n_max) {
    detail::require_kind(B, SequenceKind::reduced_observable, "expand_observable");
    std::vector<Operator> e{B[0]};
    for (int n = 1; n <= n_max; ++n) {
        Operator acc = Operator::zero(n, B.d());
        const Labels all = label_range(1, n);
        for (int k = 0; k <= n && k <= B.max_n(); ++k) {
            for (const auto& y : subsets_of_size(all, k)) {
                if (k == 0) acc += B[0].matrix()(0, 0) * Operator::identity(n, B.d());
                else acc += embed(B[k], y, n);
            }
        }
        e.push_back(std::move(acc));
    }
    return {SequenceKind::observable, B.d(), std::move(e), true};
}

/// A^{(1)} = (0, a1, a1(1)+a1(2), ...): additive observable.
inline OperatorSequence additive_observable(const Operator& a1, int n_max) {
    std::vector<Operator> e{Operator::scalar(0.0, a1.d())};
    for (int n = 1; n <= n_max; ++n) {
        Operator acc = Operator::zero(n, a1.d());
        for (int j = 1; j <= n; ++j) acc += embed(a1, {j}, n);
        e.push_back(std::move(acc));
    }
    return {SequenceKind::observable, a1.d(), std::move(e), true};
}

/// One-component reduced observable (0, ..., 0, b_k, 0, ...).
inline OperatorSequence k_ary_reduced_observable(const Operator& bk, int s_max) {
    if (bk.n() < 1 || bk.n() > s_max) throw std::invalid_argument("k_ary_reduced_observable: need 1 <= k <= s_max");
    auto seq = OperatorSequence::zeros(SequenceKind::reduced_observable, bk.d(), s_max);
    seq[bk.n()] = bk;
    return seq;
}

/// <A> = sum_s (1/s!) Tr B_s F_s with F_0 = 1; the real part is returned.
inline Complex expectation_complex(const OperatorSequence& B, const OperatorSequence& F) {
    detail::require_kind(B, SequenceKind::reduced_observable, "expectation");
    if (F.kind() != SequenceKind::reduced_density && F.kind() != SequenceKind::reduced_correlation)
        throw std::invalid_argument("expectation: second argument must be a reduced state sequence");
    Complex acc = B[0].matrix()(0, 0);
    const int top = std::min(B.max_n(), F.max_n());
    for (int s = 1; s <= top; ++s) acc += (B[s] * F[s]).trace() / factorial(s);
    return acc;
}

inline double expectation(const OperatorSequence& B, const OperatorSequence& F) {
    return expectation_complex(B, F).real();
}

/// Unreduced form: (I,D)^{-1} sum_n (1/n!) Tr A_n D_n.
inline double unreduced_expectation(const OperatorSequence& A, const OperatorSequence& D) {
    detail::require_kind(A, SequenceKind::observable, "unreduced_expectation");
    detail::require_kind(D, SequenceKind::density, "unreduced_expectation");
    Complex acc = 0.0;
    const int top = std::min(A.max_n(), D.max_n());
    for (int n = 0; n <= top; ++n) acc += (A[n] * D[n]).trace() / factorial(n);
    return (acc / normalization(D)).real();
}

/// Dispersion of an additive observable from reduced correlations:
/// Tr_1 (a1^2 - <A>^2) G_1 + Tr_{1,2} a1(1) a1(2) G_2.
inline double dispersion(const Operator& a1, const OperatorSequence& G) {
    if (a1.n() != 1) throw std::invalid_argument("dispersion: a1 must be a one-particle operator");
    if (G.max_n() < 2) throw std::invalid_argument("dispersion: G_2 is required");
    const Complex mean = (a1 * G[1]).trace();
    const Operator sq = a1 * a1 - (mean * mean) * Operator::identity(1, a1.d());
    const Operator pair = tensor(a1, a1);
    return ((sq * G[1]).trace() + (pair * G[2]).trace()).real();
}

/// G_s = sum_P (-1)^{|P|-1}(|P|-1)! prod F_{|X|}(X): reduced correlations.
inline OperatorSequence reduced_correlations_from_F(const OperatorSequence& F) {
    detail::require_kind(F, SequenceKind::reduced_density, "reduced_correlations");
    std::vector<Operator> e{Operator::scalar(1.0, F.d())};
    for (int n = 1; n <= F.max_n(); ++n)
        e.push_back(partition_sum(F, n, [](int p) { return static_cast<double>(cumulant_coefficient(p)); }));
    return {SequenceKind::reduced_correlation, F.d(), std::move(e), false};
}

}  // namespace bbgky
