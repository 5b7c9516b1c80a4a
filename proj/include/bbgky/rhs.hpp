// rhs.hpp - right-hand sides of the hierarchies, used for finite-difference
// residual checks of every constructed solution.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bbgky/clusters.hpp"
#include "bbgky/combinatorics.hpp"
#include "bbgky/dynamics.hpp"
#include "bbgky/sequence.hpp"

namespace bbgky {

enum class HierarchyKind { von_neumann_hierarchy, dual_bbgky, bbgky, nonlinear_bbgky, dual_vlasov, vlasov_hierarchy };

inline std::string_view to_string(HierarchyKind k) {
    switch (k) {
        case HierarchyKind::von_neumann_hierarchy: return "von_neumann_hierarchy";
        case HierarchyKind::dual_bbgky: return "dual_bbgky";
        case HierarchyKind::bbgky: return "bbgky";
        case HierarchyKind::nonlinear_bbgky: return "nonlinear_bbgky";
        case HierarchyKind::dual_vlasov: return "dual_vlasov";
        case HierarchyKind::vlasov_hierarchy: return "vlasov_hierarchy";
    }
    return "unknown";
}

namespace detail {

inline SequenceKind expected_kind(HierarchyKind k) {
    switch (k) {
        case HierarchyKind::von_neumann_hierarchy: return SequenceKind::correlation;
        case HierarchyKind::dual_bbgky:
        case HierarchyKind::dual_vlasov: return SequenceKind::reduced_observable;
        case HierarchyKind::bbgky:
        case HierarchyKind::vlasov_hierarchy: return SequenceKind::reduced_density;
        case HierarchyKind::nonlinear_bbgky: return SequenceKind::reduced_correlation;
    }
    return SequenceKind::correlation;
}

inline bool needs_next(HierarchyKind k) {
    return k == HierarchyKind::bbgky || k == HierarchyKind::nonlinear_bbgky || k == HierarchyKind::vlasov_hierarchy;
}

/// sum over unordered splits (X1, X2) of 1..s, i1 in X1, i2 in X2 of
/// N*_int(i1, i2) seq(X1) seq(X2)  (no epsilon).
inline Operator split_term(const Dynamics& dyn, const OperatorSequence& seq, int s) {
    Operator acc = Operator::zero(s, seq.d());
    if (s < 2) return acc;
    for (const auto& [x1, x2] : two_block_splits(label_range(1, s))) {
        const Operator a = seq.component(static_cast<int>(x1.size()));
        const Operator b = seq.component(static_cast<int>(x2.size()));
        const Operator prod = place({Placement{&a, x1}, Placement{&b, x2}}, s, seq.d());
        for (int i1 : x1)
            for (int i2 : x2) acc += dyn.interaction_generator(prod, i1, i2, Direction::state);
    }
    return acc;
}

/// sum_i Tr_{s+1} N*_int(i, s+1) X  (no epsilon), X on s+1 particles.
inline Operator collision_term(const Dynamics& dyn, const Operator& x) {
    const int s = x.n() - 1;
    Operator acc = Operator::zero(x.n(), x.d());
    for (int i = 1; i <= s; ++i) acc += dyn.interaction_generator(x, i, s + 1, Direction::state);
    return trace_out_tail(acc, s);
}

/// sum_{j1 != j2} N_int(j1, j2) b(Y \ j1)  (no epsilon), observable side.
inline Operator dual_recursion_term(const Dynamics& dyn, const Operator& b_prev, int s) {
    Operator acc = Operator::zero(s, b_prev.d());
    for (int j1 = 1; j1 <= s; ++j1) {
        Labels rest;
        for (int l = 1; l <= s; ++l)
            if (l != j1) rest.push_back(l);
        const Operator x = embed(b_prev, rest, s);
        for (int j2 = 1; j2 <= s; ++j2)
            if (j2 != j1) acc += dyn.interaction_generator(x, j1, j2, Direction::observable);
    }
    return acc;
}

}  // namespace detail

/// Right-hand side of the requested hierarchy evaluated on `seq`. Entries
/// needing component s+1 are produced for s up to max_n - 1 (up to max_n
/// for finite sequences, whose components vanish beyond). The Vlasov-type
/// hierarchies carry no epsilon.
inline OperatorSequence hierarchy_rhs(HierarchyKind kind, const OperatorSequence& seq, const Dynamics& dyn) {
    if (seq.kind() != detail::expected_kind(kind))
        throw std::invalid_argument("hierarchy_rhs(" + std::string(to_string(kind)) + "): expected a " +
                                    std::string(to_string(detail::expected_kind(kind))) + " sequence");
    const double eps = dyn.spec().epsilon;
    const int d = seq.d();
    const int top = detail::needs_next(kind) && !seq.finite() ? seq.max_n() - 1 : seq.max_n();
    if (top < 1) throw std::invalid_argument("hierarchy_rhs: missing s+1 entry for the trace term");
    std::vector<Operator> e{Operator::scalar(0.0, d)};
    for (int s = 1; s <= top; ++s) {
        const Operator& x = seq[s];
        const Labels all = label_range(1, s);
        Operator r = Operator::zero(s, d);
        switch (kind) {
            case HierarchyKind::von_neumann_hierarchy:
                r = dyn.generator(x, Direction::state) + eps * detail::split_term(dyn, seq, s);
                break;
            case HierarchyKind::bbgky:
                r = dyn.generator(x, Direction::state) + eps * detail::collision_term(dyn, seq.component(s + 1));
                break;
            case HierarchyKind::nonlinear_bbgky: {
                r = dyn.generator(x, Direction::state) + eps * detail::split_term(dyn, seq, s);
                // Tr_{s+1} sum_i N*_int(i, s+1) (G_{s+1} + sum_{i in X1, s+1 in X2} G(X1) G(X2))
                const Operator next = seq.component(s + 1);
                Operator acc = Operator::zero(s + 1, d);
                for (int i = 1; i <= s; ++i) {
                    Operator y = next;
                    for (const auto& [x1, x2] : two_block_splits(label_range(1, s + 1))) {
                        // x1 holds label 1; orient so that i is in X1 and s+1 in X2
                        const bool i1 = std::find(x1.begin(), x1.end(), i) != x1.end();
                        const bool l1 = std::find(x1.begin(), x1.end(), s + 1) != x1.end();
                        if (i1 == l1) continue;
                        const Operator a = seq.component(static_cast<int>(x1.size()));
                        const Operator b = seq.component(static_cast<int>(x2.size()));
                        y += place({Placement{&a, x1}, Placement{&b, x2}}, s + 1, d);
                    }
                    acc += dyn.interaction_generator(y, i, s + 1, Direction::state);
                }
                r += eps * trace_out_tail(acc, s);
                break;
            }
            case HierarchyKind::dual_bbgky: {
                r = dyn.generator(x, Direction::observable);
                if (s >= 2) r += eps * detail::dual_recursion_term(dyn, seq.component(s - 1), s);
                break;
            }
            case HierarchyKind::dual_vlasov: {
                r = dyn.free_generator(x, all, Direction::observable);
                if (s >= 2) r += detail::dual_recursion_term(dyn, seq.component(s - 1), s);
                break;
            }
            case HierarchyKind::vlasov_hierarchy:
                r = dyn.free_generator(x, all, Direction::state) + detail::collision_term(dyn, seq.component(s + 1));
                break;
        }
        e.push_back(std::move(r));
    }
    return {seq.kind(), d, std::move(e), seq.finite()};
}

}  // namespace bbgky
