// hierarchy.hpp - series solutions of the von Neumann, BBGKY, dual BBGKY and
// nonlinear BBGKY hierarchies, and right-hand sides of all hierarchies.

#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbgky/clusters.hpp"
#include "bbgky/combinatorics.hpp"
#include "bbgky/dynamics.hpp"
#include "bbgky/linalg.hpp"
#include "bbgky/quadrature.hpp"
#include "bbgky/sequence.hpp"

namespace bbgky {

/// Trace norm of the last included series term, a proxy for the tail.
struct SeriesDiagnostics {
    double last_term_norm = 0.0;
    int terms = 0;
};

class GuardError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline void check_convergence_guard(const Dynamics& dyn, double t, const Operator& f1) {
    const double t0 = dyn.convergence_radius(f1);
    if (std::abs(t) >= t0)
        throw GuardError("|t| = " + std::to_string(std::abs(t)) + " outside the convergence radius t0 = " +
                         std::to_string(t0));
}

// ---------------------------------------------------------------------------
// correlations

enum class ClusterMode { plain, cluster_first_argument };

namespace detail {

/// Places every block's operator on its labels inside an n-particle space.
inline Operator placed_product(const std::vector<Labels>& blocks, const std::vector<Operator>& ops, int n, int d) {
    std::vector<Placement> factors;
    for (std::size_t i = 0; i < blocks.size(); ++i) factors.push_back({&ops[i], blocks[i]});
    return place(factors, n, d);
}

}  // namespace detail

/// g_s(t) = sum_P A_{|P|}(t, {X_1}, ..., {X_|P|}) prod g0_{|X|}(X).
inline Operator evolve_correlation(const Dynamics& dyn, double t, const OperatorSequence& g0, int s) {
    if (s > g0.max_n() && !g0.finite())
        throw std::out_of_range("evolve_correlations: entry " + std::to_string(s) + " exceeds the truncation");
    Operator acc = Operator::zero(s, g0.d());
    for (const auto& p : set_partitions(label_range(1, s))) {
        std::vector<Operator> ops;
        for (const auto& x : p.blocks) ops.push_back(g0.component(static_cast<int>(x.size())));
        const Operator prod = detail::placed_product(p.blocks, ops, s, g0.d());
        acc += dyn.cumulant(t, p.blocks, prod, Direction::state);
    }
    return acc;
}

/// Initial correlations feeding the cluster-first expansion: the cluster
/// correlation g0_{1+m}({1..s}, m particles) and the plain g0_m.
struct ClusterData {
    std::function<Operator(int m)> cluster;
    std::function<Operator(int m)> plain;
};

/// From the density sequence of the initial state.
inline ClusterData cluster_data_from_density(const OperatorSequence& D0, int s, int max_extra) {
    auto g0 = std::make_shared<OperatorSequence>(density_to_clusters(D0, s + max_extra));
    return {[D0, s](int m) { return cluster_cumulant(D0, s, m); },
            [g0](int m) { return g0->component(m); }};
}

/// Chaos data: g0 = (F1, 0, 0, ...).
inline ClusterData cluster_data_chaos(const Operator& f1, int s) {
    return {[f1, s](int m) { return m == 0 ? tensor_power(f1, s) : Operator::zero(s + m, f1.d()); },
            [f1](int m) { return m == 1 ? f1 : Operator::zero(m, f1.d()); }};
}

/// Correlation of the cluster {1..s} and particles s+1..s+n at time t:
/// sum over partitions P of ({1..s}, s+1, ..., s+n) of
/// A_{|P|}(t, {theta(X_1)}, ...) prod_X g0(X), where the block holding the
/// cluster carries the cluster correlation.
inline Operator evolve_cluster_correlation(const Dynamics& dyn, double t, const ClusterData& data, int s, int n) {
    const int total = s + n;
    const int d = dyn.d();
    std::vector<Labels> items{label_range(1, s)};
    for (int l = s + 1; l <= total; ++l) items.push_back({l});
    Operator acc = Operator::zero(total, d);
    for (const auto& p : set_partitions(items)) {
        std::vector<Labels> blocks;
        std::vector<Operator> ops;
        bool vanishes = false;
        for (const auto& x : p.blocks) {
            Labels theta = detail::union_of(x);
            ops.push_back(x.front() == items.front() ? data.cluster(static_cast<int>(x.size()) - 1)
                                                     : data.plain(static_cast<int>(theta.size())));
            if (max_abs(ops.back()) == 0.0) vanishes = true;
            blocks.push_back(std::move(theta));
        }
        if (vanishes) continue;
        const Operator prod = detail::placed_product(blocks, ops, total, d);
        acc += dyn.cumulant(t, blocks, prod, Direction::state);
    }
    return acc;
}

/// Plain mode: (1, g_1(t), ..., g_M(t)). Cluster-first mode: entry m >= s is
/// g_{1+m-s}(t, {1..s}, s+1, ..., m), entries below s are zero; the input is
/// then read as correlations of the initial state.
inline OperatorSequence evolve_correlations(const Dynamics& dyn, double t, const OperatorSequence& g0,
                                            ClusterMode mode = ClusterMode::plain, int s = 1) {
    detail::require_kind(g0, SequenceKind::correlation, "evolve_correlations");
    std::vector<Operator> e{Operator::scalar(1.0, g0.d())};
    if (mode == ClusterMode::plain) {
        for (int m = 1; m <= g0.max_n(); ++m) e.push_back(evolve_correlation(dyn, t, g0, m));
        return {SequenceKind::correlation, g0.d(), std::move(e), false};
    }
    const ClusterData data = cluster_data_from_density(clusters_to_density(g0), s, std::max(0, g0.max_n() - s));
    for (int m = 1; m <= g0.max_n(); ++m)
        e.push_back(m < s ? Operator::zero(m, g0.d()) : evolve_cluster_correlation(dyn, t, data, s, m - s));
    return {SequenceKind::correlation, g0.d(), std::move(e), false};
}

// ---------------------------------------------------------------------------
// BBGKY hierarchy

enum class BbgkyRoute { cumulant, via_correlations };

struct SeriesOptions {
    int s_max = -1;    // default: all available s
    int n_max = -1;    // truncation for non-finite data; default spec.n_max
    bool guard = true; // enforce the convergence radius for non-finite data
};

namespace detail {

inline int truncation(const Dynamics& dyn, const SeriesOptions& o) { return o.n_max >= 0 ? o.n_max : dyn.spec().n_max; }

inline int default_s_max(const OperatorSequence& F0, int n_trunc, const SeriesOptions& o) {
    if (o.s_max >= 0) return o.s_max;
    return F0.finite() ? F0.max_n() : std::max(1, F0.max_n() - n_trunc);
}

}  // namespace detail

/// A_{1+n}(t, {1..s}, s+1, ..., s+n) applied to X and traced down to 1..s.
inline Operator bbgky_term(const Dynamics& dyn, double t, const Operator& x, int s) {
    std::vector<Labels> blocks{label_range(1, s)};
    for (int l = s + 1; l <= x.n(); ++l) blocks.push_back({l});
    return trace_out_tail(dyn.cumulant(t, blocks, x, Direction::state), s);
}

/// F_s(t) = sum_n (1/n!) Tr_{s+1..s+n} A_{1+n}(t, {1..s}, s+1..s+n) F0_{s+n}.
/// Finite-particle data gives a terminating sum; otherwise the series is
/// cut at n_max behind the convergence guard.
inline OperatorSequence bbgky_series_solution(const Dynamics& dyn, double t, const OperatorSequence& F0,
                                              BbgkyRoute route = BbgkyRoute::cumulant, const SeriesOptions& opts = {},
                                              SeriesDiagnostics* diag = nullptr) {
    detail::require_kind(F0, SequenceKind::reduced_density, "bbgky_series_solution");
    const int n_trunc = detail::truncation(dyn, opts);
    const int s_max = detail::default_s_max(F0, n_trunc, opts);
    if (!F0.finite() && opts.guard && F0.max_n() >= 1) check_convergence_guard(dyn, t, F0[1]);

    // The correlation route needs correlations of the initial state: from the
    // density of finite-particle data, or chaos data (no correlations).
    std::optional<OperatorSequence> D0;
    if (route == BbgkyRoute::via_correlations) {
        if (F0.finite()) {
            D0 = density_from_reduced(F0);
        } else {
            const auto G = reduced_correlations_from_F(F0);
            for (int n = 2; n <= G.max_n(); ++n)
                if (max_abs(G[n]) > 1e-12 * std::max(1.0, max_abs(F0[n])))
                    throw std::invalid_argument("bbgky_series_solution: correlation route on non-finite data needs chaos data");
        }
    }
    SeriesDiagnostics local;
    std::vector<Operator> e{Operator::scalar(1.0, F0.d())};
    for (int s = 1; s <= s_max; ++s) {
        // For finite data the cumulant route terminates at N - s; the
        // correlation route is an expansion in the activity and is cut at
        // n_max when one is given, else at the same order.
        int n_top = F0.finite() ? F0.max_n() - s : n_trunc;
        if (route == BbgkyRoute::via_correlations && F0.finite() && opts.n_max >= 0) n_top = opts.n_max;
        std::optional<ClusterData> data;
        if (route == BbgkyRoute::via_correlations)
            data = D0 ? cluster_data_from_density(*D0, s, n_top) : cluster_data_chaos(F0[1], s);
        Operator acc = Operator::zero(s, F0.d());
        for (int n = 0; n <= n_top; ++n) {
            Operator term = route == BbgkyRoute::cumulant
                                ? bbgky_term(dyn, t, F0.component(s + n), s)
                                : trace_out_tail(evolve_cluster_correlation(dyn, t, *data, s, n), s);
            term *= Complex(1.0 / factorial(n));
            if (n == n_top) local.last_term_norm = std::max(local.last_term_norm, trace_norm(term));
            acc += term;
            ++local.terms;
        }
        e.push_back(std::move(acc));
    }
    if (diag) *diag = local;
    return {SequenceKind::reduced_density, F0.d(), std::move(e), F0.finite()};
}

/// Iteration (Duhamel) series through `order`:
///   sum_k eps^k int_0^t dt_1 ... int_0^{t_{k-1}} dt_k Tr_{s+1..s+k}
///   G*_s(t-t_1) sum_j N*_int(j, s+1) G*_{s+1}(t_1-t_2) ... G*_{s+k}(t_k) F0_{s+k}.
/// Each nested level is an antiderivative on a Chebyshev grid; the node
/// count is doubled until successive results agree.
inline OperatorSequence bbgky_iteration_solution(const Dynamics& dyn, double t, const OperatorSequence& F0, int order,
                                                 int s_max = -1, const QuadratureOptions& q = {}) {
    detail::require_kind(F0, SequenceKind::reduced_density, "bbgky_iteration_solution");
    if (order < 0 || order > dyn.spec().n_max)
        throw std::invalid_argument("bbgky_iteration_solution: order must lie in 0..n_max");
    if (s_max < 0) s_max = F0.finite() ? F0.max_n() : std::max(1, F0.max_n() - order);
    const double eps = dyn.spec().epsilon;
    const int d = F0.d();

    const auto evolve = [&dyn](double tau, const Operator& x) { return dyn.group_action(tau, x, Direction::state); };
    // sum_{j<=m} Tr_{m+1} N*_int(j, m+1) X
    const auto collide = [&dyn](const Operator& x) {
        const int m = x.n() - 1;
        Operator acc = Operator::zero(x.n(), x.d());
        for (int j = 1; j <= m; ++j) acc += dyn.interaction_generator(x, j, m + 1, Direction::state);
        return trace_out_tail(acc, m);
    };

    std::vector<Operator> e{Operator::scalar(1.0, d)};
    for (int s = 1; s <= s_max; ++s) {
        Operator acc = dyn.group_action(t, F0.component(s), Direction::state);
        for (int k = 1; k <= order && eps != 0.0; ++k) {
            if (F0.finite() && s + k > F0.max_n()) break;
            acc += std::pow(eps, k) * nested_duhamel(t, F0.component(s + k), k, evolve, collide, q);
        }
        e.push_back(std::move(acc));
    }
    return {SequenceKind::reduced_density, d, std::move(e), F0.finite()};
}

// ---------------------------------------------------------------------------
// dual BBGKY hierarchy

struct ObservableType {
    enum Kind { general, additive, k_ary } kind = general;
    int k = 1;

    static ObservableType make_general() { return {general, 0}; }
    static ObservableType make_additive() { return {additive, 1}; }
    static ObservableType make_k_ary(int k) { return {k_ary, k}; }
};

namespace detail {

inline void check_type_hint(const OperatorSequence& B0, const ObservableType& hint) {
    if (hint.kind == ObservableType::general) return;
    const int k = hint.kind == ObservableType::additive ? 1 : hint.k;
    if (k < 1 || k > B0.max_n()) throw std::invalid_argument("type hint: order " + std::to_string(k) + " not present in B0");
    for (int n = 0; n <= B0.max_n(); ++n) {
        if (n == k) continue;
        if (max_abs(B0[n]) > 1e-14)
            throw std::invalid_argument("type hint: B0 has a non-zero component at n=" + std::to_string(n) +
                                        " inconsistent with the " + (k == 1 ? std::string("additive") : std::to_string(k) + "-ary") +
                                        " hint");
    }
}

/// A_{1+|J|}(t, {Y\J}, j_1, ...) b(Y\J) for one subset J of Y = 1..s.
inline Operator dual_term(const Dynamics& dyn, double t, const Operator& b, const Labels& rest, const Labels& J, int s) {
    const Operator x = embed(b, rest, s);
    std::vector<Labels> blocks{rest};
    for (int j : J) blocks.push_back({j});
    return dyn.cumulant(t, blocks, x, Direction::observable);
}

}  // namespace detail

/// B_s(t) = sum_{J subset of 1..s, J != 1..s} A_{1+|J|}(t, {Y\J}, J) B0_{s-|J|}(Y\J)
/// (the J = Y term vanishes for s >= 1). The additive and k-ary hints select
/// the specialized expansions.
inline OperatorSequence dual_bbgky_solution(const Dynamics& dyn, double t, const OperatorSequence& B0,
                                            ObservableType hint = {}, int s_max = -1) {
    detail::require_kind(B0, SequenceKind::reduced_observable, "dual_bbgky_solution");
    detail::check_type_hint(B0, hint);
    if (s_max < 0) s_max = std::max(B0.max_n(), dyn.spec().N_max);
    const int d = B0.d();
    std::vector<Operator> e{B0[0]};
    for (int s = 1; s <= s_max; ++s) {
        const Labels Y = label_range(1, s);
        Operator acc = Operator::zero(s, d);
        if (hint.kind == ObservableType::additive) {
            Operator sum = Operator::zero(s, d);
            for (int j = 1; j <= s; ++j) sum += embed(B0[1], {j}, s);
            std::vector<Labels> blocks;
            for (int j = 1; j <= s; ++j) blocks.push_back({j});
            acc = dyn.cumulant(t, blocks, sum, Direction::observable);
        } else if (hint.kind == ObservableType::k_ary) {
            if (s >= hint.k) {
                for (const auto& rest : subsets_of_size(Y, hint.k)) {
                    Labels J;
                    std::set_difference(Y.begin(), Y.end(), rest.begin(), rest.end(), std::back_inserter(J));
                    acc += detail::dual_term(dyn, t, B0[hint.k], rest, J, s);
                }
            }
        } else {
            for (int r = 1; r <= s; ++r) {
                const Operator b = B0.component(r);
                if (max_abs(b) == 0.0) continue;
                for (const auto& rest : subsets_of_size(Y, r)) {
                    Labels J;
                    std::set_difference(Y.begin(), Y.end(), rest.begin(), rest.end(), std::back_inserter(J));
                    acc += detail::dual_term(dyn, t, b, rest, J, s);
                }
            }
        }
        e.push_back(std::move(acc));
    }
    return {SequenceKind::reduced_observable, d, std::move(e), false};
}

// ---------------------------------------------------------------------------
// reduced correlations

enum class CorrelationMode { from_F, chaos_series, via_correlations };

/// from_F: cumulants of F. chaos_series: G_s(t) = sum_{n<=n_max} (1/n!)
/// Tr A_{s+n}(t; 1..s+n) prod G1^0, input holds G1^0 at entry 1.
/// via_correlations: G_s(t) = sum_n (1/n!) Tr g_{s+n}(t) from a density or
/// correlation sequence of the initial state.
inline OperatorSequence reduced_correlations(const Dynamics& dyn, const OperatorSequence& input, CorrelationMode mode,
                                             double t = 0.0, const SeriesOptions& opts = {},
                                             SeriesDiagnostics* diag = nullptr) {
    const int d = input.d();
    std::vector<Operator> e{Operator::scalar(1.0, d)};
    switch (mode) {
        case CorrelationMode::from_F:
            return reduced_correlations_from_F(input);
        case CorrelationMode::chaos_series: {
            if (input.max_n() < 1) throw std::invalid_argument("reduced_correlations: G1^0 required");
            const Operator g1 = input[1];
            const int n_trunc = detail::truncation(dyn, opts);
            const int s_max = opts.s_max >= 0 ? opts.s_max : dyn.spec().N_max;
            if (opts.guard) check_convergence_guard(dyn, t, g1);
            SeriesDiagnostics local;
            for (int s = 1; s <= s_max; ++s) {
                Operator acc = Operator::zero(s, d);
                for (int n = 0; n <= n_trunc; ++n) {
                    std::vector<Labels> blocks;
                    for (int l = 1; l <= s + n; ++l) blocks.push_back({l});
                    Operator term = trace_out_tail(dyn.cumulant(t, blocks, tensor_power(g1, s + n), Direction::state), s);
                    term *= Complex(1.0 / factorial(n));
                    if (n == n_trunc) local.last_term_norm = std::max(local.last_term_norm, trace_norm(term));
                    acc += term;
                }
                e.push_back(std::move(acc));
            }
            if (diag) *diag = local;
            return {SequenceKind::reduced_correlation, d, std::move(e), false};
        }
        case CorrelationMode::via_correlations: {
            // For finite-particle data the series runs through n_max traced
            // particles when given (it continues past N), else through N - s.
            const bool from_density = input.kind() == SequenceKind::density;
            const OperatorSequence& src = input;
            const int N = src.max_n();
            const int s_max = opts.s_max >= 0 ? opts.s_max : N;
            int top = N;
            for (int s = 1; s <= s_max; ++s) top = std::max(top, s + (opts.n_max >= 0 ? opts.n_max : N - s));
            const OperatorSequence g0 = from_density ? density_to_clusters(src, top) : src;
            detail::require_kind(g0, SequenceKind::correlation, "reduced_correlations");
            std::vector<Operator> gt;
            for (int m = 1; m <= top; ++m) gt.push_back(evolve_correlation(dyn, t, g0, m));
            SeriesDiagnostics local;
            for (int s = 1; s <= s_max; ++s) {
                const int n_top = opts.n_max >= 0 ? opts.n_max : N - s;
                Operator acc = Operator::zero(s, d);
                for (int n = 0; n <= n_top; ++n) {
                    Operator term = (1.0 / factorial(n)) * trace_out_tail(gt[static_cast<std::size_t>(s + n - 1)], s);
                    if (n == n_top) local.last_term_norm = std::max(local.last_term_norm, trace_norm(term));
                    acc += term;
                }
                e.push_back(std::move(acc));
            }
            if (diag) *diag = local;
            return {SequenceKind::reduced_correlation, d, std::move(e), false};
        }
    }
    throw std::logic_error("unknown correlation mode");
}

}  // namespace bbgky

#include "bbgky/rhs.hpp"
