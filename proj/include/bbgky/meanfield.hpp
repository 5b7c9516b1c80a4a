// meanfield.hpp - mean-field limit checks: rescaled cumulant limits,
// propagation of (initial) chaos and correlations, limit observables.

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbgky/clusters.hpp"
#include "bbgky/hierarchy.hpp"
#include "bbgky/kinetic.hpp"
#include "bbgky/quadrature.hpp"

namespace bbgky {

/// Distances over an epsilon sweep with the least-squares log-log slope.
struct SweepResult {
    std::string name;
    int s = 0;
    int n = 0;
    std::vector<double> epsilons;
    std::vector<double> distances;
    double fitted_order = 0.0;
    double r_squared = 0.0;
    bool exact = false;  // every distance vanished (below 1e-300); no fit
};

struct PowerFit {
    double slope = 0.0;
    double r_squared = 0.0;
};

/// Least-squares fit log y = a + slope log x.
inline PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_power_law: need >= 2 matching points");
    const auto m = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_power_law: values must be positive");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly; syy += ly * ly;
    }
    const double vx = sxx - sx * sx / m, vy = syy - sy * sy / m, cxy = sxy - sx * sy / m;
    if (vx <= 0.0) throw std::invalid_argument("fit_power_law: abscissae must differ");
    PowerFit f;
    f.slope = cxy / vx;
    f.r_squared = vy <= 0.0 ? 1.0 : (cxy * cxy) / (vx * vy);
    return f;
}

inline void finish_sweep(SweepResult& r) {
    bool all_zero = true;
    for (double e : r.distances) all_zero = all_zero && e < 1e-300;
    if (all_zero) {
        r.exact = true;
        r.fitted_order = 0.0;
        r.r_squared = 1.0;
        return;
    }
    for (double e : r.distances)
        if (e < 1e-300) throw std::runtime_error(r.name + ": a distance vanished exactly; the order fit is undefined");
    const auto f = fit_power_law(r.epsilons, r.distances);
    r.fitted_order = f.slope;
    r.r_squared = f.r_squared;
}

inline void check_eps_list(const std::vector<double>& eps) {
    if (eps.size() < 3) throw std::invalid_argument("eps_list: at least three values are required");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw std::invalid_argument("eps_list[" + std::to_string(i) + "]: must be positive");
        if (i > 0 && !(eps[i] < eps[i - 1]))
            throw std::invalid_argument("eps_list[" + std::to_string(i) + "]: must be strictly decreasing");
    }
}

namespace detail {

inline Operator limit_collide(const Dynamics& lim, const Operator& y) {
    const int m = y.n() - 1;
    Operator acc = Operator::zero(y.n(), y.d());
    for (int k = 1; k <= m; ++k) acc += lim.interaction_generator(y, k, m + 1, Direction::state);
    return trace_out_tail(acc, m);
}

/// int_{simplex} Tr G0_s(t-t1) sum N*_int(., s+1) G0_{s+1}(t1-t2) ... G0_{s+n}(t_n) x.
inline Operator limit_term(const Dynamics& lim, double t, const Operator& x, int n, const QuadratureOptions& q) {
    const auto evolve = [&lim](double tau, const Operator& y) {
        return lim.group_action(tau, y, Direction::state, GroupKind::free);
    };
    return nested_duhamel(t, x, n, evolve, [&lim](const Operator& y) { return limit_collide(lim, y); }, q);
}

}  // namespace detail

/// For every order n: distance between eps^{-n} (1/n!) Tr_{s+1..s+n}
/// A_{1+n}(t, {1..s}, s+1..s+n) f_{s+n} and the nested free-group limit
/// term (compared after the partial trace). n = 0 compares G*_s f_s with the
/// product of one-particle free groups.
inline std::vector<SweepResult> meanfield_limit_check(const SystemSpec& spec, double t, int s, const std::vector<int>& orders,
                                                      const std::vector<double>& eps_list, const OperatorSequence& f_test,
                                                      const QuadratureOptions& q = {}) {
    check_eps_list(eps_list);
    if (s < 1) throw std::invalid_argument("meanfield_limit_check: s must be >= 1");
    const Dynamics lim = limit_dynamics(spec);
    if (f_test.max_n() >= 1) check_convergence_guard(lim, t, f_test[1]);
    std::vector<SweepResult> out;
    for (int n : orders) {
        if (n < 0) throw std::invalid_argument("meanfield_limit_check: orders must be >= 0");
        const Operator& f = f_test.component(s + n);
        const Operator reference = detail::limit_term(lim, t, f, n, q);
        SweepResult r;
        r.name = "meanfield_limit";
        r.s = s;
        r.n = n;
        for (double eps : eps_list) {
            const Dynamics dyn(spec.with_epsilon(eps));
            std::vector<Labels> blocks{label_range(1, s)};
            for (int l = s + 1; l <= s + n; ++l) blocks.push_back({l});
            const Operator c = n == 0 ? dyn.group_action(t, f, Direction::state)
                                      : dyn.cumulant(t, blocks, f, Direction::state);
            const Operator scaled = (1.0 / (std::pow(eps, n) * factorial(n))) * trace_out_tail(c, s);
            r.epsilons.push_back(eps);
            r.distances.push_back(trace_norm(scaled - reference));
        }
        finish_sweep(r);
        out.push_back(std::move(r));
    }
    return out;
}

/// s-particle limit hierarchy series truncated at n_max:
/// sum_{n <= n_max} nested limit term applied to x_{s+n}.
inline Operator limit_hierarchy_series(const Dynamics& lim, double t, int s, int n_max,
                                       const std::function<Operator(int)>& initial, const QuadratureOptions& q = {}) {
    Operator acc = Operator::zero(s, lim.d());
    for (int n = 0; n <= n_max; ++n) acc += detail::limit_term(lim, t, initial(s + n), n, q);
    return acc;
}

/// Limit sequence f_k(t) = G0_k(t)(g_k) prod f1(t) for k <= k_max
/// (g_1 = identity); with no correlations this is the chaos sequence.
inline OperatorSequence dchaos_sequence(const SystemSpec& spec, double t, const KineticState& st, const Operator& f1_t,
                                        int k_max) {
    const Dynamics lim = limit_dynamics(spec);
    std::vector<Operator> e{Operator::scalar(1.0, spec.d)};
    for (int k = 1; k <= k_max; ++k) {
        const Operator g = lim.group_action(t, st.kernel(k), Direction::state, GroupKind::free);
        e.push_back(g * tensor_power(f1_t, k));
    }
    return {SequenceKind::reduced_density, spec.d, std::move(e), false};
}

/// Correlation propagation g_n(t) = G0_n(t)(sum_P (-1)^{|P|-1}(|P|-1)! prod g_X) prod f1(t).
inline OperatorSequence correlation_propagation_sequence(const SystemSpec& spec, double t, const KineticState& st,
                                                         const Operator& f1_t, int k_max) {
    const Dynamics lim = limit_dynamics(spec);
    std::vector<Operator> kernels{Operator::scalar(1.0, spec.d)};
    for (int k = 1; k <= k_max; ++k) kernels.push_back(st.kernel(k));
    const OperatorSequence g(SequenceKind::reduced_density, spec.d, kernels, true);
    std::vector<Operator> e{Operator::scalar(1.0, spec.d)};
    for (int k = 1; k <= k_max; ++k) {
        const Operator c = partition_sum(g, k, [](int p) { return static_cast<double>(cumulant_coefficient(p)); });
        e.push_back(lim.group_action(t, c, Direction::state, GroupKind::free) * tensor_power(f1_t, k));
    }
    return {SequenceKind::reduced_correlation, spec.d, std::move(e), false};
}

struct ChaosCheckResult {
    std::vector<SweepResult> sweeps;   // one per s
    Operator f1_limit;                 // limit one-particle state used as reference
    double truncation_gap = 0.0;       // correlated variant: truncated limit series vs dchaos (max over s)
    std::optional<OperatorSequence> dchaos;  // correlated variant only
    std::optional<OperatorSequence> propagated_correlations;
    std::optional<OperatorSequence> correlations_of_dchaos;
    double correlation_mismatch = 0.0; // ||propagated - correlations(dchaos)|| over s >= 1
};

/// Propagation of chaos: with F1^0 = f/eps, distances ||eps^s F_s(t | F1(t)) -
/// prod f1(t)||_1, where F1(t) is the full-cumulant series and f1(t) the
/// limit series truncated at the same order. With a correlation kernel the
/// BBGKY series of F^0_n = eps^{-n} g_n prod f is compared with the truncated
/// limit hierarchy series; the dchaos and correlation-propagation sequences
/// are emitted as well.
inline ChaosCheckResult chaos_check(const SystemSpec& spec, double t, const KineticState& st, int s_max,
                                    const std::vector<double>& eps_list, const QuadratureOptions& q = {}) {
    check_eps_list(eps_list);
    st.validate();
    if (s_max < 1) throw std::invalid_argument("chaos_check: s_max must be >= 1");
    const Dynamics lim = limit_dynamics(spec);
    ChaosCheckResult res;
    res.f1_limit = one_particle_series(lim, t, st, SeriesMode::limit, nullptr, q);
    const bool correlated = st.correlations.has_value();
    std::vector<Operator> limit_ref{Operator::scalar(1.0, spec.d)};
    for (int s = 1; s <= s_max; ++s) {
        if (!correlated) {
            limit_ref.push_back(tensor_power(res.f1_limit, s));
        } else {
            const auto initial = [&st](int m) { return st.kernel(m) * tensor_power(st.F1, m); };
            limit_ref.push_back(limit_hierarchy_series(lim, t, s, st.n_max, initial, q));
        }
    }
    if (correlated) {
        res.dchaos = dchaos_sequence(spec, t, st, res.f1_limit, s_max);
        res.propagated_correlations = correlation_propagation_sequence(spec, t, st, res.f1_limit, s_max);
        res.correlations_of_dchaos = reduced_correlations_from_F(*res.dchaos);
        for (int s = 1; s <= s_max; ++s) {
            res.truncation_gap = std::max(res.truncation_gap, trace_norm(limit_ref[static_cast<std::size_t>(s)] - (*res.dchaos)[s]));
            res.correlation_mismatch = std::max(
                res.correlation_mismatch, trace_norm((*res.propagated_correlations)[s] - (*res.correlations_of_dchaos)[s]));
        }
    }
    for (int s = 1; s <= s_max; ++s) {
        SweepResult r;
        r.name = correlated ? "correlation_propagation" : "chaos_propagation";
        r.s = s;
        r.n = st.n_max;
        res.sweeps.push_back(r);
    }
    for (double eps : eps_list) {
        const Dynamics dyn(spec.with_epsilon(eps));
        KineticState scaled = st;
        scaled.F1 = (1.0 / eps) * st.F1;
        std::vector<Operator> fs(static_cast<std::size_t>(s_max) + 1);
        if (!correlated) {
            const Operator f1_t = one_particle_series(dyn, t, scaled, SeriesMode::full_cumulant);
            fs[1] = f1_t;
            for (int s = 2; s <= s_max; ++s) fs[static_cast<std::size_t>(s)] = state_functional(dyn, t, s, f1_t, st.n_max);
        } else {
            std::vector<Operator> e{Operator::scalar(1.0, spec.d)};
            for (int m = 1; m <= s_max + st.n_max; ++m)
                e.push_back(std::pow(eps, -m) * (st.kernel(m) * tensor_power(st.F1, m)));
            const OperatorSequence F0(SequenceKind::reduced_density, spec.d, std::move(e), false);
            SeriesOptions o;
            o.s_max = s_max;
            o.n_max = st.n_max;
            const auto F = bbgky_series_solution(dyn, t, F0, BbgkyRoute::cumulant, o);
            for (int s = 1; s <= s_max; ++s) fs[static_cast<std::size_t>(s)] = F[s];
        }
        for (int s = 1; s <= s_max; ++s) {
            auto& r = res.sweeps[static_cast<std::size_t>(s - 1)];
            r.epsilons.push_back(eps);
            r.distances.push_back(
                trace_norm(std::pow(eps, s) * fs[static_cast<std::size_t>(s)] - limit_ref[static_cast<std::size_t>(s)]));
        }
    }
    for (auto& r : res.sweeps) finish_sweep(r);
    return res;
}

// ---------------------------------------------------------------------------
// limit observables

/// Solution of the dual Vlasov hierarchy up to s_max:
///   b_s(t) = G0_s(t) b_s^0 + int_0^t G0_s(t - tau) sum_{j1 != j2} N_int(j1, j2) b_{s-1}(tau; Y \ j1) dtau,
/// all levels on one Chebyshev grid with node doubling.
inline OperatorSequence limit_observables(const SystemSpec& spec, double t, const OperatorSequence& b0,
                                          const ObservableType& hint, int s_max = -1, const QuadratureOptions& q = {}) {
    detail::require_kind(b0, SequenceKind::reduced_observable, "limit_observables");
    detail::check_type_hint(b0, hint);
    if (s_max < 0) s_max = b0.max_n();
    const Dynamics lim = limit_dynamics(spec);
    const std::function<Operator(double, const Operator&)> evolve = [&lim](double tau, const Operator& y) {
        return lim.group_action(tau, y, Direction::observable, GroupKind::free);
    };
    auto initial = [&](int s) {
        const bool single = hint.kind != ObservableType::general;
        const int k = hint.kind == ObservableType::additive ? 1 : hint.k;
        if (single && s != k) return Operator::zero(s, spec.d);
        return b0.component(s);
    };
    if (t == 0.0) {
        std::vector<Operator> e{b0[0]};
        for (int s = 1; s <= s_max; ++s) e.push_back(initial(s));
        return {SequenceKind::reduced_observable, spec.d, std::move(e), false};
    }
    auto compute = [&](int nodes) {
        const ChebyshevGrid grid(t, nodes);
        std::vector<Operator> finals;
        std::vector<Operator> prev;
        for (int s = 1; s <= s_max; ++s) {
            std::vector<Operator> src;
            for (std::size_t k = 0; k < grid.nodes().size(); ++k)
                src.push_back(s >= 2 ? detail::dual_recursion_term(lim, prev[k], s) : Operator::zero(s, spec.d));
            const Operator x0 = initial(s);
            prev = duhamel_level(grid, evolve, &x0, src);
            finals.push_back(prev.back());
        }
        return finals;
    };
    const auto finals = converge_nodes(compute, q);
    std::vector<Operator> e{b0[0]};
    e.insert(e.end(), finals.begin(), finals.end());
    return {SequenceKind::reduced_observable, spec.d, std::move(e), false};
}

struct LimitExpectation {
    double value = 0.0;
    double tail_estimate = 0.0;  // |last included term|
    int terms = 0;
};

/// sum_{s <= s_max} (1/s!) Tr b_s(t) prod f for chaos data f.
inline LimitExpectation limit_expectation(const OperatorSequence& b, const Operator& f, int s_max = -1) {
    if (s_max < 0) s_max = b.max_n();
    LimitExpectation r;
    Complex acc = b[0].matrix()(0, 0);
    Operator prod = f;
    for (int s = 1; s <= s_max; ++s) {
        if (s > 1) prod = tensor(prod, f);
        const Complex term = (b[s] * prod).trace() / factorial(s);
        acc += term;
        r.tail_estimate = std::abs(term);
        ++r.terms;
    }
    r.value = acc.real();
    return r;
}

}  // namespace bbgky
