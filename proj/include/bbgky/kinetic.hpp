// kinetic.hpp - reduced state functionals, kinetic generating operators,
// one-particle series and the kinetic equations (GQKE, Vlasov with and
// without initial correlations).

#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbgky/combinatorics.hpp"
#include "bbgky/dynamics.hpp"
#include "bbgky/hierarchy.hpp"
#include "bbgky/linalg.hpp"
#include "bbgky/quadrature.hpp"
#include "bbgky/sequence.hpp"

namespace bbgky {

/// One-particle state with its truncation order and optional initial
/// correlation kernel g0_n (n >= 2; identity when absent).
struct KineticState {
    Operator F1;
    int n_max = 3;
    std::optional<OperatorSequence> correlations;

    /// Kernel g0_n; the identity for n <= 1 or without correlations.
    Operator kernel(int n) const {
        if (n <= 1 || !correlations) return Operator::identity(n, F1.d());
        return correlations->component(n);
    }

    void validate() const {
        if (F1.n() != 1) throw std::invalid_argument("state.F1: must be a one-particle operator");
        if (!is_hermitian(F1)) throw std::invalid_argument("state.F1: not Hermitian");
        if (n_max < 0) throw std::invalid_argument("state.n_max: must be >= 0");
        if (correlations)
            for (int n = 2; n <= correlations->max_n(); ++n)
                if (!is_hermitian((*correlations)[n]))
                    throw std::invalid_argument("state.correlations[" + std::to_string(n) + "]: not Hermitian");
    }
};

/// Kernel sequence generated by a single pair correlation c2:
/// g_n = sum over partitions of 1..n into singletons and pairs of prod c2(pair).
/// Its cumulants are (I, c2, 0, 0, ...).
inline OperatorSequence kernels_from_pair_correlation(const Operator& c2, int n_max) {
    if (c2.n() != 2) throw std::invalid_argument("kernels_from_pair_correlation: c2 must be a two-particle operator");
    const int d = c2.d();
    // label n is either a singleton or paired with some j < n:
    // g_n = g_{n-1}(1..n-1) + sum_j c2(j, n) g_{n-2}(1..n-1 without j)
    std::vector<Operator> e{Operator::scalar(1.0, d)};
    for (int n = 1; n <= n_max; ++n) {
        if (n == 1) {
            e.push_back(Operator::identity(1, d));
            continue;
        }
        Operator g = embed(e[static_cast<std::size_t>(n - 1)], label_range(1, n - 1), n);
        for (int j = 1; j < n; ++j) {
            Labels rest;
            for (int l = 1; l < n; ++l)
                if (l != j) rest.push_back(l);
            const Operator pair = embed(c2, {j, n}, n);
            g += n == 2 ? pair : pair * embed(e[static_cast<std::size_t>(n - 2)], rest, n);
        }
        e.push_back(std::move(g));
    }
    return {SequenceKind::correlation, d, std::move(e), true};
}

// ---------------------------------------------------------------------------
// kinetic generating operators

namespace detail {

/// Scattering cumulant A^_{1+|X|}(t, i, X) applied to Y.
inline Operator scattering_pair_cumulant(const Dynamics& dyn, double t, int i, const Labels& x, const Operator& y) {
    std::vector<Labels> blocks{{i}};
    for (int l : x) blocks.push_back({l});
    return dyn.cumulant(t, blocks, y, Direction::state, GroupKind::scattering);
}

/// One factor of the kinetic cluster expansion: sum over dissections D of the
/// chain Z into at most m consecutive segments, (1/|D|!) times the sum over
/// injective tuples (i_X) from 1..m of prod_X (1/|X|!) A^_{1+|X|}(t, i_X, X).
inline Operator dissection_factor(const Dynamics& dyn, double t, const Labels& z, int m, const Operator& y) {
    Operator acc = Operator::zero(y.n(), y.d());
    for (const auto& dis : ordered_dissections(z, m)) {
        const int k = static_cast<int>(dis.size());
        double w = 1.0 / factorial(k);
        for (const auto& seg : dis.segments) w /= factorial(static_cast<int>(seg.size()));
        for (const auto& tuple : injective_tuples(k, m)) {
            Operator v = y;
            for (int q = 0; q < k; ++q)
                v = scattering_pair_cumulant(dyn, t, tuple[static_cast<std::size_t>(q)], dis.segments[static_cast<std::size_t>(q)], v);
            acc += w * v;
        }
    }
    return acc;
}

}  // namespace detail

/// V_{1+n}(t, {1..s}, s+1, ..., s+n) applied to X on s+n particles:
///   n! sum_k (-1)^k sum_{n_1..n_k} 1/(n - sum n_j)!
///   A^_{1+n-sum}(t, {1..s}, s+1, ..., s+n-sum) P_1 ... P_k X,
/// where P_j dissects Z_j = (m_j + 1, ..., m_{j-1}), m_j = s + n - n_1 - ... - n_j.
inline Operator kinetic_generator(const Dynamics& dyn, double t, int s, int n, const Operator& x) {
    if (s < 1 || n < 0) throw std::invalid_argument("kinetic_generator: need s >= 1, n >= 0");
    if (n > dyn.spec().n_max)
        throw std::invalid_argument("kinetic_generator: order " + std::to_string(n) + " exceeds n_max");
    if (x.n() != s + n) throw std::invalid_argument("kinetic_generator: operator must act on s + n particles");
    Operator acc = Operator::zero(x.n(), x.d());
    for (const auto& comp : bounded_compositions(n)) {
        const int k = static_cast<int>(comp.size());
        std::vector<int> m{s + n};
        for (int nj : comp) m.push_back(m.back() - nj);
        Operator y = x;
        for (int j = k; j >= 1; --j) {
            const Labels z = label_range(m[static_cast<std::size_t>(j)] + 1, m[static_cast<std::size_t>(j - 1)]);
            y = detail::dissection_factor(dyn, t, z, m[static_cast<std::size_t>(j)], y);
        }
        const int rest = m.back();
        std::vector<Labels> head{label_range(1, s)};
        for (int l = s + 1; l <= rest; ++l) head.push_back({l});
        y = dyn.cumulant(t, head, y, Direction::state, GroupKind::scattering);
        const double w = (k % 2 == 0 ? 1.0 : -1.0) * factorial(n) / factorial(rest - s);
        acc += w * y;
    }
    return acc;
}

/// F_s(t | F1) = sum_{n <= n_max} (1/n!) Tr_{s+1..s+n} V_{1+n}(t) prod F1.
inline Operator state_functional(const Dynamics& dyn, double t, int s, const Operator& f1, int n_max = -1,
                                 SeriesDiagnostics* diag = nullptr, bool guard = true) {
    if (s < 1) throw std::invalid_argument("state_functional: s must be >= 1");
    if (n_max < 0) n_max = dyn.spec().n_max;
    if (guard) check_convergence_guard(dyn, t, f1);
    Operator acc = Operator::zero(s, f1.d());
    Operator prod = tensor_power(f1, s);
    SeriesDiagnostics local;
    for (int n = 0; n <= n_max; ++n) {
        if (n > 0) prod = tensor(prod, f1);
        Operator term = (1.0 / factorial(n)) * trace_out_tail(kinetic_generator(dyn, t, s, n, prod), s);
        if (n == n_max) local.last_term_norm = trace_norm(term);
        ++local.terms;
        acc += term;
    }
    if (diag) *diag = local;
    return acc;
}

// ---------------------------------------------------------------------------
// one-particle series

enum class SeriesMode { full_cumulant, limit };

/// The interaction-only (epsilon-free) system used by limit-mode operations.
inline Dynamics limit_dynamics(const SystemSpec& spec) { return Dynamics(spec.with_epsilon(1.0)); }

/// Limit-mode term n: int over the simplex of Tr_{2..n+1} G0_1(t-t_1) N*_int(1,2)
/// G0_2(t_1-t_2) ... sum_{k<=n} N*_int(k, n+1) G0_{n+1}(t_n) g0_{n+1} prod f.
inline Operator limit_series_term(const Dynamics& lim, double t, const KineticState& st, int n,
                                  const QuadratureOptions& q = {}) {
    const Operator x = st.kernel(n + 1) * tensor_power(st.F1, n + 1);
    const auto evolve = [&lim](double tau, const Operator& y) {
        return lim.group_action(tau, y, Direction::state, GroupKind::free);
    };
    const auto collide = [&lim](const Operator& y) {
        const int m = y.n() - 1;
        Operator acc = Operator::zero(y.n(), y.d());
        for (int k = 1; k <= m; ++k) acc += lim.interaction_generator(y, k, m + 1, Direction::state);
        return trace_out_tail(acc, m);
    };
    return nested_duhamel(t, x, n, evolve, collide, q);
}

/// full_cumulant: F1(t) = sum_{n<=n_max} (1/n!) Tr_{2..n+1} A_{1+n}(t, 1..n+1) prod F1^0.
/// limit: the epsilon-free series of free groups and interaction generators,
/// with the correlation kernel inserted when present.
inline Operator one_particle_series(const Dynamics& dyn, double t, const KineticState& st, SeriesMode mode,
                                    SeriesDiagnostics* diag = nullptr, const QuadratureOptions& q = {}) {
    st.validate();
    SeriesDiagnostics local;
    Operator acc = Operator::zero(1, st.F1.d());
    if (mode == SeriesMode::full_cumulant) {
        if (st.correlations) throw std::invalid_argument("one_particle_series: full-cumulant mode takes chaos data");
        check_convergence_guard(dyn, t, st.F1);
        Operator prod = st.F1;
        for (int n = 0; n <= st.n_max; ++n) {
            if (n > 0) prod = tensor(prod, st.F1);
            std::vector<Labels> blocks;
            for (int l = 1; l <= n + 1; ++l) blocks.push_back({l});
            Operator term = (1.0 / factorial(n)) * trace_out_tail(dyn.cumulant(t, blocks, prod, Direction::state), 1);
            if (n == st.n_max) local.last_term_norm = trace_norm(term);
            acc += term;
        }
    } else {
        const Dynamics lim = limit_dynamics(dyn.spec());
        check_convergence_guard(lim, t, st.F1);
        for (int n = 0; n <= st.n_max; ++n) {
            Operator term = limit_series_term(lim, t, st, n, q);
            if (n == st.n_max) local.last_term_norm = trace_norm(term);
            acc += term;
        }
    }
    local.terms = st.n_max + 1;
    if (diag) *diag = local;
    return acc;
}

// ---------------------------------------------------------------------------
// time integration

class StepSizeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct IntegratorOptions {
    double max_step = 0.02;
    double tolerance = 1e-8;  // per-step error estimate (trace norm)
    int max_halvings = 6;
};

/// Classical fourth-order Runge-Kutta with fixed steps; every step is
/// checked against two half steps and the step is halved while the
/// difference exceeds the tolerance. Returns the state at every grid time.
inline std::vector<Operator> rk4_integrate(const std::vector<double>& grid, const Operator& y0,
                                           const std::function<Operator(double, const Operator&)>& rhs,
                                           const IntegratorOptions& opts = {}) {
    if (grid.empty()) return {};
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("time grid must be strictly increasing");
    auto step = [&](double t, const Operator& y, double h) {
        const Operator k1 = rhs(t, y);
        const Operator k2 = rhs(t + 0.5 * h, y + (0.5 * h) * k1);
        const Operator k3 = rhs(t + 0.5 * h, y + (0.5 * h) * k2);
        const Operator k4 = rhs(t + h, y + h * k3);
        return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };
    std::vector<Operator> out;
    Operator y = y0;
    double t = 0.0;
    if (grid.front() != 0.0) {
        // integrate from 0 to the first grid point
        std::vector<double> head{0.0, grid.front()};
        y = rk4_integrate(head, y0, rhs, opts).back();
    }
    t = grid.front();
    out.push_back(y);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double span = grid[i] - grid[i - 1];
        int pieces = std::max(1, static_cast<int>(std::ceil(span / opts.max_step - 1e-12)));
        for (int halving = 0;; ++halving) {
            const double h = span / pieces;
            Operator trial = y;
            double worst = 0.0;
            double tt = t;
            for (int p = 0; p < pieces; ++p) {
                const Operator full = step(tt, trial, h);
                const Operator half = step(tt + 0.5 * h, step(tt, trial, 0.5 * h), 0.5 * h);
                worst = std::max(worst, trace_norm(full - half));
                trial = half;
                tt += h;
            }
            if (worst <= opts.tolerance) {
                y = std::move(trial);
                break;
            }
            if (halving >= opts.max_halvings)
                throw StepSizeError("step-size rejection: error estimate " + std::to_string(worst) + " exceeds " +
                                    std::to_string(opts.tolerance));
            pieces *= 2;
        }
        t = grid[i];
        out.push_back(y);
    }
    return out;
}

/// dF1/dt = N*(1) F1 + eps Tr_2 N*_int(1,2) F_2(t | F1(t)).
inline std::vector<Operator> gqke_integrate(const Dynamics& dyn, const std::vector<double>& grid, const KineticState& st,
                                            const IntegratorOptions& opts = {}) {
    st.validate();
    const double eps = dyn.spec().epsilon;
    const Labels one{1};
    auto rhs = [&](double t, const Operator& f) {
        Operator r = dyn.free_generator(f, one, Direction::state);
        if (eps != 0.0) {
            const Operator f2 = state_functional(dyn, t, 2, f, st.n_max);
            r += eps * trace_out_tail(dyn.interaction_generator(f2, 1, 2, Direction::state), 1);
        }
        return r;
    };
    return rk4_integrate(grid, st.F1, rhs, opts);
}

enum class VlasovKernel { none, initial_correlations };

/// Quantum Vlasov equation df/dt = N*(1) f + Tr_2 N*_int(1,2) K(t) f(1) f(2)
/// with K = identity (plain) or K(t) = G0_2(t) g0_2 G0_2(t)^{-1}.
inline std::vector<Operator> vlasov_integrate(const SystemSpec& spec, const std::vector<double>& grid,
                                              const KineticState& st, VlasovKernel kernel = VlasovKernel::none,
                                              const IntegratorOptions& opts = {}) {
    st.validate();
    if (std::abs(st.F1.trace() - 1.0) > 1e-9) throw std::invalid_argument("state.F1: Vlasov data needs Tr f1 = 1");
    if (min_eigenvalue(st.F1) < -1e-12) throw std::invalid_argument("state.F1: not a density operator");
    if (kernel == VlasovKernel::initial_correlations && (!st.correlations || st.correlations->max_n() < 2))
        throw std::invalid_argument("state.correlations: the initial-correlation kernel needs g2");
    const Dynamics lim = limit_dynamics(spec);
    const Labels one{1};
    const Operator g2 = kernel == VlasovKernel::initial_correlations ? (*st.correlations)[2] : Operator::identity(2, spec.d);
    auto rhs = [&](double t, const Operator& f) {
        Operator pair = tensor(f, f);
        if (kernel == VlasovKernel::initial_correlations) pair = lim.group_action(t, g2, Direction::state, GroupKind::free) * pair;
        return lim.free_generator(f, one, Direction::state) +
               trace_out_tail(lim.interaction_generator(pair, 1, 2, Direction::state), 1);
    };
    return rk4_integrate(grid, st.F1, rhs, opts);
}

}  // namespace bbgky
