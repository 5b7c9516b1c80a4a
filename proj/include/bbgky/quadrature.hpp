// quadrature.hpp - spectral cumulative integration for nested time integrals
//
// Nested integrals int_0^t dt1 ... int_0^{t_{n-1}} dt_n are evaluated level
// by level: every level is an antiderivative sampled on the same
// Chebyshev-Lobatto grid on [0, T], so an n-fold nested integral costs n
// matrix-vector sweeps instead of (points)^n integrand evaluations.

#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbgky/linalg.hpp"

namespace bbgky {

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ChebyshevGrid {
public:
    /// N+1 Lobatto nodes on [0, T], ascending in |tau|; nodes().front() == 0,
    /// nodes().back() == T.
    ChebyshevGrid(double T, int N) : T_(T), N_(N) {
        if (N < 2) throw std::invalid_argument("ChebyshevGrid: need N >= 2");
        const int m = N + 1;
        nodes_.resize(static_cast<std::size_t>(m));
        Eigen::VectorXd x(m);
        for (int k = 0; k < m; ++k) {
            x(k) = -std::cos(std::numbers::pi * k / N);
            nodes_[static_cast<std::size_t>(k)] = 0.5 * T * (x(k) + 1.0);
        }
        nodes_.front() = 0.0;
        nodes_.back() = T;
        // V(k, j) = T_j(x_k); A(k, j) = int_{-1}^{x_k} T_j.
        Eigen::MatrixXd v(m, m), a(m, m);
        for (int k = 0; k < m; ++k) {
            std::vector<double> cheb(static_cast<std::size_t>(m) + 1);
            cheb[0] = 1.0;
            cheb[1] = x(k);
            for (int j = 2; j <= m; ++j) cheb[static_cast<std::size_t>(j)] = 2.0 * x(k) * cheb[static_cast<std::size_t>(j - 1)] - cheb[static_cast<std::size_t>(j - 2)];
            for (int j = 0; j < m; ++j) {
                v(k, j) = cheb[static_cast<std::size_t>(j)];
                a(k, j) = antiderivative(j, x(k), cheb);
            }
        }
        integration_ = 0.5 * T * a * v.partialPivLu().inverse();
    }

    double span() const { return T_; }
    int order() const { return N_; }
    const std::vector<double>& nodes() const { return nodes_; }

    /// Samples of int_0^{tau_k} f(u) du given samples f(tau_j).
    std::vector<Operator> cumulative(const std::vector<Operator>& values) const {
        if (values.size() != nodes_.size()) throw std::invalid_argument("ChebyshevGrid: sample count mismatch");
        std::vector<Operator> out;
        out.reserve(values.size());
        for (std::size_t k = 0; k < values.size(); ++k) {
            Operator acc = Operator::zero(values[0].n(), values[0].d());
            for (std::size_t j = 0; j < values.size(); ++j) {
                const double w = integration_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
                if (w != 0.0) acc.matrix() += w * values[j].matrix();
            }
            out.push_back(std::move(acc));
        }
        return out;
    }

private:
    static double antiderivative(int j, double x, const std::vector<double>& cheb) {
        // int_{-1}^{x} T_j(s) ds; T_j(-1) = (-1)^j
        if (j == 0) return x + 1.0;
        if (j == 1) return 0.5 * (x * x - 1.0);
        auto prim = [&](double tj1, double tjm1) { return tj1 / (2.0 * (j + 1)) - tjm1 / (2.0 * (j - 1)); };
        const double at_x = prim(cheb[static_cast<std::size_t>(j + 1)], cheb[static_cast<std::size_t>(j - 1)]);
        const double sgn_p = ((j + 1) % 2 == 0) ? 1.0 : -1.0;
        const double sgn_m = ((j - 1) % 2 == 0) ? 1.0 : -1.0;
        return at_x - prim(sgn_p, sgn_m);
    }

    double T_;
    int N_;
    std::vector<double> nodes_;
    Eigen::MatrixXd integration_;
};

/// One Duhamel level on the grid:
///   X(tau) = U(tau) [ X0 + int_0^tau U(-u) R(u) du ]
/// where `evolve(tau, Y)` applies the group U(tau). X0 may be absent.
inline std::vector<Operator> duhamel_level(const ChebyshevGrid& grid,
                                           const std::function<Operator(double, const Operator&)>& evolve,
                                           const Operator* initial, const std::vector<Operator>& source) {
    const auto& tau = grid.nodes();
    std::vector<Operator> pulled;
    pulled.reserve(tau.size());
    for (std::size_t k = 0; k < tau.size(); ++k) pulled.push_back(evolve(-tau[k], source[k]));
    auto integral = grid.cumulative(pulled);
    std::vector<Operator> out;
    out.reserve(tau.size());
    for (std::size_t k = 0; k < tau.size(); ++k) {
        Operator y = std::move(integral[k]);
        if (initial) y += *initial;
        out.push_back(evolve(tau[k], y));
    }
    return out;
}

inline double difference_norm(const Operator& a, const Operator& b) { return trace_norm(a - b); }
inline double difference_norm(const std::vector<Operator>& a, const std::vector<Operator>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, trace_norm(a[i] - b[i]));
    return m;
}


struct QuadratureOptions {
    int initial_nodes = 16;
    int max_nodes = 128;
    double tolerance = 1e-9;
};

/// Evaluates `compute(N)` with doubling node counts until two successive
/// values agree in trace norm within the tolerance.
template <typename Fn>
auto converge_nodes(Fn&& compute, const QuadratureOptions& opts = {}) {
    int n = opts.initial_nodes;
    auto prev = compute(n);
    while (true) {
        const int next_n = 2 * n;
        if (next_n > opts.max_nodes)
            throw QuadratureError("nested time integral did not converge within " + std::to_string(opts.max_nodes) +
                                  " nodes");
        auto next = compute(next_n);
        if (difference_norm(prev, next) < opts.tolerance) return next;
        prev = std::move(next);
        n = next_n;
    }
}

/// Nested chain over the simplex 0 < t_k < ... < t_1 < t:
///   int dt_1 ... dt_k U(t - t_1) C U(t_1 - t_2) C ... C U(t_k) X,
/// with `evolve(tau, Y)` applying U(tau) on all labels of Y and `collide`
/// mapping one level's operator to the next outer level. Evaluated level by
/// level on a Chebyshev grid with node doubling.
template <typename Evolve, typename Collide>
Operator nested_duhamel(double t, const Operator& x, int levels, Evolve&& evolve, Collide&& collide,
                        const QuadratureOptions& opts = {}) {
    if (levels == 0) return evolve(t, x);
    if (t == 0.0) {
        Operator y = x;
        for (int j = 0; j < levels; ++j) y = collide(y);
        return Operator::zero(y.n(), y.d());
    }
    const std::function<Operator(double, const Operator&)> ev = evolve;
    auto compute = [&](int nodes) {
        const ChebyshevGrid grid(t, nodes);
        std::vector<Operator> level;
        for (double tau : grid.nodes()) level.push_back(evolve(tau, x));
        for (int j = 0; j < levels; ++j) {
            std::vector<Operator> src;
            src.reserve(level.size());
            for (const auto& y : level) src.push_back(collide(y));
            level = duhamel_level(grid, ev, nullptr, src);
        }
        return level.back();
    };
    return converge_nodes(compute, opts);
}

}  // namespace bbgky
