// dynamics.hpp - Hamiltonians, evolution groups, cumulants of groups and
// scattering groups.

#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "bbgky/combinatorics.hpp"
#include "bbgky/linalg.hpp"

namespace bbgky {

struct SystemSpec {
    int d = 2;
    Matrix K;    // d x d, Hermitian
    Matrix Phi;  // d^2 x d^2, Hermitian, exchange symmetric
    double epsilon = 0.5;
    int N_max = 3;
    int n_max = 3;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const {
        if (d < 1) throw std::invalid_argument("system.d: must be >= 1");
        if (K.rows() != d || K.cols() != d) throw std::invalid_argument("system.K: must be d x d");
        const auto d2 = static_cast<Eigen::Index>(d) * d;
        if (Phi.rows() != d2 || Phi.cols() != d2) throw std::invalid_argument("system.Phi: must be d^2 x d^2");
        const double tol = 1e-12;
        if (max_abs(Matrix(K - K.adjoint())) > tol * std::max(1.0, max_abs(K)))
            throw std::invalid_argument("system.K: not Hermitian");
        if (max_abs(Matrix(Phi - Phi.adjoint())) > tol * std::max(1.0, max_abs(Phi)))
            throw std::invalid_argument("system.Phi: not Hermitian");
        const Matrix s = swap_matrix(d);
        if (max_abs(Matrix(s * Phi * s - Phi)) > tol * std::max(1.0, max_abs(Phi)))
            throw std::invalid_argument("system.Phi: not symmetric under particle exchange");
        if (!(epsilon >= 0.0)) throw std::invalid_argument("system.epsilon: must be >= 0");
        if (N_max < 1) throw std::invalid_argument("system.N_max: must be >= 1");
        if (n_max < 0) throw std::invalid_argument("system.n_max: must be >= 0");
    }

    Operator kinetic() const { return {1, d, K}; }
    Operator interaction() const { return {2, d, Phi}; }

    SystemSpec with_epsilon(double eps) const {
        SystemSpec s = *this;
        s.epsilon = eps;
        return s;
    }

    static Matrix swap_matrix(int d) {
        const auto d2 = static_cast<Eigen::Index>(d) * d;
        Matrix s = Matrix::Zero(d2, d2);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) s(a * d + b, b * d + a) = 1.0;
        return s;
    }

    /// d=2, K = sigma_x, Phi = |11><11|, eps = 1/2, N_max = 3.
    static SystemSpec cm1() {
        SystemSpec s;
        s.d = 2;
        s.K = Matrix::Zero(2, 2);
        s.K(0, 1) = s.K(1, 0) = 1.0;
        s.Phi = Matrix::Zero(4, 4);
        s.Phi(3, 3) = 1.0;
        s.epsilon = 0.5;
        s.N_max = 3;
        s.n_max = 3;
        return s;
    }
};

/// CM1 one-particle initial state diag(3/4, 1/4).
inline Operator cm1_one_particle_state() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 0.75;
    m(1, 1) = 0.25;
    return {1, 2, m};
}

enum class GroupKind {
    interacting,  // G*_n(t) generated by H_n
    free,         // product of one-particle groups
    scattering    // G*_n(t) prod_i (G*_1(t, i))^{-1}
};

/// A cluster argument: ordered list of disjoint label blocks.
using ClusterArgument = std::vector<Labels>;

inline Labels declusterize(const ClusterArgument& blocks) {
    Labels out;
    for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end());
    return out;
}

/// Evolution groups for one system. Eigendecompositions of H_m are computed
/// once per particle number; unitaries are cached per (kind, t, particle count).
class Dynamics {
public:
    explicit Dynamics(SystemSpec spec) : spec_(std::move(spec)), state_(std::make_shared<Cache>()) {
        spec_.validate();
    }

    const SystemSpec& spec() const { return spec_; }
    int d() const { return spec_.d; }

    /// H_n = sum_j K(j) + eps sum_{j1<j2} Phi(j1, j2)
    Operator hamiltonian(int n) const {
        if (n < 1) throw std::invalid_argument("hamiltonian: n must be >= 1");
        Operator h = Operator::zero(n, spec_.d);
        const Operator k = spec_.kinetic();
        const Operator phi = spec_.interaction();
        for (int j = 1; j <= n; ++j) h += embed(k, {j}, n);
        if (spec_.epsilon != 0.0)
            for (int a = 1; a <= n; ++a)
                for (int b = a + 1; b <= n; ++b) h += spec_.epsilon * embed(phi, {a, b}, n);
        return h;
    }

    /// Unitary of the state-direction group of `kind` on |support| particles
    /// (H_m is permutation symmetric, so it does not depend on which labels).
    Matrix local_unitary(GroupKind kind, int m, double t) const {
        const auto key = std::make_tuple(static_cast<int>(kind), t, m);
        {
            std::lock_guard<std::mutex> lock(state_->mutex);
            auto it = state_->unitaries.find(key);
            if (it != state_->unitaries.end()) return it->second;
        }
        Matrix u = build_unitary(kind, m, t);
        std::lock_guard<std::mutex> lock(state_->mutex);
        if (state_->unitaries.size() > 20000) state_->unitaries.clear();
        state_->unitaries.emplace(key, u);
        return u;
    }

    /// Full-space unitary of the group of `kind` on the labels `support`.
    Matrix unitary(GroupKind kind, const Labels& support, int n_total, double t) const {
        Labels sorted = support;
        std::sort(sorted.begin(), sorted.end());
        const Operator u{static_cast<int>(sorted.size()), spec_.d, local_unitary(kind, static_cast<int>(sorted.size()), t)};
        return place({Placement{&u, sorted}}, n_total, spec_.d).matrix();
    }

    /// Group action on the labels of `support` of X (X acts on X.n() labels).
    Operator group_action(double t, const Operator& x, const Labels& support, Direction dir,
                          GroupKind kind = GroupKind::interacting) const {
        Labels sorted = support;
        std::sort(sorted.begin(), sorted.end());
        const double ts = signed_time(t, dir, kind);
        return conjugate_local(local_unitary(kind, static_cast<int>(sorted.size()), ts), sorted, x);
    }

    /// Group action on all labels of X.
    Operator group_action(double t, const Operator& x, Direction dir, GroupKind kind = GroupKind::interacting) const {
        return group_action(t, x, label_range(1, x.n()), dir, kind);
    }

    /// Cumulant of order |blocks| of the groups of `kind`, applied to X:
    /// sum over partitions P' of the blocks of (-1)^{|P'|-1}(|P'|-1)!
    /// prod_Z G(theta(Z)).
    Operator cumulant(double t, const ClusterArgument& blocks, const Operator& x, Direction dir,
                      GroupKind kind = GroupKind::interacting) const {
        if (blocks.empty()) throw std::invalid_argument("cumulant: empty cluster argument");
        {
            Labels all = declusterize(blocks);
            if (std::adjacent_find(all.begin(), all.end()) != all.end())
                throw std::invalid_argument("cumulant: blocks overlap");
            for (const auto& b : blocks)
                if (b.empty()) throw std::invalid_argument("cumulant: empty block");
            if (all.front() < 1 || all.back() > x.n()) throw std::invalid_argument("cumulant: label outside operator");
        }
        const double ts = signed_time(t, dir, kind);
        std::vector<int> idx(blocks.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
        Operator acc = Operator::zero(x.n(), x.d());
        for (const auto& part : set_partitions(idx)) {
            // blocks of one partition are disjoint, so their groups commute;
            // scattering groups of a single particle are the identity
            Operator y = x;
            for (const auto& z : part.blocks) {
                Labels theta;
                for (int bi : z) theta.insert(theta.end(), blocks[static_cast<std::size_t>(bi)].begin(), blocks[static_cast<std::size_t>(bi)].end());
                if (kind == GroupKind::scattering && theta.size() == 1) continue;
                std::sort(theta.begin(), theta.end());
                y = conjugate_local(local_unitary(kind, static_cast<int>(theta.size()), ts), theta, y);
            }
            acc += static_cast<double>(cumulant_coefficient(static_cast<int>(part.size()))) * y;
        }
        return acc;
    }

    /// Scattering group applied to all labels of X.
    Operator scattering_group(double t, const Operator& x) const {
        return group_action(t, x, Direction::state, GroupKind::scattering);
    }

    // Generators. State direction: N* f = -i[H, f]; observable: N g = i[H, g].

    Operator generator(const Operator& x, Direction dir) const {
        const Operator h = hamiltonian(x.n());
        return sign(dir) * commutator(h, x);
    }

    Operator free_generator(const Operator& x, const Labels& labels, Direction dir) const {
        Operator acc = Operator::zero(x.n(), x.d());
        const Operator k = spec_.kinetic();
        for (int j : labels) acc += commutator(embed(k, {j}, x.n()), x);
        return sign(dir) * acc;
    }

    /// N*_int(i, j) X = -i[Phi(i, j), X] (state) or +i[...] (observable).
    /// Carries no epsilon.
    Operator interaction_generator(const Operator& x, int i, int j, Direction dir) const {
        const Operator phi = spec_.interaction();
        return sign(dir) * commutator(embed(phi, {i, j}, x.n()), x);
    }

    /// Convergence radius (2 ||eps Phi|| ||F1||_1)^{-1} of the series for
    /// non-finite data; infinity for eps = 0.
    double convergence_radius(const Operator& f1) const {
        const double phi_norm = spec_.epsilon * operator_norm(spec_.interaction());
        const double f_norm = trace_norm(f1);
        if (phi_norm == 0.0 || f_norm == 0.0) return std::numeric_limits<double>::infinity();
        return 1.0 / (2.0 * phi_norm * f_norm);
    }

private:
    struct Cache {
        std::mutex mutex;
        std::map<int, HermEig> eig;
        std::map<std::tuple<int, double, int>, Matrix> unitaries;
    };

    static Complex sign(Direction dir) { return dir == Direction::state ? Complex(0.0, -1.0) : Complex(0.0, 1.0); }

    static double signed_time(double t, Direction dir, GroupKind kind) {
        if (dir == Direction::state) return t;
        if (kind == GroupKind::scattering) throw std::invalid_argument("scattering groups act in the state direction only");
        return -t;
    }

    const HermEig& eig(int m) const {
        std::lock_guard<std::mutex> lock(state_->mutex);
        auto it = state_->eig.find(m);
        if (it == state_->eig.end()) it = state_->eig.emplace(m, herm_eig(hamiltonian(m))).first;
        return it->second;
    }

    Matrix build_unitary(GroupKind kind, int m, double t) const {
        switch (kind) {
            case GroupKind::free:
                return tensor_power(Operator{1, spec_.d, propagator(eig(1), t)}, m).matrix();
            case GroupKind::interacting:
                return propagator(eig(m), t);
            case GroupKind::scattering:
                return local_unitary(GroupKind::interacting, m, t) * local_unitary(GroupKind::free, m, -t);
        }
        throw std::logic_error("unknown group kind");
    }

    SystemSpec spec_;
    std::shared_ptr<Cache> state_;
};

}  // namespace bbgky
