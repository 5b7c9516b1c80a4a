// linalg.hpp - dense complex operators on (C^d)^{(x)n}
//
// Basis convention: lexicographic product basis with particle 1 as the
// slowest index. Particle labels are 1-based everywhere in the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace bbgky {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Labels = std::vector<int>;

inline constexpr Complex kI{0.0, 1.0};

inline Labels label_range(int first, int last) {
    Labels out;
    for (int l = first; l <= last; ++l) out.push_back(l);
    return out;
}

enum class Direction { state, observable };

inline std::size_t ipow(std::size_t base, int exp) {
    std::size_t r = 1;
    for (int k = 0; k < exp; ++k) r *= base;
    return r;
}

// Operator on n particles with single-particle dimension d.
// n == 0 is the vacuum component, stored as a 1x1 scalar.
class Operator {
public:
    Operator() : n_(0), d_(1), m_(Matrix::Identity(1, 1)) {}

    Operator(int n, int d, Matrix m) : n_(n), d_(d), m_(std::move(m)) {
        if (n < 0 || d < 1) throw std::invalid_argument("Operator: bad particle count or dimension");
        const auto side = static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(d), n));
        if (m_.rows() != side || m_.cols() != side)
            throw std::invalid_argument("Operator: matrix side must be d^n = " + std::to_string(side));
    }

    static Operator zero(int n, int d) {
        const auto side = static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(d), n));
        return {n, d, Matrix::Zero(side, side)};
    }
    static Operator identity(int n, int d) {
        const auto side = static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(d), n));
        return {n, d, Matrix::Identity(side, side)};
    }
    static Operator scalar(Complex value, int d) {
        Matrix m(1, 1);
        m(0, 0) = value;
        return {0, d, std::move(m)};
    }

    int n() const { return n_; }
    int d() const { return d_; }
    Eigen::Index side() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    Matrix& matrix() { return m_; }

    Complex trace() const { return m_.trace(); }
    Operator adjoint() const { return {n_, d_, m_.adjoint()}; }

    Operator& operator+=(const Operator& o) { check_same(o); m_ += o.m_; return *this; }
    Operator& operator-=(const Operator& o) { check_same(o); m_ -= o.m_; return *this; }
    Operator& operator*=(Complex c) { m_ *= c; return *this; }

    friend Operator operator+(Operator a, const Operator& b) { return a += b; }
    friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
    friend Operator operator*(Complex c, Operator a) { return a *= c; }
    friend Operator operator*(double c, Operator a) { return a *= Complex(c, 0.0); }
    friend Operator operator*(const Operator& a, const Operator& b) {
        a.check_same(b);
        return {a.n_, a.d_, a.m_ * b.m_};
    }

    void check_same(const Operator& o) const {
        if (n_ != o.n_ || d_ != o.d_)
            throw std::invalid_argument("Operator: shape mismatch (n=" + std::to_string(n_) + " vs " +
                                        std::to_string(o.n_) + ")");
    }

private:
    int n_;
    int d_;
    Matrix m_;
};

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}
inline double max_abs(const Operator& a) { return max_abs(a.matrix()); }

inline double hermiticity_defect(const Operator& a) {
    return max_abs(Matrix(a.matrix() - a.matrix().adjoint()));
}

inline bool is_hermitian(const Operator& a, double rel_tol = 1e-12) {
    return hermiticity_defect(a) <= rel_tol * std::max(1.0, max_abs(a));
}

inline Operator hermitian_part(const Operator& a) {
    return {a.n(), a.d(), Matrix(0.5 * (a.matrix() + a.matrix().adjoint()))};
}

namespace detail {

// Digits of a flat index, particle 1 first.
inline void digits_of(std::size_t idx, int n, int d, int* out) {
    for (int k = n - 1; k >= 0; --k) {
        out[k] = static_cast<int>(idx % static_cast<std::size_t>(d));
        idx /= static_cast<std::size_t>(d);
    }
}

inline std::vector<int> digit_table(int n, int d) {
    const std::size_t side = ipow(static_cast<std::size_t>(d), n);
    std::vector<int> table(side * static_cast<std::size_t>(std::max(n, 1)));
    for (std::size_t i = 0; i < side; ++i) digits_of(i, n, d, table.data() + i * static_cast<std::size_t>(std::max(n, 1)));
    return table;
}

inline void check_labels(const Labels& sites, int n, const char* what) {
    std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
    for (int s : sites) {
        if (s < 1 || s > n)
            throw std::invalid_argument(std::string(what) + ": label " + std::to_string(s) + " outside 1.." +
                                        std::to_string(n));
        if (seen[static_cast<std::size_t>(s)])
            throw std::invalid_argument(std::string(what) + ": duplicate label " + std::to_string(s));
        seen[static_cast<std::size_t>(s)] = true;
    }
}

}  // namespace detail

/// Kronecker product in label order: A on labels 1..m, B on m+1..m+k.
inline Operator tensor(const Operator& a, const Operator& b) {
    if (a.d() != b.d()) throw std::invalid_argument("tensor: mismatched single-particle dimension");
    const Matrix& x = a.matrix();
    const Matrix& y = b.matrix();
    Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return {a.n() + b.n(), a.d(), std::move(out)};
}

inline Operator tensor_power(const Operator& a, int k) {
    Operator out = Operator::identity(0, a.d());
    for (int i = 0; i < k; ++i) out = tensor(out, a);
    return out;
}

struct Placement {
    const Operator* op;
    Labels sites;  // sites[q] carries the op's q-th tensor factor
};

/// Product of operators acting on disjoint label sets of an n-particle
/// space, identity on every label not covered.
inline Operator place(const std::vector<Placement>& factors, int n, int d) {
    std::vector<int> owner(static_cast<std::size_t>(n) + 1, -1);
    std::vector<int> slot(static_cast<std::size_t>(n) + 1, -1);
    for (std::size_t f = 0; f < factors.size(); ++f) {
        const auto& pl = factors[f];
        if (pl.op->d() != d) throw std::invalid_argument("place: mismatched single-particle dimension");
        if (static_cast<int>(pl.sites.size()) != pl.op->n())
            throw std::invalid_argument("place: site count differs from operator particle count");
        for (std::size_t q = 0; q < pl.sites.size(); ++q) {
            const int s = pl.sites[q];
            if (s < 1 || s > n) throw std::invalid_argument("place: label out of range");
            if (owner[static_cast<std::size_t>(s)] != -1) throw std::invalid_argument("place: overlapping labels");
            owner[static_cast<std::size_t>(s)] = static_cast<int>(f);
            slot[static_cast<std::size_t>(s)] = static_cast<int>(q);
        }
    }
    const std::size_t side = ipow(static_cast<std::size_t>(d), n);
    if (n == 0) {
        Complex v{1.0, 0.0};
        for (const auto& pl : factors) v *= pl.op->matrix()(0, 0);
        return Operator::scalar(v, d);
    }
    const auto digits = detail::digit_table(n, d);
    const auto stride = static_cast<std::size_t>(n);

    // Flat sub-index of each factor for a given full index.
    std::vector<std::vector<std::size_t>> sub(factors.size(), std::vector<std::size_t>(side, 0));
    std::vector<std::size_t> free_key(side, 0);
    for (std::size_t idx = 0; idx < side; ++idx) {
        const int* dg = digits.data() + idx * stride;
        std::size_t fk = 0;
        for (int l = 1; l <= n; ++l) {
            const int f = owner[static_cast<std::size_t>(l)];
            if (f < 0) fk = fk * static_cast<std::size_t>(d) + static_cast<std::size_t>(dg[l - 1]);
        }
        free_key[idx] = fk;
        for (std::size_t f = 0; f < factors.size(); ++f) {
            std::size_t s = 0;
            for (int site : factors[f].sites) s = s * static_cast<std::size_t>(d) + static_cast<std::size_t>(dg[site - 1]);
            sub[f][idx] = s;
        }
    }
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(side), static_cast<Eigen::Index>(side));
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            if (free_key[r] != free_key[c]) continue;
            Complex v{1.0, 0.0};
            for (std::size_t f = 0; f < factors.size() && v != Complex{}; ++f)
                v *= factors[f].op->matrix()(static_cast<Eigen::Index>(sub[f][r]), static_cast<Eigen::Index>(sub[f][c]));
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    return {n, d, std::move(out)};
}

/// op acts on the listed factors of the n-particle space, identity elsewhere.
inline Operator embed(const Operator& op, const Labels& sites, int n) {
    detail::check_labels(sites, n, "embed");
    if (static_cast<int>(sites.size()) != op.n()) throw std::invalid_argument("embed: site count mismatch");
    return place({Placement{&op, sites}}, n, op.d());
}

/// Partial trace over every label not in `keep`; the result's factor q is
/// the input label keep[q].
inline Operator partial_trace(const Operator& a, const Labels& keep) {
    const int n = a.n();
    const int d = a.d();
    detail::check_labels(keep, n, "partial_trace");
    Labels traced;
    for (int l = 1; l <= n; ++l)
        if (std::find(keep.begin(), keep.end(), l) == keep.end()) traced.push_back(l);
    const int k = static_cast<int>(keep.size());
    const std::size_t out_side = ipow(static_cast<std::size_t>(d), k);
    const std::size_t tr_side = ipow(static_cast<std::size_t>(d), static_cast<int>(traced.size()));

    // weight of each label in the flat index
    std::vector<std::size_t> weight(static_cast<std::size_t>(n) + 1, 1);
    for (int l = n - 1; l >= 1; --l) weight[static_cast<std::size_t>(l)] = weight[static_cast<std::size_t>(l) + 1] * static_cast<std::size_t>(d);

    auto offsets = [&](const Labels& ls, std::size_t count) {
        std::vector<std::size_t> off(count, 0);
        std::vector<int> dg(ls.size());
        for (std::size_t i = 0; i < count; ++i) {
            detail::digits_of(i, static_cast<int>(ls.size()), d, dg.data());
            std::size_t o = 0;
            for (std::size_t q = 0; q < ls.size(); ++q) o += static_cast<std::size_t>(dg[q]) * weight[static_cast<std::size_t>(ls[q])];
            off[i] = o;
        }
        return off;
    };
    const auto keep_off = offsets(keep, out_side);
    const auto tr_off = offsets(traced, tr_side);

    const Matrix& m = a.matrix();
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(out_side), static_cast<Eigen::Index>(out_side));
    for (std::size_t r = 0; r < out_side; ++r)
        for (std::size_t c = 0; c < out_side; ++c) {
            Complex s{};
            for (std::size_t t = 0; t < tr_side; ++t)
                s += m(static_cast<Eigen::Index>(keep_off[r] + tr_off[t]), static_cast<Eigen::Index>(keep_off[c] + tr_off[t]));
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = s;
        }
    return {k, d, std::move(out)};
}

/// Keep labels 1..k, trace out k+1..n.
inline Operator trace_out_tail(const Operator& a, int k) {
    Labels keep(static_cast<std::size_t>(k));
    std::iota(keep.begin(), keep.end(), 1);
    return partial_trace(a, keep);
}

struct HermEig {
    RealVector values;
    Matrix vectors;  // columns are eigenvectors
};

inline HermEig herm_eig(const Operator& h) {
    if (!is_hermitian(h)) throw std::invalid_argument("herm_eig: operator is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
    if (es.info() != Eigen::Success) throw std::runtime_error("herm_eig: eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

/// exp(-i t H) from a precomputed eigendecomposition.
inline Matrix propagator(const HermEig& eig, double t) {
    const Eigen::VectorXcd phases = (eig.values.cast<Complex>() * Complex(0.0, -t)).array().exp();
    return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

/// Conjugation U X U^dagger.
inline Operator conjugate(const Matrix& u, const Operator& x) {
    return {x.n(), x.d(), u * x.matrix() * u.adjoint()};
}

/// U X U^dagger where U acts on the listed labels only (U's factor q on
/// sites[q]); the full-space unitary is never formed.
inline Operator conjugate_local(const Matrix& u, const Labels& sites, const Operator& x) {
    const int n = x.n();
    const int d = x.d();
    const int k = static_cast<int>(sites.size());
    if (k == 0) return x;
    detail::check_labels(sites, n, "conjugate_local");
    const std::size_t K = ipow(static_cast<std::size_t>(d), k);
    if (static_cast<std::size_t>(u.rows()) != K || u.rows() != u.cols())
        throw std::invalid_argument("conjugate_local: unitary size does not match the label count");
    if (k == n && std::is_sorted(sites.begin(), sites.end())) return conjugate(u, x);
    const std::size_t D = x.side();
    const std::size_t R = D / K;
    std::vector<std::size_t> weight(static_cast<std::size_t>(n) + 1, 1);
    for (int l = n - 1; l >= 1; --l) weight[static_cast<std::size_t>(l)] = weight[static_cast<std::size_t>(l) + 1] * static_cast<std::size_t>(d);
    std::vector<std::size_t> off(K, 0);
    std::vector<int> dg(static_cast<std::size_t>(k));
    for (std::size_t a = 0; a < K; ++a) {
        detail::digits_of(a, k, d, dg.data());
        for (int q = 0; q < k; ++q) off[a] += static_cast<std::size_t>(dg[static_cast<std::size_t>(q)]) * weight[static_cast<std::size_t>(sites[static_cast<std::size_t>(q)])];
    }
    std::vector<bool> on_site(static_cast<std::size_t>(n) + 1, false);
    for (int l : sites) on_site[static_cast<std::size_t>(l)] = true;
    std::vector<std::size_t> base;
    base.reserve(R);
    std::vector<int> full(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < D; ++i) {
        detail::digits_of(i, n, d, full.data());
        bool zero = true;
        for (int l : sites) zero = zero && full[static_cast<std::size_t>(l - 1)] == 0;
        if (zero) base.push_back(i);
    }
    const Matrix& m = x.matrix();
    const auto E = [](std::size_t v) { return static_cast<Eigen::Index>(v); };
    // left multiplication
    Matrix z(E(K), E(R * D));
    for (std::size_t c = 0; c < D; ++c)
        for (std::size_t r = 0; r < R; ++r)
            for (std::size_t a = 0; a < K; ++a) z(E(a), E(r + R * c)) = m(E(base[r] + off[a]), E(c));
    const Matrix y = u * z;
    Matrix x1(E(D), E(D));
    for (std::size_t c = 0; c < D; ++c)
        for (std::size_t r = 0; r < R; ++r)
            for (std::size_t a = 0; a < K; ++a) x1(E(base[r] + off[a]), E(c)) = y(E(a), E(r + R * c));
    // right multiplication by u^dagger
    Matrix zc(E(D * R), E(K));
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t b = 0; b < K; ++b) zc.block(E(D * r), E(b), E(D), 1) = x1.col(E(base[r] + off[b]));
    const Matrix w = zc * u.adjoint();
    Matrix out(E(D), E(D));
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t a = 0; a < K; ++a) out.col(E(base[r] + off[a])) = w.block(E(D * r), E(a), E(D), 1);
    return {n, d, std::move(out)};
}

/// state: e^{-itH} X e^{itH};  observable: e^{itH} X e^{-itH}.
inline Operator conjugate_evolve(const Operator& x, const Operator& h, double t, Direction dir) {
    x.check_same(h);
    const auto eig = herm_eig(h);
    return conjugate(propagator(eig, dir == Direction::state ? t : -t), x);
}

inline double trace_norm(const Operator& a) {
    if (a.side() == 1) return std::abs(a.matrix()(0, 0));
    if (hermiticity_defect(a) == 0.0) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix(), Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().sum();
    }
    Eigen::JacobiSVD<Matrix> svd(a.matrix());
    return svd.singularValues().sum();
}

inline double operator_norm(const Operator& a) {
    Eigen::JacobiSVD<Matrix> svd(a.matrix());
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

inline double min_eigenvalue(const Operator& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a).matrix(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

}  // namespace bbgky
