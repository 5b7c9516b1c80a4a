// sequence.hpp - sequences of n-particle operators (n = 0..max)

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bbgky/combinatorics.hpp"
#include "bbgky/linalg.hpp"

namespace bbgky {

enum class SequenceKind {
    observable,          // A
    density,             // D
    correlation,         // g
    reduced_observable,  // B, b
    reduced_density,     // F, f
    reduced_correlation  // G
};

inline std::string_view to_string(SequenceKind k) {
    switch (k) {
        case SequenceKind::observable: return "observable";
        case SequenceKind::density: return "density";
        case SequenceKind::correlation: return "correlation";
        case SequenceKind::reduced_observable: return "reduced_observable";
        case SequenceKind::reduced_density: return "reduced_density";
        case SequenceKind::reduced_correlation: return "reduced_correlation";
    }
    return "unknown";
}

inline SequenceKind sequence_kind_from_string(std::string_view s) {
    for (auto k : {SequenceKind::observable, SequenceKind::density, SequenceKind::correlation,
                   SequenceKind::reduced_observable, SequenceKind::reduced_density, SequenceKind::reduced_correlation})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown sequence kind '" + std::string(s) + "'");
}

/// entries[n] acts on n particles; entries[0] is the 1x1 vacuum component.
/// `finite` marks sequences whose components vanish identically beyond
/// max_n() (states of at most max_n() particles).
class OperatorSequence {
public:
    OperatorSequence(SequenceKind kind, int d, std::vector<Operator> entries, bool finite = true)
        : kind_(kind), d_(d), entries_(std::move(entries)), finite_(finite) {
        if (entries_.empty()) entries_.push_back(Operator::scalar(default_vacuum(kind), d));
        for (std::size_t n = 0; n < entries_.size(); ++n) {
            if (entries_[n].n() != static_cast<int>(n) || entries_[n].d() != d)
                throw std::invalid_argument("OperatorSequence: entry " + std::to_string(n) + " has wrong shape");
        }
    }

    /// Zero components 1..max_n with the kind's default vacuum.
    static OperatorSequence zeros(SequenceKind kind, int d, int max_n) {
        std::vector<Operator> e{Operator::scalar(default_vacuum(kind), d)};
        for (int n = 1; n <= max_n; ++n) e.push_back(Operator::zero(n, d));
        return {kind, d, std::move(e)};
    }

    static Complex default_vacuum(SequenceKind kind) {
        switch (kind) {
            case SequenceKind::density:
            case SequenceKind::reduced_density:
            case SequenceKind::correlation:
            case SequenceKind::reduced_correlation:
                return 1.0;
            default:
                return 0.0;
        }
    }

    SequenceKind kind() const { return kind_; }
    int d() const { return d_; }
    int max_n() const { return static_cast<int>(entries_.size()) - 1; }
    bool finite() const { return finite_; }
    void set_finite(bool f) { finite_ = f; }

    const Operator& operator[](int n) const { return entries_.at(static_cast<std::size_t>(n)); }
    Operator& operator[](int n) { return entries_.at(static_cast<std::size_t>(n)); }
    const std::vector<Operator>& entries() const { return entries_; }

    /// Component n, zero beyond max_n() for finite sequences.
    Operator component(int n) const {
        if (n <= max_n()) return entries_[static_cast<std::size_t>(n)];
        if (finite_) return Operator::zero(n, d_);
        throw std::out_of_range("OperatorSequence: component " + std::to_string(n) + " not available (max " +
                                std::to_string(max_n()) + ")");
    }

    void push_back(Operator op) {
        if (op.n() != max_n() + 1 || op.d() != d_) throw std::invalid_argument("OperatorSequence: push_back shape");
        entries_.push_back(std::move(op));
    }

    OperatorSequence with_kind(SequenceKind k) const {
        OperatorSequence s = *this;
        s.kind_ = k;
        return s;
    }

private:
    SequenceKind kind_;
    int d_;
    std::vector<Operator> entries_;
    bool finite_;
};

inline double max_trace_norm_difference(const OperatorSequence& a, const OperatorSequence& b, int from = 1) {
    const int top = std::min(a.max_n(), b.max_n());
    double m = 0.0;
    for (int n = from; n <= top; ++n) m = std::max(m, trace_norm(a[n] - b[n]));
    return m;
}

/// prod_{X in blocks} op_of(|X|) placed on X, as an operator on n labels.
template <typename OpOf>
Operator block_product(const std::vector<Labels>& blocks, int n, int d, OpOf&& op_of) {
    std::vector<Operator> ops;
    ops.reserve(blocks.size());
    for (const auto& x : blocks) ops.push_back(op_of(x));
    std::vector<Placement> factors;
    for (std::size_t i = 0; i < blocks.size(); ++i) factors.push_back({&ops[i], blocks[i]});
    return place(factors, n, d);
}

/// Sum over set partitions P of 1..n of w(|P|) prod_{X in P} seq_{|X|}(X).
template <typename Weight>
Operator partition_sum(const OperatorSequence& seq, int n, Weight&& weight) {
    Operator acc = Operator::zero(n, seq.d());
    for (const auto& p : set_partitions(label_range(1, n))) {
        const double w = weight(static_cast<int>(p.size()));
        if (w == 0.0) continue;
        acc += w * block_product(p.blocks, n, seq.d(), [&](const Labels& x) { return seq.component(static_cast<int>(x.size())); });
    }
    return acc;
}


/// (F1, F1 (x) F1, ..., F1^{(x) max_n}): the chaos (factorized) sequence.
inline OperatorSequence product_sequence(SequenceKind kind, const Operator& f1, int max_n, bool finite = false) {
    std::vector<Operator> e{Operator::scalar(1.0, f1.d())};
    for (int n = 1; n <= max_n; ++n) e.push_back(tensor(e.back(), f1));
    return {kind, f1.d(), std::move(e), finite};
}

}  // namespace bbgky
