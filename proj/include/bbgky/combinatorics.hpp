// combinatorics.hpp - partitions, two-block splits and ordered dissections
// indexing the cluster and cumulant expansions.

#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bbgky {

template <typename T>
using Blocks = std::vector<std::vector<T>>;

/// Set partition of a ground list. Blocks keep ground order internally and
/// are ordered by their first element's ground position.
template <typename T>
struct SetPartition {
    Blocks<T> blocks;
    std::size_t size() const { return blocks.size(); }
};

/// Ordered split of a linearly ordered list into consecutive segments.
template <typename T>
struct Dissection {
    Blocks<T> segments;
    std::size_t size() const { return segments.size(); }
};

/// All set partitions with min_blocks..max_blocks blocks, in
/// restricted-growth-string order.
template <typename T>
std::vector<SetPartition<T>> set_partitions(const std::vector<T>& items, int min_blocks, int max_blocks) {
    const int n = static_cast<int>(items.size());
    if (n == 0) throw std::invalid_argument("set_partitions: empty item list");
    if (min_blocks < 1 || min_blocks > max_blocks || max_blocks > n)
        throw std::invalid_argument("set_partitions: need 1 <= min_blocks <= max_blocks <= |items|");

    std::vector<SetPartition<T>> out;
    std::vector<int> rgs(static_cast<std::size_t>(n), 0);
    // rgs[i] <= 1 + max(rgs[0..i-1]); iterate lexicographically.
    auto emit = [&] {
        int blocks = 0;
        for (int v : rgs) blocks = std::max(blocks, v + 1);
        if (blocks < min_blocks || blocks > max_blocks) return;
        SetPartition<T> p;
        p.blocks.resize(static_cast<std::size_t>(blocks));
        for (int i = 0; i < n; ++i) p.blocks[static_cast<std::size_t>(rgs[static_cast<std::size_t>(i)])].push_back(items[static_cast<std::size_t>(i)]);
        out.push_back(std::move(p));
    };
    std::vector<int> prefix_max(static_cast<std::size_t>(n), 0);
    while (true) {
        emit();
        int i = n - 1;
        for (; i >= 1; --i) {
            const int cap = prefix_max[static_cast<std::size_t>(i - 1)] + 1;
            if (rgs[static_cast<std::size_t>(i)] < cap && rgs[static_cast<std::size_t>(i)] + 1 < max_blocks) break;
        }
        if (i < 1) break;
        ++rgs[static_cast<std::size_t>(i)];
        prefix_max[static_cast<std::size_t>(i)] = std::max(prefix_max[static_cast<std::size_t>(i - 1)], rgs[static_cast<std::size_t>(i)]);
        for (int j = i + 1; j < n; ++j) {
            rgs[static_cast<std::size_t>(j)] = 0;
            prefix_max[static_cast<std::size_t>(j)] = prefix_max[static_cast<std::size_t>(j - 1)];
        }
    }
    return out;
}

template <typename T>
std::vector<SetPartition<T>> set_partitions(const std::vector<T>& items) {
    return set_partitions(items, 1, static_cast<int>(items.size()));
}

/// Unordered splits into two non-empty blocks. The block holding the first
/// item is always X1.
template <typename T>
std::vector<std::pair<std::vector<T>, std::vector<T>>> two_block_splits(const std::vector<T>& items) {
    const std::size_t n = items.size();
    if (n < 2) throw std::invalid_argument("two_block_splits: need at least 2 items");
    if (n > 62) throw std::invalid_argument("two_block_splits: too many items");
    std::vector<std::pair<std::vector<T>, std::vector<T>>> out;
    const std::uint64_t count = std::uint64_t{1} << (n - 1);
    // bit k (k >= 1) set: item k goes to X2; item 0 always in X1
    for (std::uint64_t mask = 1; mask < count; ++mask) {
        std::vector<T> x1{items[0]}, x2;
        for (std::size_t k = 1; k < n; ++k) ((mask >> (k - 1)) & 1U ? x2 : x1).push_back(items[k]);
        out.emplace_back(std::move(x1), std::move(x2));
    }
    return out;
}

/// Dissections into 1..max_segments consecutive, order-preserving segments
/// (compositions of the chain).
template <typename T>
std::vector<Dissection<T>> ordered_dissections(const std::vector<T>& segment, int max_segments) {
    const std::size_t n = segment.size();
    if (n == 0) throw std::invalid_argument("ordered_dissections: empty segment");
    if (max_segments < 1) throw std::invalid_argument("ordered_dissections: max_segments must be >= 1");
    if (n > 62) throw std::invalid_argument("ordered_dissections: segment too long");
    std::vector<Dissection<T>> out;
    const std::uint64_t count = std::uint64_t{1} << (n - 1);
    // bit k set: cut after position k. Enumerate by number of cuts first.
    for (std::size_t cuts = 0; cuts < n; ++cuts) {
        if (static_cast<int>(cuts) + 1 > max_segments) break;
        for (std::uint64_t mask = 0; mask < count; ++mask) {
            if (static_cast<std::size_t>(__builtin_popcountll(mask)) != cuts) continue;
            Dissection<T> dis;
            dis.segments.emplace_back();
            for (std::size_t k = 0; k < n; ++k) {
                dis.segments.back().push_back(segment[k]);
                if (k + 1 < n && ((mask >> k) & 1U)) dis.segments.emplace_back();
            }
            out.push_back(std::move(dis));
        }
    }
    return out;
}

/// (-1)^{p-1} (p-1)!
inline long long cumulant_coefficient(int p) {
    if (p < 1) throw std::invalid_argument("cumulant_coefficient: p must be >= 1");
    long long f = 1;
    for (int k = 2; k < p; ++k) f *= k;
    return (p % 2 == 1) ? f : -f;
}

inline double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

inline long long bell_number(int n) {
    // Bell triangle
    std::vector<long long> row{1};
    for (int i = 1; i <= n; ++i) {
        std::vector<long long> next{row.back()};
        for (long long v : row) next.push_back(next.back() + v);
        row = std::move(next);
    }
    return row.front();
}

/// All k-element subsets of items, in lexicographic order of positions.
template <typename T>
std::vector<std::vector<T>> subsets_of_size(const std::vector<T>& items, int k) {
    std::vector<std::vector<T>> out;
    const int n = static_cast<int>(items.size());
    if (k < 0 || k > n) return out;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        std::vector<T> s;
        for (int i : idx) s.push_back(items[static_cast<std::size_t>(i)]);
        out.push_back(std::move(s));
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

/// Ordered tuples of k pairwise distinct values from 1..m.
inline std::vector<std::vector<int>> injective_tuples(int k, int m) {
    std::vector<std::vector<int>> out;
    if (k > m || k < 0) return out;
    std::vector<int> cur;
    std::vector<bool> used(static_cast<std::size_t>(m) + 1, false);
    auto rec = [&](auto&& self) -> void {
        if (static_cast<int>(cur.size()) == k) {
            out.push_back(cur);
            return;
        }
        for (int v = 1; v <= m; ++v) {
            if (used[static_cast<std::size_t>(v)]) continue;
            used[static_cast<std::size_t>(v)] = true;
            cur.push_back(v);
            self(self);
            cur.pop_back();
            used[static_cast<std::size_t>(v)] = false;
        }
    };
    rec(rec);
    return out;
}

/// Compositions of values into k >= 0 positive parts with total <= n.
inline std::vector<std::vector<int>> bounded_compositions(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int remaining) -> void {
        out.push_back(cur);
        for (int p = 1; p <= remaining; ++p) {
            cur.push_back(p);
            self(self, remaining - p);
            cur.pop_back();
        }
    };
    rec(rec, n);
    return out;
}

}  // namespace bbgky
