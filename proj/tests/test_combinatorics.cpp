#include <gtest/gtest.h>

#include <numeric>

#include "bbgky/combinatorics.hpp"
#include "oracles.hpp"

using namespace bbgky;

TEST(Combinatorics, SetPartitionsMatchBruteForce) {
    for (int n = 1; n <= 6; ++n) {
        std::vector<int> items(static_cast<std::size_t>(n));
        std::iota(items.begin(), items.end(), 0);
        std::set<std::vector<std::vector<int>>> got;
        for (const auto& p : set_partitions(items)) {
            auto blocks = p.blocks;
            std::sort(blocks.begin(), blocks.end());
            EXPECT_TRUE(got.insert(blocks).second) << "duplicate partition";
        }
        EXPECT_EQ(got, oracle::partitions(n)) << "n=" << n;
        EXPECT_EQ(static_cast<long long>(got.size()), bell_number(n));
    }
}

TEST(Combinatorics, BlockCountWindow) {
    const std::vector<int> items{1, 2, 3, 4};
    std::size_t total = 0;
    for (int k = 1; k <= 4; ++k) {
        const auto ps = set_partitions(items, k, k);
        for (const auto& p : ps) EXPECT_EQ(static_cast<int>(p.size()), k);
        total += ps.size();
    }
    EXPECT_EQ(total, 15U);                        // Stirling numbers 1, 7, 6, 1
    EXPECT_EQ(set_partitions(items, 2, 2).size(), 7U);
    EXPECT_THROW(set_partitions(items, 0, 2), std::invalid_argument);
    EXPECT_THROW(set_partitions(std::vector<int>{}, 1, 1), std::invalid_argument);
}

TEST(Combinatorics, PartitionsKeepFirstElementOrder) {
    const std::vector<int> items{7, 3, 5};
    for (const auto& p : set_partitions(items)) {
        EXPECT_EQ(p.blocks.front().front(), 7);
        for (std::size_t i = 1; i < p.blocks.size(); ++i) {
            const auto pos = [&](int v) { return std::find(items.begin(), items.end(), v) - items.begin(); };
            EXPECT_LT(pos(p.blocks[i - 1].front()), pos(p.blocks[i].front()));
        }
    }
}

TEST(Combinatorics, TwoBlockSplits) {
    const std::vector<int> items{1, 2, 3, 4};
    const auto splits = two_block_splits(items);
    EXPECT_EQ(splits.size(), 7U);  // 2^{n-1} - 1
    for (const auto& [a, b] : splits) {
        EXPECT_EQ(a.front(), 1);
        EXPECT_FALSE(b.empty());
        EXPECT_EQ(a.size() + b.size(), 4U);
    }
}

TEST(Combinatorics, OrderedDissections) {
    const std::vector<int> seg{4, 5, 6, 7};
    const auto all = ordered_dissections(seg, 4);
    EXPECT_EQ(all.size(), 8U);  // 2^{n-1} compositions
    for (const auto& dis : all) {
        std::vector<int> flat;
        for (const auto& s : dis.segments) flat.insert(flat.end(), s.begin(), s.end());
        EXPECT_EQ(flat, seg);  // consecutive, order preserving
    }
    EXPECT_EQ(ordered_dissections(seg, 2).size(), 4U);  // 1 + C(3,1)
    EXPECT_EQ(ordered_dissections(seg, 1).size(), 1U);
}

TEST(Combinatorics, CoefficientsAndCounts) {
    EXPECT_EQ(cumulant_coefficient(1), 1);
    EXPECT_EQ(cumulant_coefficient(2), -1);
    EXPECT_EQ(cumulant_coefficient(3), 2);
    EXPECT_EQ(cumulant_coefficient(4), -6);
    EXPECT_DOUBLE_EQ(factorial(5), 120.0);
    EXPECT_EQ(bell_number(0), 1);
    EXPECT_EQ(bell_number(5), 52);
    // sum over partitions of (-1)^{|P|-1}(|P|-1)! vanishes for n >= 2
    for (int n = 2; n <= 6; ++n) {
        long long s = 0;
        for (const auto& p : oracle::partitions(n)) s += cumulant_coefficient(static_cast<int>(p.size()));
        EXPECT_EQ(s, 0) << n;
    }
}

TEST(Combinatorics, InjectiveTuplesAndCompositions) {
    const auto t = injective_tuples(2, 4);
    EXPECT_EQ(t.size(), 12U);
    for (const auto& v : t) EXPECT_NE(v[0], v[1]);
    EXPECT_TRUE(injective_tuples(3, 2).empty());
    // compositions with total <= n: 2^n of them (including the empty one)
    for (int n = 0; n <= 5; ++n) EXPECT_EQ(bounded_compositions(n).size(), std::size_t{1} << n);
}
