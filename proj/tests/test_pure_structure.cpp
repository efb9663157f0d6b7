#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace gme;
using gme::testing::block_product_state;
using gme::testing::random_partition;

namespace {

PureState kets(int n, const std::vector<std::pair<std::string, Complex>>& k) {
    return PureState::from_kets(PartyStructure::uniform(n, 2), k);
}

Partition P(std::vector<Block> one_based) { return Partition::from_one_based(one_based); }

const PureState& psi3() {
    static const PureState s = kets(3, {{"000", 1.0}, {"011", 1.0}});
    return s;
}
const PureState& phi3() {
    static const PureState s = kets(3, {{"011", 1.0}, {"101", 1.0}});
    return s;
}

}  // namespace

TEST(SchmidtRank, BasicStates) {
    EXPECT_EQ(schmidt_rank(kets(2, {{"00", 1.0}, {"11", 1.0}}), Bipartition({0}, 2)), 2);
    EXPECT_EQ(schmidt_rank(psi3(), Bipartition({0}, 3)), 1);
    random::Rng rng(1);
    const auto prod = random::product(rng, PartyStructure({{"A", 2}, {"B", 3}, {"C", 2}}));
    for (const auto& c : enumerate_bipartitions(3)) EXPECT_EQ(schmidt_rank(prod, c), 1);
    EXPECT_THROW(PureState(Vector::Zero(4), PartyStructure::uniform(2, 2)), PreconditionError);
}

TEST(SchmidtRank, ComplementSymmetric) {
    random::Rng rng(2);
    for (int t = 0; t < 20; ++t) {
        const auto psi = block_product_state(rng, {2, 3, 2, 2}, random_partition(rng, 4));
        for (const auto& c : enumerate_bipartitions(4))
            EXPECT_EQ(schmidt_rank(psi, c), schmidt_rank(psi, Bipartition(c.complement(), 4)));
    }
}

TEST(FactorizingCuts, Examples) {
    EXPECT_TRUE(factorizing_cuts(kets(3, {{"000", 1.0}, {"111", 1.0}})).empty());
    const auto zero_bell = kets(3, {{"000", 1.0}, {"011", 1.0}});
    const auto cuts = factorizing_cuts(zero_bell);
    ASSERT_EQ(cuts.size(), 1u);
    EXPECT_EQ(cuts[0].side(), (std::vector<int>{0}));
    EXPECT_EQ(factorizing_cuts(kets(4, {{"0000", 1.0}})).size(), 7u);
}

TEST(CompletePartition, WorkedExamples) {
    EXPECT_EQ(complete_partition(psi3()), P({{1}, {2, 3}}));
    EXPECT_EQ(complete_partition(phi3()), P({{1, 2}, {3}}));
    EXPECT_EQ(complete_partition(kets(4, {{"0010", 1.0}, {"1011", 1.0}, {"0110", -1.0}, {"1111", -1.0}})),
              P({{1, 4}, {2}, {3}}));
    EXPECT_EQ(complete_partition(kets(4, {{"0010", 1.0}, {"0001", 1.0}, {"0110", 1.0}, {"0101", 1.0}})),
              P({{1}, {2}, {3, 4}}));
}

TEST(CompletePartition, KroneckerOfWorkedStatesIsGme) {
    const PureState k = kronecker_product(psi3(), relabel(phi3(), {"D", "E", "F"}));
    EXPECT_EQ(k.structure().dims(), (std::vector<int>{4, 4, 4}));
    EXPECT_TRUE(is_gme_pure(k));
    EXPECT_EQ(predict_kron_partition(complete_partition(psi3()), complete_partition(phi3())), Partition::whole(3));
}

TEST(CompletePartition, DimensionOnePartyIsItsOwnBlock) {
    const PureState s(Vector::Ones(2), PartyStructure({{"A", 2}, {"B", 1}}));
    EXPECT_EQ(complete_partition(s), Partition::singletons(2));
}

TEST(CompletePartition, RecoversConstructedBlocks) {
    random::Rng rng(3);
    for (int t = 0; t < 100; ++t) {
        const int n = random::uniform_int(rng, 1, 6);
        std::vector<int> dims;
        for (int i = 0; i < n; ++i) dims.push_back(random::uniform_int(rng, 2, 3));
        Index total = 1;
        for (int d : dims) total *= d;
        if (total > 400) continue;
        const auto blocks = random_partition(rng, n);
        const auto psi = block_product_state(rng, dims, blocks);
        const auto cp = complete_partition(psi);
        EXPECT_EQ(cp, blocks);
        // (ii.1) factorization across every block, checked directly
        for (const auto& b : cp.blocks())
            if (static_cast<int>(b.size()) < n) EXPECT_EQ(schmidt_rank(psi, Bipartition(b, n)), 1);
        EXPECT_EQ(is_gme_pure(psi), cp.size() == 1);
    }
}

TEST(CompletePartition, InvariantUnderLocalInvertibles) {
    random::Rng rng(4);
    for (int t = 0; t < 30; ++t) {
        const auto blocks = random_partition(rng, 4);
        const auto psi = block_product_state(rng, {2, 2, 3, 2}, blocks);
        const auto moved = apply_local(psi, random::invertible_product(rng, psi.structure()));
        EXPECT_EQ(complete_partition(moved), complete_partition(psi));
    }
}

TEST(PredictKronPartition, WorkedExamples) {
    EXPECT_EQ(predict_kron_partition(P({{1}, {2, 3}}), P({{1, 2}, {3}})), P({{1, 2, 3}}));
    EXPECT_EQ(predict_kron_partition(P({{1}, {2}, {3, 4}}), P({{1, 4}, {2}, {3}})), P({{2}, {1, 3, 4}}));
    EXPECT_EQ(predict_kron_partition(P({{1}, {2}}), P({{1}, {2}})), P({{1}, {2}}));
}

TEST(PredictKronPartition, FourQubitExampleFromScratch) {
    const auto a = kets(4, {{"0010", 1.0}, {"0001", 1.0}, {"0110", 1.0}, {"0101", 1.0}});
    const auto b = kets(4, {{"0010", 1.0}, {"1011", 1.0}, {"0110", -1.0}, {"1111", -1.0}});
    const auto k = kronecker_product(a, relabel(b, {"B1", "B2", "B3", "B4"}));
    EXPECT_EQ(complete_partition(k), P({{2}, {1, 3, 4}}));
}

TEST(PredictKronPartition, DisjointRemaindersStaySeparate) {
    // Bell(1,2) ⊗ Bell(3,4) merged with a fully product state: no block is
    // shared, yet the product still factorizes across {1,2}|{3,4}.
    const Vector bell = gme::testing::ket({2, 2}, {0, 0}) + gme::testing::ket({2, 2}, {1, 1});
    const PureState bb(Eigen::kroneckerProduct(bell, bell).eval(), PartyStructure::uniform(4, 2));
    const auto zero = relabel(kets(4, {{"0000", 1.0}}), {"B1", "B2", "B3", "B4"});
    const auto p = complete_partition(bb), q = complete_partition(zero);
    EXPECT_EQ(p, P({{1, 2}, {3, 4}}));
    EXPECT_TRUE(partition_intersection(p, q).empty());
    const auto actual = complete_partition(kronecker_product(bb, zero));
    EXPECT_EQ(actual, P({{1, 2}, {3, 4}}));
    EXPECT_EQ(predict_kron_partition(p, q), actual);
    EXPECT_NE(intersection_rule_partition(p, q), actual);
}

TEST(PredictKronPartition, ShorterSecondOperand) {
    // φ on two parties merges into ψ's first two; ψ's third party is untouched.
    random::Rng rng(6);
    const auto psi = block_product_state(rng, {2, 2, 2}, P({{1}, {2}, {3}}));
    const auto phi = relabel(block_product_state(rng, {2, 2}, P({{1, 2}})), {"B1", "B2"});
    const auto actual = complete_partition(kronecker_product(psi, phi));
    EXPECT_EQ(predict_kron_partition(complete_partition(psi), complete_partition(phi)), actual);
    EXPECT_EQ(actual, P({{1, 2}, {3}}));
    EXPECT_THROW(predict_kron_partition(Partition::whole(2), Partition::whole(3)), PreconditionError);
}

TEST(PredictKronPartition, RandomPropertySample) {
    random::Rng rng(7);
    for (int t = 0; t < 60; ++t) {
        const int n = random::uniform_int(rng, 2, 5);
        const int m = random::uniform_int(rng, 1, n);
        const auto psi = block_product_state(rng, std::vector<int>(static_cast<std::size_t>(n), 2), random_partition(rng, n));
        std::vector<std::string> labels;
        for (int i = 0; i < m; ++i) labels.push_back("B" + std::to_string(i));
        const auto phi = relabel(block_product_state(rng, std::vector<int>(static_cast<std::size_t>(m), 2), random_partition(rng, m)), labels);
        const auto actual = complete_partition(kronecker_product(psi, phi));
        EXPECT_EQ(predict_kron_partition(complete_partition(psi), complete_partition(phi)), actual);
    }
}
