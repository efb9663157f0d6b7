#include <algorithm>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace gme;
using gme::testing::ket;

namespace {

DensityOperator qubit_projector(int bit, const std::string& label) {
    Matrix m = Matrix::Zero(2, 2);
    m(bit, bit) = 1.0;
    return DensityOperator(m, PartyStructure({{label, 2}}));
}

DensityOperator bell(const std::string& a, const std::string& b) {
    const Vector v = ket({2, 2}, {0, 0}) + ket({2, 2}, {1, 1});
    return DensityOperator(v * v.adjoint(), PartyStructure({{a, 2}, {b, 2}}));
}

std::vector<double> sorted_abs_entries(const Matrix& m) {
    std::vector<double> out;
    for (Index i = 0; i < m.size(); ++i) out.push_back(std::abs(m.data()[i]));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST(PartyStructure, RejectsDuplicateLabelsAndBadDims) {
    EXPECT_THROW(PartyStructure({{"A", 2}, {"A", 2}}), PreconditionError);
    EXPECT_THROW(PartyStructure({{"A", 0}}), Error);
    EXPECT_THROW(PartyStructure::uniform(13, 2), DimensionError);
    EXPECT_EQ(PartyStructure::uniform(12, 2).total_dim(), 4096);
}

TEST(DensityOperator, ValidatesHermitianAndPositive) {
    Matrix m = Matrix::Identity(2, 2);
    m(0, 1) = 0.5;
    EXPECT_THROW(DensityOperator(m, PartyStructure::uniform(1, 2)), PreconditionError);
    Matrix neg = Matrix::Identity(2, 2);
    neg(1, 1) = -0.5;
    EXPECT_THROW(DensityOperator(neg, PartyStructure::uniform(1, 2)), PreconditionError);
    EXPECT_THROW(DensityOperator(Matrix::Identity(3, 3), PartyStructure::uniform(1, 2)), DimensionError);
}

TEST(TensorProduct, BasisProjectors) {
    const auto r = tensor_product(qubit_projector(0, "A"), qubit_projector(1, "B"));
    ASSERT_EQ(r.parties(), 2u);
    const Vector e01 = ket({2, 2}, {0, 1});
    EXPECT_LT((r.matrix() - e01 * e01.adjoint()).norm(), 1e-15);
}

TEST(TensorProduct, SideAndTrace) {
    random::Rng rng(11);
    const auto a = random::density(rng, PartyStructure({{"A", 2}, {"C1", 2}}), 3);
    const auto b = random::density(rng, PartyStructure({{"B", 2}, {"C2", 2}}), 2);
    const auto t = tensor_product(a, b);
    EXPECT_EQ(t.dim(), 16);
    EXPECT_EQ(t.parties(), 4u);
    EXPECT_NEAR(t.trace(), a.trace() * b.trace(), 1e-12 * t.trace());
}

TEST(TensorProduct, LabelCollisionNeedsRelabeling) {
    try {
        tensor_product(bell("A", "B"), bell("B", "C"));
        FAIL() << "expected an error";
    } catch (const PreconditionError& e) {
        EXPECT_NE(std::string(e.what()).find("relabeling required"), std::string::npos);
    }
}

TEST(TensorProduct, AssociativeUpToLabels) {
    random::Rng rng(5);
    const auto a = random::density(rng, PartyStructure({{"A", 2}}), 2);
    const auto b = random::density(rng, PartyStructure({{"B", 3}}), 2);
    const auto c = random::density(rng, PartyStructure({{"C", 2}}), 1);
    const auto l = tensor_product(tensor_product(a, b), c), r = tensor_product(a, tensor_product(b, c));
    EXPECT_LT((l.matrix() - r.matrix()).norm(), 1e-13);
}

TEST(KroneckerProduct, BellBellHasSchmidtRankFour) {
    const Vector v = ket({2, 2}, {0, 0}) + ket({2, 2}, {1, 1});
    const PureState psi(v, PartyStructure({{"A1", 2}, {"A2", 2}}));
    const PureState phi(v, PartyStructure({{"B1", 2}, {"B2", 2}}));
    const PureState k = kronecker_product(psi, phi);
    ASSERT_EQ(k.parties(), 2u);
    EXPECT_EQ(k.structure().dim(0), 4);
    // Expected by hand: Σ_{a,b} |2a+b⟩|2a+b⟩.
    Vector expect = Vector::Zero(16);
    for (int i = 0; i < 4; ++i) expect(i * 4 + i) = 1.0;
    EXPECT_LT((k.amplitudes() - expect).norm(), 1e-15);
    Matrix reshaped(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) reshaped(i, j) = k.amplitudes()(i * 4 + j);
    EXPECT_EQ(linalg::numerical_rank(reshaped, 1e-8), 4);

    const auto rho = kronecker_product(DensityOperator::projector(psi), DensityOperator::projector(phi));
    EXPECT_LT((rho.matrix() - k.amplitudes() * k.amplitudes().adjoint()).norm(), 1e-14);
}

TEST(KroneckerProduct, SinglePartySecondOperand) {
    random::Rng rng(3);
    const auto a = random::density(rng, PartyStructure({{"A1", 2}, {"A2", 3}, {"A3", 2}}), 4);
    const auto b = random::density(rng, PartyStructure({{"B1", 2}}), 2);
    const auto k = kronecker_product(a, b);
    ASSERT_EQ(k.parties(), 3u);
    EXPECT_EQ(k.structure().dims(), (std::vector<int>{4, 3, 2}));
    EXPECT_EQ(k.structure().label(0), "A1B1");
}

TEST(KroneckerProduct, MoreSecondPartiesIsAnError) {
    EXPECT_THROW(kronecker_product(qubit_projector(0, "A"), bell("B1", "B2")), PreconditionError);
}

TEST(Products, EntriesArePermutationOfTensorEntries) {
    random::Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = random::density(rng, PartyStructure({{"A", 2}, {"C1", 3}}), 2);
        const auto b = random::density(rng, PartyStructure({{"B", 3}, {"C2", 2}}), 3);
        const auto t = tensor_product(a, b);
        for (const auto& m : {kronecker_product(a, b).matrix(), kc_product(a, b).matrix()}) {
            EXPECT_EQ(sorted_abs_entries(m), sorted_abs_entries(t.matrix()));
            const RealVector e1 = linalg::eigenvalues(m), e2 = linalg::eigenvalues(t.matrix());
            EXPECT_LT((e1 - e2).norm(), 1e-12 * e2.norm());
        }
    }
}

TEST(KcProduct, TwoQubitOperandsGiveTwoTwoFour) {
    const auto rho = kc_product(bell("A", "C1"), bell("B", "C2"));
    EXPECT_EQ(rho.structure().dims(), (std::vector<int>{2, 2, 4}));
    // |a c1⟩|b c2⟩ ↦ |a, b, 2 c1 + c2⟩: Bell ⊗ Bell gives Σ |a b (2a+b)⟩.
    Vector v = Vector::Zero(16);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) v += ket({2, 2, 4}, {a, b, 2 * a + b});
    EXPECT_LT((rho.matrix() - v * v.adjoint()).norm(), 1e-14);
}

TEST(KcProduct, NoSharedPartiesIsTensorProduct) {
    random::Rng rng(8);
    const auto a = random::density(rng, PartyStructure({{"A", 2}}), 2);
    const auto b = random::density(rng, PartyStructure({{"B", 3}}), 2);
    EXPECT_LT((kc_product(a, b).matrix() - tensor_product(a, b).matrix()).norm(), 1e-15);
}

TEST(KcProduct, MismatchedSharedCountsIsAnError) {
    random::Rng rng(8);
    const auto a = random::density(rng, PartyStructure({{"A", 2}, {"C1", 2}}), 2);
    const auto b = random::density(rng, PartyStructure({{"B", 2}, {"C2", 2}, {"C3", 2}}), 2);
    EXPECT_THROW(kc_product(a, b), PreconditionError);
}

TEST(KcProduct, ReducesToFirstOperand) {
    random::Rng rng(23);
    const auto a = random::density(rng, PartyStructure({{"A", 2}, {"C1", 3}}), 3);
    const auto b = random::density(rng, PartyStructure({{"B", 2}, {"C2", 2}}), 2).normalized();
    const auto rho = kc_product(a, b);
    // Split the merged C party back into C1 (major) and C2.
    const DensityOperator split = DensityOperator::trusted(rho.matrix(), PartyStructure({{"A", 2}, {"B", 2}, {"C1", 3}, {"C2", 2}}));
    const auto reduced = partial_trace(split, {0, 2});
    EXPECT_LT((reduced.matrix() - a.matrix()).norm(), 1e-12 * a.matrix().norm());
}

TEST(PartialTrace, GhzMarginalByIndexSum) {
    const Vector g = ket({2, 2, 2}, {0, 0, 0}) + ket({2, 2, 2}, {1, 1, 1});
    const auto rho = DensityOperator::projector(PureState(g, PartyStructure::uniform(3, 2)));
    const auto r = partial_trace(rho, {0});
    Matrix oracle = Matrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 4; ++k) oracle(i, j) += rho.matrix()(i * 4 + k, j * 4 + k);
    EXPECT_LT((r.matrix() - oracle).norm(), 1e-15);
    EXPECT_LT((r.matrix() - Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(PartialTrace, KeepAllAndProductFactor) {
    random::Rng rng(2);
    const auto a = random::density(rng, PartyStructure({{"A", 2}}), 2);
    const auto b = random::density(rng, PartyStructure({{"B", 3}}), 2);
    const auto rho = tensor_product(a, b);
    EXPECT_LT((partial_trace(rho, {0, 1}).matrix() - rho.matrix()).norm(), 1e-15);
    EXPECT_LT((partial_trace(rho, {1}).matrix() - a.trace() * b.matrix()).norm(), 1e-12);
    EXPECT_THROW(partial_trace(rho, {}), PreconditionError);
}

TEST(PartialTrace, PreservesTraceAndPositivity) {
    random::Rng rng(31);
    const auto rho = random::density(rng, PartyStructure({{"A", 2}, {"B", 3}, {"C", 2}}), 5);
    const auto r = partial_trace(rho, {0, 2});
    EXPECT_NEAR(r.trace(), rho.trace(), 1e-12 * rho.trace());
    EXPECT_GT(linalg::min_eigenvalue(r.matrix()), -1e-12 * r.trace());
}

TEST(PartialTranspose, BellHasNegativeEigenvalue) {
    const auto pt = partial_transpose(bell("A", "B"), Bipartition({0}, 2));
    EXPECT_NEAR(linalg::min_eigenvalue(pt), -1.0, 1e-12);
}

TEST(PartialTranspose, DiagonalUnchangedInvolutionTrace) {
    random::Rng rng(4);
    Matrix diag = Matrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i) diag(i, i) = i + 1.0;
    const DensityOperator d(diag, PartyStructure::uniform(2, 2));
    EXPECT_LT((partial_transpose(d, Bipartition({0}, 2)) - diag).norm(), 1e-15);
    for (int t = 0; t < 10; ++t) {
        const auto rho = random::density(rng, PartyStructure({{"A", 2}, {"B", 3}, {"C", 2}}), 4);
        for (const auto& cut : enumerate_bipartitions(3)) {
            const Matrix once = partial_transpose(rho, cut);
            EXPECT_TRUE(linalg::is_hermitian(once, 1e-12));
            EXPECT_NEAR(once.trace().real(), rho.trace(), 1e-12 * rho.trace());
            EXPECT_LT((partial_transpose(once, rho.structure().dims(), cut.side()) - rho.matrix()).norm(), 1e-14);
        }
    }
}

TEST(PermuteParties, IdentitySwapAndSpectrum) {
    random::Rng rng(9);
    const auto rho = random::density(rng, PartyStructure({{"A", 2}, {"B", 3}, {"C", 2}}), 4);
    EXPECT_EQ(permute_parties(rho, {0, 1, 2}).matrix(), rho.matrix());
    const PureState e01(ket({2, 2}, {0, 1}), PartyStructure::uniform(2, 2));
    EXPECT_LT((permute_parties(e01, {1, 0}).amplitudes() - ket({2, 2}, {1, 0})).norm(), 1e-15);
    const std::vector<std::vector<int>> perms{{0, 2, 1}, {1, 0, 2}, {2, 0, 1}, {1, 2, 0}, {2, 1, 0}};
    for (const auto& p : perms) {
        const auto q = permute_parties(rho, p);
        EXPECT_LT((linalg::eigenvalues(q.matrix()) - linalg::eigenvalues(rho.matrix())).norm(), 1e-12);
        EXPECT_EQ(q.structure().dim(0), rho.structure().dim(static_cast<std::size_t>(p[0])));
    }
    EXPECT_THROW(permute_parties(rho, {0, 0, 1}), PreconditionError);
}

TEST(ApplyLocal, MatchesExplicitKronecker) {
    random::Rng rng(12);
    const auto rho = random::density(rng, PartyStructure({{"A", 2}, {"B", 3}}), 3);
    const Matrix x = random::matrix(rng, 2, 2), y = random::matrix(rng, 2, 3);
    const Matrix k = Eigen::kroneckerProduct(x, y).eval();
    const auto out = apply_local(rho, {x, y});
    EXPECT_EQ(out.structure().dims(), (std::vector<int>{2, 2}));
    EXPECT_LT((out.matrix() - k * rho.matrix() * k.adjoint()).norm(), 1e-12 * out.matrix().norm());
}

TEST(PureState, FromKetsAndZeroVector) {
    const auto psi = PureState::from_kets(PartyStructure({{"A", 2}, {"C", 4}}), {{"03", 1.0}, {"12", 2.0}});
    EXPECT_EQ(psi.amplitudes()(3), Complex(1.0));
    EXPECT_EQ(psi.amplitudes()(6), Complex(2.0));
    EXPECT_THROW(PureState(Vector::Zero(4), PartyStructure::uniform(2, 2)), PreconditionError);
    EXPECT_THROW(PureState::from_kets(PartyStructure::uniform(2, 2), {{"02", 1.0}}), PreconditionError);
}
