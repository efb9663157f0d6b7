#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "gme/core.hpp"
#include "gme/linalg.hpp"
#include "gme/partitions.hpp"
#include "gme/state.hpp"

namespace gme {

/// Numerical Schmidt rank of ψ across s | s̄.
inline int schmidt_rank(const PureState& psi, const Bipartition& s, double rank_tol = Tolerances{}.rank) {
    const Vector v = psi.amplitudes() / psi.amplitudes().norm();
    return linalg::numerical_rank(reshape_across(v, psi.structure().dims(), s.side()), rank_tol);
}

/// Every cut across which ψ is a product, in enumerate_bipartitions order.
inline std::vector<Bipartition> factorizing_cuts(const PureState& psi, double rank_tol = Tolerances{}.rank) {
    const int n = static_cast<int>(psi.parties());
    if (n > kMaxEnumeratedParties) throw PreconditionError("factorizing-cut search supports at most 12 parties");
    std::vector<Bipartition> out;
    if (n < 2) return out;
    for (auto& cut : enumerate_bipartitions(n))
        if (schmidt_rank(psi, cut, rank_tol) == 1) out.push_back(std::move(cut));
    return out;
}

namespace detail {

struct Factor {
    Vector amps;
    std::vector<int> parties;  // original indices, ascending
    std::vector<int> dims;
};

/// Local side (indices into f.parties) of a cut across which f factorizes.
inline std::optional<std::vector<int>> find_factorizing_side(const Factor& f, double rank_tol) {
    const int k = static_cast<int>(f.parties.size());
    if (k < 2) return std::nullopt;
    for (const auto& cut : enumerate_bipartitions(k))
        if (linalg::numerical_rank(reshape_across(f.amps, f.dims, cut.side()), rank_tol) == 1) return cut.side();
    return std::nullopt;
}

inline std::pair<Factor, Factor> split_factor(const Factor& f, const std::vector<int>& side) {
    const auto rest = complement_of(side, static_cast<int>(f.parties.size()));
    const Matrix m = reshape_across(f.amps, f.dims, side);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Factor a, b;
    a.amps = svd.matrixU().col(0) * svd.singularValues()(0);
    b.amps = svd.matrixV().col(0).conjugate();
    for (int i : side) {
        a.parties.push_back(f.parties[i]);
        a.dims.push_back(f.dims[i]);
    }
    for (int i : rest) {
        b.parties.push_back(f.parties[i]);
        b.dims.push_back(f.dims[i]);
    }
    return {std::move(a), std::move(b)};
}

inline void split_recursively(const Factor& f, double rank_tol, std::vector<Factor>& leaves) {
    if (auto side = find_factorizing_side(f, rank_tol)) {
        auto [a, b] = split_factor(f, *side);
        split_recursively(a, rank_tol, leaves);
        split_recursively(b, rank_tol, leaves);
    } else {
        leaves.push_back(f);
    }
}

}  // namespace detail

/// Finest partition into blocks across which ψ fully factorizes, each block's
/// factor having no internal factorizing cut.
///
/// Computed by recursive splitting, then re-verified: ψ factorizes across every
/// block, no block factor has an internal product cut, and the blocks coincide
/// with the atoms generated by all factorizing cuts (which makes the result
/// unique). A verification failure throws Error.
inline Partition complete_partition(const PureState& psi, double rank_tol = Tolerances{}.rank) {
    const int n = static_cast<int>(psi.parties());
    if (n > kMaxEnumeratedParties) throw PreconditionError("complete partition supports at most 12 parties");
    detail::Factor root{psi.amplitudes() / psi.amplitudes().norm(), {}, psi.structure().dims()};
    for (int i = 0; i < n; ++i) root.parties.push_back(i);
    std::vector<detail::Factor> leaves;
    detail::split_recursively(root, rank_tol, leaves);

    std::vector<Block> blocks;
    for (const auto& leaf : leaves) blocks.push_back(leaf.parties);
    Partition result(std::move(blocks), n);

    // (1) ψ is a product across each block; (2) block factors are genuinely entangled.
    for (const auto& b : result.blocks()) {
        if (static_cast<int>(b.size()) == n) continue;
        if (schmidt_rank(psi, Bipartition(b, n), rank_tol) != 1)
            throw Error("complete partition verification failed: block does not factor out");
    }
    for (const auto& leaf : leaves)
        if (detail::find_factorizing_side(leaf, rank_tol))
            throw Error("complete partition verification failed: block factor still splits");

    // (3) uniqueness: blocks are the atoms of the Boolean algebra of factorizing cuts.
    if (n >= 2) {
        std::map<std::vector<bool>, Block> atoms;
        const auto cuts = factorizing_cuts(psi, rank_tol);
        for (int i = 0; i < n; ++i) {
            std::vector<bool> signature;
            for (const auto& c : cuts) signature.push_back(c.contains(i));
            atoms[signature].push_back(i);
        }
        std::vector<Block> atom_blocks;
        for (auto& [sig, b] : atoms) atom_blocks.push_back(std::move(b));
        if (!(Partition(std::move(atom_blocks), n) == result))
            throw Error("complete partition verification failed: result is not the unique finest factorization");
    }
    return result;
}

inline bool is_gme_pure(const PureState& psi, double rank_tol = Tolerances{}.rank) {
    return complete_partition(psi, rank_tol).size() == 1;
}

/// Complete partition of ψ ⊗_K φ from the complete partitions p of ψ (n
/// parties) and q of φ (m ≤ n parties; φ's party i is merged with ψ's party i).
///
/// ψ ⊗_K φ factorizes across a set U of merged parties exactly when both
/// factors do, i.e. when U is a union of p-blocks and of q-blocks. The result
/// is therefore the join of p and q, with q padded by singletons for the
/// unmerged parties m..n-1. It reduces to "shared blocks plus one merged
/// remainder" whenever the non-shared blocks are connected, and to a single
/// block (genuine entanglement) when that remainder is everything.
inline Partition predict_kron_partition(const Partition& p, const Partition& q) {
    if (q.ground_size() > p.ground_size())
        throw PreconditionError("second partition has a larger ground set than the first");
    return partition_join(p, pad_partition(q, p.ground_size()));
}

/// Shared blocks plus one block of every remaining index; the literal
/// intersection rule. Agrees with predict_kron_partition only when the
/// non-shared blocks form one connected group.
inline Partition intersection_rule_partition(const Partition& p, const Partition& q) {
    const Partition qp = pad_partition(q, p.ground_size());
    auto shared = partition_intersection(p, qp);
    Block rest;
    for (int i = 0; i < p.ground_size(); ++i) {
        bool in_shared = false;
        for (const auto& b : shared) in_shared |= std::binary_search(b.begin(), b.end(), i);
        if (!in_shared) rest.push_back(i);
    }
    if (!rest.empty()) shared.push_back(rest);
    return Partition(std::move(shared), p.ground_size());
}

}  // namespace gme
