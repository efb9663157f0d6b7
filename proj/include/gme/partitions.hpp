#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "gme/core.hpp"
#include "gme/state.hpp"

namespace gme {

using Block = std::vector<int>;

/// Set partition of {0..n-1}. Canonical form: each block sorted, blocks
/// ordered by their smallest element.
class Partition {
public:
    Partition(std::vector<Block> blocks, int n) : blocks_(std::move(blocks)), n_(n) {
        std::vector<int> seen(static_cast<std::size_t>(n_), 0);
        for (auto& b : blocks_) {
            if (b.empty()) throw PreconditionError("partition block is empty");
            std::sort(b.begin(), b.end());
            for (int i : b) {
                if (i < 0 || i >= n_) throw PreconditionError("partition index out of range");
                if (seen[static_cast<std::size_t>(i)]++) throw PreconditionError("partition blocks overlap");
            }
        }
        if (std::find(seen.begin(), seen.end(), 0) != seen.end())
            throw PreconditionError("partition blocks do not cover the index set");
        std::sort(blocks_.begin(), blocks_.end(), [](const Block& a, const Block& b) { return a.front() < b.front(); });
    }

    /// Builds from 1-based blocks, the notation used in reports and files.
    static Partition from_one_based(const std::vector<Block>& blocks) {
        std::vector<Block> zero;
        int n = 0;
        for (const auto& b : blocks) {
            Block z;
            for (int i : b) z.push_back(i - 1);
            n += static_cast<int>(b.size());
            zero.push_back(std::move(z));
        }
        return Partition(std::move(zero), n);
    }

    static Partition singletons(int n) {
        std::vector<Block> b;
        for (int i = 0; i < n; ++i) b.push_back({i});
        return Partition(std::move(b), n);
    }

    static Partition whole(int n) {
        Block all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        return Partition({all}, n);
    }

    const std::vector<Block>& blocks() const noexcept { return blocks_; }
    std::size_t size() const noexcept { return blocks_.size(); }
    int ground_size() const noexcept { return n_; }

    std::vector<Block> one_based() const {
        auto out = blocks_;
        for (auto& b : out)
            for (int& i : b) ++i;
        return out;
    }

    /// e.g. "[[1],[2,3]]".
    std::string to_string() const {
        std::string s = "[";
        for (std::size_t k = 0; k < blocks_.size(); ++k) {
            s += k ? ",[" : "[";
            for (std::size_t j = 0; j < blocks_[k].size(); ++j) s += (j ? "," : "") + std::to_string(blocks_[k][j] + 1);
            s += "]";
        }
        return s + "]";
    }

    friend bool operator==(const Partition& a, const Partition& b) { return a.n_ == b.n_ && a.blocks_ == b.blocks_; }

private:
    std::vector<Block> blocks_;
    int n_;
};

/// All 2^(n-1) - 1 cuts of n parties, each once, with party 0 on the stored side.
inline std::vector<Bipartition> enumerate_bipartitions(int n) {
    if (n < 2) throw PreconditionError("bipartitions need at least two parties");
    if (n > 30) throw PreconditionError("too many parties to enumerate cuts");
    std::vector<Bipartition> out;
    const unsigned long full = (1UL << n) - 1;
    for (unsigned long mask = 1; mask < full; mask += 2) {
        std::vector<int> side;
        for (int i = 0; i < n; ++i)
            if (mask >> i & 1UL) side.push_back(i);
        out.emplace_back(std::move(side), n);
    }
    return out;
}

inline constexpr int kMaxEnumeratedParties = 12;

/// Visits every set partition of {0..n-1} in restricted-growth-string order.
/// The visitor may return false to stop early.
inline void for_each_partition(int n, const std::function<bool(const Partition&)>& visit) {
    if (n < 1 || n > kMaxEnumeratedParties)
        throw PreconditionError("partition enumeration supports 1 <= n <= " + std::to_string(kMaxEnumeratedParties));
    std::vector<int> a(static_cast<std::size_t>(n), 0);    // block label per index
    std::vector<int> mx(static_cast<std::size_t>(n), 0);   // max label among a[0..i-1]
    auto emit = [&] {
        int blocks = *std::max_element(a.begin(), a.end()) + 1;
        std::vector<Block> b(static_cast<std::size_t>(blocks));
        for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(a[i])].push_back(i);
        return visit(Partition(std::move(b), n));
    };
    for (;;) {
        if (!emit()) return;
        // rightmost digit still below its growth bound
        int i = n - 1;
        while (i > 0 && a[i] == mx[i] + 1) --i;
        if (i == 0) return;
        ++a[i];
        for (int j = i + 1; j < n; ++j) {
            mx[j] = std::max(mx[j - 1], a[j - 1]);
            a[j] = 0;
        }
    }
}

inline std::vector<Partition> enumerate_partitions(int n) {
    std::vector<Partition> out;
    for_each_partition(n, [&](const Partition& p) {
        out.push_back(p);
        return true;
    });
    return out;
}

/// Blocks present, as identical sets, in both partitions.
inline std::vector<Block> partition_intersection(const Partition& p, const Partition& q) {
    if (p.ground_size() != q.ground_size()) throw PreconditionError("partitions have different ground sets");
    std::vector<Block> out;
    for (const auto& b : p.blocks())
        if (std::find(q.blocks().begin(), q.blocks().end(), b) != q.blocks().end()) out.push_back(b);
    return out;
}

/// Finest partition coarser than both: connected components of overlapping blocks.
inline Partition partition_join(const Partition& p, const Partition& q) {
    if (p.ground_size() != q.ground_size()) throw PreconditionError("partitions have different ground sets");
    const int n = p.ground_size();
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> root = [&](int i) { return parent[i] == i ? i : parent[i] = root(parent[i]); };
    for (const auto* part : {&p, &q})
        for (const auto& b : part->blocks())
            for (std::size_t k = 1; k < b.size(); ++k) parent[root(b[k])] = root(b[0]);
    std::vector<Block> groups(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) groups[static_cast<std::size_t>(root(i))].push_back(i);
    std::vector<Block> blocks;
    for (auto& g : groups)
        if (!g.empty()) blocks.push_back(std::move(g));
    return Partition(std::move(blocks), n);
}

/// Extends q (over {0..m-1}) to {0..n-1} with singleton blocks {m},...,{n-1}.
inline Partition pad_partition(const Partition& q, int n) {
    if (q.ground_size() > n) throw PreconditionError("cannot pad a partition to a smaller ground set");
    auto blocks = q.blocks();
    for (int i = q.ground_size(); i < n; ++i) blocks.push_back({i});
    return Partition(std::move(blocks), n);
}

}  // namespace gme
