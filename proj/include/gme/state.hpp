#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "gme/core.hpp"
#include "gme/linalg.hpp"

namespace gme {

struct Party {
    std::string label;
    int dim = 1;

    friend bool operator==(const Party&, const Party&) = default;
};

/// Ordered list of labelled subsystems. Party i's digit is the i-th most
/// significant digit of a row-major linear index.
class PartyStructure {
public:
    explicit PartyStructure(std::vector<Party> parties) : parties_(std::move(parties)) {
        if (parties_.empty()) throw PreconditionError("a state needs at least one party");
        std::set<std::string> seen;
        Index total = 1;
        for (const auto& p : parties_) {
            if (p.dim < 1) throw PreconditionError("party '" + p.label + "' has dimension < 1");
            if (!seen.insert(p.label).second)
                throw PreconditionError("duplicate party label '" + p.label + "'");
            total *= p.dim;
            if (total > kMaxTotalDim)
                throw DimensionError("total dimension exceeds the cap of " + std::to_string(kMaxTotalDim));
        }
        total_ = total;
    }

    /// n parties of equal dimension labelled A, B, C, ... (P1, P2, ... beyond 26).
    static PartyStructure uniform(int n, int dim) {
        std::vector<Party> ps;
        for (int i = 0; i < n; ++i) {
            std::string label = n <= 26 ? std::string(1, static_cast<char>('A' + i)) : "P" + std::to_string(i + 1);
            ps.push_back({label, dim});
        }
        return PartyStructure(std::move(ps));
    }

    static PartyStructure from_dims(const std::vector<int>& dims) {
        std::vector<Party> ps;
        for (std::size_t i = 0; i < dims.size(); ++i) {
            std::string label = dims.size() <= 26 ? std::string(1, static_cast<char>('A' + i)) : "P" + std::to_string(i + 1);
            ps.push_back({label, dims[i]});
        }
        return PartyStructure(std::move(ps));
    }

    std::size_t size() const noexcept { return parties_.size(); }
    const Party& operator[](std::size_t i) const { return parties_.at(i); }
    int dim(std::size_t i) const { return parties_.at(i).dim; }
    const std::string& label(std::size_t i) const { return parties_.at(i).label; }
    Index total_dim() const noexcept { return total_; }
    const std::vector<Party>& parties() const noexcept { return parties_; }

    std::vector<int> dims() const {
        std::vector<int> d;
        d.reserve(parties_.size());
        for (const auto& p : parties_) d.push_back(p.dim);
        return d;
    }

    Index dim_of(const std::vector<int>& subset) const {
        Index d = 1;
        for (int i : subset) d *= dim(static_cast<std::size_t>(i));
        return d;
    }

    std::optional<std::size_t> find(std::string_view label) const {
        for (std::size_t i = 0; i < parties_.size(); ++i)
            if (parties_[i].label == label) return i;
        return std::nullopt;
    }

    PartyStructure select(const std::vector<int>& order) const {
        std::vector<Party> ps;
        for (int i : order) ps.push_back(parties_.at(static_cast<std::size_t>(i)));
        return PartyStructure(std::move(ps));
    }

    PartyStructure with_dim(std::size_t i, int d) const {
        auto ps = parties_;
        ps.at(i).dim = d;
        return PartyStructure(std::move(ps));
    }

    friend bool operator==(const PartyStructure& a, const PartyStructure& b) { return a.parties_ == b.parties_; }

private:
    std::vector<Party> parties_;
    Index total_ = 1;
};

/// A cut S | S̄ of n parties. S is stored sorted and 0-based.
class Bipartition {
public:
    Bipartition(std::vector<int> side, int n) : side_(std::move(side)), n_(n) {
        std::sort(side_.begin(), side_.end());
        side_.erase(std::unique(side_.begin(), side_.end()), side_.end());
        if (side_.empty() || static_cast<int>(side_.size()) >= n_)
            throw PreconditionError("a bipartition side must be a nonempty proper subset");
        if (side_.front() < 0 || side_.back() >= n_) throw PreconditionError("bipartition index out of range");
    }

    const std::vector<int>& side() const noexcept { return side_; }
    int parties() const noexcept { return n_; }

    std::vector<int> complement() const {
        std::vector<int> c;
        for (int i = 0; i < n_; ++i)
            if (!contains(i)) c.push_back(i);
        return c;
    }

    bool contains(int i) const { return std::binary_search(side_.begin(), side_.end(), i); }

    /// The cut with party 0 on the returned side (each cut has one such form).
    Bipartition canonical() const { return contains(0) ? *this : Bipartition(complement(), n_); }

    /// One-based rendering, e.g. "{1}|{2,3}".
    std::string to_string() const {
        auto render = [](const std::vector<int>& s) {
            std::string out = "{";
            for (std::size_t k = 0; k < s.size(); ++k) out += (k ? "," : "") + std::to_string(s[k] + 1);
            return out + "}";
        };
        return render(side_) + "|" + render(complement());
    }

    friend bool operator==(const Bipartition& a, const Bipartition& b) {
        return a.n_ == b.n_ && a.side_ == b.side_;
    }

private:
    std::vector<int> side_;
    int n_;
};

namespace detail {

/// Linear-index contributions of every multi-index over `subset`, enumerated
/// row-major in subset order. With subset = a permutation this is exactly the
/// gather map of the permuted tensor.
inline std::vector<Index> embedding(const std::vector<int>& dims, const std::vector<int>& subset) {
    std::vector<Index> stride(dims.size(), 1);
    for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) stride[k] = stride[k + 1] * dims[k + 1];
    std::vector<Index> out{0};
    for (int party : subset) {
        std::vector<Index> next;
        next.reserve(out.size() * static_cast<std::size_t>(dims[party]));
        for (Index base : out)
            for (int digit = 0; digit < dims[party]; ++digit) next.push_back(base + digit * stride[party]);
        out = std::move(next);
    }
    return out;
}

inline std::vector<int> complement_of(const std::vector<int>& subset, int n) {
    std::vector<int> rest;
    for (int i = 0; i < n; ++i)
        if (std::find(subset.begin(), subset.end(), i) == subset.end()) rest.push_back(i);
    return rest;
}

inline void check_permutation(const std::vector<int>& perm, std::size_t n) {
    if (perm.size() != n) throw PreconditionError("permutation has wrong length");
    std::vector<bool> hit(n, false);
    for (int p : perm) {
        if (p < 0 || static_cast<std::size_t>(p) >= n || hit[p]) throw PreconditionError("invalid party permutation");
        hit[p] = true;
    }
}

inline Vector gather(const Vector& v, const std::vector<Index>& map) {
    Vector out(static_cast<Index>(map.size()));
    for (std::size_t i = 0; i < map.size(); ++i) out(static_cast<Index>(i)) = v(map[i]);
    return out;
}

inline Matrix gather(const Matrix& m, const std::vector<Index>& map) {
    const Index n = static_cast<Index>(map.size());
    Matrix out(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) out(i, j) = m(map[i], map[j]);
    return out;
}

/// Merges consecutive runs of parties; group sizes must sum to the party count.
/// Merged labels concatenate, merged dims multiply (first party most significant).
inline PartyStructure merge_runs(const PartyStructure& s, const std::vector<int>& groups) {
    std::vector<Party> out;
    std::size_t at = 0;
    for (int g : groups) {
        Party merged{"", 1};
        for (int k = 0; k < g; ++k, ++at) {
            merged.label += s.label(at);
            merged.dim *= s.dim(at);
        }
        out.push_back(std::move(merged));
    }
    if (at != s.size()) throw Error("internal: merge groups do not cover the structure");
    return PartyStructure(std::move(out));
}

inline std::vector<Party> concat(const PartyStructure& a, const PartyStructure& b) {
    auto ps = a.parties();
    ps.insert(ps.end(), b.parties().begin(), b.parties().end());
    return ps;
}

/// Structure with a's parties followed by b's, without the label-distinctness
/// requirement (used only as an intermediate before merging).
inline PartyStructure concat_tagged(const PartyStructure& a, const PartyStructure& b) {
    std::vector<Party> ps;
    for (const auto& p : a.parties()) ps.push_back({"\x01" + p.label, p.dim});
    for (const auto& p : b.parties()) ps.push_back({"\x02" + p.label, p.dim});
    return PartyStructure(std::move(ps));
}

inline std::string untag(std::string label) {
    label.erase(std::remove_if(label.begin(), label.end(), [](char c) { return c == '\x01' || c == '\x02'; }),
                label.end());
    return label;
}

/// Applies op (d_out × d_in) to party k of the row index of m.
inline Matrix apply_left(const Matrix& m, const std::vector<int>& dims, int k, const Matrix& op) {
    if (op.cols() != dims[k]) throw PreconditionError("local operator has wrong input dimension");
    std::vector<int> out_dims = dims;
    out_dims[k] = static_cast<int>(op.rows());
    const std::vector<int> rest = complement_of({k}, static_cast<int>(dims.size()));
    const auto in_k = embedding(dims, {k});
    const auto in_r = embedding(dims, rest);
    const auto out_k = embedding(out_dims, {k});
    const auto out_r = embedding(out_dims, rest);
    Index out_rows = static_cast<Index>(out_k.size() * out_r.size());
    Matrix out = Matrix::Zero(out_rows, m.cols());
    for (std::size_t y = 0; y < in_r.size(); ++y)
        for (Index x = 0; x < op.rows(); ++x)
            for (Index xp = 0; xp < op.cols(); ++xp) {
                const Complex c = op(x, xp);
                if (c == Complex(0.0)) continue;
                out.row(out_k[x] + out_r[y]) += c * m.row(in_k[xp] + in_r[y]);
            }
    return out;
}

}  // namespace detail

/// Unnormalized pure state; amplitudes are row-major over the party order.
class PureState {
public:
    PureState(Vector amplitudes, PartyStructure structure)
        : amps_(std::move(amplitudes)), structure_(std::move(structure)) {
        if (amps_.size() != structure_.total_dim())
            throw DimensionError("amplitude vector length does not match the party structure");
        if (amps_.norm() == 0.0) throw PreconditionError("pure state vector is zero");
    }

    /// Sum of computational-basis kets given as digit strings, e.g.
    /// {{"000", 1}, {"113", 1}}; each character is one party's digit.
    static PureState from_kets(PartyStructure structure, const std::vector<std::pair<std::string, Complex>>& kets) {
        Vector v = Vector::Zero(structure.total_dim());
        for (const auto& [digits, coeff] : kets) {
            if (digits.size() != structure.size()) throw PreconditionError("ket '" + digits + "' has wrong length");
            Index idx = 0;
            for (std::size_t k = 0; k < digits.size(); ++k) {
                const int d = digits[k] - '0';
                if (d < 0 || d >= structure.dim(k)) throw PreconditionError("ket digit out of range in '" + digits + "'");
                idx = idx * structure.dim(k) + d;
            }
            v(idx) += coeff;
        }
        return PureState(std::move(v), std::move(structure));
    }

    const Vector& amplitudes() const noexcept { return amps_; }
    const PartyStructure& structure() const noexcept { return structure_; }
    std::size_t parties() const noexcept { return structure_.size(); }
    Index dim() const noexcept { return structure_.total_dim(); }

    PureState normalized() const { return PureState(amps_ / amps_.norm(), structure_); }

private:
    Vector amps_;
    PartyStructure structure_;
};

/// Hermitian positive-semidefinite operator with unconstrained trace.
class DensityOperator {
public:
    /// Validates Hermiticity and positivity, then stores the Hermitian part.
    DensityOperator(Matrix m, PartyStructure structure, const Tolerances& tol = {})
        : m_(std::move(m)), structure_(std::move(structure)) {
        check_shape();
        if (!linalg::is_hermitian(m_, tol.herm)) throw PreconditionError("matrix is not Hermitian");
        m_ = linalg::hermitian_part(m_);
        const RealVector ev = linalg::eigenvalues(m_);
        const double top = ev(ev.size() - 1);
        if (top <= 0.0) throw PreconditionError("operator has no positive eigenvalue");
        if (ev(0) < -tol.psd * top) throw PreconditionError("matrix is not positive semidefinite");
    }

    /// Skips the spectral check; for results of operations that preserve
    /// positivity by construction.
    static DensityOperator trusted(Matrix m, PartyStructure structure) {
        return DensityOperator(std::move(m), std::move(structure), Trusted{});
    }

    static DensityOperator projector(const PureState& psi) {
        const Vector& v = psi.amplitudes();
        return trusted(v * v.adjoint(), psi.structure());
    }

    static DensityOperator maximally_mixed(PartyStructure structure) {
        const Index d = structure.total_dim();
        return trusted(Matrix::Identity(d, d), std::move(structure));
    }

    const Matrix& matrix() const noexcept { return m_; }
    const PartyStructure& structure() const noexcept { return structure_; }
    std::size_t parties() const noexcept { return structure_.size(); }
    Index dim() const noexcept { return structure_.total_dim(); }
    double trace() const { return m_.trace().real(); }

    DensityOperator normalized() const { return trusted(m_ / trace(), structure_); }

private:
    struct Trusted {};
    DensityOperator(Matrix m, PartyStructure structure, Trusted)
        : m_(std::move(m)), structure_(std::move(structure)) {
        check_shape();
        m_ = linalg::hermitian_part(m_);
    }

    void check_shape() const {
        if (m_.rows() != m_.cols() || m_.rows() != structure_.total_dim())
            throw DimensionError("matrix side does not match the party structure");
    }

    Matrix m_;
    PartyStructure structure_;
};

// ---------------------------------------------------------------------------
// Products
//
// Merged parties keep the first operand's digit most significant: a merged
// (A_i B_i) index is a·d_B + b. Example, two qubits A and B merged: |a⟩|b⟩ is
// |2a + b⟩, so |1⟩_A|0⟩_B ↦ |2⟩.

namespace detail {

inline std::vector<int> kron_order(std::size_t n, std::size_t m) {
    std::vector<int> perm;
    for (std::size_t i = 0; i < m; ++i) {
        perm.push_back(static_cast<int>(i));
        perm.push_back(static_cast<int>(n + i));
    }
    for (std::size_t i = m; i < n; ++i) perm.push_back(static_cast<int>(i));
    return perm;
}

struct ProductLayout {
    std::vector<int> perm;    // order of the n+m tensor parties in the result
    std::vector<int> groups;  // consecutive merges applied after reordering
};

inline ProductLayout kron_layout(std::size_t n, std::size_t m) {
    if (m > n) throw PreconditionError("Kronecker product needs the first operand to have at least as many parties");
    ProductLayout l{kron_order(n, m), {}};
    l.groups.assign(m, 2);
    l.groups.insert(l.groups.end(), n - m, 1);
    return l;
}

inline ProductLayout kc_layout(std::size_t n, std::size_t m, const std::vector<int>& keep_a,
                               const std::vector<int>& keep_b) {
    auto check_keep = [](const std::vector<int>& keep, std::size_t parties) {
        std::set<int> s(keep.begin(), keep.end());
        if (s.size() != keep.size()) throw PreconditionError("kept party listed twice");
        for (int k : keep)
            if (k < 0 || static_cast<std::size_t>(k) >= parties) throw PreconditionError("kept party out of range");
    };
    check_keep(keep_a, n);
    check_keep(keep_b, m);
    const auto c_a = complement_of(keep_a, static_cast<int>(n));
    const auto c_b = complement_of(keep_b, static_cast<int>(m));
    if (c_a.size() != c_b.size()) throw PreconditionError("operands have different numbers of shared C-parties");
    ProductLayout l;
    for (int k : keep_a) l.perm.push_back(k);
    for (int k : keep_b) l.perm.push_back(static_cast<int>(n) + k);
    l.groups.assign(keep_a.size() + keep_b.size(), 1);
    for (std::size_t j = 0; j < c_a.size(); ++j) {
        l.perm.push_back(c_a[j]);
        l.perm.push_back(static_cast<int>(n) + c_b[j]);
        l.groups.push_back(2);
    }
    return l;
}

inline PartyStructure layout_structure(const PartyStructure& a, const PartyStructure& b, const ProductLayout& l) {
    const PartyStructure tagged = concat_tagged(a, b);
    const PartyStructure merged = merge_runs(tagged.select(l.perm), l.groups);
    std::vector<Party> ps;
    for (const auto& p : merged.parties()) ps.push_back({untag(p.label), p.dim});
    return PartyStructure(std::move(ps));
}

inline std::vector<Index> layout_map(const PartyStructure& a, const PartyStructure& b, const ProductLayout& l) {
    auto dims = a.dims();
    const auto bd = b.dims();
    dims.insert(dims.end(), bd.begin(), bd.end());
    return embedding(dims, l.perm);
}

}  // namespace detail

inline DensityOperator tensor_product(const DensityOperator& a, const DensityOperator& b) {
    for (const auto& p : b.structure().parties())
        if (a.structure().find(p.label))
            throw PreconditionError("label '" + p.label + "' appears in both operands; relabeling required");
    Matrix m = Eigen::kroneckerProduct(a.matrix(), b.matrix()).eval();
    return DensityOperator::trusted(std::move(m), PartyStructure(detail::concat(a.structure(), b.structure())));
}

inline PureState tensor_product(const PureState& a, const PureState& b) {
    for (const auto& p : b.structure().parties())
        if (a.structure().find(p.label))
            throw PreconditionError("label '" + p.label + "' appears in both operands; relabeling required");
    Vector v = Eigen::kroneckerProduct(a.amplitudes(), b.amplitudes()).eval();
    return PureState(std::move(v), PartyStructure(detail::concat(a.structure(), b.structure())));
}

namespace detail {

inline DensityOperator product_with_layout(const DensityOperator& a, const DensityOperator& b, const ProductLayout& l) {
    const PartyStructure s = layout_structure(a.structure(), b.structure(), l);
    const Matrix raw = Eigen::kroneckerProduct(a.matrix(), b.matrix()).eval();
    return DensityOperator::trusted(gather(raw, layout_map(a.structure(), b.structure(), l)), s);
}

inline PureState product_with_layout(const PureState& a, const PureState& b, const ProductLayout& l) {
    const PartyStructure s = layout_structure(a.structure(), b.structure(), l);
    const Vector raw = Eigen::kroneckerProduct(a.amplitudes(), b.amplitudes()).eval();
    return PureState(gather(raw, layout_map(a.structure(), b.structure(), l)), s);
}

}  // namespace detail

/// Party-wise merge: result party i < m is (A_i B_i), parties m..n-1 are a's.
/// Requires a.parties() >= b.parties(); permute beforehand otherwise.
inline DensityOperator kronecker_product(const DensityOperator& a, const DensityOperator& b) {
    return detail::product_with_layout(a, b, detail::kron_layout(a.parties(), b.parties()));
}

inline PureState kronecker_product(const PureState& a, const PureState& b) {
    return detail::product_with_layout(a, b, detail::kron_layout(a.parties(), b.parties()));
}

/// Keeps the listed parties of each operand separate and merges the remaining
/// (shared) parties position by position. Result order: a's kept parties,
/// b's kept parties, then C_1..C_n with C_j = (C_{1,j} C_{2,j}).
inline DensityOperator kc_product(const DensityOperator& a, const DensityOperator& b, const std::vector<int>& keep_a,
                                  const std::vector<int>& keep_b) {
    return detail::product_with_layout(a, b, detail::kc_layout(a.parties(), b.parties(), keep_a, keep_b));
}

inline DensityOperator kc_product(const DensityOperator& a, const DensityOperator& b, int keep_a = 0, int keep_b = 0) {
    return kc_product(a, b, std::vector<int>{keep_a}, std::vector<int>{keep_b});
}

inline PureState kc_product(const PureState& a, const PureState& b, const std::vector<int>& keep_a,
                            const std::vector<int>& keep_b) {
    return detail::product_with_layout(a, b, detail::kc_layout(a.parties(), b.parties(), keep_a, keep_b));
}

inline PureState kc_product(const PureState& a, const PureState& b, int keep_a = 0, int keep_b = 0) {
    return kc_product(a, b, std::vector<int>{keep_a}, std::vector<int>{keep_b});
}

// ---------------------------------------------------------------------------
// Reshaping primitives

inline DensityOperator partial_trace(const DensityOperator& rho, std::vector<int> keep) {
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    if (keep.empty()) throw PreconditionError("partial trace must keep at least one party");
    const int n = static_cast<int>(rho.parties());
    for (int k : keep)
        if (k < 0 || k >= n) throw PreconditionError("kept party out of range");
    const auto dims = rho.structure().dims();
    const auto ek = detail::embedding(dims, keep);
    const auto et = detail::embedding(dims, detail::complement_of(keep, n));
    const Index dk = static_cast<Index>(ek.size());
    Matrix out = Matrix::Zero(dk, dk);
    const Matrix& m = rho.matrix();
    for (Index j = 0; j < dk; ++j)
        for (Index i = 0; i < dk; ++i) {
            Complex s = 0.0;
            for (Index t : et) s += m(ek[i] + t, ek[j] + t);
            out(i, j) = s;
        }
    return DensityOperator::trusted(std::move(out), rho.structure().select(keep));
}

/// Transposes the digits of the parties in `side`.
inline Matrix partial_transpose(const Matrix& m, const std::vector<int>& dims, const std::vector<int>& side) {
    const int n = static_cast<int>(dims.size());
    const auto es = detail::embedding(dims, side);
    const auto er = detail::embedding(dims, detail::complement_of(side, n));
    Matrix out(m.rows(), m.cols());
    for (Index y2 : er)
        for (Index x2 : es)
            for (Index y1 : er)
                for (Index x1 : es) out(x1 + y1, x2 + y2) = m(x2 + y1, x1 + y2);
    return out;
}

inline Matrix partial_transpose(const DensityOperator& rho, const Bipartition& s) {
    return partial_transpose(rho.matrix(), rho.structure().dims(), s.side());
}

/// Result party k is input party perm[k].
inline DensityOperator permute_parties(const DensityOperator& rho, const std::vector<int>& perm) {
    detail::check_permutation(perm, rho.parties());
    return DensityOperator::trusted(detail::gather(rho.matrix(), detail::embedding(rho.structure().dims(), perm)),
                                    rho.structure().select(perm));
}

inline PureState permute_parties(const PureState& psi, const std::vector<int>& perm) {
    detail::check_permutation(perm, psi.parties());
    return PureState(detail::gather(psi.amplitudes(), detail::embedding(psi.structure().dims(), perm)),
                     psi.structure().select(perm));
}

/// ψ as a dim(S) × dim(S̄) matrix.
inline Matrix reshape_across(const Vector& v, const std::vector<int>& dims, const std::vector<int>& side) {
    const auto es = detail::embedding(dims, side);
    const auto er = detail::embedding(dims, detail::complement_of(side, static_cast<int>(dims.size())));
    Matrix out(static_cast<Index>(es.size()), static_cast<Index>(er.size()));
    for (std::size_t y = 0; y < er.size(); ++y)
        for (std::size_t x = 0; x < es.size(); ++x) out(static_cast<Index>(x), static_cast<Index>(y)) = v(es[x] + er[y]);
    return out;
}

/// Same operator with new party labels (dims unchanged).
inline DensityOperator relabel(const DensityOperator& rho, const std::vector<std::string>& labels) {
    if (labels.size() != rho.parties()) throw PreconditionError("need one label per party");
    std::vector<Party> ps;
    for (std::size_t k = 0; k < labels.size(); ++k) ps.push_back({labels[k], rho.structure().dim(k)});
    return DensityOperator::trusted(rho.matrix(), PartyStructure(std::move(ps)));
}

inline PureState relabel(const PureState& psi, const std::vector<std::string>& labels) {
    if (labels.size() != psi.parties()) throw PreconditionError("need one label per party");
    std::vector<Party> ps;
    for (std::size_t k = 0; k < labels.size(); ++k) ps.push_back({labels[k], psi.structure().dim(k)});
    return PureState(psi.amplitudes(), PartyStructure(std::move(ps)));
}

/// Merges consecutive runs of parties into single parties (no data movement).
inline DensityOperator merge_parties(const DensityOperator& rho, const std::vector<int>& groups) {
    return DensityOperator::trusted(rho.matrix(), detail::merge_runs(rho.structure(), groups));
}

inline PureState merge_parties(const PureState& psi, const std::vector<int>& groups) {
    return PureState(psi.amplitudes(), detail::merge_runs(psi.structure(), groups));
}

namespace detail {

inline Matrix apply_all_left(Matrix m, std::vector<int> dims, const std::vector<Matrix>& factors) {
    for (std::size_t k = 0; k < factors.size(); ++k) {
        m = apply_left(m, dims, static_cast<int>(k), factors[k]);
        dims[k] = static_cast<int>(factors[k].rows());
    }
    return m;
}

inline PartyStructure resized(const PartyStructure& s, const std::vector<Matrix>& factors) {
    auto ps = s.parties();
    for (std::size_t k = 0; k < ps.size(); ++k) ps[k].dim = static_cast<int>(factors[k].rows());
    return PartyStructure(std::move(ps));
}

}  // namespace detail

/// (⊗_k Y_k) ρ (⊗_k Y_k)† for per-party operators. Rectangular factors change
/// the party's dimension (local projections).
inline DensityOperator apply_local(const DensityOperator& rho, const std::vector<Matrix>& factors) {
    if (factors.size() != rho.parties()) throw PreconditionError("need one local operator per party");
    const auto dims = rho.structure().dims();
    const Matrix half = detail::apply_all_left(rho.matrix(), dims, factors);
    Matrix full = detail::apply_all_left(half.adjoint().eval(), dims, factors);
    return DensityOperator::trusted(std::move(full), detail::resized(rho.structure(), factors));
}

inline PureState apply_local(const PureState& psi, const std::vector<Matrix>& factors) {
    if (factors.size() != psi.parties()) throw PreconditionError("need one local operator per party");
    const Matrix out = detail::apply_all_left(psi.amplitudes(), psi.structure().dims(), factors);
    return PureState(out.col(0), detail::resized(psi.structure(), factors));
}

}  // namespace gme
