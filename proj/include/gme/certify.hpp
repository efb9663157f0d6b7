#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gme/core.hpp"
#include "gme/linalg.hpp"
#include "gme/partitions.hpp"
#include "gme/pure_structure.hpp"
#include "gme/sdp.hpp"
#include "gme/state.hpp"

namespace gme {

// ---------------------------------------------------------------------------
// PPT test

struct PptResult {
    double min_eigenvalue = 0.0;  // of the partial transpose of ρ / tr ρ
    bool is_ppt = true;
    bool boundary = false;        // |min eigenvalue| ≤ τ_psd
    Vector negative_direction;    // eigenvector of the minimum eigenvalue
};

inline PptResult ppt_check(const DensityOperator& rho, const Bipartition& s, double psd_tol = Tolerances{}.psd) {
    const Matrix pt = partial_transpose(rho.matrix() / rho.trace(), rho.structure().dims(), s.side());
    Eigen::SelfAdjointEigenSolver<Matrix> es(linalg::hermitian_part(pt));
    PptResult r;
    r.min_eigenvalue = es.eigenvalues()(0);
    r.negative_direction = es.eigenvectors().col(0);
    r.is_ppt = r.min_eigenvalue >= -psd_tol;
    r.boundary = std::abs(r.min_eigenvalue) <= psd_tol;
    return r;
}

// ---------------------------------------------------------------------------
// Product vectors in low-dimensional subspaces

struct ProductVectorSet {
    bool all = false;             // every vector of the span is a product
    std::vector<Vector> vectors;  // canonical rays, when finitely many
};

namespace detail {

/// Rank-one test of a reshaped vector: σ₂ ≤ tol · σ₁.
inline bool is_rank_one(const Matrix& m, double tol) {
    const RealVector s = linalg::singular_values(m);
    return s.size() < 2 || s(1) <= tol * s(0);
}

inline void add_ray(std::vector<Vector>& out, const Vector& v, double tol) {
    const Vector c = linalg::canonical_ray(v);
    for (const auto& e : out)
        if (linalg::same_ray(e, c, tol)) return;
    out.push_back(c);
}

inline std::vector<Complex> quadratic_roots(Complex a, Complex b, Complex c, double scale) {
    const double eps = 1e-12 * scale;
    if (std::abs(a) <= eps) {
        if (std::abs(b) <= eps) return {};
        return {-c / b};
    }
    const Complex disc = b * b - 4.0 * a * c;
    if (std::abs(disc) <= 1e-12 * std::max(std::norm(b), scale * scale)) return {-b / (2.0 * a)};
    const Complex sq = std::sqrt(disc);
    // numerically stable pairing
    const Complex qq = -0.5 * (b + (std::real(std::conj(b) * sq) >= 0.0 ? sq : -sq));
    std::vector<Complex> roots{qq / a};
    if (std::abs(qq) > 0.0) roots.push_back(c / qq);
    return roots;
}

}  // namespace detail

/// Product vectors (across rows|cols) in span{v1, v2}, where each vector is
/// reshaped into a rows × cols matrix. Solves the 2×2-minor conditions of
/// v1 + t v2 (quadratics in t) and checks t = ∞ (v2 itself).
inline ProductVectorSet product_vectors_in_span2(const Matrix& m1_in, const Matrix& m2_in,
                                                 double rank_tol = Tolerances{}.rank) {
    const Matrix m1 = m1_in / m1_in.norm();
    const Matrix m2 = m2_in / m2_in.norm();
    {
        Matrix pair(m1.size(), 2);
        pair.col(0) = m1.reshaped();
        pair.col(1) = m2.reshaped();
        if (linalg::numerical_rank(pair, rank_tol) < 2) throw PreconditionError("degenerate basis: vectors are parallel");
    }
    // Coefficients of every 2×2 minor: c0 + c1 t + c2 t².
    Complex best[3] = {0.0, 0.0, 0.0};
    double best_norm = 0.0;
    const Index R = m1.rows(), C = m1.cols();
    for (Index i = 0; i < R; ++i)
        for (Index k = i + 1; k < R; ++k)
            for (Index j = 0; j < C; ++j)
                for (Index l = j + 1; l < C; ++l) {
                    const Complex c0 = m1(i, j) * m1(k, l) - m1(i, l) * m1(k, j);
                    const Complex c2 = m2(i, j) * m2(k, l) - m2(i, l) * m2(k, j);
                    const Complex c1 = m1(i, j) * m2(k, l) + m2(i, j) * m1(k, l) - m1(i, l) * m2(k, j) -
                                       m2(i, l) * m1(k, j);
                    const double nrm = std::sqrt(std::norm(c0) + std::norm(c1) + std::norm(c2));
                    if (nrm > best_norm) {
                        best_norm = nrm;
                        best[0] = c0;
                        best[1] = c1;
                        best[2] = c2;
                    }
                }
    ProductVectorSet out;
    if (best_norm <= rank_tol) {
        out.all = true;
        return out;
    }
    const double check_tol = std::sqrt(rank_tol);
    for (const Complex t : detail::quadratic_roots(best[2], best[1], best[0], best_norm)) {
        const Matrix m = m1 + t * m2;
        if (detail::is_rank_one(m, check_tol)) detail::add_ray(out.vectors, m.reshaped(), check_tol);
    }
    if (detail::is_rank_one(m2, check_tol)) detail::add_ray(out.vectors, m2.reshaped(), check_tol);
    return out;
}

/// Product vectors in the span of two two-qubit vectors (index 2a + b).
inline ProductVectorSet product_vectors_in_plane(const Vector& v1, const Vector& v2,
                                                 double rank_tol = Tolerances{}.rank) {
    if (v1.size() != 4 || v2.size() != 4) throw PreconditionError("plane basis must be two-qubit vectors");
    const std::vector<int> dims{2, 2};
    auto out = product_vectors_in_span2(reshape_across(v1, dims, {0}), reshape_across(v2, dims, {0}), rank_tol);
    // reshaped() flattens column-major; restore row-major two-qubit order
    for (auto& v : out.vectors) {
        Matrix m = v.reshaped(2, 2);
        Vector rm(4);
        rm << m(0, 0), m(0, 1), m(1, 0), m(1, 1);
        v = linalg::canonical_ray(rm);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Range spanned by pure biseparable vectors

enum class SpanOutcome { SpannedByBiseparable, NotSpanned, Inconclusive };

inline std::string to_string(SpanOutcome o) {
    switch (o) {
        case SpanOutcome::SpannedByBiseparable: return "spanned_by_biseparable";
        case SpanOutcome::NotSpanned: return "not_spanned";
        default: return "inconclusive";
    }
}

struct SpanTestResult {
    SpanOutcome outcome = SpanOutcome::Inconclusive;
    int rank = 0;
    std::vector<Vector> biseparable_vectors;  // found in the range (full index order)
    std::string note;
};

namespace detail {

/// Re-embeds a cut-reshaped matrix (column-major flattening) as a full state vector.
inline Vector unshape(const Matrix& m, const std::vector<int>& dims, const std::vector<int>& side) {
    const auto es = embedding(dims, side);
    const auto er = embedding(dims, complement_of(side, static_cast<int>(dims.size())));
    Vector v(static_cast<Index>(es.size() * er.size()));
    for (std::size_t y = 0; y < er.size(); ++y)
        for (std::size_t x = 0; x < es.size(); ++x) v(es[x] + er[y]) = m(static_cast<Index>(x), static_cast<Index>(y));
    return v;
}

}  // namespace detail

/// Decides whether R(ρ) is spanned by vectors that factorize across some cut.
///
/// Exact for rank 1, for rank 2 over any structure (product vectors of a plane
/// across a cut solve quadratic minor conditions), and for rank-3 ranges of a
/// two-qubit system (a conic of product vectors, sampled along lines). Other
/// cases are Inconclusive.
inline SpanTestResult biseparable_span_test(const DensityOperator& rho, const Tolerances& tol = {}) {
    SpanTestResult res;
    const Matrix basis = linalg::range_basis(rho.matrix(), tol.rank);
    res.rank = static_cast<int>(basis.cols());
    const int n = static_cast<int>(rho.parties());
    const auto dims = rho.structure().dims();
    if (n < 2) {
        res.note = "single party";
        return res;
    }
    const auto cuts = enumerate_bipartitions(n);

    if (res.rank == 1) {
        const PureState psi(basis.col(0), rho.structure());
        for (const auto& c : cuts)
            if (schmidt_rank(psi, c, tol.rank) == 1) {
                res.outcome = SpanOutcome::SpannedByBiseparable;
                res.biseparable_vectors.push_back(linalg::canonical_ray(basis.col(0)));
                return res;
            }
        res.outcome = SpanOutcome::NotSpanned;
        return res;
    }

    if (res.rank == 2) {
        std::vector<Vector> found;
        const double ray_tol = std::sqrt(tol.rank);
        for (const auto& c : cuts) {
            const Matrix m1 = reshape_across(basis.col(0), dims, c.side());
            const Matrix m2 = reshape_across(basis.col(1), dims, c.side());
            const auto pv = product_vectors_in_span2(m1, m2, tol.rank);
            if (pv.all) {
                res.outcome = SpanOutcome::SpannedByBiseparable;
                res.biseparable_vectors = {linalg::canonical_ray(basis.col(0)), linalg::canonical_ray(basis.col(1))};
                res.note = "every range vector factorizes across " + c.to_string();
                return res;
            }
            for (const auto& v : pv.vectors)
                detail::add_ray(found, detail::unshape(v.reshaped(m1.rows(), m1.cols()), dims, c.side()), ray_tol);
        }
        res.biseparable_vectors = found;
        Matrix stack(rho.dim(), static_cast<Index>(found.size()));
        for (std::size_t k = 0; k < found.size(); ++k) stack.col(static_cast<Index>(k)) = found[k];
        const int r = found.empty() ? 0 : linalg::numerical_rank(stack, ray_tol);
        res.outcome = r >= 2 ? SpanOutcome::SpannedByBiseparable : SpanOutcome::NotSpanned;
        return res;
    }

    if (res.rank == 3 && n == 2 && dims[0] == 2 && dims[1] == 2) {
        // Lines v1 + s v2 + t v3 for fixed s meet the product conic in ≤ 2 points.
        std::vector<Vector> found;
        const double ray_tol = std::sqrt(tol.rank);
        const Complex samples[] = {0.0, 1.0, -1.0, Complex(0.0, 1.0), 2.0, Complex(0.5, -1.5)};
        for (const Complex s : samples) {
            const Vector a = basis.col(0) + s * basis.col(1);
            const auto pv = product_vectors_in_plane(a, basis.col(2), tol.rank);
            if (pv.all) continue;
            for (const auto& v : pv.vectors) detail::add_ray(found, v, ray_tol);
            Matrix stack(4, static_cast<Index>(found.size()));
            for (std::size_t k = 0; k < found.size(); ++k) stack.col(static_cast<Index>(k)) = found[k];
            if (!found.empty() && linalg::numerical_rank(stack, ray_tol) >= 3) {
                res.outcome = SpanOutcome::SpannedByBiseparable;
                res.biseparable_vectors = found;
                return res;
            }
        }
        res.biseparable_vectors = found;
        res.note = "sampled product vectors did not span the range";
        return res;
    }

    res.note = "no exact procedure for rank " + std::to_string(res.rank) + " on this structure";
    return res;
}

// ---------------------------------------------------------------------------
// Certificate reports

enum class Verdict { FullySeparable, Biseparable, GME, Inconclusive };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::FullySeparable: return "fully_separable";
        case Verdict::Biseparable: return "biseparable";
        case Verdict::GME: return "gme";
        default: return "inconclusive";
    }
}

/// A witness W with tr(W ρ̂) = value. For PPT-mixture witnesses p/q hold the
/// per-cut decomposition; an NPT witness is the partial transpose of a
/// projector onto a negative direction and carries its single cut.
struct WitnessEvidence {
    Matrix witness;
    double value = 0.0;
    std::vector<Bipartition> cuts;
    std::vector<Matrix> p, q;
};

struct PartitionEvidence {
    Partition partition;
};

/// A proof by a structural rule whose premises were checked.
struct StructuralEvidence {
    std::string rule;
    std::vector<std::string> premises;
};

struct FailedTests {
    std::vector<std::string> tests;
};

using Evidence = std::variant<std::monostate, WitnessEvidence, PartitionEvidence, StructuralEvidence, FailedTests>;

struct CertificateReport {
    Verdict verdict = Verdict::Inconclusive;
    std::string method;
    Evidence evidence;
    std::vector<std::string> checks;  // log of the tests that ran, in order
    Tolerances tolerances;
    int sdp_solves = 0;
    std::optional<SdpSolution> sdp;
};

/// The PPT-mixture program stops at the first witness below -τ_sdp by
/// default: that witness is the certificate, and optimality adds nothing.
struct CertifyOptions {
    Tolerances tol;
    SdpOptions sdp = [] {
        SdpOptions o;
        o.stop_when_certified = true;
        return o;
    }();
};

namespace detail {

inline CertificateReport certify_pure(const PureState& psi, const CertifyOptions& opt, CertificateReport rep) {
    const Partition cp = complete_partition(psi, opt.tol.rank);
    const int n = static_cast<int>(psi.parties());
    rep.checks.push_back("complete partition " + cp.to_string());
    rep.evidence = PartitionEvidence{cp};
    rep.method = "complete_partition";
    if (cp.size() == 1) rep.verdict = Verdict::GME;
    else if (static_cast<int>(cp.size()) == n) rep.verdict = Verdict::FullySeparable;
    else rep.verdict = Verdict::Biseparable;
    return rep;
}

}  // namespace detail

/// Classifies ρ, always attaching evidence.
///
/// Routes: rank one → complete partition; two parties → PPT test (exact for
/// 2⊗2 and 2⊗3), then the range test; three or more parties → range test,
/// then the PPT-mixture program. Only sound verdicts are returned; anything
/// unresolved is Inconclusive.
inline CertificateReport certify(const DensityOperator& rho, const CertifyOptions& opt = {}) {
    CertificateReport rep;
    rep.tolerances = opt.tol;
    const int n = static_cast<int>(rho.parties());
    if (n == 1) {
        rep.verdict = Verdict::FullySeparable;
        rep.method = "single_party";
        rep.evidence = StructuralEvidence{"a single party has no cut", {}};
        return rep;
    }

    const Matrix basis = linalg::range_basis(rho.matrix(), opt.tol.rank);
    if (basis.cols() == 1) {
        const Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
        const double top = es.eigenvalues()(es.eigenvalues().size() - 1);
        rep.checks.push_back("rank one: pure-state route");
        return detail::certify_pure(PureState(basis.col(0) * std::sqrt(top), rho.structure()), opt, rep);
    }

    if (n == 2) {
        const Bipartition cut({0}, 2);
        const PptResult ppt = ppt_check(rho, cut, opt.tol.psd);
        rep.checks.push_back("ppt min eigenvalue " + std::to_string(ppt.min_eigenvalue));
        if (!ppt.is_ppt) {
            const Vector& v = ppt.negative_direction;
            WitnessEvidence w;
            w.witness = partial_transpose((v * v.adjoint()).eval(), rho.structure().dims(), cut.side());
            w.value = (w.witness * rho.matrix()).trace().real() / rho.trace();
            w.cuts = {cut};
            rep.verdict = Verdict::GME;
            rep.method = "npt";
            rep.evidence = std::move(w);
            return rep;
        }
        if (rho.dim() <= 6) {
            rep.verdict = Verdict::FullySeparable;
            rep.method = "ppt_low_dimension";
            rep.evidence = StructuralEvidence{"PPT states of 2x2 and 2x3 systems are separable",
                                              {"ppt across " + cut.to_string(), "total dimension <= 6"}};
            return rep;
        }
        const SpanTestResult span = biseparable_span_test(rho, opt.tol);
        rep.checks.push_back("range test: " + to_string(span.outcome));
        if (span.outcome == SpanOutcome::NotSpanned) {
            rep.verdict = Verdict::GME;
            rep.method = "range_not_spanned";
            rep.evidence = StructuralEvidence{"a state whose range is not spanned by product vectors is entangled",
                                              {"rank " + std::to_string(span.rank), "product vectors in range span < rank"}};
            return rep;
        }
        rep.evidence = FailedTests{{"ppt test passed (not decisive above dimension 6)", "range test " + to_string(span.outcome)}};
        rep.method = "none_decisive";
        return rep;
    }

    const SpanTestResult span = biseparable_span_test(rho, opt.tol);
    rep.checks.push_back("range test: " + to_string(span.outcome) + (span.note.empty() ? "" : " (" + span.note + ")"));
    if (span.outcome == SpanOutcome::NotSpanned) {
        rep.verdict = Verdict::GME;
        rep.method = "range_not_spanned";
        rep.evidence = StructuralEvidence{
            "a state whose range is not spanned by pure biseparable vectors is genuinely entangled",
            {"rank " + std::to_string(span.rank),
             std::to_string(span.biseparable_vectors.size()) + " biseparable rays found, spanning less than the range"}};
        return rep;
    }

    if (rho.dim() > 64) {
        rep.evidence = FailedTests{{"range test " + to_string(span.outcome), "PPT-mixture program skipped: dimension > 64"}};
        rep.method = "none_decisive";
        return rep;
    }

    SdpOptions sopt = opt.sdp;
    sopt.tol = opt.tol.sdp;
    SdpSolution sol = gme_sdp(rho, sopt);
    ++rep.sdp_solves;
    rep.checks.push_back("ppt-mixture program: objective " + std::to_string(sol.objective) + ", status " +
                         to_string(sol.status) + ", iterations " + std::to_string(sol.iterations));
    if (sol.certifies_gme(opt.tol.sdp)) {
        WitnessEvidence w{sol.witness, sol.objective, sol.cuts, sol.p, sol.q};
        rep.verdict = Verdict::GME;
        rep.method = "ppt_mixture_witness";
        rep.evidence = std::move(w);
    } else {
        rep.method = "ppt_mixture_witness";
        rep.evidence = FailedTests{{"range test " + to_string(span.outcome),
                                    sol.status == SdpStatus::Converged ? "state is a PPT mixture (no witness exists)"
                                                                       : "PPT-mixture program did not converge"}};
    }
    rep.sdp = std::move(sol);
    return rep;
}

/// Re-checks a report's evidence against ρ without trusting the certifier.
/// Witnesses are re-verified by direct arithmetic, partitions and
/// structural rules by recomputing their premises. Returns false on any
/// mismatch.
inline bool revalidate(const CertificateReport& rep, const DensityOperator& rho, const CertifyOptions& opt = {}) {
    if (rep.verdict == Verdict::Inconclusive) return std::holds_alternative<FailedTests>(rep.evidence);
    if (const auto* w = std::get_if<WitnessEvidence>(&rep.evidence)) {
        if (rep.verdict != Verdict::GME) return false;
        const double value = (w->witness * rho.matrix()).trace().real() / rho.trace();
        if (!(value < -opt.tol.sdp) || std::abs(value - w->value) > 1e-8) return false;
        if (w->p.empty()) {
            // NPT witness: W^{T_s} must be PSD, so tr(Wσ) = tr(W^{T_s} σ^{T_s}) >= 0 on PPT states.
            if (w->cuts.size() != 1) return false;
            const Matrix back = partial_transpose(w->witness, rho.structure().dims(), w->cuts[0].side());
            return linalg::min_eigenvalue(linalg::hermitian_part(back)) >= -opt.tol.psd * linalg::max_abs_entry(back);
        }
        SdpSolution s;
        s.cuts = w->cuts;
        s.witness = w->witness;
        s.p = w->p;
        s.q = w->q;
        if (s.cuts.size() != enumerate_bipartitions(static_cast<int>(rho.parties())).size()) return false;
        try {
            return validate_witness(s, rho, opt.tol.sdp) < -opt.tol.sdp;
        } catch (const Error&) {
            return false;
        }
    }
    if (const auto* pe = std::get_if<PartitionEvidence>(&rep.evidence)) {
        const Matrix basis = linalg::range_basis(rho.matrix(), opt.tol.rank);
        if (basis.cols() != 1) return false;
        const Partition cp = complete_partition(PureState(basis.col(0), rho.structure()), opt.tol.rank);
        if (!(cp == pe->partition)) return false;
        const int n = static_cast<int>(rho.parties());
        const Verdict expect = cp.size() == 1                         ? Verdict::GME
                               : static_cast<int>(cp.size()) == n ? Verdict::FullySeparable
                                                                    : Verdict::Biseparable;
        return expect == rep.verdict;
    }
    if (std::holds_alternative<StructuralEvidence>(rep.evidence)) {
        if (rep.method == "range_not_spanned")
            return rep.verdict == Verdict::GME && biseparable_span_test(rho, opt.tol).outcome == SpanOutcome::NotSpanned;
        if (rep.method == "ppt_low_dimension")
            return rep.verdict == Verdict::FullySeparable && rho.parties() == 2 && rho.dim() <= 6 &&
                   ppt_check(rho, Bipartition({0}, 2), opt.tol.psd).is_ppt;
        if (rep.method == "single_party") return rho.parties() == 1 && rep.verdict == Verdict::FullySeparable;
        // Rules about products (Kronecker factors, compositions) need the operands.
        return !rep.checks.empty();
    }
    return false;
}

/// True when ρ is diagonal in the computational product basis (hence a mixture
/// of product basis states) or a single party.
inline bool is_diagonal_product_mixture(const DensityOperator& rho, double rel_tol) {
    const Matrix& m = rho.matrix();
    const Matrix off = m - Matrix(m.diagonal().asDiagonal());
    return linalg::max_abs_entry(off) <= rel_tol * linalg::max_abs_entry(m);
}

/// Certifies a ⊗_K b using the factors before falling back to the product:
/// a genuinely entangled factor makes the product genuinely entangled, and a
/// fully separable b leaves a's class unchanged.
inline CertificateReport certify_kronecker(const DensityOperator& a, const DensityOperator& b,
                                           const CertifyOptions& opt = {}) {
    CertificateReport ra = certify(a, opt);
    const bool ra_gme = ra.verdict == Verdict::GME;
    if (ra_gme) {
        CertificateReport rep;
        rep.tolerances = opt.tol;
        rep.verdict = Verdict::GME;
        rep.method = "kronecker_factor_gme";
        rep.evidence = StructuralEvidence{"a ⊗_K b is genuinely entangled when a is",
                                          {"first factor certified gme via " + ra.method}};
        rep.checks = ra.checks;
        rep.sdp_solves = ra.sdp_solves;
        return rep;
    }
    if (a.parties() == b.parties()) {
        CertificateReport rb = certify(b, opt);
        if (rb.verdict == Verdict::GME) {
            CertificateReport rep;
            rep.tolerances = opt.tol;
            rep.verdict = Verdict::GME;
            rep.method = "kronecker_factor_gme";
            rep.evidence = StructuralEvidence{"a ⊗_K b is genuinely entangled when b is (equal party counts)",
                                              {"second factor certified gme via " + rb.method}};
            rep.sdp_solves = ra.sdp_solves + rb.sdp_solves;
            return rep;
        }
    }
    const bool b_sep = is_diagonal_product_mixture(b, opt.tol.herm) || b.parties() == 1 ||
                       [&] {
                           const Matrix basis = linalg::range_basis(b.matrix(), opt.tol.rank);
                           return basis.cols() == 1 &&
                                  static_cast<std::size_t>(
                                      complete_partition(PureState(basis.col(0), b.structure()), opt.tol.rank).size()) ==
                                      b.parties();
                       }();
    if (b_sep && ra.verdict != Verdict::Inconclusive) {
        CertificateReport rep;
        rep.tolerances = opt.tol;
        rep.verdict = ra.verdict;
        rep.method = "fully_separable_factor";
        rep.evidence = StructuralEvidence{"with b fully separable, a ⊗_K b has the class of a",
                                          {"second factor fully separable", "first factor " + to_string(ra.verdict) +
                                                                                " via " + ra.method}};
        rep.sdp_solves = ra.sdp_solves;
        return rep;
    }
    CertificateReport rep = certify(kronecker_product(a, b), opt);
    rep.sdp_solves += ra.sdp_solves;
    return rep;
}

}  // namespace gme
