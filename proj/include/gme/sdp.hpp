#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gme/core.hpp"
#include "gme/linalg.hpp"
#include "gme/partitions.hpp"
#include "gme/state.hpp"

namespace gme {

// PPT-mixture witness search:
//
//   minimize   tr(W ρ̂)                    (ρ̂ = ρ / tr ρ)
//   subject to W = P_M + Q_M^{T_M},  0 ≼ P_M ≼ I,  0 ≼ Q_M ≼ I   for every cut M.
//
// Any feasible W satisfies tr(W σ) ≥ 0 for every PPT mixture σ, so a negative
// value certifies that ρ is not a PPT mixture and hence genuinely entangled.
//
// Solved with over-relaxed ADMM: the x-block is the affine set of coupled
// (W, P_M, Q_M) (closed-form projection, T_M being an isometric involution);
// the z-block clips spectra to [0, 1]. Convergence is declared on a duality
// gap between two rigorously feasible points:
//   primal: the iterate repaired into an exact decomposition by an identity
//           shift and rescaled into the box,
//   dual:   max Σ_M neg(Y_M) + neg(Y_M^{T_M}) s.t. Σ_M Y_M = ρ̂, with Y_M read
//           off the scaled ADMM multipliers and corrected to sum to ρ̂ exactly.

/// Certified: stopped early on request once the feasible witness went below -tol.
enum class SdpStatus { Converged, Certified, MaxIterations };

inline std::string to_string(SdpStatus s) {
    switch (s) {
        case SdpStatus::Converged: return "converged";
        case SdpStatus::Certified: return "certified";
        default: return "max_iterations";
    }
}

struct SdpOptions {
    double tol = 1e-7;          // duality-gap target; also the certification margin
    int max_iter = 100000;
    int check_every = 20;       // iterations between gap evaluations
    double relaxation = 1.6;
    double penalty = 0.0;       // ADMM penalty; 0 picks 1/dim
    bool adapt_penalty = true;
    bool stop_when_certified = false;  // return as soon as the primal is below -tol
};

struct SdpSolution {
    std::vector<Bipartition> cuts;
    Matrix witness;             // feasible W
    std::vector<Matrix> p;      // W = p[M] + PT_M(q[M]) exactly up to rounding
    std::vector<Matrix> q;
    double objective = 0.0;     // tr(W ρ̂) of the feasible witness
    double dual_bound = -1.0;   // certified lower bound on the optimum
    SdpStatus status = SdpStatus::MaxIterations;
    int iterations = 0;

    double gap() const { return objective - dual_bound; }
    bool certifies_gme(double tol) const { return objective < -tol; }
};

namespace detail {

struct SdpIterate {
    Matrix w;
    std::vector<Matrix> p, q;
};

/// Makes (w, q) into an exactly feasible witness: P_M := W - PT(Q_M), shift W by
/// 2s·I so every P_M, Q_M is PSD, then scale into the box.
inline void repair_witness(const Matrix& w, const std::vector<Matrix>& q_in, const std::vector<int>& dims,
                           const std::vector<Bipartition>& cuts, const Matrix& rho_hat, SdpSolution& out) {
    const Index d = w.rows();
    const Matrix eye = Matrix::Identity(d, d);
    double shift = 0.0;
    std::vector<Matrix> p(cuts.size()), q(cuts.size());
    const Matrix wh = linalg::hermitian_part(w);
    for (std::size_t k = 0; k < cuts.size(); ++k) {
        q[k] = linalg::hermitian_part(q_in[k]);
        p[k] = linalg::hermitian_part(wh - partial_transpose(q[k], dims, cuts[k].side()));
        shift = std::max({shift, -linalg::min_eigenvalue(p[k]), -linalg::min_eigenvalue(q[k])});
    }
    shift += 1e-13;
    double scale = 1.0;
    for (std::size_t k = 0; k < cuts.size(); ++k) {
        p[k] += shift * eye;
        q[k] += shift * eye;
        scale = std::max({scale, linalg::max_eigenvalue(p[k]), linalg::max_eigenvalue(q[k])});
    }
    out.witness = (wh + 2.0 * shift * eye) / scale;
    for (std::size_t k = 0; k < cuts.size(); ++k) {
        p[k] /= scale;
        q[k] /= scale;
    }
    out.p = std::move(p);
    out.q = std::move(q);
    out.objective = (out.witness * rho_hat).trace().real();
}

inline double dual_bound(std::vector<Matrix> y, const std::vector<int>& dims, const std::vector<Bipartition>& cuts,
                         const Matrix& rho_hat) {
    Matrix sum = Matrix::Zero(rho_hat.rows(), rho_hat.cols());
    for (const auto& m : y) sum += m;
    const Matrix fix = (rho_hat - sum) / static_cast<double>(y.size());
    double g = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        y[k] = linalg::hermitian_part(y[k] + fix);
        g += linalg::negative_spectrum_sum(y[k]);
        g += linalg::negative_spectrum_sum(partial_transpose(y[k], dims, cuts[k].side()));
    }
    return g;
}

}  // namespace detail

/// Solves the PPT-mixture witness problem for ρ over all its cuts.
inline SdpSolution gme_sdp(const DensityOperator& rho, const SdpOptions& opt = {}) {
    const int n = static_cast<int>(rho.parties());
    if (n < 3) throw PreconditionError("the PPT-mixture program needs at least three parties; use the PPT test");
    if (rho.dim() > 64) throw PreconditionError("the PPT-mixture program supports total dimension <= 64");

    const auto dims = rho.structure().dims();
    const auto cuts = enumerate_bipartitions(n);
    const std::size_t kc = cuts.size();
    const Index d = rho.dim();
    const Matrix rho_hat = rho.matrix() / rho.trace();
    const double K = static_cast<double>(kc);
    auto pt = [&](const Matrix& m, std::size_t k) { return partial_transpose(m, dims, cuts[k].side()); };

    double r = opt.penalty > 0.0 ? opt.penalty : 1.0 / static_cast<double>(d);
    const double alpha = opt.relaxation;

    detail::SdpIterate z{Matrix::Zero(d, d), std::vector<Matrix>(kc, Matrix::Zero(d, d)),
                         std::vector<Matrix>(kc, Matrix::Zero(d, d))};
    detail::SdpIterate u = z;  // scaled multipliers; the W component stays zero
    detail::SdpIterate x = z;

    SdpSolution sol;
    sol.cuts = cuts;
    detail::repair_witness(z.w, z.q, dims, cuts, rho_hat, sol);

    double best_dual = -1e300;
    for (int it = 1; it <= opt.max_iter; ++it) {
        // x-update: project (z - u) - (ρ̂/r, 0, 0) onto the coupling constraints.
        Matrix acc = 2.0 * (z.w - u.w - rho_hat / r);
        std::vector<Matrix> vp(kc), sq(kc);
        for (std::size_t k = 0; k < kc; ++k) {
            vp[k] = z.p[k] - u.p[k];
            sq[k] = pt(z.q[k] - u.q[k], k);  // transformed Q coordinates
            acc += vp[k] + sq[k];
        }
        x.w = acc / (2.0 + K);
        for (std::size_t k = 0; k < kc; ++k) {
            const Matrix half_gap = (x.w - vp[k] - sq[k]) / 2.0;
            x.p[k] = vp[k] + half_gap;
            x.q[k] = pt(sq[k] + half_gap, k);
        }

        // z-update with over-relaxation, then multiplier update.
        double primal_sq = 0.0, dual_sq = 0.0;
        {
            const Matrix xw = alpha * x.w + (1.0 - alpha) * z.w;
            dual_sq += (xw - z.w).squaredNorm();
            primal_sq += (x.w - xw).squaredNorm();
            z.w = xw;
        }
        for (std::size_t k = 0; k < kc; ++k) {
            const Matrix xp = alpha * x.p[k] + (1.0 - alpha) * z.p[k];
            const Matrix xq = alpha * x.q[k] + (1.0 - alpha) * z.q[k];
            const Matrix zp = linalg::clip_spectrum(linalg::hermitian_part(xp + u.p[k]), 0.0, 1.0);
            const Matrix zq = linalg::clip_spectrum(linalg::hermitian_part(xq + u.q[k]), 0.0, 1.0);
            u.p[k] += xp - zp;
            u.q[k] += xq - zq;
            primal_sq += (x.p[k] - zp).squaredNorm() + (x.q[k] - zq).squaredNorm();
            dual_sq += (zp - z.p[k]).squaredNorm() + (zq - z.q[k]).squaredNorm();
            z.p[k] = zp;
            z.q[k] = zq;
        }

        if (opt.adapt_penalty && it % 50 == 0) {
            const double rp = std::sqrt(primal_sq), rd = r * std::sqrt(dual_sq);
            double factor = 1.0;
            if (rp > 10.0 * rd) factor = 2.0;
            else if (rd > 10.0 * rp) factor = 0.5;
            if (factor != 1.0) {
                r *= factor;
                for (std::size_t k = 0; k < kc; ++k) {
                    u.p[k] /= factor;
                    u.q[k] /= factor;
                }
            }
        }

        if (it % opt.check_every == 0 || it == opt.max_iter) {
            SdpSolution candidate;
            candidate.cuts = cuts;
            detail::repair_witness(x.w, x.q, dims, cuts, rho_hat, candidate);
            std::vector<Matrix> y(kc);
            for (std::size_t k = 0; k < kc; ++k) y[k] = -r * u.p[k];
            best_dual = std::max(best_dual, detail::dual_bound(std::move(y), dims, cuts, rho_hat));
            if (candidate.objective < sol.objective) sol = std::move(candidate);
            sol.dual_bound = std::min(best_dual, sol.objective);
            sol.iterations = it;
            if (sol.gap() <= opt.tol) {
                sol.status = SdpStatus::Converged;
                return sol;
            }
            if (opt.stop_when_certified && sol.objective < -opt.tol) {
                sol.status = SdpStatus::Certified;
                return sol;
            }
        }
    }
    sol.iterations = opt.max_iter;
    return sol;
}

/// Direct re-check of a witness: W = P_M + PT_M(Q_M), 0 ≼ P_M, Q_M ≼ I (all
/// within tol) for every cut; returns tr(W ρ̂) or throws Error on violation.
inline double validate_witness(const SdpSolution& s, const DensityOperator& rho, double tol) {
    const auto dims = rho.structure().dims();
    if (s.p.size() != s.cuts.size() || s.q.size() != s.cuts.size()) throw Error("witness: decomposition count mismatch");
    for (std::size_t k = 0; k < s.cuts.size(); ++k) {
        const Matrix resid = s.witness - s.p[k] - partial_transpose(s.q[k], dims, s.cuts[k].side());
        if (linalg::max_abs_entry(resid) > tol) throw Error("witness: decomposition residual exceeds tolerance");
        for (const Matrix* m : {&s.p[k], &s.q[k]}) {
            const RealVector ev = linalg::eigenvalues(linalg::hermitian_part(*m));
            if (ev(0) < -tol || ev(ev.size() - 1) > 1.0 + tol) throw Error("witness: box constraint violated");
        }
    }
    return (s.witness * rho.matrix()).trace().real() / rho.trace();
}

}  // namespace gme
