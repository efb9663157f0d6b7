#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "gme/core.hpp"

namespace gme::linalg {

inline double max_abs_entry(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline Matrix hermitian_part(const Matrix& m) {
    return (m + m.adjoint()) / 2.0;
}

inline bool is_hermitian(const Matrix& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(max_abs_entry(m), 1.0e-300);
    return max_abs_entry(m - m.adjoint()) <= rel_tol * scale;
}

/// Ascending eigenvalues of a Hermitian matrix.
inline RealVector eigenvalues(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline double min_eigenvalue(const Matrix& h) {
    return eigenvalues(h)(0);
}

inline double max_eigenvalue(const Matrix& h) {
    const RealVector ev = eigenvalues(h);
    return ev(ev.size() - 1);
}

/// Projects a Hermitian matrix onto {X : lo·I ≼ X ≼ hi·I} in Frobenius norm.
inline Matrix clip_spectrum(const Matrix& h, double lo, double hi) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const RealVector ev = es.eigenvalues().cwiseMax(lo).cwiseMin(hi);
    const Matrix& v = es.eigenvectors();
    return v * ev.asDiagonal() * v.adjoint();
}

/// Sum of the negative eigenvalues; equals min ⟨h, X⟩ over 0 ≼ X ≼ I.
inline double negative_spectrum_sum(const Matrix& h) {
    const RealVector ev = eigenvalues(h);
    double s = 0.0;
    for (Index i = 0; i < ev.size(); ++i)
        if (ev(i) < 0.0) s += ev(i);
    return s;
}

inline RealVector singular_values(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues();
}

/// Number of singular values above rel_tol · σ_max. Zero matrices have rank 0.
inline int numerical_rank(const Matrix& m, double rel_tol) {
    if (m.size() == 0) return 0;
    const RealVector s = singular_values(m);
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int r = 0;
    for (Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

/// Orthonormal basis (as columns) of the range of a PSD matrix: eigenvectors
/// whose eigenvalue exceeds rel_tol · λ_max.
inline Matrix range_basis(const Matrix& psd, double rel_tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(psd);
    const RealVector& ev = es.eigenvalues();
    const double top = ev(ev.size() - 1);
    int k = 0;
    for (Index i = 0; i < ev.size(); ++i)
        if (ev(i) > rel_tol * top) ++k;
    return es.eigenvectors().rightCols(k);
}

/// Orthonormal basis of span of the columns of m, via SVD with relative cut.
inline Matrix column_span(const Matrix& m, double rel_tol) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    const int r = numerical_rank(m, rel_tol);
    return svd.matrixU().leftCols(r);
}

/// Distance of v from the span of orthonormal columns q, relative to ‖v‖.
inline double relative_residual(const Matrix& q, const Vector& v) {
    const double n = v.norm();
    if (n == 0.0) return 0.0;
    return (v - q * (q.adjoint() * v)).norm() / n;
}

/// Scales v to unit norm and rotates the phase so the largest-magnitude entry
/// is real positive. Makes vectors comparable up to scale.
inline Vector canonical_ray(const Vector& v) {
    Index at = 0;
    v.cwiseAbs().maxCoeff(&at);
    const Complex phase = v(at) / std::abs(v(at));
    return v / (v.norm() * phase);
}

inline bool same_ray(const Vector& a, const Vector& b, double tol) {
    const double overlap = std::abs(a.dot(b)) / (a.norm() * b.norm());
    return std::abs(1.0 - overlap) <= tol;
}

}  // namespace gme::linalg
