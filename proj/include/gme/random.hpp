#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gme/core.hpp"
#include "gme/linalg.hpp"
#include "gme/state.hpp"

namespace gme::random {

using Rng = std::mt19937_64;

inline Complex gaussian(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    const double re = n(rng);
    return {re, n(rng)};
}

inline Vector vector(Rng& rng, Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = gaussian(rng);
    return v;
}

inline Matrix matrix(Rng& rng, Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = gaussian(rng);
    return m;
}

/// Ginibre matrix, redrawn until comfortably invertible.
inline Matrix invertible(Rng& rng, Index n, double min_singular = 1e-2) {
    for (;;) {
        Matrix m = matrix(rng, n, n);
        Eigen::JacobiSVD<Matrix> svd(m);
        const auto& s = svd.singularValues();
        if (s(s.size() - 1) >= min_singular * s(0)) return m;
    }
}

inline Matrix unitary(Rng& rng, Index n) {
    Eigen::HouseholderQR<Matrix> qr(matrix(rng, n, n));
    return qr.householderQ();
}

/// Random PSD operator of the given rank.
inline Matrix psd(Rng& rng, Index n, Index rank) {
    const Matrix g = matrix(rng, n, rank);
    return g * g.adjoint();
}

inline DensityOperator density(Rng& rng, const PartyStructure& s, Index rank) {
    return DensityOperator::trusted(linalg::hermitian_part(psd(rng, s.total_dim(), rank)), s);
}

inline PureState pure(Rng& rng, const PartyStructure& s) { return PureState(vector(rng, s.total_dim()), s); }

inline PureState product(Rng& rng, const PartyStructure& s) {
    Vector v = vector(rng, s.dim(0));
    for (std::size_t k = 1; k < s.size(); ++k) {
        const Vector f = vector(rng, s.dim(k));
        Vector next(v.size() * f.size());
        for (Index i = 0; i < v.size(); ++i) next.segment(i * f.size(), f.size()) = v(i) * f;
        v = std::move(next);
    }
    return PureState(v, s);
}

inline std::vector<Matrix> invertible_product(Rng& rng, const PartyStructure& s) {
    std::vector<Matrix> out;
    for (std::size_t k = 0; k < s.size(); ++k) out.push_back(invertible(rng, s.dim(k)));
    return out;
}

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline double uniform_real(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

}  // namespace gme::random
