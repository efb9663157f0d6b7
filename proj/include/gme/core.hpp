#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gme {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Largest total Hilbert-space dimension any state may carry.
inline constexpr Index kMaxTotalDim = 4096;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t byte_offset)
        : Error(what + " (at byte " + std::to_string(byte_offset) + ")"), byte_(byte_offset) {}

    std::size_t byte() const noexcept { return byte_; }

private:
    std::size_t byte_;
};

/// Numerical tolerances shared by every decision procedure.
///
/// `herm` scales with the largest matrix entry, `psd` with the largest
/// eigenvalue, `rank` with the largest singular value. `sdp` is absolute on
/// trace-normalized states.
struct Tolerances {
    double herm = 1e-10;
    double psd = 1e-9;
    double rank = 1e-8;
    double sdp = 1e-7;
    double inv = 1e-12;
};

}  // namespace gme
