#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace signet {

using NodeId = std::uint32_t;
using Sign = std::int8_t;

/// Row-major dense block used for factor matrices, eigenvector blocks and
/// per-edge feature rows.
using DenseFactor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input file or configuration could not be parsed.
class ParseError : public Error {
public:
  using Error::Error;
};

/// An iterative method stopped before reaching its tolerance.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

private:
  double achieved_;
};

// sign(0) -> +1 is the tie rule used by every predictor.
inline Sign sign_of(double x) noexcept { return x < 0.0 ? Sign{-1} : Sign{1}; }

}  // namespace signet
