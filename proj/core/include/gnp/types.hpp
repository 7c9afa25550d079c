#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace gnp {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Failure classes. The CLI maps NumericalError/DomainError to exit code 2.

/// A computation broke down: singular or ill-conditioned input, non-finite
/// intermediate, non-diagonalizable matrix, or Fock truncation too coarse.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The input lies outside the mathematical domain of an operation
/// (pole of a matrix function, divergent Gaussian integral, unphysical kernel).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Fock-space cutoff too small for the requested accuracy.
class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace gnp
