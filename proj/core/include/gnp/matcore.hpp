#pragma once

// Dense complex matrix kernel shared by every other module.
//
// All 2n x 2n kernels use the operator ordering A = (a_1..a_n, a_1^+..a_n^+)^T,
// so the structured forms below are block matrices in n x n blocks.

#include "gnp/types.hpp"

#include <functional>

namespace gnp::mat {

inline constexpr double kTolEig = 1e-9;
inline constexpr double kTolSolve = 1e-10;
inline constexpr double kConditionLimit = 1e12;

enum class FormKind {
  J,      // [[0, I], [-I, 0]]
  Omega,  // [[I, 0], [0, -I]]
  E,      // [[0, I], [I, 0]]
  I,
};

/// Exact 0/+-1 block form of size 2n x 2n. Throws std::invalid_argument for n < 1.
CMatrix structured(FormKind kind, int n_modes);

inline CMatrix J(int n) { return structured(FormKind::J, n); }
inline CMatrix Omega(int n) { return structured(FormKind::Omega, n); }
inline CMatrix E(int n) { return structured(FormKind::E, n); }
inline CMatrix I(int n) { return structured(FormKind::I, n); }

/// Number of modes of a 2n x 2n kernel; throws std::invalid_argument otherwise.
int modes_of(const CMatrix& m);

double max_abs(const CMatrix& m);
bool all_finite(const CMatrix& m);

/// max|a - b| / max|b|, falling back to the absolute deviation when b == 0.
double relative_deviation(const CMatrix& a, const CMatrix& b);

/// Matrix exponential by scaling and squaring with a diagonal Pade approximant
/// (degree 3..13 chosen from the 1-norm). Throws NumericalError when the
/// scaling budget is exhausted or the result is not finite.
CMatrix mat_exp(const CMatrix& m);

struct EigDecomp {
  CVector values;
  CMatrix right_vectors;
  double condition_estimate = 0.0;  // 1-norm condition of the eigenvector basis
  double reconstruction_residual = 0.0;
};

/// Throws NumericalError if the eigenbasis condition exceeds kConditionLimit
/// or the reconstruction misses by more than kTolEig * max|M|.
EigDecomp eig_decompose(const CMatrix& m);

using ScalarFunction = std::function<Complex(Complex)>;

/// V f(diag(lambda)) V^-1. Throws DomainError when f is not finite at an
/// eigenvalue, NumericalError when M is not safely diagonalizable.
CMatrix mat_analytic(const CMatrix& m, const ScalarFunction& f);
CMatrix mat_analytic(const EigDecomp& decomp, const ScalarFunction& f);

Complex determinant(const CMatrix& m);

/// Solves M X = B by LU with partial pivoting. Throws NumericalError when the
/// reciprocal condition estimate is below 1 / kConditionLimit or the backward
/// error exceeds kTolSolve.
CMatrix dense_solve(const CMatrix& m, const CMatrix& b);
CMatrix inverse(const CMatrix& m);

/// max(|S^T J S - J|, |S J S^T - J|) in the max-norm.
double symplectic_residual(const CMatrix& s);

namespace scalar {
// Both throw DomainError exactly at their poles.
Complex coth(Complex x);
Complex arccoth(Complex x);
}  // namespace scalar

}  // namespace gnp::mat
