#include "gnp/matcore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace gnp::mat {

CMatrix structured(FormKind kind, int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("structured: n_modes must be >= 1");
  const Eigen::Index n = n_modes;
  CMatrix m = CMatrix::Zero(2 * n, 2 * n);
  const auto id = CMatrix::Identity(n, n);
  switch (kind) {
    case FormKind::J:
      m.topRightCorner(n, n) = id;
      m.bottomLeftCorner(n, n) = -id;
      break;
    case FormKind::Omega:
      m.topLeftCorner(n, n) = id;
      m.bottomRightCorner(n, n) = -id;
      break;
    case FormKind::E:
      m.topRightCorner(n, n) = id;
      m.bottomLeftCorner(n, n) = id;
      break;
    case FormKind::I:
      m.setIdentity();
      break;
  }
  return m;
}

int modes_of(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() < 2 || m.rows() % 2 != 0) {
    std::ostringstream os;
    os << "expected a 2n x 2n kernel, got " << m.rows() << " x " << m.cols();
    throw std::invalid_argument(os.str());
  }
  return static_cast<int>(m.rows() / 2);
}

double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool all_finite(const CMatrix& m) {
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const Complex v = m.data()[k];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

double relative_deviation(const CMatrix& a, const CMatrix& b) {
  const double diff = max_abs(a - b);
  const double scale = max_abs(b);
  return scale > 0.0 ? diff / scale : diff;
}

namespace {

double one_norm(const CMatrix& m) {
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

struct PadeTable {
  int degree;
  double theta;
};

// Largest 1-norms for which the degree-m approximant meets unit roundoff.
constexpr std::array<PadeTable, 5> kPade{{
    {3, 1.495585217958292e-2},
    {5, 2.539398330063230e-1},
    {7, 9.504178996162932e-1},
    {9, 2.097847961257068e0},
    {13, 5.371920351148152e0},
}};

std::vector<double> pade_coefficients(int degree) {
  switch (degree) {
    case 3: return {120., 60., 12., 1.};
    case 5: return {30240., 15120., 3360., 420., 30., 1.};
    case 7: return {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
    case 9:
      return {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
              2162160.,     110880.,     3960.,       90.,        1.};
    default:
      return {64764752532480000., 32382376266240000., 7771770303897600.,
              1187353796428800.,  129060195264000.,   10559470521600.,
              670442572800.,      33522128640.,       1323241920.,
              40840800.,          960960.,            16380.,
              182.,               1.};
  }
}

CMatrix pade_quotient(const CMatrix& a, int degree) {
  const Eigen::Index dim = a.rows();
  const CMatrix id = CMatrix::Identity(dim, dim);
  const auto b = pade_coefficients(degree);
  CMatrix u, v;
  if (degree < 13) {
    // Even powers A^0, A^2, ..., A^(m-1).
    std::vector<CMatrix> even{id, a * a};
    for (int k = 4; k < degree; k += 2) even.push_back(even.back() * even[1]);
    CMatrix odd_sum = CMatrix::Zero(dim, dim);
    v = CMatrix::Zero(dim, dim);
    for (int k = 0; 2 * k <= degree; ++k) {
      if (2 * k + 1 <= degree) odd_sum += b[2 * k + 1] * even[k];
      v += b[2 * k] * even[k];
    }
    u = a * odd_sum;
  } else {
    const CMatrix a2 = a * a;
    const CMatrix a4 = a2 * a2;
    const CMatrix a6 = a4 * a2;
    u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 +
             b[1] * id);
    v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  }
  return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

CMatrix mat_exp(const CMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("mat_exp: matrix must be square");
  if (!all_finite(m)) throw NumericalError("mat_exp: non-finite input");
  if (m.size() == 0) return m;

  const double norm = one_norm(m);
  for (const auto& entry : kPade) {
    if (entry.degree < 13 && norm <= entry.theta) return pade_quotient(m, entry.degree);
  }

  int squarings = 0;
  if (norm > kPade.back().theta) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / kPade.back().theta)));
  }
  constexpr int kMaxSquarings = 64;
  if (squarings > kMaxSquarings) {
    std::ostringstream os;
    os << "mat_exp: norm " << norm << " exceeds the scaling budget";
    throw NumericalError(os.str());
  }

  CMatrix x = pade_quotient(m / std::ldexp(1.0, squarings), 13);
  for (int k = 0; k < squarings; ++k) x = x * x;
  if (!all_finite(x)) throw NumericalError("mat_exp: result overflowed");
  return x;
}

EigDecomp eig_decompose(const CMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eig_decompose: matrix must be square");
  if (!all_finite(m)) throw NumericalError("eig_decompose: non-finite input");

  Eigen::ComplexEigenSolver<CMatrix> solver(m, true);
  if (solver.info() != Eigen::Success) throw NumericalError("eig_decompose: eigensolver did not converge");

  EigDecomp out;
  out.values = solver.eigenvalues();
  out.right_vectors = solver.eigenvectors();

  Eigen::PartialPivLU<CMatrix> lu(out.right_vectors);
  const double rcond = lu.rcond();
  out.condition_estimate = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(out.condition_estimate <= kConditionLimit)) {
    std::ostringstream os;
    os << "eig_decompose: eigenvector basis condition " << out.condition_estimate
       << " above limit (matrix not safely diagonalizable)";
    throw NumericalError(os.str());
  }

  const CMatrix rebuilt = out.right_vectors * out.values.asDiagonal() * lu.inverse();
  out.reconstruction_residual = max_abs(rebuilt - m);
  if (out.reconstruction_residual > kTolEig * max_abs(m)) {
    std::ostringstream os;
    os << "eig_decompose: reconstruction residual " << out.reconstruction_residual
       << " exceeds tolerance";
    throw NumericalError(os.str());
  }
  return out;
}

CMatrix mat_analytic(const EigDecomp& decomp, const ScalarFunction& f) {
  CVector mapped(decomp.values.size());
  for (Eigen::Index k = 0; k < decomp.values.size(); ++k) {
    const Complex value = f(decomp.values[k]);
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
      std::ostringstream os;
      os << "mat_analytic: function not finite at eigenvalue " << decomp.values[k];
      throw DomainError(os.str());
    }
    mapped[k] = value;
  }
  const CMatrix& v = decomp.right_vectors;
  // (V D) V^-1 == ((V^T)^-1 (V D)^T)^T
  const CMatrix vd = v * mapped.asDiagonal();
  return v.transpose().partialPivLu().solve(vd.transpose()).transpose();
}

CMatrix mat_analytic(const CMatrix& m, const ScalarFunction& f) {
  return mat_analytic(eig_decompose(m), f);
}

Complex determinant(const CMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("determinant: matrix must be square");
  if (m.size() == 0) return {1.0, 0.0};
  return m.partialPivLu().determinant();
}

CMatrix dense_solve(const CMatrix& m, const CMatrix& b) {
  if (m.rows() != m.cols()) throw std::invalid_argument("dense_solve: matrix must be square");
  if (b.rows() != m.rows()) throw std::invalid_argument("dense_solve: dimension mismatch");
  if (!all_finite(m) || !all_finite(b)) throw NumericalError("dense_solve: non-finite input");

  Eigen::PartialPivLU<CMatrix> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond * kConditionLimit >= 1.0)) {
    std::ostringstream os;
    os << "dense_solve: matrix singular to working precision (rcond " << rcond << ")";
    throw NumericalError(os.str());
  }
  CMatrix x = lu.solve(b);
  const double residual = max_abs(m * x - b);
  // Normwise backward error; reduces to |MX - B| <= tol |B| for well-conditioned M.
  const double scale = max_abs(m) * max_abs(x) + max_abs(b);
  if (!all_finite(x) || residual > kTolSolve * scale) {
    std::ostringstream os;
    os << "dense_solve: residual " << residual << " above tolerance";
    throw NumericalError(os.str());
  }
  return x;
}

CMatrix inverse(const CMatrix& m) {
  return dense_solve(m, CMatrix::Identity(m.rows(), m.cols()));
}

double symplectic_residual(const CMatrix& s) {
  const CMatrix j = J(modes_of(s));
  return std::max(max_abs(s.transpose() * j * s - j), max_abs(s * j * s.transpose() - j));
}

namespace scalar {

Complex coth(Complex x) {
  const Complex sh = std::sinh(x);
  if (sh == Complex(0.0, 0.0)) throw DomainError("coth: pole at 0");
  return std::cosh(x) / sh;
}

Complex arccoth(Complex x) {
  if (x == Complex(1.0, 0.0) || x == Complex(-1.0, 0.0)) throw DomainError("arccoth: pole at +-1");
  return 0.5 * std::log((x + 1.0) / (x - 1.0));
}

}  // namespace scalar
}  // namespace gnp::mat
