#pragma once

// Time evolution under quadratic Hamiltonians H^ = 1/2 A^T H A.
//
//   covariance flow     d sigma/dt = (JH) sigma + sigma (JH)^T,  sigma(t) = S sigma0 S^T, S = exp(JHt)
//   normal-product flow dR/dt = i (R J H - H J R)
//
// Two closed forms ship for the normal-product flow:
//   Ordering::A  R(t) = U R0 U^T with U = exp(-iJHt)
//   Ordering::B  R(t) = exp(-iHJt) R0 exp(+iJHt)
// ordering_audit measures which of them actually solves the flow.

#include "gnp/matcore.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gnp::dynamics {

class QuadraticHamiltonian {
 public:
  /// Throws DomainError unless H is a finite, real, symmetric 2n x 2n matrix.
  explicit QuadraticHamiltonian(CMatrix h);

  int n_modes() const { return n_modes_; }
  const CMatrix& matrix() const { return h_; }
  bool positive_definite() const { return positive_definite_; }
  /// Non-empty when H is not positive definite; evolution is still defined.
  const std::string& warning() const { return warning_; }

 private:
  CMatrix h_;
  int n_modes_;
  bool positive_definite_;
  std::string warning_;
};

CMatrix covariance_rhs(const CMatrix& sigma, const CMatrix& h);
/// S(t) = exp(JHt)
CMatrix covariance_propagator(const CMatrix& h, double t);
CMatrix covariance_propagate(const CMatrix& sigma0, const CMatrix& h, double t);

CMatrix normal_rhs(const CMatrix& r, const CMatrix& h);

enum class Ordering { A, B };
std::string_view to_string(Ordering o);

struct Propagator {
  Ordering variant = Ordering::B;
  double t = 0.0;
  CMatrix left;
  CMatrix right;

  CMatrix apply(const CMatrix& r0) const { return left * r0 * right; }
};

Propagator make_propagator(const CMatrix& h, double t, Ordering variant);
CMatrix normal_propagate(const CMatrix& r0, const CMatrix& h, double t, Ordering variant);

enum class Flow { Covariance, Normal };
std::string_view to_string(Flow f);

struct InvariantSample {
  Complex det_kernel;
  /// Symplectic residual of the accumulated exp(JHt); covariance flow only.
  std::optional<double> symplectic_residual;
  /// RK4: relative deviation from the closed form (S sigma0 S^T, or ordering B).
  /// Closed form: max|dX/dt - rhs(X)| by centered differences.
  double consistency_residual = 0.0;
};

struct Trajectory {
  Flow flow = Flow::Normal;
  std::vector<double> times;
  std::vector<CMatrix> kernels;
  std::vector<InvariantSample> log;
};

/// Classical fixed-step RK4 recorded at every step (steps + 1 samples; one
/// sample when t_end == 0). Throws std::invalid_argument for steps < 1 or a
/// non-finite t_end, NumericalError naming the step index on non-finite state.
Trajectory integrate_rk4(Flow flow, const CMatrix& x0, const CMatrix& h, double t_end, int steps);

/// Closed-form samples on the same time grid as integrate_rk4.
Trajectory closed_form_trajectory(Flow flow, const CMatrix& x0, const CMatrix& h, double t_end,
                                  int steps, Ordering variant = Ordering::B);

struct InvariantsReport {
  /// max_t |det X(t) - det X(0)| / |det X(0)| (absolute when det X(0) = 0).
  double det_drift = 0.0;
  std::optional<double> max_symplectic_residual;
  std::optional<double> max_consistency_residual;
  /// |tr ln X(0) - ln det X(0)| modulo 2 pi i; absent when X(0) has an
  /// eigenvalue on the principal-log branch cut.
  std::optional<double> logdet_trace_residual;
  std::string note;
};

/// Throws std::invalid_argument on an empty trajectory.
InvariantsReport invariants_report(const Trajectory& traj);

inline constexpr double kAuditTolerance = 1e-6;

struct VariantResidual {
  Ordering variant;
  double residual = 0.0;
  bool consistent = false;
};

struct OrderingAudit {
  std::vector<double> times;
  double step = 0.0;
  std::vector<VariantResidual> variants;
  std::vector<Ordering> consistent;
  bool commuting = false;  // JH == HJ
  bool vacuous = false;    // commuting, or both orderings produce the same trajectory
  std::string conclusion;
};

/// Residual max|dR/dt - i(R JH - HJ R)| of each ordering at t_end * k / 5,
/// k = 1..5, by centered differences with step 1e-5 * max(1, t_end).
OrderingAudit ordering_audit(const CMatrix& r0, const CMatrix& h, double t_end);

struct ConventionAudit {
  std::vector<double> times;
  /// max_t |R_variant(t) - sigma_to_r(sigma(t))| with sigma(t) from the covariance flow.
  std::vector<VariantResidual> variants;
};

/// Descriptive only; VariantResidual::consistent is always false.
ConventionAudit convention_audit(const CMatrix& g, const CMatrix& h, double t_end);

}  // namespace gnp::dynamics
