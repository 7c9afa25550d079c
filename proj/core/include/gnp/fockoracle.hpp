#pragma once

// Truncated Fock-space ground truth.
//
// Basis states |k_1 .. k_n> are indexed with mode 1 most significant. The
// physical density is rho = exp(-G^)/Tr exp(-G^) with G^ = 1/2 A^T G_phys A,
// where thermal modes use G_phys = w E (so G^ = w (a^+ a + 1/2)).

#include "gnp/kernels.hpp"
#include "gnp/phasespace.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gnp::fock {

inline constexpr int kDefaultCutoff = 40;
inline constexpr double kTailWarn = 1e-8;
inline constexpr double kTailFail = 1e-4;
inline constexpr double kCalibrationTolerance = 1e-6;

struct FockOperator {
  int n_modes = 1;
  int cutoff = 2;
  CMatrix matrix;
  bool hermitian = false;
};

/// Ladder operator of `mode` (1-based) on cutoff^n levels. Throws
/// std::invalid_argument for cutoff < 2 or an out-of-range mode.
FockOperator annihilator(int n_modes, int mode, int cutoff);

/// 1/2 sum_ij M_ij A_i A_j. Built at cutoff + 1 and compressed to cutoff so
/// every retained matrix element is exact.
FockOperator quad_operator(const CMatrix& m, int cutoff);

enum class SpecKind { Thermal, SqueezedThermal };

struct PhysicalSpec {
  SpecKind kind = SpecKind::Thermal;
  std::vector<double> omegas;
  std::vector<double> squeezes;
  CMatrix operator_kernel;

  int n_modes() const { return static_cast<int>(omegas.size()); }
  std::string label() const;
};

PhysicalSpec thermal_spec(const std::vector<double>& omegas);
/// operator_kernel = S^T (w E) S with S from kernels::squeeze_symplectic.
PhysicalSpec squeezed_thermal_spec(const std::vector<double>& omegas, const std::vector<double>& squeezes);

/// The same state in the as-published G class (w I, or S^T (w I) S).
kernels::GaussianState published_state(const PhysicalSpec& spec);

struct Density {
  FockOperator rho;
  /// Probability of finding some mode on the top retained level.
  double tail_mass = 0.0;
  std::string warning;
};

/// exp(-G^) is formed and trace-normalized on 2 * cutoff levels per mode, then
/// restricted to `cutoff` levels, so retained matrix elements are not distorted
/// by the truncation of G^; the restricted trace falls short of 1 by the mass
/// above the cutoff.
/// Throws TruncationError when tail_mass > kTailFail; sets `warning` above kTailWarn.
Density gaussian_density(const PhysicalSpec& spec, int cutoff);

struct CoherentAmplitudes {
  CVector vector;
  double norm_deficit = 0.0;
};

/// Product coherent state truncated at `cutoff`; never throws on truncation.
CoherentAmplitudes coherent_amplitudes(const std::vector<Complex>& z, int cutoff);
/// Throws TruncationError when the norm deficit exceeds 1e-8.
CVector coherent_vector(const std::vector<Complex>& z, int cutoff);

/// <Z|rho|Z>; NumericalError if a Hermitian rho yields an imaginary part above 1e-10.
double q_of_rho(const FockOperator& rho, const phase::PhasePoint& pt);

struct HessianKernel {
  CMatrix r;
  double gaussianity_residual = 0.0;
  std::string warning;
};

/// R from centered second differences of -ln Q at Z = 0 in real coordinates
/// x = (Re z, Im z), converted to the (z, z*) basis.
HessianKernel r_from_q_hessian(const FockOperator& rho, double step = 1e-3);

/// exp(-iHt) rho0 exp(iHt) with H^ = 1/2 A^T H A at rho0's cutoff. DomainError
/// unless H^ is Hermitian (E H E = conj(H)); TruncationError on tail growth.
Density liouville_step(const FockOperator& rho0, const CMatrix& h, double t);

struct DerivativeIdentityReport {
  Complex z;
  /// <Z|rho A|Z> vs (Z + (E-J)/2 grad) Q, grad = (d/dz, d/dz*)
  double right_residual = 0.0;
  /// <Z|A^T rho|Z> vs (Z + (E+J)/2 grad) Q
  double left_residual = 0.0;
  /// Right-acting identity with (E-J)/2 applied as a row operator on the left
  /// of the gradient; kept as a diagnostic.
  double row_reading_residual = 0.0;
  double norm_deficit = 0.0;
  bool truncated = false;
};

/// Single mode. Derivatives by four-point centered stencils in Re z and Im z.
DerivativeIdentityReport derivative_identity_check(const FockOperator& rho, Complex z, double step = 1e-4);

// ---------------------------------------------------------------------------
// Convention calibration

struct CalibrationCase {
  PhysicalSpec spec;
  CMatrix r_published;
  CMatrix r_oracle;
  double q0_oracle = 0.0;
  double gaussianity_residual = 0.0;
  double tail_mass = 0.0;
};

struct HypothesisResult {
  kernels::RMap r_map;
  kernels::PrefactorRule prefactor_rule;
  double kernel_residual = 0.0;
  double prefactor_residual = 0.0;
  bool qualifies = false;
};

struct CalibrationReport {
  int cutoff = kDefaultCutoff;
  std::vector<CalibrationCase> cases;
  /// Every (r_map, prefactor_rule) pair in the fixed hypothesis order.
  std::vector<HypothesisResult> hypotheses;
  std::vector<kernels::RMap> qualifying_r_maps;
  std::vector<kernels::PrefactorRule> qualifying_prefactor_rules;
  /// First qualifying pair in hypothesis order.
  std::optional<kernels::ConventionBridge> bridge;

  int qualifying_pairs() const;
  /// Human-readable residual table.
  std::string table() const;
};

/// Thermal w in {0.3, ln 2, 2} and squeezed-thermal w = ln 2, r in {0.25, 0.5}.
std::vector<PhysicalSpec> calibration_suite();

/// Runs the suite and scores every hypothesis. Throws NumericalError carrying
/// the residual table when no pair qualifies.
CalibrationReport calibrate(int cutoff = kDefaultCutoff);

/// calibrate(kDefaultCutoff).bridge, computed once.
const kernels::ConventionBridge& calibrated_bridge();

}  // namespace gnp::fock
