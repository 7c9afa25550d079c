#pragma once

// Gaussian-state kernel algebra.
//
// A zero-mean n-mode Gaussian state is described by one of four 2n x 2n
// kernels, all expressed in the ordering A = (a_1..a_n, a_1^+..a_n^+)^T:
//
//   G      exponent kernel,           rho = exp(-1/2 A^T G A) / Tr(...)
//   sigma  covariance matrix,         sigma = coth(Omega G / 2) Omega
//   C      characteristic kernel,     C = 1/2 Omega sigma Omega
//   R      normal-product kernel,     rho = N :exp(-1/2 A^T R A):
//
// Every conversion is implemented exactly as printed in the source formalism
// ("as-published"). The printed R carries the opposite sign of the kernel a
// truncated Fock computation produces, so a second "calibrated" convention
// applies a ConventionBridge selected against that oracle (see fockoracle.hpp).

#include "gnp/matcore.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gnp::kernels {

inline constexpr double kTolConv = 1e-9;

enum class Convention { AsPublished, Calibrated };
enum class Form { G, Sigma, R, C };

std::string_view to_string(Convention c);
std::string_view to_string(Form f);
/// Accepts "as-published" / "calibrated"; throws std::invalid_argument otherwise.
Convention parse_convention(std::string_view text);
/// Accepts "G", "sigma", "R", "C"; throws std::invalid_argument otherwise.
Form parse_form(std::string_view text);

// ---------------------------------------------------------------------------
// Convention bridge

enum class RMap { Identity, Negate, ConjugateE, ConjugateOmega, NegateConjugateE };
enum class PrefactorRule { SqrtDetR, SqrtDetER, TraceNormalized };

/// Hypotheses in the fixed order the calibration walks them.
inline constexpr std::array<RMap, 5> kAllRMaps{RMap::Identity, RMap::Negate, RMap::ConjugateE,
                                               RMap::ConjugateOmega, RMap::NegateConjugateE};
inline constexpr std::array<PrefactorRule, 3> kAllPrefactorRules{
    PrefactorRule::SqrtDetR, PrefactorRule::SqrtDetER, PrefactorRule::TraceNormalized};

std::string_view to_string(RMap m);
std::string_view to_string(PrefactorRule r);
RMap parse_r_map(std::string_view text);
PrefactorRule parse_prefactor_rule(std::string_view text);

struct ConventionBridge {
  RMap r_map = RMap::Identity;
  PrefactorRule prefactor_rule = PrefactorRule::SqrtDetR;
  /// Max deviation of the bridged kernel from the oracle kernel over the
  /// calibration suite.
  double residual = 0.0;
};

CMatrix apply_r_map(RMap map, const CMatrix& r);
/// Every map in the hypothesis set is an involution, so this equals apply_r_map.
CMatrix invert_r_map(RMap map, const CMatrix& r);

/// Principal square root with -0.0 imaginary parts folded to +0.0, so that a
/// negative real determinant gives +i|.|^(1/2).
Complex principal_sqrt(Complex x);

/// True when Re(Z^T R Z) > 0 for every nonzero Z = (z, z*).
bool normal_form_decays(const CMatrix& r);

/// 1 / Integral d^2z/pi exp(-1/2 Z^T R Z) over the coherent-state plane.
/// Throws DomainError when the quadratic form does not decay.
Complex trace_normalizer(const CMatrix& r);

Complex apply_prefactor_rule(PrefactorRule rule, const CMatrix& r);

// ---------------------------------------------------------------------------
// State container

class GaussianState {
 public:
  explicit GaussianState(int n_modes, Convention convention = Convention::AsPublished,
                         std::string provenance = {});

  int n_modes() const { return n_modes_; }
  Convention convention() const { return convention_; }
  const std::string& provenance() const { return provenance_; }
  void set_provenance(std::string text) { provenance_ = std::move(text); }

  /// Stores a form; throws std::invalid_argument on wrong size or non-finite entries.
  GaussianState& set(Form form, CMatrix m);
  bool has(Form form) const { return forms_.count(form) != 0; }
  /// Throws std::out_of_range when the form is absent.
  const CMatrix& get(Form form) const;
  std::vector<Form> forms() const;

 private:
  int n_modes_;
  Convention convention_;
  std::string provenance_;
  std::map<Form, CMatrix> forms_;
};

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool pass() const;
};

/// Per-form structure checks plus pairwise conversion consistency. A calibrated
/// R is mapped back through `bridge` before cross-checks; without a bridge
/// those cross-checks are reported as skipped.
ValidationReport validate_state(const GaussianState& state,
                                const ConventionBridge* bridge = nullptr);

// ---------------------------------------------------------------------------
// Conversions (as-published)

CMatrix g_to_sigma(const CMatrix& g);
/// G = 2 Omega arccoth(sigma Omega). DomainError if sigma Omega has a real
/// eigenvalue in [-1, 1].
CMatrix sigma_to_g(const CMatrix& sigma);
/// R = -2 E (sigma + I)^-1
CMatrix sigma_to_r(const CMatrix& sigma);
/// sigma = -2 R^-1 E - I
CMatrix r_to_sigma(const CMatrix& r);
/// R = -2 (E + J (I + e^{-EGJ}) (I - e^{-EGJ})^-1)^-1, evaluated literally.
CMatrix g_to_r(const CMatrix& g);
CMatrix sigma_to_c(const CMatrix& sigma);
/// C = Omega/2 (I + e^{-Omega G}) (I - e^{-Omega G})^-1
CMatrix g_to_c(const CMatrix& g);
CMatrix c_to_sigma(const CMatrix& c);

/// C from sigma when present, otherwise from G. Throws std::invalid_argument
/// when neither form is stored.
CMatrix char_kernel(const GaussianState& state);

/// Covariance matrix from whichever form is available (sigma, G, C, R in that
/// order of preference).
CMatrix sigma_of(const GaussianState& state, const ConventionBridge* bridge = nullptr);

/// Normal-product kernel in the requested convention. Switching conventions
/// needs `bridge`; std::invalid_argument when it is missing.
CMatrix normal_kernel(const GaussianState& state, Convention target,
                      const ConventionBridge* bridge = nullptr);

// ---------------------------------------------------------------------------
// Symplectic spectrum and constructors

struct SymplecticSpectrum {
  std::vector<double> omegas;  // ascending
  std::vector<double> nus;     // (1 + e^-w) / (1 - e^-w)
  double pairing_residual = 0.0;
};

/// Williamson frequencies from the eigenvalues +-i w of J G.
SymplecticSpectrum symplectic_spectrum(const CMatrix& g);

double nu_of_omega(double omega);

/// Mode-wise squeeze blocks [[cosh r, sinh r], [sinh r, cosh r]] embedded in
/// the (a, a^+) block layout.
CMatrix squeeze_symplectic(const std::vector<double>& squeezes);

/// G = diag(w_1..w_n, w_1..w_n); also stores sigma from the closed form.
GaussianState make_thermal(const std::vector<double>& omegas);

/// G = S^T K S with S from squeeze_symplectic; sigma = S^-1 nu S^-T.
GaussianState make_squeezed_thermal(const std::vector<double>& omegas,
                                    const std::vector<double>& squeezes);

struct Prefactor {
  Complex value;
  bool non_real = false;
};

/// As-published: principal sqrt(det R), flagged when non-real.
/// Calibrated: the trace-normalizing constant of :exp(-1/2 A^T R A):.
Prefactor prefactor(const CMatrix& r, Convention mode);

}  // namespace gnp::kernels
