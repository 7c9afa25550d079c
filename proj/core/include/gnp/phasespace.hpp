#pragma once

// Phase-space evaluators over coherent amplitudes Z = (z_1..z_n, z_1*..z_n*)^T.
// Every trace and normalization uses the measure d^2z/pi per mode.

#include "gnp/kernels.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gnp::phase {

inline constexpr std::string_view kMeasureNote = "d^2z/pi per mode";

struct PhasePoint {
  std::vector<Complex> z;

  int n_modes() const { return static_cast<int>(z.size()); }
  /// (z_1..z_n, z_1*..z_n*)
  CVector Z() const;
};

struct Range {
  double min = 0.0;
  double max = 0.0;
  int count = 2;

  /// Equally spaced values including both ends; count == 1 needs min == max.
  std::vector<double> values() const;
};

/// Parses "min:max:count". Throws std::invalid_argument.
Range parse_range(std::string_view text);

struct PhaseGrid {
  int mode_index = 1;  // 1-based mode that varies
  Range re;
  Range im;
  /// Amplitudes of the remaining modes in mode order (n - 1 entries).
  std::vector<Complex> fixed_amplitudes;

  int n_modes() const { return static_cast<int>(fixed_amplitudes.size()) + 1; }
  /// Throws std::invalid_argument when a range is non-finite or malformed.
  void validate() const;
  /// Row-major over (re, im): re is the outer loop.
  std::vector<PhasePoint> points() const;
};

enum class FunctionKind { Husimi, Wigner, CharFn };
std::string_view to_string(FunctionKind kind);
/// Accepts "husimi"/"q", "wigner", "charfn"/"char".
FunctionKind parse_function_kind(std::string_view text);

struct PhaseTable {
  std::vector<PhasePoint> points;
  std::vector<Complex> values;
  FunctionKind function_kind = FunctionKind::Husimi;
  kernels::Convention convention = kernels::Convention::AsPublished;
  std::string measure_note{kMeasureNote};
  int mode_index = 1;
};

/// As-published: sqrt(det R) exp(-1/2 Z^T R Z) with the principal root.
/// Calibrated: bridge-mapped R with the trace-normalizing prefactor.
Complex husimi_q(const kernels::GaussianState& state, const PhasePoint& pt, kernels::Convention convention,
                 const kernels::ConventionBridge* bridge = nullptr);

/// (det sigma)^(-1/2) exp(-Z^+ sigma^-1 Z)
Complex wigner(const kernels::GaussianState& state, const PhasePoint& pt);

/// exp(-1/2 Z^+ C Z)
Complex char_fn(const kernels::GaussianState& state, const PhasePoint& pt);

/// Integral (d^2z/pi)^n exp(-1/2 Z^+ V Z) exp(Z^+ X).
///
/// As-published: (det V)^(-1/2) exp(-1/2 X^T E V^-1 X).
/// Calibrated: the completed-square value, exp(+1/2 X^T E V^-1 X) for V with
/// E V E = conj(V); V is first replaced by 1/2 (V + E V^T E), which leaves
/// Z^+ V Z unchanged, so the result is exact for every decaying V.
/// DomainError unless the Hermitian part of V is positive definite.
Complex gauss_integral(const CMatrix& v, const CVector& x, kernels::Convention convention);

/// Errors are rethrown with the failing point appended to the message.
PhaseTable grid_eval(const kernels::GaussianState& state, FunctionKind kind, const PhaseGrid& grid,
                     kernels::Convention convention, const kernels::ConventionBridge* bridge = nullptr);

/// Header lines "# key: value", then "re,im,value_re,value_im" with 17
/// significant digits. Only the varying mode's amplitude is written.
void write_csv(const PhaseTable& table, std::ostream& out);
/// Inverse of write_csv; single-mode points. Throws std::runtime_error on
/// malformed input.
PhaseTable read_csv(std::istream& in);

struct QuadratureSpec {
  int points_per_axis = 201;
  /// 0 selects max(4, 4 sqrt(max|sigma|)).
  double box_radius = 0.0;
};

struct NormCheck {
  Complex value;
  double box_radius = 0.0;
  int points_per_axis = 0;
  /// Bound on the integral of |Q| outside the box.
  double tail_bound = 0.0;
};

/// Trapezoid value of Integral Q d^2z/pi for a single-mode state. Throws
/// DomainError when Q does not decay; the message carries the magnitude of the
/// box integral and flags it as non-unit.
NormCheck q_norm_check(const kernels::GaussianState& state, kernels::Convention convention,
                       const kernels::ConventionBridge* bridge = nullptr, QuadratureSpec spec = {});

}  // namespace gnp::phase
