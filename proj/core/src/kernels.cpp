#include "gnp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gnp::kernels {

using mat::E;
using mat::I;
using mat::J;
using mat::Omega;

std::string_view to_string(Convention c) {
  return c == Convention::AsPublished ? "as-published" : "calibrated";
}

std::string_view to_string(Form f) {
  switch (f) {
    case Form::G: return "G";
    case Form::Sigma: return "sigma";
    case Form::R: return "R";
    case Form::C: return "C";
  }
  return "?";
}

Convention parse_convention(std::string_view text) {
  if (text == "as-published") return Convention::AsPublished;
  if (text == "calibrated") return Convention::Calibrated;
  throw std::invalid_argument("unknown convention '" + std::string(text) + "'");
}

Form parse_form(std::string_view text) {
  if (text == "G") return Form::G;
  if (text == "sigma") return Form::Sigma;
  if (text == "R") return Form::R;
  if (text == "C") return Form::C;
  throw std::invalid_argument("unknown form '" + std::string(text) + "'");
}

std::string_view to_string(RMap m) {
  switch (m) {
    case RMap::Identity: return "identity";
    case RMap::Negate: return "negate";
    case RMap::ConjugateE: return "conjugate-by-E";
    case RMap::ConjugateOmega: return "conjugate-by-Omega";
    case RMap::NegateConjugateE: return "negate-conjugate-by-E";
  }
  return "?";
}

std::string_view to_string(PrefactorRule r) {
  switch (r) {
    case PrefactorRule::SqrtDetR: return "sqrt-det-R";
    case PrefactorRule::SqrtDetER: return "sqrt-det-ER";
    case PrefactorRule::TraceNormalized: return "trace-normalized";
  }
  return "?";
}

RMap parse_r_map(std::string_view text) {
  for (RMap m : kAllRMaps) {
    if (to_string(m) == text) return m;
  }
  throw std::invalid_argument("unknown r_map '" + std::string(text) + "'");
}

PrefactorRule parse_prefactor_rule(std::string_view text) {
  for (PrefactorRule r : kAllPrefactorRules) {
    if (to_string(r) == text) return r;
  }
  throw std::invalid_argument("unknown prefactor rule '" + std::string(text) + "'");
}

CMatrix apply_r_map(RMap map, const CMatrix& r) {
  const int n = mat::modes_of(r);
  switch (map) {
    case RMap::Identity: return r;
    case RMap::Negate: return -r;
    case RMap::ConjugateE: return E(n) * r * E(n);
    case RMap::ConjugateOmega: return Omega(n) * r * Omega(n);
    case RMap::NegateConjugateE: return -(E(n) * r * E(n));
  }
  return r;
}

CMatrix invert_r_map(RMap map, const CMatrix& r) { return apply_r_map(map, r); }

Complex principal_sqrt(Complex x) {
  if (x.imag() == 0.0) x.imag(0.0);  // folds -0.0
  return std::sqrt(x);
}

namespace {

// Z = T x with x = (Re z_1..Re z_n, Im z_1..Im z_n).
CMatrix coherent_coordinates(int n) {
  const Eigen::Index m = n;
  const Complex i1(0.0, 1.0);
  CMatrix t = CMatrix::Zero(2 * m, 2 * m);
  t.topLeftCorner(m, m).setIdentity();
  t.bottomLeftCorner(m, m).setIdentity();
  t.topRightCorner(m, m) = i1 * CMatrix::Identity(m, m);
  t.bottomRightCorner(m, m) = -i1 * CMatrix::Identity(m, m);
  return t;
}

// Symmetric complex form K with Z^T R Z = x^T K x for real x.
CMatrix real_coordinate_form(const CMatrix& r) {
  const CMatrix t = coherent_coordinates(mat::modes_of(r));
  const CMatrix k = t.transpose() * r * t;
  return 0.5 * (k + k.transpose());
}

double min_real_sym_eigenvalue(const CMatrix& k) {
  const Eigen::MatrixXd re = 0.5 * (k.real() + k.real().transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(re, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool is_real(const CMatrix& m, double rel_tol) {
  return m.imag().cwiseAbs().maxCoeff() <= rel_tol * std::max(1.0, mat::max_abs(m));
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

bool normal_form_decays(const CMatrix& r) {
  return min_real_sym_eigenvalue(real_coordinate_form(r)) > 0.0;
}

Complex trace_normalizer(const CMatrix& r) {
  const int n = mat::modes_of(r);
  const CMatrix k = real_coordinate_form(r);
  const double lowest = min_real_sym_eigenvalue(k);
  if (!(lowest > 0.0)) {
    throw DomainError("trace normalization diverges: Re(Z^T R Z) is not positive definite (lowest "
                      "eigenvalue " + fmt(lowest) + ")");
  }
  // With Re K > 0 every eigenvalue of K has positive real part; the product of
  // principal roots is the analytic continuation of sqrt(det K).
  Eigen::ComplexEigenSolver<CMatrix> solver(k, false);
  Complex root(1.0, 0.0);
  for (Eigen::Index j = 0; j < solver.eigenvalues().size(); ++j) root *= std::sqrt(solver.eigenvalues()[j]);
  // Integral d^2n x / pi^n exp(-1/2 x^T K x) = 2^n / sqrt(det K)
  return root / std::ldexp(1.0, n);
}

Complex apply_prefactor_rule(PrefactorRule rule, const CMatrix& r) {
  const int n = mat::modes_of(r);
  switch (rule) {
    case PrefactorRule::SqrtDetR: return principal_sqrt(mat::determinant(r));
    case PrefactorRule::SqrtDetER: return principal_sqrt(mat::determinant(E(n) * r));
    case PrefactorRule::TraceNormalized: return trace_normalizer(r);
  }
  return {};
}

// ---------------------------------------------------------------------------

GaussianState::GaussianState(int n_modes, Convention convention, std::string provenance)
    : n_modes_(n_modes), convention_(convention), provenance_(std::move(provenance)) {
  if (n_modes < 1) throw std::invalid_argument("GaussianState: n_modes must be >= 1");
}

GaussianState& GaussianState::set(Form form, CMatrix m) {
  if (m.rows() != 2 * n_modes_ || m.cols() != 2 * n_modes_) {
    std::ostringstream os;
    os << "form " << to_string(form) << " must be " << 2 * n_modes_ << "x" << 2 * n_modes_ << ", got "
       << m.rows() << "x" << m.cols();
    throw std::invalid_argument(os.str());
  }
  if (!mat::all_finite(m)) {
    throw std::invalid_argument("form " + std::string(to_string(form)) + " has non-finite entries");
  }
  forms_[form] = std::move(m);
  return *this;
}

const CMatrix& GaussianState::get(Form form) const {
  auto it = forms_.find(form);
  if (it == forms_.end()) throw std::out_of_range("state has no " + std::string(to_string(form)) + " form");
  return it->second;
}

std::vector<Form> GaussianState::forms() const {
  std::vector<Form> out;
  for (const auto& [form, _] : forms_) out.push_back(form);
  return out;
}

bool ValidationReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

namespace {

CheckResult check_leq(std::string name, double residual, double tolerance, std::string detail = {}) {
  return {std::move(name), residual, tolerance, residual <= tolerance, std::move(detail)};
}

double symmetry_residual(const CMatrix& m) {
  return mat::max_abs(m - m.transpose()) / std::max(1.0, mat::max_abs(m));
}

void add_cross_check(ValidationReport& report, const std::string& name, const auto& compute,
                     const CMatrix& stored) {
  try {
    const CMatrix derived = compute();
    report.checks.push_back(check_leq(name, mat::relative_deviation(derived, stored), kTolConv));
  } catch (const std::exception& e) {
    report.checks.push_back({name, std::numeric_limits<double>::infinity(), kTolConv, false, e.what()});
  }
}

}  // namespace

ValidationReport validate_state(const GaussianState& state, const ConventionBridge* bridge) {
  ValidationReport report;
  if (state.forms().empty()) {
    report.checks.push_back({"forms.present", 1.0, 0.0, false, "state carries no kernel"});
    return report;
  }

  if (state.has(Form::G)) {
    const CMatrix& g = state.get(Form::G);
    const double scale = std::max(1.0, mat::max_abs(g));
    report.checks.push_back(check_leq("G.real", g.imag().cwiseAbs().maxCoeff() / scale, kTolConv));
    report.checks.push_back(check_leq("G.symmetric", symmetry_residual(g), kTolConv));
    const double lowest = min_real_sym_eigenvalue(g);
    report.checks.push_back({"G.positive_definite", lowest, 0.0, lowest > 0.0,
                             "lowest eigenvalue " + fmt(lowest)});
  }
  if (state.has(Form::Sigma)) {
    const CMatrix& s = state.get(Form::Sigma);
    report.checks.push_back(check_leq("sigma.symmetric", symmetry_residual(s), kTolConv));
    Eigen::ComplexEigenSolver<CMatrix> solver(s - I(state.n_modes()), false);
    double lowest = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k)
      lowest = std::min(lowest, solver.eigenvalues()[k].real());
    report.checks.push_back({"sigma.above_vacuum", lowest, -kTolConv, lowest >= -kTolConv,
                             "lowest Re eig(sigma - I) " + fmt(lowest)});
  }
  if (state.has(Form::R)) {
    const CMatrix& r = state.get(Form::R);
    const double rcond = r.partialPivLu().rcond();
    report.checks.push_back({"R.nonsingular", rcond, 1.0 / mat::kConditionLimit,
                             rcond * mat::kConditionLimit >= 1.0, "rcond " + fmt(rcond)});
  }
  if (state.has(Form::C)) {
    report.checks.push_back(check_leq("C.symmetric", symmetry_residual(state.get(Form::C)), kTolConv));
  }

  // Cross-form consistency. R is compared in the as-published convention.
  std::optional<CMatrix> r_published;
  if (state.has(Form::R)) {
    if (state.convention() == Convention::AsPublished) {
      r_published = state.get(Form::R);
    } else if (bridge != nullptr) {
      r_published = invert_r_map(bridge->r_map, state.get(Form::R));
    } else if (state.has(Form::G) || state.has(Form::Sigma)) {
      report.checks.push_back({"R.cross_checks", 0.0, kTolConv, true,
                               "skipped: calibrated R without a convention bridge"});
    }
  }

  if (state.has(Form::G) && state.has(Form::Sigma)) {
    add_cross_check(report, "G~sigma", [&] { return g_to_sigma(state.get(Form::G)); },
                    state.get(Form::Sigma));
  }
  if (state.has(Form::G) && r_published) {
    add_cross_check(report, "G~R", [&] { return g_to_r(state.get(Form::G)); }, *r_published);
  }
  if (state.has(Form::Sigma) && r_published) {
    add_cross_check(report, "sigma~R", [&] { return sigma_to_r(state.get(Form::Sigma)); }, *r_published);
  }
  if (state.has(Form::C)) {
    if (state.has(Form::Sigma)) {
      add_cross_check(report, "sigma~C", [&] { return sigma_to_c(state.get(Form::Sigma)); },
                      state.get(Form::C));
    } else if (state.has(Form::G)) {
      add_cross_check(report, "G~C", [&] { return g_to_c(state.get(Form::G)); }, state.get(Form::C));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

namespace {

// (1 + e^-x) / (1 - e^-x), written as coth(x / 2) so large |x| stays finite.
Complex exponential_ratio(Complex x) { return mat::scalar::coth(0.5 * x); }

}  // namespace

CMatrix g_to_sigma(const CMatrix& g) {
  const int n = mat::modes_of(g);
  const CMatrix half = 0.5 * Omega(n) * g;
  return mat::mat_analytic(half, mat::scalar::coth) * Omega(n);
}

CMatrix sigma_to_g(const CMatrix& sigma) {
  const int n = mat::modes_of(sigma);
  const mat::EigDecomp decomp = mat::eig_decompose(sigma * Omega(n));
  for (Eigen::Index k = 0; k < decomp.values.size(); ++k) {
    const Complex v = decomp.values[k];
    const double tol = 1e-12 * std::max(1.0, std::abs(v));
    if (std::abs(v.imag()) <= tol && std::abs(v.real()) <= 1.0 + tol) {
      std::ostringstream os;
      os << "sigma_to_g: eigenvalue " << v.real()
         << " of sigma*Omega lies in [-1, 1] (unphysical or vacuum boundary)";
      throw DomainError(os.str());
    }
  }
  return 2.0 * Omega(n) * mat::mat_analytic(decomp, mat::scalar::arccoth);
}

CMatrix sigma_to_r(const CMatrix& sigma) {
  const int n = mat::modes_of(sigma);
  return -2.0 * E(n) * mat::inverse(sigma + I(n));
}

CMatrix r_to_sigma(const CMatrix& r) {
  const int n = mat::modes_of(r);
  return -2.0 * mat::dense_solve(r, E(n)) - I(n);
}

CMatrix g_to_r(const CMatrix& g) {
  const int n = mat::modes_of(g);
  const CMatrix ratio = mat::mat_analytic(E(n) * g * J(n), exponential_ratio);
  return -2.0 * mat::inverse(E(n) + J(n) * ratio);
}

CMatrix sigma_to_c(const CMatrix& sigma) {
  const int n = mat::modes_of(sigma);
  return 0.5 * Omega(n) * sigma * Omega(n);
}

CMatrix g_to_c(const CMatrix& g) {
  const int n = mat::modes_of(g);
  return 0.5 * Omega(n) * mat::mat_analytic(Omega(n) * g, exponential_ratio);
}

CMatrix c_to_sigma(const CMatrix& c) {
  const int n = mat::modes_of(c);
  return 2.0 * Omega(n) * c * Omega(n);
}

CMatrix char_kernel(const GaussianState& state) {
  if (state.has(Form::C)) return state.get(Form::C);
  if (state.has(Form::Sigma)) return sigma_to_c(state.get(Form::Sigma));
  if (state.has(Form::G)) return g_to_c(state.get(Form::G));
  throw std::invalid_argument("char_kernel: state needs a sigma or G form");
}

CMatrix sigma_of(const GaussianState& state, const ConventionBridge* bridge) {
  if (state.has(Form::Sigma)) return state.get(Form::Sigma);
  if (state.has(Form::G)) return g_to_sigma(state.get(Form::G));
  if (state.has(Form::C)) return c_to_sigma(state.get(Form::C));
  if (state.has(Form::R)) return r_to_sigma(normal_kernel(state, Convention::AsPublished, bridge));
  throw std::invalid_argument("state carries no kernel");
}

CMatrix normal_kernel(const GaussianState& state, Convention target, const ConventionBridge* bridge) {
  auto require_bridge = [&] {
    if (bridge == nullptr) throw std::invalid_argument("switching R conventions needs a convention bridge");
  };

  if (state.has(Form::R)) {
    const CMatrix& r = state.get(Form::R);
    if (state.convention() == target) return r;
    require_bridge();
    return target == Convention::Calibrated ? apply_r_map(bridge->r_map, r)
                                            : invert_r_map(bridge->r_map, r);
  }

  const CMatrix published = state.has(Form::G) ? g_to_r(state.get(Form::G)) : sigma_to_r(sigma_of(state));
  if (target == Convention::AsPublished) return published;
  require_bridge();
  return apply_r_map(bridge->r_map, published);
}

// ---------------------------------------------------------------------------

double nu_of_omega(double omega) {
  return (1.0 + std::exp(-omega)) / (1.0 - std::exp(-omega));
}

SymplecticSpectrum symplectic_spectrum(const CMatrix& g) {
  const int n = mat::modes_of(g);
  if (!is_real(g, 1e-12) || symmetry_residual(g) > 1e-12) {
    throw DomainError("symplectic_spectrum: G must be real symmetric");
  }
  if (!(min_real_sym_eigenvalue(g) > 0.0)) {
    throw DomainError("symplectic_spectrum: G must be positive definite");
  }

  Eigen::ComplexEigenSolver<CMatrix> solver(J(n) * g, false);
  std::vector<double> upper, lower;
  double real_part = 0.0;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    const Complex v = solver.eigenvalues()[k];
    real_part = std::max(real_part, std::abs(v.real()));
    (v.imag() > 0.0 ? upper : lower).push_back(std::abs(v.imag()));
  }
  if (upper.size() != lower.size()) {
    throw DomainError("symplectic_spectrum: eigenvalues of JG do not form +-i w pairs");
  }
  std::sort(upper.begin(), upper.end());
  std::sort(lower.begin(), lower.end());

  SymplecticSpectrum out;
  double mismatch = real_part;
  for (std::size_t k = 0; k < upper.size(); ++k) mismatch = std::max(mismatch, std::abs(upper[k] - lower[k]));
  const double scale = std::max(1.0, upper.empty() ? 1.0 : upper.back());
  out.pairing_residual = mismatch / scale;
  if (out.pairing_residual > 1e-9) {
    throw DomainError("symplectic_spectrum: pairing residual " + fmt(out.pairing_residual) +
                      " (G outside the Williamson class)");
  }
  for (std::size_t k = 0; k < upper.size(); ++k) {
    const double w = 0.5 * (upper[k] + lower[k]);
    out.omegas.push_back(w);
    out.nus.push_back(nu_of_omega(w));
  }
  return out;
}

CMatrix squeeze_symplectic(const std::vector<double>& squeezes) {
  if (squeezes.empty()) throw std::invalid_argument("squeeze_symplectic: need at least one mode");
  const int n = static_cast<int>(squeezes.size());
  CMatrix s = CMatrix::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    const double c = std::cosh(squeezes[k]);
    const double sh = std::sinh(squeezes[k]);
    s(k, k) = c;
    s(k, n + k) = sh;
    s(n + k, k) = sh;
    s(n + k, n + k) = c;
  }
  return s;
}

namespace {

void require_positive(const std::vector<double>& omegas) {
  if (omegas.empty()) throw std::invalid_argument("need at least one mode frequency");
  for (double w : omegas) {
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("mode frequency must be positive, got " + fmt(w));
  }
}

std::string join(const std::vector<double>& values) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t k = 0; k < values.size(); ++k) os << (k ? "," : "") << values[k];
  return os.str();
}

CMatrix doubled_diagonal(const std::vector<double>& values) {
  const auto n = static_cast<Eigen::Index>(values.size());
  CMatrix d = CMatrix::Zero(2 * n, 2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    d(k, k) = values[k];
    d(n + k, n + k) = values[k];
  }
  return d;
}

}  // namespace

GaussianState make_thermal(const std::vector<double>& omegas) {
  require_positive(omegas);
  std::vector<double> nus;
  for (double w : omegas) nus.push_back(nu_of_omega(w));
  GaussianState state(static_cast<int>(omegas.size()), Convention::AsPublished, "thermal omegas=" + join(omegas));
  state.set(Form::G, doubled_diagonal(omegas));
  state.set(Form::Sigma, doubled_diagonal(nus));
  return state;
}

GaussianState make_squeezed_thermal(const std::vector<double>& omegas, const std::vector<double>& squeezes) {
  require_positive(omegas);
  if (squeezes.size() != omegas.size()) {
    throw std::invalid_argument("make_squeezed_thermal: one squeeze parameter per mode");
  }
  for (double r : squeezes) {
    if (!std::isfinite(r)) throw DomainError("squeeze parameter must be finite");
  }
  std::vector<double> nus;
  for (double w : omegas) nus.push_back(nu_of_omega(w));

  const CMatrix s = squeeze_symplectic(squeezes);
  const CMatrix s_inv = mat::inverse(s);
  GaussianState state(static_cast<int>(omegas.size()), Convention::AsPublished,
                      "squeezed-thermal omegas=" + join(omegas) + " r=" + join(squeezes));
  state.set(Form::G, s.transpose() * doubled_diagonal(omegas) * s);
  state.set(Form::Sigma, s_inv * doubled_diagonal(nus) * s_inv.transpose());
  return state;
}

Prefactor prefactor(const CMatrix& r, Convention mode) {
  const Complex det = mat::determinant(r);
  if (det == Complex(0.0, 0.0) || !(r.partialPivLu().rcond() * mat::kConditionLimit >= 1.0)) {
    throw NumericalError("prefactor: R is singular");
  }
  Prefactor out;
  out.value = mode == Convention::AsPublished ? principal_sqrt(det) : trace_normalizer(r);
  out.non_real = std::abs(out.value.imag()) > 1e-12 * std::abs(out.value);
  return out;
}

}  // namespace gnp::kernels
