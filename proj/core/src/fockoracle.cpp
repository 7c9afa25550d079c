#include "gnp/fockoracle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace gnp::fock {

using kernels::ConventionBridge;
using kernels::PrefactorRule;
using kernels::RMap;

namespace {

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::Index power(int base, int exponent) {
  Eigen::Index out = 1;
  for (int k = 0; k < exponent; ++k) out *= base;
  return out;
}

// Positions of the cutoff^n retained basis states inside a larger per-mode space.
std::vector<Eigen::Index> embed_indices(int n_modes, int cutoff, int larger) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index idx = 0; idx < power(cutoff, n_modes); ++idx) {
    Eigen::Index rest = idx, embedded = 0, scale = 1;
    for (int k = 0; k < n_modes; ++k) {
      embedded += (rest % cutoff) * scale;
      rest /= cutoff;
      scale *= larger;
    }
    keep.push_back(embedded);
  }
  return keep;
}

bool is_hermitian(const CMatrix& m) {
  return mat::max_abs(m - m.adjoint()) <= 1e-12 * std::max(1.0, mat::max_abs(m));
}

void require_cutoff(int cutoff) {
  if (cutoff < 2) throw std::invalid_argument("Fock cutoff must be >= 2");
}

// Mass on basis states where some mode sits on the top level.
double top_level_mass(const CMatrix& rho, int n_modes, int cutoff) {
  double mass = 0.0;
  for (Eigen::Index idx = 0; idx < rho.rows(); ++idx) {
    Eigen::Index rest = idx;
    bool top = false;
    for (int m = 0; m < n_modes; ++m) {
      if (rest % cutoff == cutoff - 1) top = true;
      rest /= cutoff;
    }
    if (top) mass += rho(idx, idx).real();
  }
  return mass;
}

void apply_tail_policy(Density& d, const std::string& what) {
  d.tail_mass = top_level_mass(d.rho.matrix, d.rho.n_modes, d.rho.cutoff);
  if (d.tail_mass > kTailFail) {
    std::ostringstream os;
    os << what << ": tail mass " << d.tail_mass << " on level " << d.rho.cutoff - 1 << " exceeds " << kTailFail
       << "; raise the cutoff";
    throw TruncationError(os.str());
  }
  if (d.tail_mass > kTailWarn) {
    std::ostringstream os;
    os << what << ": tail mass " << d.tail_mass << " above " << kTailWarn;
    d.warning = os.str();
  }
}

void require_positive(const std::vector<double>& omegas) {
  if (omegas.empty()) throw std::invalid_argument("need at least one mode");
  for (double w : omegas) {
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("mode frequency must be positive and finite");
  }
}

std::string join(const std::vector<double>& values) {
  std::ostringstream os;
  os.precision(6);
  for (std::size_t k = 0; k < values.size(); ++k) os << (k ? "," : "") << values[k];
  return os.str();
}

}  // namespace

FockOperator annihilator(int n_modes, int mode, int cutoff) {
  require_cutoff(cutoff);
  if (n_modes < 1) throw std::invalid_argument("annihilator: n_modes must be >= 1");
  if (mode < 1 || mode > n_modes) throw std::invalid_argument("annihilator: mode outside 1..n_modes");
  CMatrix single = CMatrix::Zero(cutoff, cutoff);
  for (int k = 1; k < cutoff; ++k) single(k - 1, k) = std::sqrt(static_cast<double>(k));

  FockOperator op;
  op.n_modes = n_modes;
  op.cutoff = cutoff;
  op.matrix = kron(kron(CMatrix::Identity(power(cutoff, mode - 1), power(cutoff, mode - 1)), single),
                   CMatrix::Identity(power(cutoff, n_modes - mode), power(cutoff, n_modes - mode)));
  return op;
}

FockOperator quad_operator(const CMatrix& m, int cutoff) {
  require_cutoff(cutoff);
  const int n = mat::modes_of(m);
  const int padded = cutoff + 1;

  std::vector<CMatrix> ladder;
  for (int k = 1; k <= n; ++k) ladder.push_back(annihilator(n, k, padded).matrix);
  for (int k = 0; k < n; ++k) ladder.push_back(ladder[k].adjoint());

  const Eigen::Index dim = power(padded, n);
  CMatrix full = CMatrix::Zero(dim, dim);
  for (int i = 0; i < 2 * n; ++i) {
    for (int j = 0; j < 2 * n; ++j) {
      if (m(i, j) != Complex(0.0, 0.0)) full += (0.5 * m(i, j)) * (ladder[i] * ladder[j]);
    }
  }

  const std::vector<Eigen::Index> keep = embed_indices(n, cutoff, padded);
  FockOperator op;
  op.n_modes = n;
  op.cutoff = cutoff;
  op.matrix.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    for (std::size_t c = 0; c < keep.size(); ++c) op.matrix(r, c) = full(keep[r], keep[c]);
  }
  op.hermitian = is_hermitian(op.matrix);
  return op;
}

std::string PhysicalSpec::label() const {
  if (kind == SpecKind::Thermal) return "thermal w=" + join(omegas);
  return "squeezed-thermal w=" + join(omegas) + " r=" + join(squeezes);
}

PhysicalSpec thermal_spec(const std::vector<double>& omegas) {
  require_positive(omegas);
  const auto n = static_cast<Eigen::Index>(omegas.size());
  PhysicalSpec spec;
  spec.kind = SpecKind::Thermal;
  spec.omegas = omegas;
  spec.squeezes.assign(omegas.size(), 0.0);
  spec.operator_kernel = CMatrix::Zero(2 * n, 2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    spec.operator_kernel(k, n + k) = omegas[k];
    spec.operator_kernel(n + k, k) = omegas[k];
  }
  return spec;
}

PhysicalSpec squeezed_thermal_spec(const std::vector<double>& omegas, const std::vector<double>& squeezes) {
  if (squeezes.size() != omegas.size()) throw std::invalid_argument("one squeeze parameter per mode");
  PhysicalSpec spec = thermal_spec(omegas);
  spec.kind = SpecKind::SqueezedThermal;
  spec.squeezes = squeezes;
  const CMatrix s = kernels::squeeze_symplectic(squeezes);
  spec.operator_kernel = s.transpose() * spec.operator_kernel * s;
  return spec;
}

kernels::GaussianState published_state(const PhysicalSpec& spec) {
  if (spec.kind == SpecKind::Thermal) return kernels::make_thermal(spec.omegas);
  return kernels::make_squeezed_thermal(spec.omegas, spec.squeezes);
}

namespace {

constexpr double kWorkingTail = 1e-14;
constexpr double kGaussianityProbe = 0.3;
constexpr Eigen::Index kMaxWorkingDim = 1600;

CMatrix normalized_exponential(const CMatrix& generator) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (generator + generator.adjoint()));
  if (solver.info() != Eigen::Success) throw NumericalError("gaussian_density: eigensolver failed");
  const Eigen::VectorXd lambda = solver.eigenvalues();
  const Eigen::VectorXd weights = (-(lambda.array() - lambda.minCoeff())).exp();
  const CMatrix& v = solver.eigenvectors();
  return v * (weights / weights.sum()).cast<Complex>().asDiagonal() * v.adjoint();
}

}  // namespace

Density gaussian_density(const PhysicalSpec& spec, int cutoff) {
  require_cutoff(cutoff);
  const int n = spec.n_modes();
  int working = 2 * cutoff;
  CMatrix full;
  for (;;) {
    const FockOperator g = quad_operator(spec.operator_kernel, working);
    if (!g.hermitian) throw DomainError("gaussian_density: exponent operator is not Hermitian");
    full = normalized_exponential(g.matrix);
    const int grown = working + std::max(8, working / 2);
    if (top_level_mass(full, n, working) <= kWorkingTail || power(grown, n) > kMaxWorkingDim) break;
    working = grown;
  }

  const std::vector<Eigen::Index> keep = embed_indices(n, cutoff, working);
  Density d;
  d.rho.n_modes = n;
  d.rho.cutoff = cutoff;
  d.rho.matrix.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    for (std::size_t c = 0; c < keep.size(); ++c) d.rho.matrix(r, c) = full(keep[r], keep[c]);
  }
  d.rho.matrix = 0.5 * (d.rho.matrix + d.rho.matrix.adjoint());
  d.rho.hermitian = true;
  apply_tail_policy(d, "gaussian_density(" + spec.label() + ")");
  return d;
}

CoherentAmplitudes coherent_amplitudes(const std::vector<Complex>& z, int cutoff) {
  require_cutoff(cutoff);
  if (z.empty()) throw std::invalid_argument("coherent state needs at least one amplitude");
  CoherentAmplitudes out;
  out.vector = CVector::Ones(1);
  for (const Complex& zk : z) {
    CVector single(cutoff);
    single[0] = std::exp(-0.5 * std::norm(zk));
    for (int k = 1; k < cutoff; ++k) single[k] = single[k - 1] * zk / std::sqrt(static_cast<double>(k));
    out.vector = kron(out.vector, single);
  }
  out.norm_deficit = std::max(0.0, 1.0 - out.vector.squaredNorm());
  return out;
}

CVector coherent_vector(const std::vector<Complex>& z, int cutoff) {
  CoherentAmplitudes amp = coherent_amplitudes(z, cutoff);
  if (amp.norm_deficit > 1e-8) {
    std::ostringstream os;
    os << "coherent_vector: norm deficit " << amp.norm_deficit << " at cutoff " << cutoff;
    throw TruncationError(os.str());
  }
  return amp.vector;
}

double q_of_rho(const FockOperator& rho, const phase::PhasePoint& pt) {
  if (pt.n_modes() != rho.n_modes) throw std::invalid_argument("q_of_rho: phase point / operator mode mismatch");
  const CVector v = coherent_vector(pt.z, rho.cutoff);
  const Complex q = v.dot(rho.matrix * v);
  if (rho.hermitian && std::abs(q.imag()) > 1e-10 * std::max(1.0, std::abs(q))) {
    throw NumericalError("q_of_rho: Hermitian density gave a complex Q value");
  }
  return q.real();
}

HessianKernel r_from_q_hessian(const FockOperator& rho, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("r_from_q_hessian: step must be positive");
  const int n = rho.n_modes;
  const int dim = 2 * n;

  auto f = [&](const Eigen::VectorXd& x) {
    phase::PhasePoint pt;
    for (int k = 0; k < n; ++k) pt.z.emplace_back(x[k], x[n + k]);
    const double q = q_of_rho(rho, pt);
    if (!(q > 0.0)) throw NumericalError("r_from_q_hessian: Q is not positive near the origin");
    return -std::log(q);
  };
  auto unit = [&](int i, double scale) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e[i] = scale;
    return e;
  };

  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(dim);
  const double f0 = f(origin);
  Eigen::MatrixXd hess(dim, dim);
  HessianKernel out;
  const double h2 = step * step;
  for (int i = 0; i < dim; ++i) {
    const double plus = f(unit(i, step));
    const double minus = f(unit(i, -step));
    hess(i, i) = (plus - 2.0 * f0 + minus) / h2;
    const double near = f(unit(i, kGaussianityProbe));
    const double odd = std::abs(near - f(unit(i, -kGaussianityProbe)));
    const double quartic = std::abs((f(unit(i, 2.0 * kGaussianityProbe)) - f0) - 4.0 * (near - f0));
    out.gaussianity_residual =
        std::max(out.gaussianity_residual, std::max(odd, quartic) / (kGaussianityProbe * kGaussianityProbe));
    for (int j = 0; j < i; ++j) {
      const double pp = f(unit(i, step) + unit(j, step));
      const double pm = f(unit(i, step) + unit(j, -step));
      const double mp = f(unit(i, -step) + unit(j, step));
      const double mm = f(unit(i, -step) + unit(j, -step));
      hess(i, j) = hess(j, i) = (pp - pm - mp + mm) / (4.0 * h2);
    }
  }
  if (out.gaussianity_residual > 1e-5) {
    std::ostringstream os;
    os << "log Q deviates from a centered quadratic (residual " << out.gaussianity_residual << ")";
    out.warning = os.str();
  }

  // x^T (T^T R T) x = Z^T R Z with Z = T x
  const auto m = static_cast<Eigen::Index>(n);
  const Complex i1(0.0, 1.0);
  CMatrix t_inv(dim, dim);
  t_inv << CMatrix::Identity(m, m), CMatrix::Identity(m, m), -i1 * CMatrix::Identity(m, m),
      i1 * CMatrix::Identity(m, m);
  t_inv *= 0.5;
  out.r = t_inv.transpose() * hess.cast<Complex>() * t_inv;
  out.r = 0.5 * (out.r + out.r.transpose());
  return out;
}

Density liouville_step(const FockOperator& rho0, const CMatrix& h, double t) {
  if (mat::modes_of(h) != rho0.n_modes) throw std::invalid_argument("liouville_step: H / density mode mismatch");
  if (!std::isfinite(t)) throw std::invalid_argument("liouville_step: time must be finite");
  const CMatrix e = mat::E(rho0.n_modes);
  if (mat::max_abs(e * h * e - h.conjugate()) > 1e-12 * std::max(1.0, mat::max_abs(h))) {
    throw DomainError("liouville_step: 1/2 A^T H A is not Hermitian (E H E != conj(H))");
  }
  const FockOperator ham = quad_operator(h, rho0.cutoff);
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (ham.matrix + ham.matrix.adjoint()));
  if (solver.info() != Eigen::Success) throw NumericalError("liouville_step: eigensolver failed");
  const CVector phases = (solver.eigenvalues().cast<Complex>() * Complex(0.0, -t)).array().exp();
  const CMatrix u = solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();

  Density d;
  d.rho.n_modes = rho0.n_modes;
  d.rho.cutoff = rho0.cutoff;
  d.rho.matrix = u * rho0.matrix * u.adjoint();
  d.rho.hermitian = rho0.hermitian;
  if (d.rho.hermitian) d.rho.matrix = 0.5 * (d.rho.matrix + d.rho.matrix.adjoint());
  apply_tail_policy(d, "liouville_step");
  return d;
}

DerivativeIdentityReport derivative_identity_check(const FockOperator& rho, Complex z, double step) {
  if (rho.n_modes != 1) throw std::invalid_argument("derivative_identity_check: single-mode densities only");
  if (!(step > 0.0)) throw std::invalid_argument("derivative_identity_check: step must be positive");

  DerivativeIdentityReport report;
  report.z = z;
  auto q = [&](Complex w) {
    const CoherentAmplitudes amp = coherent_amplitudes({w}, rho.cutoff);
    report.norm_deficit = std::max(report.norm_deficit, amp.norm_deficit);
    return amp.vector.dot(rho.matrix * amp.vector);
  };

  const Complex i1(0.0, 1.0);
  const Complex dx = (q(z + step) - q(z - step)) / (2.0 * step);
  const Complex dy = (q(z + i1 * step) - q(z - i1 * step)) / (2.0 * step);
  const Complex d_z = 0.5 * (dx - i1 * dy);
  const Complex d_zbar = 0.5 * (dx + i1 * dy);

  const CoherentAmplitudes amp = coherent_amplitudes({z}, rho.cutoff);
  report.norm_deficit = std::max(report.norm_deficit, amp.norm_deficit);
  const CVector& v = amp.vector;
  const CMatrix a = annihilator(1, 1, rho.cutoff).matrix;
  const CMatrix ad = a.adjoint();
  const Complex q0 = v.dot(rho.matrix * v);
  const Complex zc = std::conj(z);

  const Complex rho_a = v.dot(rho.matrix * a * v);
  const Complex rho_ad = v.dot(rho.matrix * ad * v);
  const Complex a_rho = v.dot(a * rho.matrix * v);
  const Complex ad_rho = v.dot(ad * rho.matrix * v);

  // (E - J)/2 = [[0, 0], [1, 0]] and (E + J)/2 = [[0, 1], [0, 0]] on (d/dz, d/dz*).
  report.right_residual = std::max(std::abs(rho_a - z * q0), std::abs(rho_ad - (zc * q0 + d_z)));
  report.left_residual = std::max(std::abs(a_rho - (z * q0 + d_zbar)), std::abs(ad_rho - zc * q0));
  report.row_reading_residual = std::max(std::abs(rho_a - (z * q0 + d_zbar)), std::abs(rho_ad - zc * q0));
  report.truncated = report.norm_deficit > 1e-8;
  return report;
}

int CalibrationReport::qualifying_pairs() const {
  return static_cast<int>(std::count_if(hypotheses.begin(), hypotheses.end(),
                                        [](const HypothesisResult& h) { return h.qualifies; }));
}

std::string CalibrationReport::table() const {
  std::ostringstream os;
  os << std::left << std::setw(24) << "r_map" << std::setw(18) << "prefactor" << std::setw(16) << "kernel_res"
     << std::setw(16) << "prefactor_res" << "qualifies\n";
  os << std::scientific << std::setprecision(3);
  for (const auto& h : hypotheses) {
    os << std::setw(24) << kernels::to_string(h.r_map) << std::setw(18) << kernels::to_string(h.prefactor_rule)
       << std::setw(16) << h.kernel_residual << std::setw(16) << h.prefactor_residual
       << (h.qualifies ? "yes" : "no") << "\n";
  }
  return os.str();
}

std::vector<PhysicalSpec> calibration_suite() {
  return {thermal_spec({0.3}), thermal_spec({std::log(2.0)}), thermal_spec({2.0}),
          squeezed_thermal_spec({std::log(2.0)}, {0.25}), squeezed_thermal_spec({std::log(2.0)}, {0.5})};
}

CalibrationReport calibrate(int cutoff) {
  CalibrationReport report;
  report.cutoff = cutoff;
  for (const PhysicalSpec& spec : calibration_suite()) {
    const Density density = gaussian_density(spec, cutoff);
    const HessianKernel hk = r_from_q_hessian(density.rho);
    CalibrationCase c;
    c.spec = spec;
    c.r_published = kernels::g_to_r(published_state(spec).get(kernels::Form::G));
    c.r_oracle = hk.r;
    c.q0_oracle = q_of_rho(density.rho, phase::PhasePoint{std::vector<Complex>(spec.omegas.size())});
    c.gaussianity_residual = hk.gaussianity_residual;
    c.tail_mass = density.tail_mass;
    report.cases.push_back(std::move(c));
  }

  const double inf = std::numeric_limits<double>::infinity();
  for (RMap map : kernels::kAllRMaps) {
    for (PrefactorRule rule : kernels::kAllPrefactorRules) {
      HypothesisResult h{map, rule, 0.0, 0.0, false};
      for (const auto& c : report.cases) {
        const CMatrix bridged = kernels::apply_r_map(map, c.r_published);
        h.kernel_residual = std::max(h.kernel_residual, mat::max_abs(bridged - c.r_oracle));
        try {
          const Complex n = kernels::apply_prefactor_rule(rule, bridged);
          h.prefactor_residual = std::max(h.prefactor_residual, std::abs(n - c.q0_oracle));
        } catch (const DomainError&) {
          h.prefactor_residual = inf;
        }
      }
      h.qualifies = h.kernel_residual <= kCalibrationTolerance && h.prefactor_residual <= kCalibrationTolerance;
      report.hypotheses.push_back(h);
    }
  }

  for (const auto& h : report.hypotheses) {
    if (!h.qualifies) continue;
    if (!report.bridge) report.bridge = ConventionBridge{h.r_map, h.prefactor_rule, h.kernel_residual};
    auto& maps = report.qualifying_r_maps;
    if (std::find(maps.begin(), maps.end(), h.r_map) == maps.end()) maps.push_back(h.r_map);
    auto& rules = report.qualifying_prefactor_rules;
    if (std::find(rules.begin(), rules.end(), h.prefactor_rule) == rules.end()) rules.push_back(h.prefactor_rule);
  }
  if (!report.bridge) {
    throw NumericalError("calibration: no bridge hypothesis reaches residual " +
                         std::to_string(kCalibrationTolerance) + "\n" + report.table());
  }
  return report;
}

const ConventionBridge& calibrated_bridge() {
  static const ConventionBridge bridge = *calibrate(kDefaultCutoff).bridge;
  return bridge;
}

}  // namespace gnp::fock
