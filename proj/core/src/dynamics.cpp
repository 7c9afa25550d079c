#include "gnp/dynamics.hpp"

#include "gnp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gnp::dynamics {

using mat::J;

namespace {

constexpr Complex kI{0.0, 1.0};

void require_pair(const CMatrix& x, const CMatrix& h) {
  mat::modes_of(x);
  if (x.rows() != h.rows() || x.cols() != h.cols()) {
    std::ostringstream os;
    os << "kernel is " << x.rows() << "x" << x.cols() << " but H is " << h.rows() << "x" << h.cols();
    throw std::invalid_argument(os.str());
  }
}

void require_finite_time(double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("time must be finite");
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

}  // namespace

QuadraticHamiltonian::QuadraticHamiltonian(CMatrix h) : h_(std::move(h)) {
  if (h_.rows() != h_.cols() || h_.rows() < 2 || h_.rows() % 2 != 0) {
    throw DomainError("Hamiltonian kernel must be 2n x 2n");
  }
  n_modes_ = static_cast<int>(h_.rows() / 2);
  if (!mat::all_finite(h_)) throw DomainError("Hamiltonian kernel has non-finite entries");
  const double scale = std::max(1.0, mat::max_abs(h_));
  if (h_.imag().cwiseAbs().maxCoeff() > 1e-12 * scale) throw DomainError("Hamiltonian kernel must be real");
  if (mat::max_abs(h_ - h_.transpose()) > 1e-12 * scale) {
    throw DomainError("Hamiltonian kernel must be symmetric");
  }
  const Eigen::MatrixXd re = 0.5 * (h_.real() + h_.real().transpose());
  h_ = re.cast<Complex>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(re, Eigen::EigenvaluesOnly);
  const double lowest = solver.eigenvalues().minCoeff();
  positive_definite_ = lowest > 0.0;
  if (!positive_definite_) {
    std::ostringstream os;
    os << "H is not positive definite (lowest eigenvalue " << lowest << ")";
    warning_ = os.str();
  }
}

CMatrix covariance_rhs(const CMatrix& sigma, const CMatrix& h) {
  require_pair(sigma, h);
  const CMatrix jh = J(mat::modes_of(h)) * h;
  return jh * sigma + sigma * jh.transpose();
}

CMatrix covariance_propagator(const CMatrix& h, double t) {
  require_finite_time(t);
  return mat::mat_exp(J(mat::modes_of(h)) * h * t);
}

CMatrix covariance_propagate(const CMatrix& sigma0, const CMatrix& h, double t) {
  require_pair(sigma0, h);
  const CMatrix s = covariance_propagator(h, t);
  return s * sigma0 * s.transpose();
}

CMatrix normal_rhs(const CMatrix& r, const CMatrix& h) {
  require_pair(r, h);
  const CMatrix j = J(mat::modes_of(h));
  return kI * (r * j * h - h * j * r);
}

std::string_view to_string(Ordering o) { return o == Ordering::A ? "A" : "B"; }

std::string_view to_string(Flow f) { return f == Flow::Covariance ? "covariance" : "normal"; }

Propagator make_propagator(const CMatrix& h, double t, Ordering variant) {
  require_finite_time(t);
  const CMatrix j = J(mat::modes_of(h));
  Propagator p;
  p.variant = variant;
  p.t = t;
  if (variant == Ordering::A) {
    p.left = mat::mat_exp(-kI * j * h * t);
    p.right = p.left.transpose();
  } else {
    p.left = mat::mat_exp(-kI * h * j * t);
    p.right = mat::mat_exp(kI * j * h * t);
  }
  return p;
}

CMatrix normal_propagate(const CMatrix& r0, const CMatrix& h, double t, Ordering variant) {
  require_pair(r0, h);
  return make_propagator(h, t, variant).apply(r0);
}

namespace {

CMatrix flow_rhs(Flow flow, const CMatrix& x, const CMatrix& h) {
  return flow == Flow::Covariance ? covariance_rhs(x, h) : normal_rhs(x, h);
}

CMatrix closed_form(Flow flow, const CMatrix& x0, const CMatrix& h, double t, Ordering variant) {
  return flow == Flow::Covariance ? covariance_propagate(x0, h, t) : normal_propagate(x0, h, t, variant);
}

std::vector<double> time_grid(double t_end, int steps) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  require_finite_time(t_end);
  if (t_end == 0.0) return {0.0};
  std::vector<double> times(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) times[k] = t_end * k / steps;
  return times;
}

double derivative_step(double t_end) { return 1e-5 * std::max(1.0, std::abs(t_end)); }

double closed_form_ode_residual(Flow flow, const CMatrix& x0, const CMatrix& h, double t, double step,
                                Ordering variant) {
  const CMatrix forward = closed_form(flow, x0, h, t + step, variant);
  const CMatrix backward = closed_form(flow, x0, h, t - step, variant);
  const CMatrix derivative = (forward - backward) / (2.0 * step);
  return mat::max_abs(derivative - flow_rhs(flow, closed_form(flow, x0, h, t, variant), h));
}

}  // namespace

Trajectory integrate_rk4(Flow flow, const CMatrix& x0, const CMatrix& h, double t_end, int steps) {
  require_pair(x0, h);
  const std::vector<double> times = time_grid(t_end, steps);
  const double dt = times.size() > 1 ? times[1] - times[0] : 0.0;
  const CMatrix jh = J(mat::modes_of(h)) * h;

  Trajectory traj;
  traj.flow = flow;
  CMatrix x = x0;
  CMatrix s = CMatrix::Identity(x0.rows(), x0.cols());  // accumulated covariance propagator

  auto record = [&](double t) {
    InvariantSample sample;
    sample.det_kernel = mat::determinant(x);
    if (flow == Flow::Covariance) sample.symplectic_residual = mat::symplectic_residual(s);
    sample.consistency_residual = mat::relative_deviation(x, closed_form(flow, x0, h, t, Ordering::B));
    traj.times.push_back(t);
    traj.kernels.push_back(x);
    traj.log.push_back(sample);
  };

  record(times[0]);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const CMatrix k1 = flow_rhs(flow, x, h);
    const CMatrix k2 = flow_rhs(flow, x + 0.5 * dt * k1, h);
    const CMatrix k3 = flow_rhs(flow, x + 0.5 * dt * k2, h);
    const CMatrix k4 = flow_rhs(flow, x + dt * k3, h);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (flow == Flow::Covariance) {
      const CMatrix s1 = jh * s;
      const CMatrix s2 = jh * (s + 0.5 * dt * s1);
      const CMatrix s3 = jh * (s + 0.5 * dt * s2);
      const CMatrix s4 = jh * (s + dt * s3);
      s += (dt / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
    }
    if (!mat::all_finite(x) || !mat::all_finite(s)) {
      throw NumericalError("integrate_rk4: non-finite state at step " + std::to_string(k));
    }
    record(times[k]);
  }
  return traj;
}

Trajectory closed_form_trajectory(Flow flow, const CMatrix& x0, const CMatrix& h, double t_end, int steps,
                                  Ordering variant) {
  require_pair(x0, h);
  const double step = derivative_step(t_end);
  Trajectory traj;
  traj.flow = flow;
  for (double t : time_grid(t_end, steps)) {
    const CMatrix x = closed_form(flow, x0, h, t, variant);
    if (!mat::all_finite(x)) {
      throw NumericalError("closed_form_trajectory: non-finite state at t = " + std::to_string(t));
    }
    InvariantSample sample;
    sample.det_kernel = mat::determinant(x);
    if (flow == Flow::Covariance) sample.symplectic_residual = mat::symplectic_residual(covariance_propagator(h, t));
    sample.consistency_residual = closed_form_ode_residual(flow, x0, h, t, step, variant);
    traj.times.push_back(t);
    traj.kernels.push_back(x);
    traj.log.push_back(sample);
  }
  return traj;
}

InvariantsReport invariants_report(const Trajectory& traj) {
  if (traj.kernels.empty()) throw std::invalid_argument("invariants_report: empty trajectory");
  InvariantsReport report;

  const Complex det0 = traj.log.empty() ? mat::determinant(traj.kernels.front()) : traj.log.front().det_kernel;
  const double scale = std::abs(det0) > 0.0 ? std::abs(det0) : 1.0;
  for (std::size_t k = 0; k < traj.kernels.size(); ++k) {
    const Complex det = k < traj.log.size() ? traj.log[k].det_kernel : mat::determinant(traj.kernels[k]);
    report.det_drift = std::max(report.det_drift, std::abs(det - det0) / scale);
  }
  for (const auto& sample : traj.log) {
    if (sample.symplectic_residual) {
      report.max_symplectic_residual = std::max(report.max_symplectic_residual.value_or(0.0),
                                                *sample.symplectic_residual);
    }
    report.max_consistency_residual = std::max(report.max_consistency_residual.value_or(0.0),
                                               sample.consistency_residual);
  }

  Eigen::ComplexEigenSolver<CMatrix> solver(traj.kernels.front(), false);
  const CVector& lambdas = solver.eigenvalues();
  bool on_cut = false;
  Complex trace_log{0.0, 0.0};
  for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
    const Complex v = lambdas[k];
    if (v.real() <= 0.0 && std::abs(v.imag()) <= 1e-12 * std::max(1.0, std::abs(v))) on_cut = true;
    trace_log += std::log(v);
  }
  if (on_cut || det0 == Complex(0.0, 0.0)) {
    report.note = "ln det = tr ln check skipped: initial kernel has an eigenvalue on the branch cut";
  } else {
    Complex diff = trace_log - std::log(det0);
    const double two_pi = 2.0 * std::numbers::pi;
    diff.imag(diff.imag() - two_pi * std::round(diff.imag() / two_pi));
    report.logdet_trace_residual = std::abs(diff);
  }
  return report;
}

OrderingAudit ordering_audit(const CMatrix& r0, const CMatrix& h, double t_end) {
  require_pair(r0, h);
  require_finite_time(t_end);
  const CMatrix j = J(mat::modes_of(h));

  OrderingAudit audit;
  audit.step = derivative_step(t_end);
  for (int k = 1; k <= 5; ++k) audit.times.push_back(t_end * k / 5.0);
  audit.commuting = mat::max_abs(j * h - h * j) <= 1e-12 * std::max(1.0, mat::max_abs(h));

  double spread = 0.0;
  for (Ordering variant : {Ordering::A, Ordering::B}) {
    VariantResidual entry{variant, 0.0, false};
    for (double t : audit.times) {
      entry.residual = std::max(entry.residual,
                                closed_form_ode_residual(Flow::Normal, r0, h, t, audit.step, variant));
    }
    entry.consistent = entry.residual <= kAuditTolerance;
    if (entry.consistent) audit.consistent.push_back(variant);
    audit.variants.push_back(entry);
  }
  for (double t : audit.times) {
    spread = std::max(spread, mat::relative_deviation(normal_propagate(r0, h, t, Ordering::A),
                                                      normal_propagate(r0, h, t, Ordering::B)));
  }
  audit.vacuous = audit.commuting || spread <= 1e-12;

  std::ostringstream os;
  if (audit.vacuous) {
    os << (audit.commuting ? "vacuous: JH commutes with HJ" : "vacuous: both orderings give the same trajectory")
       << "; the audit cannot discriminate. ";
  }
  for (const auto& v : audit.variants) {
    os << "variant " << to_string(v.variant) << (v.consistent ? " satisfies" : " violates")
       << " dR/dt = i(RJH - HJR) (residual " << sci(v.residual) << ", tolerance " << sci(kAuditTolerance) << ")";
    os << (v.variant == Ordering::A ? "; " : ".");
  }
  audit.conclusion = os.str();
  return audit;
}

ConventionAudit convention_audit(const CMatrix& g, const CMatrix& h, double t_end) {
  require_pair(g, h);
  require_finite_time(t_end);
  const CMatrix sigma0 = kernels::g_to_sigma(g);
  const CMatrix r0 = kernels::g_to_r(g);

  ConventionAudit audit;
  for (int k = 0; k <= 5; ++k) audit.times.push_back(t_end * k / 5.0);
  for (Ordering variant : {Ordering::A, Ordering::B}) {
    VariantResidual entry{variant, 0.0, false};
    for (double t : audit.times) {
      const CMatrix from_sigma = kernels::sigma_to_r(covariance_propagate(sigma0, h, t));
      entry.residual = std::max(entry.residual, mat::max_abs(normal_propagate(r0, h, t, variant) - from_sigma));
    }
    audit.variants.push_back(entry);
  }
  return audit;
}

}  // namespace gnp::dynamics
