#include "commands.hpp"

#include "io.hpp"
#include "version.hpp"

#include "gnp/dynamics.hpp"
#include "gnp/fockoracle.hpp"
#include "gnp/kernels.hpp"
#include "gnp/phasespace.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace gnp::cli {

using kernels::Convention;
using kernels::Form;
using nlohmann::json;

namespace {

// Input that parsed but does not meet the command's preconditions.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

template <typename T, typename Parse>
T parse_option(const std::string& text, Parse parse) {
  try {
    return parse(text);
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what());
  }
}

const kernels::ConventionBridge* bridge_if(bool needed) { return needed ? &fock::calibrated_bridge() : nullptr; }

bool stores_calibrated_r(const StateFile& file) {
  return file.form == Form::R && file.convention == Convention::Calibrated;
}

CMatrix g_of(const StateFile& file) {
  if (file.form == Form::G) return file.matrix;
  const auto state = to_state(file);
  return kernels::sigma_to_g(kernels::sigma_of(state, bridge_if(stores_calibrated_r(file))));
}

dynamics::QuadraticHamiltonian load_hamiltonian(const std::string& path, int n_modes) {
  CMatrix h = read_hamiltonian_file(path);
  if (h.rows() != 2 * n_modes) {
    throw PreconditionError("Hamiltonian has " + std::to_string(h.rows() / 2) + " modes, state has " +
                            std::to_string(n_modes));
  }
  try {
    return dynamics::QuadraticHamiltonian(std::move(h));
  } catch (const DomainError& e) {
    throw PreconditionError(e.what());
  }
}

std::string append_provenance(const std::string& base, const std::string& step) {
  return base.empty() ? step : base + "; " + step;
}

json matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

int run_validate(const std::string& input, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const StateFile file = read_state_file(input);
    const auto state = to_state(file);
    const auto report = kernels::validate_state(state);
    out << "state " << input << " (n_modes=" << file.n_modes << ", form=" << kernels::to_string(file.form)
        << ", convention=" << kernels::to_string(file.convention) << ")\n";
    for (const auto& check : report.checks) {
      out << "  " << std::left << std::setw(22) << check.name << (check.pass ? "PASS" : "FAIL")
          << "  residual=" << check.residual << "  tolerance=" << check.tolerance;
      if (!check.detail.empty()) out << "  (" << check.detail << ")";
      out << "\n";
    }
    out << "result: " << (report.pass() ? "PASS" : "FAIL") << "\n";
    return report.pass() ? kSuccess : kValidationFailure;
  });
}

int run_convert(const ConvertOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const StateFile in = read_state_file(opts.input);
    const Form target = parse_option<Form>(opts.to, kernels::parse_form);
    const Convention convention =
        opts.convention ? parse_option<Convention>(*opts.convention, kernels::parse_convention) : in.convention;

    StateFile result = in;
    result.form = target;
    result.convention = convention;
    const bool same = target == in.form && (target != Form::R || convention == in.convention);
    if (!same) {
      const auto state = to_state(in);
      const bool needs_bridge =
          stores_calibrated_r(in) || (target == Form::R && convention == Convention::Calibrated);
      const auto* bridge = bridge_if(needs_bridge);
      switch (target) {
        case Form::G: result.matrix = g_of(in); break;
        case Form::Sigma: result.matrix = kernels::sigma_of(state, bridge); break;
        case Form::C:
          result.matrix = (state.has(Form::Sigma) || state.has(Form::G))
                              ? kernels::char_kernel(state)
                              : kernels::sigma_to_c(kernels::sigma_of(state, bridge));
          break;
        case Form::R: result.matrix = kernels::normal_kernel(state, convention, bridge); break;
      }
    }
    result.provenance = append_provenance(
        in.provenance, "convert " + std::string(kernels::to_string(in.form)) + "->" +
                           std::string(kernels::to_string(target)) + " (" +
                           std::string(kernels::to_string(convention)) + ")");
    write_state_file(opts.output, result);
    out << "wrote " << opts.output << " (form " << kernels::to_string(target) << ", "
        << kernels::to_string(convention) << ")\n";
    return kSuccess;
  });
}

int run_spectrum(const std::string& input, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const StateFile file = read_state_file(input);
    const auto spectrum = kernels::symplectic_spectrum(g_of(file));
    out << std::setprecision(17);
    for (std::size_t k = 0; k < spectrum.omegas.size(); ++k) {
      out << "mode " << k + 1 << ": omega = " << spectrum.omegas[k] << ", nu = " << spectrum.nus[k] << "\n";
    }
    out << "pairing_residual = " << spectrum.pairing_residual << "\n";
    return kSuccess;
  });
}

int run_evolve(const EvolveOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!std::isfinite(opts.t) || opts.t < 0.0) throw IoError("--t must be a finite, nonnegative time");
    if (opts.method != "closed" && opts.method != "rk4") throw IoError("--method must be closed or rk4");
    if (opts.variant != "a" && opts.variant != "b") throw IoError("--variant must be a or b");
    if (opts.steps && *opts.steps < 1) throw IoError("--steps must be >= 1");

    const StateFile in = read_state_file(opts.input);
    const auto ham = load_hamiltonian(opts.hamiltonian, in.n_modes);
    if (!ham.warning().empty()) err << "warning: " << ham.warning() << "\n";

    dynamics::Flow flow;
    if (in.form == Form::Sigma) flow = dynamics::Flow::Covariance;
    else if (in.form == Form::R) flow = dynamics::Flow::Normal;
    else throw PreconditionError("evolve needs a sigma (covariance flow) or R (normal-product flow) state");

    const int steps = opts.steps.value_or(std::max(1, static_cast<int>(std::ceil(1000.0 * opts.t))));
    const auto variant = opts.variant == "a" ? dynamics::Ordering::A : dynamics::Ordering::B;
    const dynamics::Trajectory traj =
        opts.method == "rk4" ? dynamics::integrate_rk4(flow, in.matrix, ham.matrix(), opts.t, steps)
                             : dynamics::closed_form_trajectory(flow, in.matrix, ham.matrix(), opts.t, steps, variant);

    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    write_text(opts.output, csv.str());

    StateFile final_state = in;
    final_state.matrix = traj.kernels.back();
    std::ostringstream step;
    step << std::setprecision(17) << "evolve " << dynamics::to_string(flow) << " t=" << opts.t << " method=" << opts.method;
    if (opts.method == "closed" && flow == dynamics::Flow::Normal) step << " variant=" << opts.variant;
    step << " steps=" << steps;
    final_state.provenance = append_provenance(in.provenance, step.str());
    const std::string final_path = opts.final_output.empty() ? opts.output + ".final.json" : opts.final_output;
    write_state_file(final_path, final_state);

    const auto report = dynamics::invariants_report(traj);
    out << "wrote " << opts.output << " (" << traj.times.size() << " rows) and " << final_path << "\n";
    out << "det_drift = " << report.det_drift << "\n";
    if (report.max_symplectic_residual) out << "max_symplectic_residual = " << *report.max_symplectic_residual << "\n";
    if (report.max_consistency_residual) out << "max_consistency_residual = " << *report.max_consistency_residual << "\n";
    if (report.logdet_trace_residual) out << "logdet_trace_residual = " << *report.logdet_trace_residual << "\n";
    if (!report.note.empty()) out << "note: " << report.note << "\n";
    return kSuccess;
  });
}

int run_phase(const PhaseOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto kind = parse_option<phase::FunctionKind>(opts.fn, phase::parse_function_kind);
    const auto convention = parse_option<Convention>(opts.convention, kernels::parse_convention);
    phase::PhaseGrid grid;
    grid.re = parse_option<phase::Range>(opts.grid, phase::parse_range);
    grid.im = parse_option<phase::Range>(opts.im_grid.empty() ? opts.grid : opts.im_grid, phase::parse_range);

    const StateFile in = read_state_file(opts.input);
    if (in.n_modes != 1) throw PreconditionError("phase grids need a single-mode state");
    const auto state = to_state(in);
    const bool needs_bridge = stores_calibrated_r(in) ||
                              (kind == phase::FunctionKind::Husimi && convention == Convention::Calibrated);
    const auto* bridge = bridge_if(needs_bridge);

    const auto table = phase::grid_eval(state, kind, grid, convention, bridge);
    std::ostringstream csv;
    phase::write_csv(table, csv);
    write_text(opts.output, csv.str());
    out << "wrote " << opts.output << " (" << table.values.size() << " points, "
        << phase::to_string(kind) << ", " << kernels::to_string(convention) << ")\n";

    if (opts.check_norm) {
      if (kind != phase::FunctionKind::Husimi) throw IoError("--check-norm applies to --fn q only");
      const auto norm = phase::q_norm_check(state, convention, bridge);
      out << std::setprecision(17) << "norm = " << norm.value.real() << (norm.value.imag() < 0 ? "-" : "+")
          << std::abs(norm.value.imag()) << "i (box radius " << norm.box_radius << ", " << norm.points_per_axis
          << "^2 points, tail bound " << norm.tail_bound << ")\n";
    }
    return kSuccess;
  });
}

int run_audit(const AuditOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!std::isfinite(opts.t) || opts.t < 0.0) throw IoError("--t must be a finite, nonnegative time");
    if (opts.cutoff < 2) throw IoError("--cutoff must be >= 2");
    const std::string state_bytes = read_text(opts.input);
    const std::string ham_bytes = read_text(opts.hamiltonian);
    const StateFile in = parse_state(state_bytes, opts.input);
    const CMatrix g = g_of(in);

    kernels::GaussianState g_state(in.n_modes);
    g_state.set(Form::G, g);
    const auto validation = kernels::validate_state(g_state);
    if (!validation.pass()) throw PreconditionError("audit needs a valid G (real symmetric positive definite)");

    CMatrix h = parse_hamiltonian(ham_bytes, opts.hamiltonian);
    if (h.rows() != g.rows()) throw PreconditionError("Hamiltonian and state mode counts differ");
    dynamics::QuadraticHamiltonian ham = [&] {
      try {
        return dynamics::QuadraticHamiltonian(h);
      } catch (const DomainError& e) {
        throw PreconditionError(e.what());
      }
    }();

    json report;
    report["tool_version"] = kVersion;
    report["command"] = opts.command;
    report["inputs"] = {{"state", {{"path", opts.input}, {"sha256", sha256_hex(state_bytes)}}},
                        {"hamiltonian", {{"path", opts.hamiltonian}, {"sha256", sha256_hex(ham_bytes)}}}};
    report["t_end"] = opts.t;

    const auto ordering = dynamics::ordering_audit(kernels::g_to_r(g), ham.matrix(), opts.t);
    json variants = json::array();
    for (const auto& v : ordering.variants) {
      variants.push_back({{"variant", dynamics::to_string(v.variant)},
                          {"residual", v.residual},
                          {"consistent", v.consistent}});
    }
    json consistent = json::array();
    for (auto v : ordering.consistent) consistent.push_back(dynamics::to_string(v));
    report["ordering_audit"] = {{"times", ordering.times},          {"derivative_step", ordering.step},
                                {"tolerance", dynamics::kAuditTolerance}, {"variants", variants},
                                {"consistent_variants", consistent}, {"commuting", ordering.commuting},
                                {"vacuous", ordering.vacuous},       {"conclusion", ordering.conclusion}};

    const auto conv = dynamics::convention_audit(g, ham.matrix(), opts.t);
    json conv_variants = json::array();
    for (const auto& v : conv.variants) {
      conv_variants.push_back({{"variant", dynamics::to_string(v.variant)}, {"max_deviation", v.residual}});
    }
    report["convention_audit"] = {{"times", conv.times}, {"variants", conv_variants}};

    if (opts.with_oracle) {
      const auto cal = fock::calibrate(opts.cutoff);
      json cases = json::array();
      for (const auto& c : cal.cases) {
        cases.push_back({{"label", c.spec.label()},
                         {"q0_oracle", c.q0_oracle},
                         {"tail_mass", c.tail_mass},
                         {"gaussianity_residual", c.gaussianity_residual},
                         {"r_published", matrix_json(c.r_published)},
                         {"r_oracle", matrix_json(c.r_oracle)}});
      }
      json hypotheses = json::array();
      for (const auto& hyp : cal.hypotheses) {
        hypotheses.push_back({{"r_map", kernels::to_string(hyp.r_map)},
                              {"prefactor_rule", kernels::to_string(hyp.prefactor_rule)},
                              {"kernel_residual", std::isfinite(hyp.kernel_residual) ? json(hyp.kernel_residual) : json(nullptr)},
                              {"prefactor_residual", std::isfinite(hyp.prefactor_residual) ? json(hyp.prefactor_residual) : json(nullptr)},
                              {"qualifies", hyp.qualifies}});
      }
      json bridge = nullptr;
      if (cal.bridge) {
        bridge = {{"r_map", kernels::to_string(cal.bridge->r_map)},
                  {"prefactor_rule", kernels::to_string(cal.bridge->prefactor_rule)},
                  {"residual", cal.bridge->residual}};
      }
      report["calibration"] = {{"cutoff", cal.cutoff},
                               {"tolerance", fock::kCalibrationTolerance},
                               {"cases", cases},
                               {"hypotheses", hypotheses},
                               {"qualifying_pairs", cal.qualifying_pairs()},
                               {"unique", cal.qualifying_pairs() == 1},
                               {"bridge", bridge}};
    }

    write_text(opts.output, report.dump(2) + "\n");
    out << "ordering audit: " << ordering.conclusion << "\n";
    if (opts.with_oracle) {
      const auto& cal = report["calibration"];
      out << "calibration: " << cal["qualifying_pairs"].get<int>() << " qualifying hypothesis pair(s); bridge "
          << cal["bridge"]["r_map"].get<std::string>() << " + " << cal["bridge"]["prefactor_rule"].get<std::string>()
          << "\n";
    }
    out << "wrote " << opts.output << "\n";
    return kSuccess;
  });
}

}  // namespace gnp::cli
