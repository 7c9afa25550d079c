#include "commands.hpp"
#include "version.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace gnp::cli;

  CLI::App app{"Gaussian-state kernels, normal-product dynamics and Fock-space audits"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string validate_input;
  auto* validate = app.add_subcommand("validate", "Check a state file's structure and cross-form consistency");
  validate->add_option("state", validate_input, "State JSON")->required();

  ConvertOptions convert_opts;
  auto* convert = app.add_subcommand("convert", "Convert a state to another kernel form");
  convert->add_option("state", convert_opts.input, "State JSON")->required();
  convert->add_option("--to", convert_opts.to, "Target form: G, sigma, R, C")->required();
  convert->add_option("--convention", convert_opts.convention, "as-published or calibrated");
  convert->add_option("-o,--output", convert_opts.output, "Output state JSON")->required();

  std::string spectrum_input;
  auto* spectrum = app.add_subcommand("spectrum", "Williamson frequencies of a state");
  spectrum->add_option("state", spectrum_input, "State JSON")->required();

  EvolveOptions evolve_opts;
  auto* evolve = app.add_subcommand("evolve", "Evolve a sigma or R state under a quadratic Hamiltonian");
  evolve->add_option("state", evolve_opts.input, "State JSON")->required();
  evolve->add_option("--ham", evolve_opts.hamiltonian, "Hamiltonian JSON")->required();
  evolve->add_option("--t", evolve_opts.t, "Final time")->required()->check(CLI::NonNegativeNumber);
  evolve->add_option("--method", evolve_opts.method, "closed or rk4")->check(CLI::IsMember({"closed", "rk4"}));
  evolve->add_option("--variant", evolve_opts.variant, "Closed-form ordering a or b")->check(CLI::IsMember({"a", "b"}));
  evolve->add_option("--steps", evolve_opts.steps, "Time steps (default 1000 per unit time)")->check(CLI::PositiveNumber);
  evolve->add_option("-o,--output", evolve_opts.output, "Trajectory CSV")->required();
  evolve->add_option("--final-out", evolve_opts.final_output, "Final state JSON");

  PhaseOptions phase_opts;
  auto* phase = app.add_subcommand("phase", "Evaluate a phase-space function on a grid (single mode)");
  phase->add_option("state", phase_opts.input, "State JSON")->required();
  phase->add_option("--fn", phase_opts.fn, "q, wigner or char")->check(CLI::IsMember({"q", "wigner", "char"}));
  phase->add_option("--grid", phase_opts.grid, "Re axis as min:max:count (also Im unless --im-grid)")->required();
  phase->add_option("--im-grid", phase_opts.im_grid, "Im axis as min:max:count");
  phase->add_option("--convention", phase_opts.convention, "as-published or calibrated");
  phase->add_option("-o,--output", phase_opts.output, "Phase CSV")->required();
  phase->add_flag("--check-norm", phase_opts.check_norm, "Integrate Q over the plane");

  AuditOptions audit_opts;
  auto* audit = app.add_subcommand("audit", "Ordering, convention and oracle calibration report");
  audit->add_option("state", audit_opts.input, "State JSON")->required();
  audit->add_option("--ham", audit_opts.hamiltonian, "Hamiltonian JSON")->required();
  audit->add_option("--t", audit_opts.t, "Audit horizon")->check(CLI::NonNegativeNumber);
  audit->add_flag("--with-oracle", audit_opts.with_oracle, "Run the Fock-space bridge calibration");
  audit->add_option("--cutoff", audit_opts.cutoff, "Fock cutoff for the oracle")->check(CLI::Range(2, 200));
  audit->add_option("-o,--output", audit_opts.output, "Report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kIoFailure;
  }

  if (*validate) return run_validate(validate_input, std::cout, std::cerr);
  if (*convert) return run_convert(convert_opts, std::cout, std::cerr);
  if (*spectrum) return run_spectrum(spectrum_input, std::cout, std::cerr);
  if (*evolve) return run_evolve(evolve_opts, std::cout, std::cerr);
  if (*phase) return run_phase(phase_opts, std::cout, std::cerr);
  if (*audit) {
    audit_opts.command.assign(argv, argv + argc);
    return run_audit(audit_opts, std::cout, std::cerr);
  }
  return kIoFailure;
}
