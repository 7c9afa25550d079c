#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gnp::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationFailure = 1,
  kNumericalFailure = 2,
  kIoFailure = 3,
};

struct ConvertOptions {
  std::string input;
  std::string output;
  std::string to;
  std::optional<std::string> convention;
};

struct EvolveOptions {
  std::string input;
  std::string hamiltonian;
  std::string output;
  /// Defaults to the trajectory path with a ".final.json" suffix.
  std::string final_output;
  double t = 0.0;
  std::string method = "closed";
  std::string variant = "b";
  std::optional<int> steps;
};

struct PhaseOptions {
  std::string input;
  std::string output;
  std::string fn = "q";
  std::string grid;
  /// Imaginary-axis range; defaults to `grid`.
  std::string im_grid;
  std::string convention = "as-published";
  bool check_norm = false;
};

struct AuditOptions {
  std::string input;
  std::string hamiltonian;
  std::string output;
  double t = 1.0;
  bool with_oracle = false;
  int cutoff = 40;
  /// Command line echoed into the report.
  std::vector<std::string> command;
};

// Each command writes human-readable output to `out`, diagnostics to `err`,
// and returns an ExitCode.
int run_validate(const std::string& input, std::ostream& out, std::ostream& err);
int run_convert(const ConvertOptions& opts, std::ostream& out, std::ostream& err);
int run_spectrum(const std::string& input, std::ostream& out, std::ostream& err);
int run_evolve(const EvolveOptions& opts, std::ostream& out, std::ostream& err);
int run_phase(const PhaseOptions& opts, std::ostream& out, std::ostream& err);
int run_audit(const AuditOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace gnp::cli
