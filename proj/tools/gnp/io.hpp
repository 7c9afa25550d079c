#pragma once

#include "gnp/dynamics.hpp"
#include "gnp/kernels.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace gnp::cli {

/// Unreadable file, malformed JSON/CSV, or a matrix of the wrong shape.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StateFile {
  int n_modes = 1;
  kernels::Form form = kernels::Form::G;
  CMatrix matrix;
  kernels::Convention convention = kernels::Convention::AsPublished;
  std::string provenance;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

StateFile parse_state(const std::string& json_text, const std::string& source);
std::string dump_state(const StateFile& state);
StateFile read_state_file(const std::filesystem::path& path);
void write_state_file(const std::filesystem::path& path, const StateFile& state);

kernels::GaussianState to_state(const StateFile& file);

/// {n_modes, matrix}
CMatrix parse_hamiltonian(const std::string& json_text, const std::string& source);
CMatrix read_hamiltonian_file(const std::filesystem::path& path);

/// Columns: t, x<i><j>_re, x<i><j>_im (row-major), det_re, det_im,
/// symplectic_residual (empty for the normal flow), consistency_residual.
void write_trajectory_csv(std::ostream& out, const dynamics::Trajectory& traj);

std::string sha256_hex(const std::string& bytes);

}  // namespace gnp::cli
