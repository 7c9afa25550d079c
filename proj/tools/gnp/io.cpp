#include "io.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace gnp::cli {

using nlohmann::json;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(source + ": " + e.what());
  }
}

template <typename T>
T field(const json& doc, const char* key, const std::string& source) {
  if (!doc.is_object() || !doc.contains(key)) throw IoError(source + ": missing field '" + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw IoError(source + ": field '" + key + "': " + e.what());
  }
}

CMatrix parse_matrix(const json& doc, int n_modes, const std::string& source) {
  if (n_modes < 1) throw IoError(source + ": n_modes must be >= 1");
  const Eigen::Index dim = 2 * static_cast<Eigen::Index>(n_modes);
  if (!doc.contains("matrix") || !doc["matrix"].is_array()) throw IoError(source + ": missing matrix");
  const json& rows = doc["matrix"];
  if (static_cast<Eigen::Index>(rows.size()) != dim) {
    throw IoError(source + ": matrix needs " + std::to_string(dim) + " rows for n_modes = " + std::to_string(n_modes));
  }
  CMatrix m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
      throw IoError(source + ": row " + std::to_string(i) + " must have " + std::to_string(dim) + " entries");
    }
    for (Eigen::Index j = 0; j < dim; ++j) {
      const json& cell = row[static_cast<std::size_t>(j)];
      if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() || !cell[1].is_number()) {
        throw IoError(source + ": entry (" + std::to_string(i) + "," + std::to_string(j) + ") must be [re, im]");
      }
      const double re = cell[0].get<double>();
      const double im = cell[1].get<double>();
      if (!std::isfinite(re) || !std::isfinite(im)) throw IoError(source + ": non-finite matrix entry");
      m(i, j) = Complex(re, im);
    }
  }
  return m;
}

json dump_matrix(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

StateFile parse_state(const std::string& json_text, const std::string& source) {
  const json doc = parse_json(json_text, source);
  StateFile state;
  state.n_modes = field<int>(doc, "n_modes", source);
  try {
    state.form = kernels::parse_form(field<std::string>(doc, "form", source));
    state.convention = doc.contains("convention")
                           ? kernels::parse_convention(field<std::string>(doc, "convention", source))
                           : kernels::Convention::AsPublished;
  } catch (const std::invalid_argument& e) {
    throw IoError(source + ": " + e.what());
  }
  if (doc.contains("provenance")) state.provenance = field<std::string>(doc, "provenance", source);
  state.matrix = parse_matrix(doc, state.n_modes, source);
  return state;
}

std::string dump_state(const StateFile& state) {
  json doc;
  doc["n_modes"] = state.n_modes;
  doc["form"] = std::string(kernels::to_string(state.form));
  doc["convention"] = std::string(kernels::to_string(state.convention));
  doc["provenance"] = state.provenance;
  doc["matrix"] = dump_matrix(state.matrix);
  return doc.dump(2) + "\n";
}

StateFile read_state_file(const std::filesystem::path& path) { return parse_state(read_text(path), path.string()); }

void write_state_file(const std::filesystem::path& path, const StateFile& state) {
  write_text(path, dump_state(state));
}

kernels::GaussianState to_state(const StateFile& file) {
  kernels::GaussianState state(file.n_modes, file.convention, file.provenance);
  state.set(file.form, file.matrix);
  return state;
}

CMatrix parse_hamiltonian(const std::string& json_text, const std::string& source) {
  const json doc = parse_json(json_text, source);
  return parse_matrix(doc, field<int>(doc, "n_modes", source), source);
}

CMatrix read_hamiltonian_file(const std::filesystem::path& path) {
  return parse_hamiltonian(read_text(path), path.string());
}

void write_trajectory_csv(std::ostream& out, const dynamics::Trajectory& traj) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17);
  const Eigen::Index dim = traj.kernels.empty() ? 0 : traj.kernels.front().rows();
  os << "t";
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) os << ",x" << i << j << "_re,x" << i << j << "_im";
  }
  os << ",det_re,det_im,symplectic_residual,consistency_residual\n";
  for (std::size_t k = 0; k < traj.kernels.size(); ++k) {
    os << traj.times[k];
    const CMatrix& x = traj.kernels[k];
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) os << ',' << x(i, j).real() << ',' << x(i, j).imag();
    }
    const auto& log = traj.log[k];
    os << ',' << log.det_kernel.real() << ',' << log.det_kernel.imag() << ',';
    if (log.symplectic_residual) os << *log.symplectic_residual;
    os << ',' << log.consistency_residual << "\n";
  }
  out << os.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int k = 0; k < length; ++k) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[k]);
  return os.str();
}

}  // namespace gnp::cli
