#include "gnp/phasespace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace gnp::phase {

using kernels::Convention;
using kernels::GaussianState;

CVector PhasePoint::Z() const {
  const auto n = static_cast<Eigen::Index>(z.size());
  CVector out(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out[k] = z[k];
    out[n + k] = std::conj(z[k]);
  }
  return out;
}

std::vector<double> Range::values() const {
  if (!std::isfinite(min) || !std::isfinite(max)) throw std::invalid_argument("range bounds must be finite");
  if (count < 1) throw std::invalid_argument("range count must be >= 1");
  if (count == 1) {
    if (min != max) throw std::invalid_argument("a single-point range needs min == max");
    return {min};
  }
  if (!(max > min)) throw std::invalid_argument("range needs min < max");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out[k] = min + (max - min) * k / (count - 1);
  out.back() = max;
  return out;
}

namespace {

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string describe(const PhasePoint& pt) {
  std::ostringstream os;
  os << "z = (";
  for (std::size_t k = 0; k < pt.z.size(); ++k) {
    os << (k ? ", " : "") << pt.z[k].real() << (pt.z[k].imag() < 0 ? "-" : "+") << std::abs(pt.z[k].imag())
       << "i";
  }
  os << ")";
  return os.str();
}

void require_point(const GaussianState& state, const PhasePoint& pt) {
  if (pt.n_modes() != state.n_modes()) {
    throw std::invalid_argument("phase point has " + std::to_string(pt.n_modes()) + " amplitudes, state has " +
                                std::to_string(state.n_modes()) + " modes");
  }
}

struct QKernel {
  CMatrix r;
  Complex prefactor;
};

QKernel q_kernel(const GaussianState& state, Convention convention, const kernels::ConventionBridge* bridge) {
  QKernel out;
  out.r = kernels::normal_kernel(state, convention, bridge);
  out.prefactor = kernels::prefactor(out.r, convention).value;
  return out;
}

Complex q_value(const QKernel& q, const CVector& z) {
  const Complex quad = (z.transpose() * q.r * z)(0, 0);
  return q.prefactor * std::exp(-0.5 * quad);
}

// Z^T R Z = x^T K x for x = (Re z, Im z), single mode.
Eigen::Matrix2cd real_form_single(const CMatrix& r) {
  Eigen::Matrix2cd t;
  t << 1.0, Complex(0.0, 1.0), 1.0, Complex(0.0, -1.0);
  const Eigen::Matrix2cd k = t.transpose() * r * t;
  return 0.5 * (k + k.transpose());
}

}  // namespace

Range parse_range(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw std::invalid_argument("range must look like min:max:count, got '" + std::string(text) + "'");
  Range r;
  r.min = parse_double(parts[0]);
  r.max = parse_double(parts[1]);
  int count = 0;
  const auto [ptr, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), count);
  if (ec != std::errc() || ptr != parts[2].data() + parts[2].size()) {
    throw std::invalid_argument("range count must be an integer, got '" + std::string(parts[2]) + "'");
  }
  r.count = count;
  r.values();
  return r;
}

void PhaseGrid::validate() const {
  if (mode_index < 1 || mode_index > n_modes()) {
    throw std::invalid_argument("grid mode_index " + std::to_string(mode_index) + " outside 1.." +
                                std::to_string(n_modes()));
  }
  re.values();
  im.values();
  for (const Complex& z : fixed_amplitudes) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw std::invalid_argument("fixed amplitudes must be finite");
  }
}

std::vector<PhasePoint> PhaseGrid::points() const {
  validate();
  std::vector<PhasePoint> out;
  const auto res = re.values();
  const auto ims = im.values();
  out.reserve(res.size() * ims.size());
  for (double x : res) {
    for (double y : ims) {
      PhasePoint pt;
      pt.z = fixed_amplitudes;
      pt.z.insert(pt.z.begin() + (mode_index - 1), Complex(x, y));
      out.push_back(std::move(pt));
    }
  }
  return out;
}

std::string_view to_string(FunctionKind kind) {
  switch (kind) {
    case FunctionKind::Husimi: return "husimi";
    case FunctionKind::Wigner: return "wigner";
    case FunctionKind::CharFn: return "charfn";
  }
  return "?";
}

FunctionKind parse_function_kind(std::string_view text) {
  if (text == "husimi" || text == "q") return FunctionKind::Husimi;
  if (text == "wigner") return FunctionKind::Wigner;
  if (text == "charfn" || text == "char") return FunctionKind::CharFn;
  throw std::invalid_argument("unknown function kind '" + std::string(text) + "'");
}

Complex husimi_q(const GaussianState& state, const PhasePoint& pt, Convention convention,
                 const kernels::ConventionBridge* bridge) {
  require_point(state, pt);
  return q_value(q_kernel(state, convention, bridge), pt.Z());
}

Complex wigner(const GaussianState& state, const PhasePoint& pt) {
  require_point(state, pt);
  const CMatrix sigma = kernels::sigma_of(state);
  const CVector z = pt.Z();
  const Complex quad = (z.adjoint() * mat::dense_solve(sigma, z))(0, 0);
  return std::exp(-quad) / kernels::principal_sqrt(mat::determinant(sigma));
}

Complex char_fn(const GaussianState& state, const PhasePoint& pt) {
  require_point(state, pt);
  const CVector z = pt.Z();
  return std::exp(-0.5 * (z.adjoint() * kernels::char_kernel(state) * z)(0, 0));
}

Complex gauss_integral(const CMatrix& v, const CVector& x, Convention convention) {
  const int n = mat::modes_of(v);
  if (x.size() != v.rows()) throw std::invalid_argument("gauss_integral: X must have 2n entries");
  if (!mat::all_finite(v) || !mat::all_finite(x)) throw NumericalError("gauss_integral: non-finite input");

  const CMatrix herm = 0.5 * (v + v.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
  const double lowest = solver.eigenvalues().minCoeff();
  if (!(lowest > 0.0)) {
    std::ostringstream os;
    os << "gauss_integral: Hermitian part of V is not positive definite (lowest eigenvalue " << lowest
       << "); the integral diverges";
    throw DomainError(os.str());
  }

  const CMatrix e = mat::E(n);
  if (convention == Convention::AsPublished) {
    const Complex quad = (x.transpose() * e * mat::dense_solve(v, x))(0, 0);
    return std::exp(-0.5 * quad) / kernels::principal_sqrt(mat::determinant(v));
  }
  const CMatrix structured = 0.5 * (v + e * v.transpose() * e);
  const Complex quad = (x.transpose() * e * mat::dense_solve(structured, x))(0, 0);
  return std::exp(0.5 * quad) / kernels::trace_normalizer(e * structured);
}

PhaseTable grid_eval(const GaussianState& state, FunctionKind kind, const PhaseGrid& grid, Convention convention,
                     const kernels::ConventionBridge* bridge) {
  if (grid.n_modes() != state.n_modes()) {
    throw std::invalid_argument("grid describes " + std::to_string(grid.n_modes()) + " modes, state has " +
                                std::to_string(state.n_modes()));
  }
  PhaseTable table;
  table.function_kind = kind;
  table.convention = convention;
  table.mode_index = grid.mode_index;
  table.points = grid.points();
  table.values.reserve(table.points.size());

  std::optional<QKernel> q;
  for (const PhasePoint& pt : table.points) {
    try {
      Complex value;
      switch (kind) {
        case FunctionKind::Husimi:
          if (!q) q = q_kernel(state, convention, bridge);
          value = q_value(*q, pt.Z());
          break;
        case FunctionKind::Wigner: value = wigner(state, pt); break;
        case FunctionKind::CharFn: value = char_fn(state, pt); break;
      }
      if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
        throw NumericalError("non-finite " + std::string(to_string(kind)) + " value");
      }
      table.values.push_back(value);
    } catch (const DomainError& e) {
      throw DomainError(std::string(e.what()) + " at " + describe(pt));
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at " + describe(pt));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string(e.what()) + " at " + describe(pt));
    }
  }
  return table;
}

void write_csv(const PhaseTable& table, std::ostream& out) {
  if (table.points.size() != table.values.size()) throw std::invalid_argument("write_csv: points/values mismatch");
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << "# function_kind: " << to_string(table.function_kind) << "\n"
     << "# convention: " << kernels::to_string(table.convention) << "\n"
     << "# measure_note: " << table.measure_note << "\n"
     << "# mode_index: " << table.mode_index << "\n"
     << "re,im,value_re,value_im\n";
  for (std::size_t k = 0; k < table.points.size(); ++k) {
    const Complex z = table.points[k].z.at(static_cast<std::size_t>(table.mode_index - 1));
    os << z.real() << ',' << z.imag() << ',' << table.values[k].real() << ',' << table.values[k].imag() << "\n";
  }
  out << os.str();
}

PhaseTable read_csv(std::istream& in) {
  PhaseTable table;
  table.measure_note.clear();
  std::string line;
  bool saw_columns = false;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("phase CSV line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) fail("malformed header");
      std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      key.erase(0, key.find_first_not_of(' '));
      value.erase(0, value.find_first_not_of(' '));
      try {
        if (key == "function_kind") table.function_kind = parse_function_kind(value);
        else if (key == "convention") table.convention = kernels::parse_convention(value);
        else if (key == "measure_note") table.measure_note = value;
        else if (key == "mode_index") table.mode_index = std::stoi(value);
      } catch (const std::exception& e) {
        fail(e.what());
      }
      continue;
    }
    if (!saw_columns) {
      if (line != "re,im,value_re,value_im") fail("unexpected column header");
      saw_columns = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != 4) fail("expected 4 columns");
    try {
      table.points.push_back(PhasePoint{{Complex(parse_double(cells[0]), parse_double(cells[1]))}});
      table.values.emplace_back(parse_double(cells[2]), parse_double(cells[3]));
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  if (!saw_columns) throw std::runtime_error("phase CSV: missing column header");
  table.mode_index = 1;
  return table;
}

NormCheck q_norm_check(const GaussianState& state, Convention convention, const kernels::ConventionBridge* bridge,
                       QuadratureSpec spec) {
  if (state.n_modes() != 1) throw std::invalid_argument("q_norm_check: single-mode states only");
  if (spec.points_per_axis < 3) throw std::invalid_argument("q_norm_check: need at least 3 points per axis");

  NormCheck out;
  out.points_per_axis = spec.points_per_axis;
  out.box_radius = spec.box_radius;
  if (out.box_radius <= 0.0) {
    const double spread = mat::max_abs(kernels::sigma_of(state, bridge));
    out.box_radius = std::max(4.0, 4.0 * std::sqrt(spread));
  }

  QKernel q;
  q.r = kernels::normal_kernel(state, convention, bridge);
  const Eigen::Matrix2cd k = real_form_single(q.r);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(k.real(), Eigen::EigenvaluesOnly);
  const double lowest = solver.eigenvalues().minCoeff();
  const bool decays = lowest > 0.0;
  q.prefactor = decays ? kernels::prefactor(q.r, convention).value
                       : kernels::principal_sqrt(mat::determinant(q.r));

  const int m = spec.points_per_axis;
  const double radius = out.box_radius;
  const double step = 2.0 * radius / (m - 1);
  Complex sum{0.0, 0.0};
  for (int a = 0; a < m; ++a) {
    const double wa = (a == 0 || a == m - 1) ? 0.5 : 1.0;
    const double x = -radius + step * a;
    for (int b = 0; b < m; ++b) {
      const double wb = (b == 0 || b == m - 1) ? 0.5 : 1.0;
      const double y = -radius + step * b;
      sum += wa * wb * q_value(q, PhasePoint{{Complex(x, y)}}.Z());
    }
  }
  out.value = sum * step * step / std::numbers::pi;

  if (!decays) {
    std::ostringstream os;
    os << "q_norm_check: Q does not decay (Re Z^T R Z has eigenvalue " << lowest
       << "); box integral |I| = " << std::abs(out.value) << " over radius " << radius << ", non-unit";
    throw DomainError(os.str());
  }
  out.tail_bound = std::abs(q.prefactor) * (2.0 / lowest) * std::exp(-0.5 * lowest * radius * radius);
  return out;
}

}  // namespace gnp::phase
