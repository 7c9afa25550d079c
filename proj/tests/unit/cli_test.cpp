#include "commands.hpp"
#include "io.hpp"
#include "oracles.hpp"

#include "gnp/fockoracle.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

using gnp::CMatrix;
using gnp::Complex;
namespace cli = gnp::cli;
namespace k = gnp::kernels;
namespace mat = gnp::mat;
namespace oracle = gnp::oracle;
namespace fs = std::filesystem;
using nlohmann::json;

const double kLn2 = std::log(2.0);

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("gnp_cli_") + info->name() + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write_state(const std::string& name, k::Form form, const CMatrix& m,
                          k::Convention convention = k::Convention::AsPublished) {
    cli::StateFile file;
    file.n_modes = mat::modes_of(m);
    file.form = form;
    file.matrix = m;
    file.convention = convention;
    file.provenance = "test fixture";
    cli::write_state_file(path(name), file);
    return path(name);
  }

  std::string write_hamiltonian(const std::string& name, const CMatrix& h) {
    json doc;
    doc["n_modes"] = h.rows() / 2;
    json rows = json::array();
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < h.cols(); ++j) row.push_back({h(i, j).real(), h(i, j).imag()});
      rows.push_back(row);
    }
    doc["matrix"] = rows;
    cli::write_text(path(name), doc.dump());
    return path(name);
  }

  static int exit_status(const std::string& args) {
    const std::string command = std::string(GNP_BINARY) + " " + args + " > /dev/null 2>&1";
    const int raw = std::system(command.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  }

  std::ostringstream out_;
  std::ostringstream err_;
  fs::path dir_;
};

CMatrix h_mixed() {
  CMatrix h(2, 2);
  h << 0.5, 1, 1, 0.5;
  return h;
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& file) {
  std::ifstream in(file);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell.empty() ? NAN : std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

TEST_F(CliTest, ValidateExitCodes) {
  const auto good = write_state("g.json", k::Form::G, kLn2 * mat::I(1));
  EXPECT_EQ(cli::run_validate(good, out_, err_), cli::kSuccess);
  EXPECT_NE(out_.str().find("result: PASS"), std::string::npos);

  CMatrix bad = kLn2 * mat::I(1);
  bad(0, 1) = 0.3;
  EXPECT_EQ(cli::run_validate(write_state("bad.json", k::Form::G, bad), out_, err_), cli::kValidationFailure);
  EXPECT_EQ(cli::run_validate(path("missing.json"), out_, err_), cli::kIoFailure);

  cli::write_text(path("broken.json"), "{\"n_modes\": 1, \"form\": ");
  EXPECT_EQ(cli::run_validate(path("broken.json"), out_, err_), cli::kIoFailure);
  cli::write_text(path("shape.json"), R"({"n_modes": 2, "form": "G", "matrix": [[[1,0],[0,0]],[[0,0],[1,0]]]})");
  EXPECT_EQ(cli::run_validate(path("shape.json"), out_, err_), cli::kIoFailure);
}

TEST_F(CliTest, ConvertThermalGToR) {
  const auto in = write_state("g.json", k::Form::G, kLn2 * mat::I(1));
  ASSERT_EQ(cli::run_convert({in, path("r.json"), "R", std::nullopt}, out_, err_), cli::kSuccess) << err_.str();
  const auto r = cli::read_state_file(path("r.json"));
  EXPECT_EQ(r.form, k::Form::R);
  EXPECT_LE(oracle::max_abs(r.matrix + 0.5 * mat::E(1)), 1e-12);
  EXPECT_NE(r.provenance.find("convert G->R"), std::string::npos);
}

TEST_F(CliTest, ConvertCalibratedR) {
  const auto in = write_state("g.json", k::Form::G, kLn2 * mat::I(1));
  ASSERT_EQ(cli::run_convert({in, path("r.json"), "R", "calibrated"}, out_, err_), cli::kSuccess) << err_.str();
  const auto r = cli::read_state_file(path("r.json"));
  EXPECT_EQ(r.convention, k::Convention::Calibrated);
  EXPECT_LE(oracle::max_abs(r.matrix - 0.5 * mat::E(1)), 1e-12);
  ASSERT_EQ(cli::run_convert({path("r.json"), path("sigma.json"), "sigma", std::nullopt}, out_, err_), cli::kSuccess);
  EXPECT_LE(oracle::max_abs(cli::read_state_file(path("sigma.json")).matrix - 3.0 * mat::I(1)), 1e-12);
}

TEST_F(CliTest, ConvertVacuumSigmaToGIsNumericalFailure) {
  const auto in = write_state("vac.json", k::Form::Sigma, mat::I(1));
  EXPECT_EQ(cli::run_convert({in, path("g.json"), "G", std::nullopt}, out_, err_), cli::kNumericalFailure);
}

TEST_F(CliTest, ConvertToSameFormKeepsMatrixBits) {
  const CMatrix g = oracle::Random(51).valid_g(2);
  const auto in = write_state("g.json", k::Form::G, g);
  ASSERT_EQ(cli::run_convert({in, path("same.json"), "G", std::nullopt}, out_, err_), cli::kSuccess);
  const auto a = cli::read_state_file(in), b = cli::read_state_file(path("same.json"));
  EXPECT_EQ(std::memcmp(a.matrix.data(), b.matrix.data(), sizeof(Complex) * a.matrix.size()), 0);
}

TEST_F(CliTest, ConvertRejectsUnknownForm) {
  const auto in = write_state("g.json", k::Form::G, kLn2 * mat::I(1));
  EXPECT_EQ(cli::run_convert({in, path("x.json"), "Q", std::nullopt}, out_, err_), cli::kIoFailure);
}

TEST_F(CliTest, StateFilesRoundTripBitExactly) {
  const CMatrix m = oracle::Random(52).complex_matrix(4, 4, 3.0);
  const auto file = write_state("m.json", k::Form::R, m, k::Convention::Calibrated);
  const auto back = cli::read_state_file(file);
  EXPECT_EQ(std::memcmp(back.matrix.data(), m.data(), sizeof(Complex) * m.size()), 0);
  EXPECT_EQ(back.convention, k::Convention::Calibrated);
  EXPECT_EQ(cli::dump_state(back), cli::read_text(file));
}

TEST_F(CliTest, SpectrumReportsFrequencies) {
  const auto in = write_state("g.json", k::Form::G, kLn2 * mat::I(1));
  ASSERT_EQ(cli::run_spectrum(in, out_, err_), cli::kSuccess);
  EXPECT_NE(out_.str().find("nu = 3"), std::string::npos) << out_.str();
}

TEST_F(CliTest, EvolveClosedVariantB) {
  const auto in = write_state("r.json", k::Form::R, -0.5 * mat::E(1));
  const auto h = write_hamiltonian("h.json", mat::I(1));
  cli::EvolveOptions opts;
  opts.input = in;
  opts.hamiltonian = h;
  opts.output = path("traj.csv");
  opts.t = 0.5;
  ASSERT_EQ(cli::run_evolve(opts, out_, err_), cli::kSuccess) << err_.str();
  const auto final_state = cli::read_state_file(path("traj.csv.final.json"));
  const Complex i(0, 1);
  const CMatrix expected = -0.5 * (std::cosh(1.0) * mat::E(1) - i * std::sinh(1.0) * mat::Omega(1));
  EXPECT_LE(oracle::max_abs(final_state.matrix - expected), 1e-13);
  const auto rows = read_numeric_csv(path("traj.csv"));
  ASSERT_EQ(rows.size(), 501u);
  EXPECT_NEAR(rows.back()[9], -0.25, 1e-13);
  EXPECT_NEAR(rows.back()[10], 0.0, 1e-13);
}

TEST_F(CliTest, EvolveZeroTimeSingleRow) {
  const CMatrix r0 = -0.5 * mat::E(1);
  const auto in = write_state("r.json", k::Form::R, r0);
  cli::EvolveOptions opts;
  opts.input = in;
  opts.hamiltonian = write_hamiltonian("h.json", mat::I(1));
  opts.output = path("traj.csv");
  opts.final_output = path("final.json");
  ASSERT_EQ(cli::run_evolve(opts, out_, err_), cli::kSuccess) << err_.str();
  const auto rows = read_numeric_csv(path("traj.csv"));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0][0], 0.0);
  EXPECT_EQ(rows[0][3], -0.5);
  EXPECT_EQ(cli::read_state_file(path("final.json")).matrix, r0);
}

TEST_F(CliTest, EvolveRk4MatchesClosedColumnwise) {
  const auto in = write_state("r.json", k::Form::R, -0.5 * mat::E(1));
  const auto h = write_hamiltonian("h.json", h_mixed());
  cli::EvolveOptions opts;
  opts.input = in;
  opts.hamiltonian = h;
  opts.t = 0.5;
  opts.steps = 500;
  opts.output = path("closed.csv");
  ASSERT_EQ(cli::run_evolve(opts, out_, err_), cli::kSuccess);
  opts.method = "rk4";
  opts.output = path("rk4.csv");
  ASSERT_EQ(cli::run_evolve(opts, out_, err_), cli::kSuccess);
  const auto a = read_numeric_csv(path("closed.csv")), b = read_numeric_csv(path("rk4.csv"));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t c = 0; c < 11; ++c) ASSERT_NEAR(a[r][c], b[r][c], 1e-8) << r << "," << c;
}

TEST_F(CliTest, EvolveCovarianceFlow) {
  const auto in = write_state("s.json", k::Form::Sigma, 3.0 * mat::I(1));
  cli::EvolveOptions opts;
  opts.input = in;
  opts.hamiltonian = write_hamiltonian("h.json", mat::E(1));
  opts.t = 1.0;
  opts.output = path("traj.csv");
  ASSERT_EQ(cli::run_evolve(opts, out_, err_), cli::kSuccess);
  const auto final_state = cli::read_state_file(path("traj.csv.final.json"));
  EXPECT_NEAR(final_state.matrix(0, 0).real(), 3 * std::exp(2.0), 1e-11);
  EXPECT_NE(out_.str().find("max_symplectic_residual"), std::string::npos);
}

TEST_F(CliTest, EvolvePreconditions) {
  cli::EvolveOptions opts;
  opts.input = write_state("g.json", k::Form::G, kLn2 * mat::I(1));
  opts.hamiltonian = write_hamiltonian("h.json", mat::I(1));
  opts.output = path("traj.csv");
  opts.t = 1.0;
  EXPECT_EQ(cli::run_evolve(opts, out_, err_), cli::kValidationFailure);

  opts.input = write_state("r.json", k::Form::R, -0.5 * mat::E(1));
  opts.hamiltonian = write_hamiltonian("h2.json", mat::I(2));
  EXPECT_EQ(cli::run_evolve(opts, out_, err_), cli::kValidationFailure);

  CMatrix asym = mat::I(1);
  asym(0, 1) = 1.0;
  opts.hamiltonian = write_hamiltonian("asym.json", asym);
  EXPECT_EQ(cli::run_evolve(opts, out_, err_), cli::kValidationFailure);

  opts.hamiltonian = write_hamiltonian("h.json", mat::I(1));
  opts.t = -1.0;
  EXPECT_EQ(cli::run_evolve(opts, out_, err_), cli::kIoFailure);
}

TEST_F(CliTest, EvolveBlowUpIsNumericalFailure) {
  cli::EvolveOptions opts;
  opts.input = write_state("r.json", k::Form::R, 1e150 * mat::E(1) + mat::I(1));
  opts.hamiltonian = write_hamiltonian("h.json", 1e150 * mat::I(1));
  opts.output = path("traj.csv");
  opts.t = 1.0;
  opts.method = "rk4";
  opts.steps = 3;
  EXPECT_EQ(cli::run_evolve(opts, out_, err_), cli::kNumericalFailure);
  EXPECT_NE(err_.str().find("step"), std::string::npos) << err_.str();
}

TEST_F(CliTest, PhaseCalibratedThermalCenter) {
  cli::PhaseOptions opts;
  opts.input = write_state("g.json", k::Form::G, kLn2 * mat::I(1));
  opts.output = path("q.csv");
  opts.grid = "-2:2:41";
  opts.convention = "calibrated";
  ASSERT_EQ(cli::run_phase(opts, out_, err_), cli::kSuccess) << err_.str();
  std::ifstream in(path("q.csv"));
  const auto table = gnp::phase::read_csv(in);
  ASSERT_EQ(table.values.size(), 41u * 41u);
  EXPECT_LE(std::abs(table.values[20 * 41 + 20] - 0.5), 1e-14);
}

TEST_F(CliTest, PhaseCharAtOrigin) {
  cli::PhaseOptions opts;
  opts.input = write_state("g.json", k::Form::G, kLn2 * mat::I(1));
  opts.output = path("c.csv");
  opts.fn = "char";
  opts.grid = "0:0:1";
  ASSERT_EQ(cli::run_phase(opts, out_, err_), cli::kSuccess) << err_.str();
  std::ifstream in(path("c.csv"));
  const auto table = gnp::phase::read_csv(in);
  ASSERT_EQ(table.values.size(), 1u);
  EXPECT_EQ(table.values[0], Complex(1.0));
}

TEST_F(CliTest, PhaseNormChecks) {
  cli::PhaseOptions opts;
  opts.input = write_state("g.json", k::Form::G, kLn2 * mat::I(1));
  opts.output = path("q.csv");
  opts.grid = "-1:1:5";
  opts.check_norm = true;
  EXPECT_EQ(cli::run_phase(opts, out_, err_), cli::kNumericalFailure);
  EXPECT_NE(err_.str().find("non-unit"), std::string::npos) << err_.str();
  opts.convention = "calibrated";
  EXPECT_EQ(cli::run_phase(opts, out_, err_), cli::kSuccess);
  EXPECT_NE(out_.str().find("norm = 0.99999"), std::string::npos) << out_.str();
}

TEST_F(CliTest, PhaseRejectsMultiModeAndBadGrid) {
  cli::PhaseOptions opts;
  opts.input = write_state("g2.json", k::Form::G, mat::I(2));
  opts.output = path("q.csv");
  opts.grid = "-1:1:5";
  EXPECT_EQ(cli::run_phase(opts, out_, err_), cli::kValidationFailure);
  opts.input = write_state("g.json", k::Form::G, kLn2 * mat::I(1));
  opts.grid = "-1:1";
  EXPECT_EQ(cli::run_phase(opts, out_, err_), cli::kIoFailure);
}

TEST_F(CliTest, PhaseCsvIsDeterministic) {
  cli::PhaseOptions opts;
  opts.input = write_state("g.json", k::Form::G, kLn2 * mat::I(1));
  opts.fn = "wigner";
  opts.grid = "-1.5:1.5:13";
  opts.output = path("a.csv");
  ASSERT_EQ(cli::run_phase(opts, out_, err_), cli::kSuccess);
  opts.output = path("b.csv");
  ASSERT_EQ(cli::run_phase(opts, out_, err_), cli::kSuccess);
  EXPECT_EQ(cli::read_text(path("a.csv")), cli::read_text(path("b.csv")));
  std::ifstream in(path("a.csv"));
  std::ostringstream again;
  gnp::phase::write_csv(gnp::phase::read_csv(in), again);
  EXPECT_EQ(again.str(), cli::read_text(path("a.csv")));
}

TEST_F(CliTest, AuditNamesVariantB) {
  cli::AuditOptions opts;
  opts.input = write_state("g.json", k::Form::G, kLn2 * mat::I(1));
  opts.hamiltonian = write_hamiltonian("h.json", h_mixed());
  opts.output = path("report.json");
  opts.command = {"gnp", "audit"};
  ASSERT_EQ(cli::run_audit(opts, out_, err_), cli::kSuccess) << err_.str();
  const json report = json::parse(cli::read_text(path("report.json")));
  EXPECT_EQ(report["ordering_audit"]["consistent_variants"], json::array({"B"}));
  EXPECT_FALSE(report["ordering_audit"]["vacuous"].get<bool>());
  EXPECT_NE(report["ordering_audit"]["conclusion"].get<std::string>().find("variant B satisfies"), std::string::npos);
  EXPECT_EQ(report["inputs"]["state"]["sha256"].get<std::string>(), cli::sha256_hex(cli::read_text(opts.input)));
  EXPECT_FALSE(report.contains("calibration"));
}

TEST_F(CliTest, AuditPassiveIsVacuous) {
  cli::AuditOptions opts;
  opts.input = write_state("g.json", k::Form::G, kLn2 * mat::I(1));
  opts.hamiltonian = write_hamiltonian("h.json", 0.7 * mat::E(1));
  opts.output = path("report.json");
  ASSERT_EQ(cli::run_audit(opts, out_, err_), cli::kSuccess) << err_.str();
  EXPECT_TRUE(json::parse(cli::read_text(path("report.json")))["ordering_audit"]["vacuous"].get<bool>());
}

TEST_F(CliTest, AuditWithOracleIsDeterministic) {
  cli::AuditOptions opts;
  opts.input = write_state("g.json", k::Form::G, kLn2 * mat::I(1));
  opts.hamiltonian = write_hamiltonian("h.json", h_mixed());
  opts.output = path("report.json");
  opts.with_oracle = true;
  opts.command = {"gnp", "audit", "--with-oracle"};
  ASSERT_EQ(cli::run_audit(opts, out_, err_), cli::kSuccess) << err_.str();
  const std::string first = cli::read_text(path("report.json"));
  ASSERT_EQ(cli::run_audit(opts, out_, err_), cli::kSuccess);
  EXPECT_EQ(cli::read_text(path("report.json")), first);
  const json report = json::parse(first);
  const json& bridge = report["calibration"]["bridge"];
  ASSERT_TRUE(bridge.is_object());
  EXPECT_EQ(bridge["r_map"], "negate");
  EXPECT_LE(bridge["residual"].get<double>(), gnp::fock::kCalibrationTolerance);
  EXPECT_EQ(report["calibration"]["hypotheses"].size(), 15u);
}

TEST_F(CliTest, AuditRejectsInvalidG) {
  CMatrix g(2, 2);
  g << 1, 2, 2, 1;
  cli::AuditOptions opts;
  opts.input = write_state("g.json", k::Form::G, g);
  opts.hamiltonian = write_hamiltonian("h.json", h_mixed());
  opts.output = path("report.json");
  EXPECT_EQ(cli::run_audit(opts, out_, err_), cli::kValidationFailure);
}

TEST_F(CliTest, AuditOracleTruncationIsNumericalFailure) {
  cli::AuditOptions opts;
  opts.input = write_state("g.json", k::Form::G, kLn2 * mat::I(1));
  opts.hamiltonian = write_hamiltonian("h.json", h_mixed());
  opts.output = path("report.json");
  opts.with_oracle = true;
  opts.cutoff = 6;
  EXPECT_EQ(cli::run_audit(opts, out_, err_), cli::kNumericalFailure);
}

TEST_F(CliTest, BinaryExitCodeContract) {
  const auto g = write_state("g.json", k::Form::G, kLn2 * mat::I(1));
  CMatrix bad = kLn2 * mat::I(1);
  bad(0, 1) = 0.3;
  const auto b = write_state("bad.json", k::Form::G, bad);
  const auto vac = write_state("vac.json", k::Form::Sigma, mat::I(1));
  EXPECT_EQ(exit_status("--version"), 0);
  EXPECT_EQ(exit_status("--help"), 0);
  EXPECT_EQ(exit_status("validate " + g), 0);
  EXPECT_EQ(exit_status("validate " + b), 1);
  EXPECT_EQ(exit_status("convert " + vac + " --to G -o " + path("out.json")), 2);
  EXPECT_EQ(exit_status("phase " + g + " --fn q --grid -1:1:3 --check-norm -o " + path("q.csv")), 2);
  EXPECT_EQ(exit_status("validate " + path("missing.json")), 3);
  EXPECT_EQ(exit_status("frobnicate"), 3);
  EXPECT_EQ(exit_status(""), 3);
  EXPECT_EQ(exit_status("convert " + g + " -o " + path("out.json")), 3);
  EXPECT_EQ(exit_status("convert " + g + " --to R --convention sideways -o " + path("out.json")), 3);
  EXPECT_EQ(exit_status("evolve " + g + " --ham " + path("nope.json") + " --t 1 -o " + path("t.csv")), 3);
}

TEST_F(CliTest, BinaryEvolveWritesFiles) {
  const auto r = write_state("r.json", k::Form::R, -0.5 * mat::E(1));
  const auto h = write_hamiltonian("h.json", mat::I(1));
  ASSERT_EQ(exit_status("evolve " + r + " --ham " + h + " --t 0.5 -o " + path("t.csv")), 0);
  EXPECT_TRUE(fs::exists(path("t.csv")));
  EXPECT_TRUE(fs::exists(path("t.csv.final.json")));
}

}  // namespace
