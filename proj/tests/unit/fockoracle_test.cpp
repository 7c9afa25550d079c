#include "gnp/dynamics.hpp"
#include "gnp/fockoracle.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using gnp::CMatrix;
using gnp::Complex;
namespace k = gnp::kernels;
namespace ph = gnp::phase;
namespace fock = gnp::fock;
namespace dyn = gnp::dynamics;
namespace mat = gnp::mat;
namespace oracle = gnp::oracle;

const double kLn2 = std::log(2.0);

ph::PhasePoint point(Complex z) { return ph::PhasePoint{{z}}; }

double number_expectation(const fock::FockOperator& rho) {
  const auto a = fock::annihilator(1, 1, rho.cutoff).matrix;
  return (rho.matrix * a.adjoint() * a).trace().real();
}

double thermal_q(double w, Complex z) {
  const double p0 = 1.0 - std::exp(-w);
  return p0 * std::exp(-p0 * std::norm(z));
}

TEST(Annihilator, ThreeLevels) {
  CMatrix expected = CMatrix::Zero(3, 3);
  expected(0, 1) = 1.0;
  expected(1, 2) = std::sqrt(2.0);
  EXPECT_LE(oracle::max_abs(fock::annihilator(1, 1, 3).matrix - expected), 1e-15);
}

TEST(Annihilator, CommutatorBelowTopLevel) {
  const int d = 8;
  const CMatrix a = fock::annihilator(1, 1, d).matrix;
  const CMatrix comm = a * a.adjoint() - a.adjoint() * a;
  EXPECT_LE(oracle::max_abs(comm.topLeftCorner(d - 1, d - 1) - CMatrix::Identity(d - 1, d - 1)), 1e-14);
}

TEST(Annihilator, DistinctModesCommute) {
  const CMatrix a1 = fock::annihilator(2, 1, 5).matrix;
  const CMatrix a2 = fock::annihilator(2, 2, 5).matrix;
  EXPECT_EQ(a1 * a2 - a2 * a1, CMatrix::Zero(25, 25));
  EXPECT_EQ(a1 * a2.adjoint() - a2.adjoint() * a1, CMatrix::Zero(25, 25));
}

TEST(Annihilator, ArgumentChecks) {
  EXPECT_THROW(fock::annihilator(1, 1, 1), std::invalid_argument);
  EXPECT_THROW(fock::annihilator(2, 3, 4), std::invalid_argument);
  EXPECT_THROW(fock::annihilator(1, 0, 4), std::invalid_argument);
}

TEST(QuadOperator, PassiveIsNumberPlusHalf) {
  const int d = 10;
  const CMatrix q = fock::quad_operator(mat::E(1), d).matrix;
  CMatrix expected = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) expected(i, i) = i + 0.5;
  EXPECT_LE(oracle::max_abs(q - expected), 1e-14);
}

TEST(QuadOperator, ZeroAndSqueezeGenerator) {
  const int d = 10;
  EXPECT_EQ(fock::quad_operator(CMatrix::Zero(2, 2), d).matrix, CMatrix::Zero(d, d));
  const CMatrix a = fock::annihilator(1, 1, d).matrix;
  const CMatrix expected = 0.5 * (a * a + a.adjoint() * a.adjoint());
  EXPECT_LE(oracle::max_abs(fock::quad_operator(mat::I(1), d).matrix - expected), 1e-14);
}

TEST(GaussianDensity, ThermalLogTwo) {
  const auto rho = fock::gaussian_density(fock::thermal_spec({kLn2}), 30);
  EXPECT_NEAR(rho.rho.matrix(0, 0).real(), 0.5, 1e-12);
  EXPECT_NEAR(number_expectation(rho.rho), 1.0, 1e-7);
  CMatrix off = rho.rho.matrix;
  off.diagonal().setZero();
  EXPECT_LE(oracle::max_abs(off), 1e-14);
}

TEST(GaussianDensity, ThermalThreeOccupation) {
  const auto rho = fock::gaussian_density(fock::thermal_spec({3.0}), 40);
  EXPECT_NEAR(number_expectation(rho.rho), 1.0 / (std::exp(3.0) - 1.0), 1e-12);
  EXPECT_NEAR(number_expectation(rho.rho), 0.0523957, 1e-6);
}

TEST(GaussianDensity, BoseEinsteinDiagonal) {
  for (double w : {0.3, kLn2, 2.0}) {
    const int d = 40;
    const auto rho = fock::gaussian_density(fock::thermal_spec({w}), d);
    for (int n = 0; n < d - 5; ++n) {
      EXPECT_NEAR(rho.rho.matrix(n, n).real(), (1 - std::exp(-w)) * std::exp(-w * n), 1e-10) << w << " " << n;
    }
  }
}

TEST(GaussianDensity, SqueezedThermalIsADensity) {
  const auto rho = fock::gaussian_density(fock::squeezed_thermal_spec({kLn2}, {0.5}), 40);
  const auto wide = fock::gaussian_density(fock::squeezed_thermal_spec({kLn2}, {0.5}), 80);
  EXPECT_NEAR(wide.rho.matrix.trace().real(), 1.0, 1e-8);
  EXPECT_NEAR(rho.rho.matrix.trace().real(), wide.rho.matrix.topLeftCorner(40, 40).trace().real(), 1e-12);
  EXPECT_LE(oracle::max_abs(rho.rho.matrix - wide.rho.matrix.topLeftCorner(40, 40)), 1e-12);
  EXPECT_LE(oracle::max_abs(rho.rho.matrix - rho.rho.matrix.adjoint()), 1e-12);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.rho.matrix);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
}

TEST(GaussianDensity, TailPolicy) {
  EXPECT_THROW(fock::gaussian_density(fock::thermal_spec({0.05}), 10), gnp::TruncationError);
  const auto warned = fock::gaussian_density(fock::thermal_spec({0.3}), 30);
  EXPECT_GT(warned.tail_mass, fock::kTailWarn);
  EXPECT_FALSE(warned.warning.empty());
  EXPECT_TRUE(fock::gaussian_density(fock::thermal_spec({kLn2}), 40).warning.empty());
}

TEST(GaussianDensity, TwoModeThermalFactorizes) {
  const auto rho = fock::gaussian_density(fock::thermal_spec({kLn2, 1.5}), 16);
  const double p1 = 1 - std::exp(-kLn2), p2 = 1 - std::exp(-1.5);
  EXPECT_NEAR(rho.rho.matrix(0, 0).real(), p1 * p2, 1e-10);
  EXPECT_NEAR(rho.rho.matrix(1, 1).real(), p1 * p2 * std::exp(-1.5), 1e-10);
  EXPECT_NEAR(rho.rho.matrix(16, 16).real(), p1 * p2 * std::exp(-kLn2), 1e-10);
}

TEST(CoherentVector, Examples) {
  const auto vacuum = fock::coherent_vector({0.0}, 5);
  EXPECT_EQ(vacuum(0), Complex(1.0));
  EXPECT_EQ(vacuum.tail(4).norm(), 0.0);
  EXPECT_NEAR(fock::coherent_vector({1.0}, 30).norm(), 1.0, 1e-12);
  EXPECT_THROW(fock::coherent_vector({4.0}, 10), gnp::TruncationError);
  EXPECT_GT(fock::coherent_amplitudes({4.0}, 10).norm_deficit, 1e-8);
}

TEST(CoherentVector, AnnihilatorEigenvector) {
  const Complex z(0.6, -0.3);
  const auto v = fock::coherent_vector({z}, 40);
  const CMatrix a = fock::annihilator(1, 1, 40).matrix;
  EXPECT_LE((a * v - z * v).norm(), 1e-12);
}

TEST(QOfRho, ThermalAndVacuum) {
  const auto rho = fock::gaussian_density(fock::thermal_spec({kLn2}), 40).rho;
  EXPECT_NEAR(fock::q_of_rho(rho, point(0.0)), 0.5, 1e-12);
  EXPECT_NEAR(fock::q_of_rho(rho, point(1.0)), 0.5 * std::exp(-0.5), 1e-12);
  EXPECT_NEAR(fock::q_of_rho(rho, point(1.0)), 0.30327, 1e-5);
  const auto vac = fock::gaussian_density(fock::thermal_spec({20.0}), 40).rho;
  EXPECT_NEAR(fock::q_of_rho(vac, point(0.0)), 1.0, 1e-8);
}

TEST(QOfRho, MatchesThermalClosedForm) {
  for (double w : {0.3, kLn2, 2.0}) {
    const auto rho = fock::gaussian_density(fock::thermal_spec({w}), 40).rho;
    for (Complex z : {Complex(0.4, 0.2), Complex(-1.0, 0.7), Complex(0, -1.2)}) {
      EXPECT_NEAR(fock::q_of_rho(rho, point(z)), thermal_q(w, z), 1e-9) << w;
    }
  }
}

TEST(RFromQHessian, ThermalAndVacuum) {
  const auto thermal = fock::r_from_q_hessian(fock::gaussian_density(fock::thermal_spec({kLn2}), 40).rho);
  EXPECT_LE(oracle::max_abs(thermal.r - 0.5 * mat::E(1)), 1e-6);
  EXPECT_LE(oracle::max_abs(thermal.r - thermal.r.transpose()), 0.0);
  const auto vac = fock::r_from_q_hessian(fock::gaussian_density(fock::thermal_spec({20.0}), 40).rho);
  EXPECT_LE(oracle::max_abs(vac.r - mat::E(1)), 1e-5);
}

TEST(RFromQHessian, NonGaussianWarns) {
  fock::FockOperator rho{1, 10, CMatrix::Zero(10, 10), true};
  rho.matrix(0, 0) = 0.5;
  rho.matrix(2, 2) = 0.5;
  EXPECT_FALSE(fock::r_from_q_hessian(rho).warning.empty());
}

TEST(Liouville, ThermalUnderPassiveIsStationary) {
  const auto rho0 = fock::gaussian_density(fock::thermal_spec({kLn2}), 30).rho;
  const auto out = fock::liouville_step(rho0, 0.8 * mat::E(1), 1.3);
  EXPECT_LE(oracle::max_abs(out.rho.matrix - rho0.matrix), 1e-12);
}

TEST(Liouville, VacuumSqueezing) {
  const auto run = [](int cutoff) {
    const auto vac = fock::gaussian_density(fock::thermal_spec({40.0}), cutoff).rho;
    return number_expectation(fock::liouville_step(vac, mat::I(1), 0.5).rho);
  };
  const double n40 = run(40);
  EXPECT_NEAR(n40, std::pow(std::sinh(0.5), 2), 1e-10);
  EXPECT_NEAR(n40, 0.27154, 1e-5);
  double tail = 0.0;
  for (int k = 10; k < 40; ++k) {
    tail += 2 * k * std::exp(std::lgamma(2 * k + 1) - 2 * std::lgamma(k + 1) + 2 * k * std::log(0.5 * std::tanh(0.5))) /
            std::cosh(0.5);
  }
  EXPECT_LE(std::abs(run(20) - n40), tail);
  EXPECT_LE(std::abs(run(30) - n40), 1e-8);
}

TEST(Liouville, TraceAndPurityPreserved) {
  const auto rho0 = fock::gaussian_density(fock::squeezed_thermal_spec({kLn2}, {0.3}), 40).rho;
  const auto out = fock::liouville_step(rho0, mat::I(1), 0.4).rho;
  EXPECT_NEAR(out.matrix.trace().real(), rho0.matrix.trace().real(), 1e-10);
  EXPECT_NEAR((out.matrix * out.matrix).trace().real(), (rho0.matrix * rho0.matrix).trace().real(), 1e-10);
}

TEST(Liouville, NonHermitianGeneratorRejected) {
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 0) = 1.0;
  h(1, 1) = 2.0;
  const auto rho0 = fock::gaussian_density(fock::thermal_spec({kLn2}), 20).rho;
  EXPECT_THROW(fock::liouville_step(rho0, h, 0.5), gnp::DomainError);
}

TEST(Liouville, PassiveCrossCheckAgainstVariantB) {
  const auto spec = fock::squeezed_thermal_spec({kLn2}, {0.5});
  const auto rho0 = fock::gaussian_density(spec, 40).rho;
  const k::ConventionBridge& bridge = fock::calibrated_bridge();
  const CMatrix r0 = k::g_to_r(fock::published_state(spec).get(k::Form::G));
  for (double t : {0.25, 0.5}) {
    const auto rho_t = fock::liouville_step(rho0, mat::E(1), t).rho;
    k::GaussianState evolved(1);
    evolved.set(k::Form::R, dyn::normal_propagate(r0, mat::E(1), t, dyn::Ordering::B));
    for (double re : {-1.0, 0.0, 1.0})
      for (double im : {-1.0, 0.0, 1.0}) {
        const Complex z(re, im);
        const Complex q = ph::husimi_q(evolved, point(z), k::Convention::Calibrated, &bridge);
        EXPECT_NEAR(q.real(), fock::q_of_rho(rho_t, point(z)), 1e-6) << "t " << t << " z " << z;
      }
  }
}

TEST(DerivativeIdentities, ThermalSamplePoint) {
  const auto rho = fock::gaussian_density(fock::thermal_spec({kLn2}), 40).rho;
  const auto report = fock::derivative_identity_check(rho, Complex(0.3, 0.1));
  EXPECT_LE(report.right_residual, 1e-6);
  EXPECT_LE(report.left_residual, 1e-6);
  EXPECT_FALSE(report.truncated);
  EXPECT_GT(report.row_reading_residual, 1e-3);
}

TEST(DerivativeIdentities, Origin) {
  const auto rho = fock::gaussian_density(fock::thermal_spec({kLn2}), 40).rho;
  const auto report = fock::derivative_identity_check(rho, 0.0);
  EXPECT_LE(report.right_residual, 1e-8);
  EXPECT_LE(report.left_residual, 1e-8);
}

TEST(DerivativeIdentities, TruncationFlagged) {
  const auto rho = fock::gaussian_density(fock::thermal_spec({2.0}), 15).rho;
  EXPECT_TRUE(fock::derivative_identity_check(rho, 3.0).truncated);
}

TEST(DerivativeIdentities, SqueezedState) {
  const auto rho = fock::gaussian_density(fock::squeezed_thermal_spec({kLn2}, {0.4}), 40).rho;
  for (Complex z : {Complex(0.2, -0.3), Complex(-0.5, 0.4)}) {
    const auto report = fock::derivative_identity_check(rho, z);
    EXPECT_LE(report.right_residual, 1e-6) << z;
    EXPECT_LE(report.left_residual, 1e-6) << z;
  }
}

TEST(Calibration, SuiteComposition) {
  const auto suite = fock::calibration_suite();
  ASSERT_EQ(suite.size(), 5u);
  EXPECT_EQ(suite[0].kind, fock::SpecKind::Thermal);
  EXPECT_EQ(suite[4].kind, fock::SpecKind::SqueezedThermal);
  EXPECT_LE(oracle::max_abs(suite[1].operator_kernel - kLn2 * mat::E(1)), 1e-15);
}

TEST(Calibration, SelectsNegatedKernelWithPhysicalPrefactor) {
  const auto report = fock::calibrate();
  ASSERT_EQ(report.hypotheses.size(), 15u);
  ASSERT_TRUE(report.bridge.has_value());
  EXPECT_EQ(report.bridge->r_map, k::RMap::Negate);
  EXPECT_LE(report.bridge->residual, fock::kCalibrationTolerance);
  EXPECT_GE(report.qualifying_pairs(), 1);
  for (const auto& h : report.hypotheses) {
    if (h.r_map == k::RMap::Identity) EXPECT_FALSE(h.qualifies);
    if (h.prefactor_rule == k::PrefactorRule::SqrtDetR) EXPECT_FALSE(h.qualifies);
  }
  EXPECT_NE(report.table().find("negate"), std::string::npos);
}

TEST(Calibration, CalibratedKernelsMatchOracle) {
  const auto& bridge = fock::calibrated_bridge();
  for (const auto& spec : fock::calibration_suite()) {
    const auto rho = fock::gaussian_density(spec, 40).rho;
    const CMatrix r = k::normal_kernel(fock::published_state(spec), k::Convention::Calibrated, &bridge);
    EXPECT_LE(oracle::max_abs(r - fock::r_from_q_hessian(rho).r), 1e-6) << spec.label();
  }
}

TEST(Calibration, CalibratedHusimiMatchesOracleOnGrid) {
  const auto& bridge = fock::calibrated_bridge();
  for (const auto& spec : {fock::thermal_spec({kLn2}), fock::squeezed_thermal_spec({kLn2}, {0.5})}) {
    const auto rho = fock::gaussian_density(spec, 40).rho;
    const auto state = fock::published_state(spec);
    for (double re : {-1.5, -0.75, 0.0, 0.75, 1.5})
      for (double im : {-1.5, -0.75, 0.0, 0.75, 1.5}) {
        const auto p = point(Complex(re, im));
        const Complex q = ph::husimi_q(state, p, k::Convention::Calibrated, &bridge);
        EXPECT_NEAR(q.real(), fock::q_of_rho(rho, p), 1e-6) << spec.label();
        EXPECT_LE(std::abs(q.imag()), 1e-12);
      }
  }
}

TEST(Calibration, CutoffStability) {
  const auto low = fock::calibrate(30);
  const auto high = fock::calibrate(40);
  ASSERT_EQ(low.cases.size(), high.cases.size());
  for (std::size_t i = 0; i < low.cases.size(); ++i) {
    EXPECT_LE(std::abs(low.cases[i].q0_oracle - high.cases[i].q0_oracle), 1e-8) << high.cases[i].spec.label();
    EXPECT_LE(oracle::max_abs(low.cases[i].r_oracle - high.cases[i].r_oracle), 1e-8) << high.cases[i].spec.label();
  }
}

TEST(Calibration, TooSmallCutoffFails) { EXPECT_THROW(fock::calibrate(6), gnp::NumericalError); }

}  // namespace
