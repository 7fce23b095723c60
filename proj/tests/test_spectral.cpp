#include <cmath>

#include "dirac/spectral.hpp"
#include "doctest.h"

using namespace dirac;

namespace {

SpectralPotential e1_spectral() {
  return {ComplexProfile([](double x) { return -2.0 * I / (1.0 + 2.0 * x); })};
}

DynamicalPotential e1_dynamical() {
  return {RealProfile([](double) { return 0.0; }),
          RealProfile([](double x) { return -2.0 / (1.0 + 2.0 * x); }), 2.0};
}

}  // namespace

TEST_CASE("frame constants satisfy their identities") {
  const auto& fc = FrameConstants::get();
  CHECK(fc.defect < 1e-15);
  CHECK((fc.K * fc.j * fc.K.adjoint() - fc.J).norm() < 1e-15);
  CHECK((fc.Kdyn * fc.Jdyn * fc.Kdyn.adjoint() - I * fc.j).norm() < 1e-15);
}

TEST_CASE("traceless exponential agrees with a Taylor sum") {
  Mat2 G;
  G << cplx(0.3, 0.1), cplx(-0.2, 0.5), cplx(0.7, 0.0), cplx(-0.3, -0.1);
  Mat2 sum = Mat2::Identity();
  Mat2 term = Mat2::Identity();
  for (int k = 1; k < 30; ++k) {
    term = (term * G / static_cast<double>(k)).eval();
    sum += term;
  }
  CHECK((expm_traceless(G) - sum).norm() < 1e-14);
  CHECK((expm_traceless(Mat2::Zero()) - Mat2::Identity()).norm() == 0.0);
}

TEST_CASE("free fundamental solution is diagonal") {
  const cplx z(1.5, 0.5);
  const auto fs = fundamental_solution(zero_spectral_potential(), z, 2.0, 1.0 / 64);
  for (std::size_t k = 0; k < fs.grid.size(); k += 16) {
    const double x = fs.grid.node(k);
    CHECK(std::abs(fs.Y[k](0, 0) - std::exp(I * z * x)) < 1e-13);
    CHECK(std::abs(fs.Y[k](1, 1) - std::exp(-I * z * x)) < 1e-13);
    CHECK(std::abs(fs.Y[k](0, 1)) == 0.0);
  }
}

TEST_CASE("fundamental solution is unimodular and j-unitary for real z") {
  const auto& fc = FrameConstants::get();
  for (cplx z : {cplx(2.0, 0.0), cplx(0.5, 3.0), cplx(-1.0, 0.2)}) {
    const auto fs = fundamental_solution(e1_spectral(), z, 2.0, 1.0 / 512);
    CHECK(std::abs(fs.Y.back().determinant() - 1.0) < 1e-10);
    CHECK(fs.grid.back() == doctest::Approx(2.0));
  }
  const auto fs = fundamental_solution(e1_spectral(), 2.0, 2.0, 1.0 / 512);
  const Mat2& Y = fs.Y.back();
  CHECK((Y.adjoint() * fc.j * Y - fc.j).norm() < 1e-8);
  CHECK(fs.error_estimate < 1e-5);
}

TEST_CASE("step is shrunk to land on L") {
  const auto fs = fundamental_solution(zero_spectral_potential(), I, 1.0, 0.3);
  CHECK(fs.grid.intervals() == 4);
  CHECK(fs.grid.back() == doctest::Approx(1.0));
}

TEST_CASE("Cayley maps are inverse to each other") {
  for (cplx phi : {cplx(0.0), cplx(-1.0 / 6.0), cplx(0.3, 0.4)}) {
    CHECK(std::abs(contractive_from_herglotz(herglotz_from_contractive(phi)) - phi) < 1e-15);
  }
  CHECK(std::abs(herglotz_from_contractive(0.0) - I) < 1e-15);
  CHECK_THROWS_AS(herglotz_from_contractive(1.0), Error);
}

TEST_CASE("Weyl function of the zero potential") {
  const auto w = weyl_estimate(zero_spectral_potential(), 3.0 * I, 4.0, 1.0 / 64);
  CHECK(std::abs(w.phi) < 1e-14);
  CHECK(std::abs(w.phi_H - I) < 1e-14);
}

TEST_CASE("Weyl function of E1 at 5i") {
  const auto w = weyl_estimate(e1_spectral(), 5.0 * I, 6.0, 1.0 / 256);
  CHECK(std::abs(w.phi - (-1.0 / 6.0)) < 1e-4);
  CHECK(std::abs(w.phi_H - 5.0 / 7.0 * I) < 1e-4);
  CHECK(w.defect < 1e-4);

  // Forward shooting cannot follow the decaying solution to x = 10, so it is
  // integrated backwards from x = 20, where any start vector is attracted to it.
  const auto& fc = FrameConstants::get();
  const auto v = e1_spectral();
  const cplx z = 5.0 * I;
  const double h = 1.0 / 256;
  const std::size_t n = 20 * 256;
  std::vector<Vec2> sol(n + 1);
  sol[n] = Vec2(0.0, 1.0);
  for (std::size_t k = n; k > 0; --k) {
    const double xm = (static_cast<double>(k) - 0.5) * h;
    const Mat2 G = I * (z * fc.j + fc.j * v.matrix(xm));
    sol[k - 1] = expm_traceless(-h * G) * sol[k];
  }
  const cplx scale = sol[0](0);
  CHECK(std::abs(sol[0](1) / scale - w.phi) < 1e-4);
  bool decreasing = true;
  for (std::size_t k = 256; k < 10 * 256; ++k) {
    decreasing = decreasing && (sol[k + 1] / scale).norm() < (sol[k] / scale).norm();
  }
  CHECK(decreasing);
}

TEST_CASE("Weyl function of E1 follows the rational formula along a line") {
  for (double re : {-3.0, 0.0, 2.0}) {
    const cplx z(re, 4.0);
    const auto w = weyl_estimate(e1_spectral(), z, 6.0, 1.0 / 256);
    CHECK(std::abs(w.phi_H - (I + 2.0 / (z + 2.0 * I))) < 1e-4);
    CHECK(w.phi_H.imag() > 0.0);
  }
}

TEST_CASE("Weyl estimate rejects points too close to the real axis") {
  try {
    weyl_estimate(e1_spectral(), cplx(1.0, 0.1), 4.0, 1.0 / 64);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::precondition);
  }
}

TEST_CASE("frequency bridge for the free system") {
  const auto ctrl = BoundaryControl::t2exp();
  const cplx z = 3.0 * I;
  const double T = bridge_horizon(0.0, z, 1.0 / 512, 1e-6);
  CHECK(std::exp(-3.0 * T) < 1e-6);
  CHECK(std::exp(-3.0 * (T - 1.0 / 512)) >= 1e-6);
  const auto sol = characteristics_solve(zero_dynamical_potential(), ctrl, {0.5, T, 1.0 / 512, 1.0 / 512});
  const auto rep = verify_frequency_bridge(sol.field, ctrl, zero_dynamical_potential(), z);
  CHECK(rep.residual < 1e-4);
  CHECK(rep.collinearity_defect < 1e-6);
  CHECK(std::abs(rep.phi) < 1e-12);

  const auto none = characteristics_solve(zero_dynamical_potential(), BoundaryControl::zero(),
                                          {0.5, 1.0, 1.0 / 64, 1.0 / 64});
  const auto zrep = verify_frequency_bridge(none.field, BoundaryControl::zero(), zero_dynamical_potential(), z);
  CHECK(zrep.residual == 0.0);
}

TEST_CASE("frequency bridge for E1") {
  const auto ctrl = BoundaryControl::t2exp();
  const auto pot = e1_dynamical();
  const cplx z = 8.0 * I;
  const double h = 1.0 / 256;
  const double T = bridge_horizon(pot.growth_rate(), z, h, 1e-6);
  const auto sol = characteristics_solve(pot, ctrl, {0.25, T, h, h},
                                         {CharacteristicsOptions::Scheme::trapezoidal});
  const auto rep = verify_frequency_bridge(sol.field, ctrl, pot, z);
  CHECK(rep.truncation < 1e-6);
  CHECK(rep.residual < 1e-3);
  CHECK(rep.collinearity_defect < 1e-3);
  CHECK(std::abs(rep.phi - (2.0 / (z + 2.0 * I)) / (2.0 / (z + 2.0 * I) + 2.0 * I)) < 1e-4);
}
