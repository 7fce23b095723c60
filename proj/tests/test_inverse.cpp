#include <cmath>

#include <Eigen/Eigenvalues>

#include "dirac/inverse.hpp"
#include "doctest.h"

using namespace dirac;

namespace {

const double kRootHalf = std::sqrt(0.5);

ResponseFunction exp_response(double a, double rate, std::size_t n) {
  return {SampledFunction::sample(Grid::over(0.0, 2.0, n), [=](double t) { return -a * I * std::exp(-rate * t); }),
          ResponseFunction::Origin::explicit_formula};
}

Accelerant exp_accelerant(double a, double rate, double length, std::size_t n) {
  return accelerant_from_omega(
      SampledFunction::sample(Grid::over(0.0, length, n), [=](double x) { return cplx(-a * std::exp(-rate * x)); }));
}

cplx e1_v(double x) { return -2.0 * I / (1.0 + 2.0 * x); }
cplx e2_v(double x) { return -12.0 * I / (4.0 * std::exp(3.0 * x) - std::exp(-3.0 * x)); }

double relative_error(const InversionResult& res, cplx (*exact)(double)) {
  double err = 0.0;
  double ref = 0.0;
  const Grid& g = res.thetas.grid;
  for (std::size_t k = 0; k < g.size(); ++k) {
    err = std::max(err, std::abs(res.v.v(g.node(k)) - exact(g.node(k))));
    ref = std::max(ref, std::abs(exact(g.node(k))));
  }
  return err / ref;
}

}  // namespace

TEST_CASE("zero accelerant gives the identity") {
  const auto acc = exp_accelerant(0.0, 1.0, 2.0, 64);
  const auto op = build_structured_operator(acc, 1.0, 50);
  CHECK((op.matrix - Eigen::MatrixXcd::Identity(50, 50)).norm() == 0.0);
  CHECK(op.min_eigenvalue == doctest::Approx(1.0));
}

TEST_CASE("structured operator is Hermitian and positive for E1") {
  const auto acc = exp_accelerant(1.0, 2.0, 2.0, 2048);
  for (double l : {0.5, 1.0, 2.0}) {
    const auto op = build_structured_operator(acc, l, 200);
    CHECK((op.matrix - op.matrix.adjoint()).norm() <= 1e-12);
    CHECK(op.min_eigenvalue > 0.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.matrix);
    CHECK(es.eigenvalues().minCoeff() == doctest::Approx(op.min_eigenvalue).epsilon(1e-10));
  }
}

TEST_CASE("positivity gate rejects a non-accelerant") {
  const auto acc = exp_accelerant(3.0, 2.0, 2.0, 2048);
  try {
    build_structured_operator(acc, 2.0, 200);
    FAIL("expected not-a-valid-accelerant");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::not_accelerant);
  }
  CHECK_THROWS_AS(build_structured_operator(acc, 2.0, 4), Error);
  CHECK_THROWS_AS(build_structured_operator(acc, 3.0, 200), Error);
}

TEST_CASE("theta2 starts at the base value") {
  const Row2 base(-kRootHalf, kRootHalf);
  const auto e1 = exp_accelerant(1.0, 2.0, 2.0, 256);
  CHECK((recover_theta2(e1, 0.0, 64) - base).norm() < 1e-15);
  const auto zero = exp_accelerant(0.0, 1.0, 2.0, 64);
  for (double x : {0.25, 0.5, 1.0}) CHECK((recover_theta2(zero, x, 64) - base).norm() < 1e-15);
  // continuity at 0
  CHECK((recover_theta2(e1, 1e-3, 64) - base).norm() < 1e-2);
}

TEST_CASE("theta1 from theta2") {
  const Row2 t1 = recover_theta1(Row2(-kRootHalf, kRootHalf));
  CHECK((t1 - Row2(kRootHalf, kRootHalf)).norm() < 1e-16);
  CHECK((recover_theta1(Row2(0.0, I)) - Row2(0.0, -I)).norm() == 0.0);
  const Row2 t2(cplx(0.3, -0.2), cplx(-1.1, 0.4));
  const Row2 twice = recover_theta1(recover_theta1(t2));
  CHECK((twice - t2).norm() < 1e-16);
}

TEST_CASE("constant thetas give a zero potential") {
  const Grid g = Grid::over(0.0, 1.0, 10);
  ThetaPair tp{g, std::vector<Row2>(g.size(), Row2(kRootHalf, kRootHalf)),
               std::vector<Row2>(g.size(), Row2(-kRootHalf, kRootHalf))};
  const auto v = recover_potential(tp);
  for (double x : {0.0, 0.3, 1.0}) CHECK(std::abs(v.v(x)) == 0.0);
  ThetaPair tiny{Grid::over(0.0, 1.0, 1), {Row2::Zero(), Row2::Zero()}, {Row2::Zero(), Row2::Zero()}};
  CHECK_THROWS_AS(recover_potential(tiny), Error);
}

TEST_CASE("zero response inverts to the zero potential") {
  const auto res = invert_response_detailed(exp_response(0.0, 1.0, 64), 64);
  for (std::size_t k = 0; k < res.thetas.grid.size(); ++k) {
    const double x = res.thetas.grid.node(k);
    CHECK(res.potential.p(x) == 0.0);
    CHECK(res.potential.q(x) == 0.0);
  }
  CHECK(res.min_eigenvalue == doctest::Approx(1.0));
}

TEST_CASE("E1 and E2 round trips converge at second order") {
  const auto e1a = invert_response_detailed(exp_response(2.0, 2.0, 150), 150);
  const auto e1b = invert_response_detailed(exp_response(2.0, 2.0, 300), 300);
  const double err1a = relative_error(e1a, e1_v);
  const double err1b = relative_error(e1b, e1_v);
  CHECK(err1b < 1e-3);
  CHECK(std::log2(err1a / err1b) > 1.8);
  for (double x : {0.0, 0.5, 1.0}) {
    CHECK(std::abs(e1b.potential.p(x)) < 1e-3);
    CHECK(e1b.potential.q(x) == doctest::Approx(-2.0 / (1.0 + 2.0 * x)).epsilon(1e-3));
  }

  const auto e2a = invert_response_detailed(exp_response(4.0, 4.5, 150), 150);
  const auto e2b = invert_response_detailed(exp_response(4.0, 4.5, 300), 300);
  const double err2b = relative_error(e2b, e2_v);
  CHECK(err2b < 1e-3);
  CHECK(std::log2(relative_error(e2a, e2_v) / err2b) > 1.8);
  CHECK(e2b.min_eigenvalue > 0.0);
}

TEST_CASE("response on a finer grid is resampled") {
  const auto res = invert_response_detailed(exp_response(2.0, 2.0, 600), 150);
  CHECK(res.thetas.grid.intervals() == 75);
  CHECK(relative_error(res, e1_v) < 2e-3);
}

TEST_CASE("inversion rejects odd or tiny N") {
  CHECK_THROWS_AS(invert_response(exp_response(2.0, 2.0, 64), 63), Error);
  CHECK_THROWS_AS(invert_response(exp_response(2.0, 2.0, 64), 2), Error);
}
