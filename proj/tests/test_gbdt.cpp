#include <cmath>
#include <random>

#include "dirac/amplitude.hpp"
#include "dirac/gbdt.hpp"
#include "dirac/spectral.hpp"
#include "doctest.h"

using namespace dirac;
using namespace dirac::gbdt;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::internal;
}

/// Valid 2x2 triple: A = H + (i/2)(theta1 theta1* - theta2 theta2*) with H Hermitian.
Params two_by_two() {
  MatrixC H(2, 2);
  H << 1.0, cplx(0.3, 0.2), cplx(0.3, -0.2), -0.5;
  VectorC t1(2), t2(2);
  t1 << 1.0, cplx(0.0, 0.5);
  t2 << 0.7, -0.2;
  const MatrixC A = H + cplx(0.0, 0.5) * (t1 * t1.adjoint() - t2 * t2.adjoint());
  return validate_params(2, A, t1, t2);
}

Params random_params(std::mt19937& rng, std::size_t n) {
  std::normal_distribution<double> g;
  MatrixC H(n, n);
  VectorC t1(n), t2(n);
  for (std::size_t r = 0; r < n; ++r) {
    t1(r) = cplx(g(rng), g(rng)) * 0.6;
    t2(r) = cplx(g(rng), g(rng)) * 0.6;
    for (std::size_t c = 0; c < n; ++c) H(r, c) = cplx(g(rng), g(rng));
  }
  H = 0.5 * (H + H.adjoint()).eval();
  return validate_params(n, H + cplx(0.0, 0.5) * (t1 * t1.adjoint() - t2 * t2.adjoint()), t1, t2);
}

MatrixC m1(cplx a) { return MatrixC::Constant(1, 1, a); }
VectorC v1(cplx a) { return VectorC::Constant(1, a); }

}  // namespace

TEST_CASE("validate_params accepts the scalar examples and computes alpha") {
  const Params e1 = example_e1();
  CHECK(std::abs(e1.alpha(0, 0) - cplx(0.0, -2.0)) < 1e-15);
  const Params e2 = example_e2();
  CHECK(std::abs(e2.alpha(0, 0) - cplx(0.0, -4.5)) < 1e-15);
}

TEST_CASE("validate_params rejects a violated identity and bad dimensions") {
  CHECK(kind_of([] { validate_params(1, m1(0.0), v1(1.0), v1(2.0)); }) == ErrorKind::invalid_params);
  CHECK(kind_of([] { validate_params(2, m1(0.0), v1(1.0), v1(1.0)); }) == ErrorKind::invalid_params);
  CHECK(kind_of([] { validate_params(0, MatrixC(), VectorC(), VectorC()); }) == ErrorKind::invalid_params);
}

TEST_CASE("explicit potentials of the scalar examples") {
  const Params e1 = example_e1();
  const Params e2 = example_e2();
  for (double x : {0.0, 0.1, 0.5, 1.0, 3.0, 8.0}) {
    CHECK(std::abs(potential(e1, x) - cplx(0.0, -2.0) / (1.0 + 2.0 * x)) < 1e-14);
    const cplx exact = cplx(0.0, -12.0) / (4.0 * std::exp(3.0 * x) - std::exp(-3.0 * x));
    CHECK(std::abs(potential(e2, x) - exact) < 1e-14 * std::max(1.0, std::abs(exact)) + 1e-300);
  }
  const State s = state(e2, 0.4);
  CHECK(std::abs(s.S(0, 0) - (4.0 * std::exp(1.2) - std::exp(-1.2)) / 3.0) < 1e-13);
  CHECK(std::abs(state(e1, 0.0).S(0, 0) - 1.0) < 1e-15);
}

TEST_CASE("zero theta2 gives the zero potential, response and Weyl offset") {
  // A - A* = i theta1 theta1* with A = i/2
  const Params p = validate_params(1, m1(cplx(0.0, 0.5)), v1(1.0), v1(0.0));
  CHECK(std::abs(potential(p, 0.7)) == 0.0);
  CHECK(std::abs(response(p, 0.7)) == 0.0);
  CHECK(std::abs(response_hat(p, cplx(0.0, 3.0)).value) == 0.0);
}

TEST_CASE("zero theta1 gives phi_H = i") {
  const Params p = validate_params(1, m1(cplx(0.0, -0.5)), v1(0.0), v1(1.0));
  CHECK(std::abs(weyl(p, cplx(1.0, 2.0)) - I) == 0.0);
  CHECK(std::abs(contractive_from_herglotz(weyl(p, cplx(0.0, 4.0)))) == 0.0);
}

TEST_CASE("Weyl functions and responses of the scalar examples") {
  const Params e1 = example_e1();
  const Params e2 = example_e2();
  CHECK(std::abs(weyl(e1, cplx(0.0, 5.0)) - cplx(0.0, 5.0 / 7.0)) < 1e-15);
  const cplx z(1.5, 2.0);
  CHECK(std::abs(weyl(e1, z) - (I + 2.0 / (z + 2.0 * I))) < 1e-15);
  CHECK(std::abs(weyl(e2, z) - (I + 4.0 / (z + 4.5 * I))) < 1e-15);
  for (double t : {0.0, 0.3, 1.0, 2.0}) {
    CHECK(std::abs(response(e1, t) - cplx(0.0, -2.0) * std::exp(-2.0 * t)) < 1e-15);
    CHECK(std::abs(response(e2, t) - cplx(0.0, -4.0) * std::exp(-4.5 * t)) < 1e-15);
  }
  const auto rh = response_hat(e1, cplx(0.0, 5.0));
  CHECK(std::abs(rh.value - cplx(0.0, -2.0 / 7.0)) < 1e-15);
  CHECK_FALSE(rh.outside_guaranteed_region);
  CHECK(std::abs(rh.value / (rh.value + 2.0 * I) - (-1.0 / 6.0)) < 1e-15);
  CHECK(response_hat(e1, cplx(0.0, 1.0)).outside_guaranteed_region);
}

TEST_CASE("poles of the Weyl function are reported") {
  CHECK(kind_of([] { weyl(example_e1(), cplx(0.0, -2.0)); }) == ErrorKind::pole);
  CHECK(kind_of([] { response_hat(example_e2(), cplx(0.0, -4.5)); }) == ErrorKind::pole);
}

TEST_CASE("2x2 triple against an independent high-precision evaluation") {
  // reference values from 30-digit quadrature of S and matrix exponentials
  const Params p = two_by_two();
  CHECK(std::abs(potential(p, 0.5) - cplx(0.63207479921811683878, -0.58579512044116314916)) < 1e-13);
  CHECK(std::abs(potential(p, 1.0) - cplx(0.38787852593516967886, 0.024264725861153948564)) < 1e-13);
  CHECK(std::abs(potential(p, 3.0) - cplx(-0.09548061125106366693, -0.103660083906328057)) < 1e-13);
  CHECK(std::abs(weyl(p, cplx(1.0, 2.0)) - cplx(-0.012722141206722421508, 0.5791110587150699276)) < 1e-14);
  CHECK(std::abs(weyl(p, cplx(-3.0, 0.5)) - cplx(-0.34648126686313726287, 0.89494279968170941377)) < 1e-14);
  CHECK(std::abs(response(p, 0.5) - cplx(-0.31659268843598582518, -0.66924968627019012984)) < 1e-14);
  CHECK(std::abs(response(p, 2.0) - cplx(0.010818291429732526468, 0.022891430723120335869)) < 1e-14);
}

TEST_CASE("S is Hermitian, positive and grows from the identity") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Params p = random_params(rng, 1 + static_cast<std::size_t>(trial % 4));
    for (double x : {0.25, 1.0, 2.5}) {
      const State s = state(p, x);
      CHECK((s.S - s.S.adjoint()).norm() < 1e-12 * s.S.norm());
      Eigen::SelfAdjointEigenSolver<MatrixC> es(s.S);
      CHECK(es.eigenvalues()(0) > 0.0);
    }
  }
}

TEST_CASE("S' equals Lambda Lambda* (closed form consistent with its derivative)") {
  std::mt19937 rng(11);
  const Params p = random_params(rng, 3);
  const double x = 0.8, d = 1e-4;
  const MatrixC deriv = (state(p, x + d).S - state(p, x - d).S) / (2.0 * d);
  const State s = state(p, x);
  const MatrixC gram = s.Lambda1 * s.Lambda1.adjoint() + s.Lambda2 * s.Lambda2.adjoint();
  CHECK((deriv - gram).norm() < 1e-7 * gram.norm());
}

TEST_CASE("defective A falls back to quadrature for S") {
  // A = [[0, 1], [0, 0]] is a single Jordan block; t1 t1* - t2 t2* = [[0, -i], [i, 0]]
  MatrixC A(2, 2);
  A << 0.0, 1.0, 0.0, 0.0;
  VectorC t1(2), t2(2);
  t1 << 1.0, I;
  t2 << 1.0, -I;
  const Params p = validate_params(2, A, t1 / std::sqrt(2.0), t2 / std::sqrt(2.0));
  const double x = 0.9, d = 1e-4;
  const MatrixC deriv = (state(p, x + d).S - state(p, x - d).S) / (2.0 * d);
  const State s = state(p, x);
  const MatrixC gram = s.Lambda1 * s.Lambda1.adjoint() + s.Lambda2 * s.Lambda2.adjoint();
  CHECK((deriv - gram).norm() < 1e-7 * gram.norm());
  CHECK(std::isfinite(std::abs(potential(p, x))));
}

TEST_CASE("bridge identity weyl = response_hat + i on random triples") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> re(-10.0, 10.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Params p = random_params(rng, 1 + static_cast<std::size_t>(trial % 3));
    const double a = alpha_norm(p);
    for (int k = 0; k < 5; ++k) {
      const cplx z(re(rng), a + 0.5 + k);
      CHECK(std::abs(weyl(p, z) - response_hat(p, z).value - I) < 1e-12);
    }
  }
}

TEST_CASE("Herglotz property and limit along the imaginary axis") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 8; ++trial) {
    const Params p = random_params(rng, 2);
    for (double x = -6.0; x <= 6.0; x += 1.5) {
      for (double y : {0.2, 1.0, 5.0}) CHECK(weyl(p, cplx(x, y)).imag() >= -1e-10);
    }
    CHECK(std::abs(weyl(p, cplx(0.0, 1e3)) - I) < std::abs(weyl(p, cplx(0.0, 1e1)) - I));
    CHECK(std::abs(weyl(p, cplx(0.0, 1e8)) - I) < 1e-6);
  }
}

TEST_CASE("r(0) equals p(0) + i q(0)") {
  std::mt19937 rng(9);
  for (const Params& p : {example_e1(), example_e2(), two_by_two(), random_params(rng, 3)}) {
    const cplx v0 = potential(p, 0.0);
    const cplx pq(-v0.real(), v0.imag());
    CHECK(std::abs(response(p, 0.0) - pq) < 1e-13);
  }
}

TEST_CASE("Laplace transform of the response tends to response_hat") {
  const Params p = two_by_two();
  const cplx z(0.5, alpha_norm(p) + 2.0);
  const cplx exact = response_hat(p, z).value;
  const auto rf = [&p](double t) { return response(p, t); };
  const double e5 = std::abs(laplace_transform(rf, z, 5.0) - exact);
  const double e15 = std::abs(laplace_transform(rf, z, 15.0, 1200) - exact);
  CHECK(e15 < e5);
  CHECK(e15 < 1e-8);
}

TEST_CASE("params JSON round trip and errors") {
  const Params p = two_by_two();
  const Params q = params_from_json(params_to_json(p));
  CHECK(q.n == 2);
  CHECK((q.A - p.A).norm() < 1e-15);
  CHECK((q.theta2 - p.theta2).norm() == 0.0);
  const Params e1 = params_from_json(R"({"n":1,"A":[0],"theta1":[1],"theta2":[[1,0]]})");
  CHECK(std::abs(e1.alpha(0, 0) - cplx(0.0, -2.0)) < 1e-15);
  CHECK(kind_of([] { params_from_json("{not json"); }) == ErrorKind::parse);
  CHECK(kind_of([] { params_from_json(R"({"A":[0]})"); }) == ErrorKind::parse);
  CHECK(kind_of([] { params_from_json(R"({"n":1,"A":[0],"theta1":[1]})"); }) == ErrorKind::parse);
  CHECK(kind_of([] { params_from_json(R"({"n":1,"A":[0,0],"theta1":[1],"theta2":[1]})"); }) ==
        ErrorKind::invalid_params);
  CHECK(kind_of([] { params_from_json(R"({"n":1,"A":[0],"theta1":[1],"theta2":[2]})"); }) ==
        ErrorKind::invalid_params);
  CHECK(kind_of([] { params_from_json(R"({"n":1,"A":["x"],"theta1":[1],"theta2":[1]})"); }) ==
        ErrorKind::parse);
}
