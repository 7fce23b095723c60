#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "dirac/core.hpp"

namespace dirac::gbdt {

using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;

/// Triple (A, theta1, theta2) generating an explicit potential, together with
/// the derived alpha = A - i theta1 (theta1 + theta2)*.
struct Params {
  std::size_t n = 0;
  MatrixC A;
  VectorC theta1;
  VectorC theta2;
  MatrixC alpha;
  /// ||A - A* - i(theta1 theta1* - theta2 theta2*)||
  double defect = 0.0;
};

/// Checks A - A* = i(theta1 theta1* - theta2 theta2*) within `tolerance`
/// (relative to max(1, ||A||)) and the matching identity for alpha.
Params validate_params(std::size_t n, const MatrixC& A, const VectorC& theta1,
                       const VectorC& theta2, double tolerance = 1e-12);

/// Lambda1 = e^{-ixA} theta1, Lambda2 = e^{ixA} theta2 and
/// S(x) = I + int_0^x (Lambda1 Lambda1* + Lambda2 Lambda2*) dt.
struct State {
  double x = 0.0;
  VectorC Lambda1;
  VectorC Lambda2;
  MatrixC S;
};

State state(const Params& p, double x);

/// v(x) = -2i Lambda1* S^{-1} Lambda2
cplx potential(const Params& p, double x);

/// phi_H(z) = i + 2 theta2* (z - alpha)^{-1} theta1
cplx weyl(const Params& p, cplx z);

/// r(t) = -2i theta2* e^{-it alpha} theta1
cplx response(const Params& p, double t);

struct ResponseHat {
  cplx value;
  /// Set when Im z <= ||alpha||_2.
  bool outside_guaranteed_region = false;
};

/// 2 theta2* (z - alpha)^{-1} theta1
ResponseHat response_hat(const Params& p, cplx z);

/// ||alpha||_2
double alpha_norm(const Params& p);

/// JSON object {"n", "A": [[re, im], ...] row-major, "theta1", "theta2"}.
Params params_from_json(const std::string& text);
std::string params_to_json(const Params& p);

/// n = 1, A = 0, theta1 = theta2 = 1: v = -2i / (1 + 2x).
Params example_e1();
/// n = 1, A = -3i/2, theta1 = 1, theta2 = 2: v = -12i / (4e^{3x} - e^{-3x}).
Params example_e2();

}  // namespace dirac::gbdt
