#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "dirac/amplitude.hpp"
#include "dirac/core.hpp"
#include "dirac/dynamical.hpp"

namespace dirac {

using Row2 = Eigen::RowVector2cd;

/// Nystrom matrix of S_l = I + int_0^l omega(x - t) . dt on N uniform nodes,
/// in the symmetric form I + W^{1/2} Omega W^{1/2} (W = trapezoid weights).
/// It is similar to I + Omega W, so the spectrum is that of the plain Nystrom
/// matrix.
struct StructuredOperatorMatrix {
  double l = 0.0;
  std::size_t N = 0;
  Eigen::MatrixXcd matrix;
  double min_eigenvalue = 0.0;
};

/// Throws not_accelerant when the smallest eigenvalue is not positive.
StructuredOperatorMatrix build_structured_operator(const Accelerant& acc, double l, std::size_t N);

struct ThetaPair {
  Grid grid;
  std::vector<Row2> theta1;
  std::vector<Row2> theta2;
};

/// theta2(x) from S_{2x} discretised on N nodes over [0, 2x].
Row2 recover_theta2(const Accelerant& acc, double x, std::size_t N);

/// theta1 = -conj(theta2) j
Row2 recover_theta1(const Row2& theta2);

/// v = i theta1' J theta2*, theta1' by central differences (second-order
/// one-sided at the ends).
SpectralPotential recover_potential(const ThetaPair& thetas);

struct InversionResult {
  DynamicalPotential potential;
  /// Sampled v on [0, L].
  SpectralPotential v;
  ThetaPair thetas;
  /// Smallest eigenvalue of the Nystrom matrix of S_{2L}.
  double min_eigenvalue = 0.0;
  Diagnostics diagnostics;
};

/// Potential on [0, L] from r on [0, 2L]. N is the number of subintervals of
/// [0, 2L] and must be even; r is interpolated linearly when its own grid
/// differs. theta2 is recovered at every x_k = k * 2L / N, k <= N/2.
InversionResult invert_response_detailed(const ResponseFunction& r, std::size_t N);

DynamicalPotential invert_response(const ResponseFunction& r, std::size_t N);

}  // namespace dirac
