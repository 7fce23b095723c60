#pragma once

#include <cstddef>
#include <vector>

#include "dirac/core.hpp"
#include "dirac/dynamical.hpp"

namespace dirac {

/// Constant matrices tying the two system forms together. Built once and
/// checked by direct multiplication on first use.
struct FrameConstants {
  Mat2 K;      ///< (1/sqrt2)[[1,-1],[1,1]]
  Mat2 Kdyn;   ///< (1/sqrt2)[[i,1],[-i,1]]
  Mat2 J;      ///< [[0,1],[1,0]]
  Mat2 j;      ///< diag(1,-1)
  Mat2 Jdyn;   ///< [[0,1],[-1,0]]
  /// Largest defect among K K* = I, Kdyn Kdyn* = I, K j K* = J, Kdyn Jdyn Kdyn* = i j.
  double defect = 0.0;

  static const FrameConstants& get();
};

struct FundamentalOptions {
  /// Warn when the step-doubling error estimate at L exceeds this.
  double tolerance = 1e-8;
  bool estimate_error = true;
};

/// Y(x, z) on a uniform x-grid over [0, L], Y(0) = I.
struct FundamentalSolution {
  Grid grid;
  cplx z;
  std::vector<Mat2> Y;
  /// Relative error of Y(L) estimated from a half-step rerun; 0 if not estimated.
  double error_estimate = 0.0;
  Diagnostics diagnostics;
};

/// Exponential midpoint rule for Y' = i(z j + j V(x)) Y. The step is reduced
/// to L / ceil(L / h) so the grid ends exactly at L.
FundamentalSolution fundamental_solution(const SpectralPotential& v, cplx z, double L, double h,
                                         const FundamentalOptions& opts = {});

/// exp of a trace-free 2x2 matrix: cosh(mu) I + sinh(mu)/mu G, mu^2 = -det G.
Mat2 expm_traceless(const Mat2& G);

struct WeylValue {
  cplx z;
  cplx phi;
  cplx phi_H;
  /// |phi_L - phi_{L/2}|, the length-halving convergence diagnostic.
  double defect = 0.0;
};

struct WeylOptions {
  double eta_min = 0.5;
  double contractive_tolerance = 1e-6;
  double pole_tolerance = 1e-10;
};

/// Least-growth minimiser at x = L: phi = -<col2, col1> / |col2|^2. The step
/// is adjusted so that L/2 is a grid node.
WeylValue weyl_estimate(const SpectralPotential& v, cplx z, double L, double h,
                        const WeylOptions& opts = {});

/// phi_H = i (1 + phi) / (1 - phi)
cplx herglotz_from_contractive(cplx phi, double pole_tolerance = 1e-10);
/// phi = (phi_H - i) / (phi_H + i)
cplx contractive_from_herglotz(cplx phi_H, double pole_tolerance = 1e-10);

struct BridgeOptions {
  /// Required bound on exp(-(Im z - M) T); larger values produce a warning.
  double truncation_tolerance = 1e-6;
  WeylOptions weyl;
  /// Length used for the Weyl estimate.
  double weyl_length = 12.0;
};

struct BridgeReport {
  /// max_x |z u^ + J u^' + V u^| / max_x |z u^|, u^' by central differences
  double residual = 0.0;
  /// max_x |a1 b2 - a2 b1| / (|a| |b|), a = Kdyn u^(x), b = Y(x, z)[1; phi]
  double collinearity_defect = 0.0;
  /// exp(-(Im z - M) T)
  double truncation = 0.0;
  double M = 0.0;
  cplx phi;
  Diagnostics diagnostics;
};

/// Fourier transform of a forward solution in t, checked against the
/// frequency-domain system and its Weyl solution.
BridgeReport verify_frequency_bridge(const WaveField& field, const BoundaryControl& ctrl,
                                     const DynamicalPotential& pot, cplx z,
                                     const BridgeOptions& opts = {});

/// Smallest multiple of h with exp(-(Im z - M) T) < tolerance.
double bridge_horizon(double M, cplx z, double h, double tolerance);

}  // namespace dirac
