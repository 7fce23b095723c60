#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "dirac/core.hpp"

namespace dirac {

/// Input u1(0, t) = f(t) of the time-domain system. The callables already
/// vanish for t <= 0. c0 and c0_tilde bound |f|*sqrt(2) and |f'|*sqrt(2).
struct BoundaryControl {
  std::string name;
  ComplexFn f;
  ComplexFn df;
  ComplexFn d2f;
  double c0 = 0.0;
  double c0_tilde = 0.0;

  /// f(t) = t^2 e^{-t}
  static BoundaryControl t2exp();
  /// f(t) = t^2 e^{-t^2}
  static BoundaryControl t2gauss();
  static BoundaryControl zero();
  /// Linear interpolation of samples starting at t = 0; derivatives by finite
  /// differences. Rejects data violating f(0) = f'(0) = 0.
  static BoundaryControl from_samples(const SampledFunction& samples);
};

/// Domain [0, X] x [0, T] with spatial and temporal steps.
struct SolveGrid {
  double X = 1.0;
  double T = 1.0;
  double dx = 1.0 / 64;
  double dt = 1.0 / 64;

  static SolveGrid square(double X, double T, double h) { return {X, T, h, h}; }
};

/// u = (u1, u2) on the nodes (x_i, t_j) = (i h, j h), 0 <= i <= nx, 0 <= j <= nt.
class WaveField {
 public:
  WaveField(double h, std::size_t nx, std::size_t nt);

  double h() const { return h_; }
  std::size_t nx() const { return nx_; }
  std::size_t nt() const { return nt_; }
  double X() const { return h_ * static_cast<double>(nx_); }
  double T() const { return h_ * static_cast<double>(nt_); }

  cplx& u1(std::size_t i, std::size_t j) { return u1_[index(i, j)]; }
  cplx& u2(std::size_t i, std::size_t j) { return u2_[index(i, j)]; }
  cplx u1(std::size_t i, std::size_t j) const { return u1_[index(i, j)]; }
  cplx u2(std::size_t i, std::size_t j) const { return u2_[index(i, j)]; }
  Vec2 at(std::size_t i, std::size_t j) const { return Vec2(u1(i, j), u2(i, j)); }

  /// u2(0, t) on the time grid.
  SampledFunction boundary_u2() const;
  SampledFunction boundary_u1() const;

 private:
  std::size_t index(std::size_t i, std::size_t j) const { return j * (nx_ + 1) + i; }

  double h_;
  std::size_t nx_;
  std::size_t nt_;
  std::vector<cplx> u1_;
  std::vector<cplx> u2_;
};

/// Kernel of the convolution u2(0, .) = i f + r * f; zero for t < 0.
struct ResponseFunction {
  enum class Origin { extracted, explicit_formula, inverse_fourier };

  SampledFunction r;
  Origin origin = Origin::extracted;

  cplx operator()(double t) const { return t < 0.0 ? cplx{} : r.at(t); }
};

std::string_view to_string(ResponseFunction::Origin origin);

// ---------------------------------------------------------------------------
// Duhamel operator of the free system

using VectorField = std::function<Vec2(double x, double t)>;

struct SOperatorOptions {
  std::size_t quad_order = 4;
  /// Length (in the segment parameter) of one quadrature cell.
  double cell = 1.0 / 64;
};

/// Solution operator of i u_t + J u_x = h with u(x, 0) = 0, u1(0, t) = 0,
/// evaluated at one point t >= x by line integrals over the three
/// characteristic segments (x,t)-(0,t-x), (0,t-x)-(t-x,0), (x,t)-(x+t,0).
Vec2 s_operator(const VectorField& h, double x, double t, const SOperatorOptions& opts = {});

// ---------------------------------------------------------------------------
// Forward solvers

struct NeumannOptions {
  std::size_t k_max = 48;
  std::size_t quad_order = 4;
  /// Tolerance for the analytic truncation bound; exceeding it is a warning.
  double tolerance = 1e-6;
};

struct ForwardSolution {
  WaveField field;
  /// c0 * sum_{k > k_max} (M T)^k / k!  (series solver only)
  double truncation_bound = 0.0;
  /// sup norm of each series term A^{k} u_*, k = 0..k_max  (series solver only)
  std::vector<double> term_sup;
  Diagnostics diagnostics;
};

/// u = u_* + sum_{k=0}^{k_max-1} A^{k+1} u_*, A g = -S(V g), on a square grid.
ForwardSolution neumann_solve(const DynamicalPotential& pot, const BoundaryControl& ctrl,
                              const SolveGrid& grid, const NeumannOptions& opts = {});

struct CharacteristicsOptions {
  /// upwind_euler: first order, explicit source at the upstream node.
  /// trapezoidal: second order, source averaged over both ends of the step
  /// (a 2x2 solve per node).
  enum class Scheme { upwind_euler, trapezoidal };
  Scheme scheme = Scheme::upwind_euler;
};

/// Exact transport of the characteristic variables (u1 +- i u2)/sqrt(2) with
/// unit speed; the potential enters as a source. dx must equal dt.
ForwardSolution characteristics_solve(const DynamicalPotential& pot, const BoundaryControl& ctrl,
                                      const SolveGrid& grid,
                                      const CharacteristicsOptions& opts = {});

/// c0 * sum_{k > k_max} a^k / k!
double series_tail_bound(double c0, double a, std::size_t k_max);

// ---------------------------------------------------------------------------
// Response extraction

struct DeconvolutionOptions {
  /// Absolute residual tolerance; <= 0 selects 1e-3 * max(sup|f|, sup|u2 - i f|).
  double residual_tolerance = 0.0;
  /// Relative threshold below which f''(0) counts as zero.
  double degenerate_tolerance = 1e-8;
};

struct DeconvolutionResult {
  ResponseFunction response;
  double residual = 0.0;
};

/// Solves int_0^t r(t - s) f(s) ds = u2(0, t) - i f(t) on the samples' grid.
DeconvolutionResult extract_response_detailed(const SampledFunction& u2_boundary,
                                              const BoundaryControl& ctrl,
                                              const DeconvolutionOptions& opts = {});

ResponseFunction extract_response(const SampledFunction& u2_boundary, const BoundaryControl& ctrl,
                                  const DeconvolutionOptions& opts = {});

// ---------------------------------------------------------------------------
// A-priori estimates

struct EstimateReport {
  /// max over nodes of |u(x,t)| e^{-M t} / c0
  double growth_ratio = 0.0;
  /// max over nodes with t < x of |u(x,t)|
  double causality_residual = 0.0;
  double M = 0.0;
};

EstimateReport verify_estimates(const WaveField& field, const BoundaryControl& ctrl,
                                const DynamicalPotential& pot);

}  // namespace dirac
