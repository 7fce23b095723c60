#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "dirac/core.hpp"
#include "dirac/dynamical.hpp"

namespace dirac {

/// s and its derivative omega on [0, 2L]; omega is extended to [-2L, 2L] by
/// omega(-x) = conj(omega(x)).
struct Accelerant {
  /// s on [0, 2L]; node 0 holds s(+0) = 1/2.
  SampledFunction s;
  /// omega on [-2L, 2L]. The node at 0 holds Re omega(+0), the average of the
  /// two one-sided limits.
  SampledFunction omega;
  /// omega on [0, 2L] with omega(+0) at node 0.
  SampledFunction omega_pos;

  double length() const { return omega_pos.grid().back(); }
  /// Hermitian extension with linear interpolation; Re omega(+0) at x = 0.
  cplx omega_at(double x) const;
};

/// s = (1 + i int_0^x conj r) / 2 by cumulative Simpson, omega = (i/2) conj r.
Accelerant accelerant_from_response(const ResponseFunction& r);

/// Accelerant from omega on [0, 2L]; s = 1/2 + int_0^x omega.
Accelerant accelerant_from_omega(const SampledFunction& omega_pos);

/// r = 2i conj(omega) on [0, 2L].
ResponseFunction response_from_accelerant(const Accelerant& acc);

/// Complex-argument function, for phi_H.
using ResolventFn = std::function<cplx(cplx)>;

struct WeylInversionOptions {
  /// Step of the xi grid; 0 selects pi / (4 T_max).
  double xi_step = 0.0;
  /// Largest admissible |phi_H(+-a + i eta) - i|.
  double tail_tolerance = 1e-3;
  /// Integrate phi_H - i - c / (z + i eta) - d / (z + i eta)^2 and add back
  /// the exact transform (-i c - d t) e^{-eta t}. c and d are fitted to the
  /// integrand at z = +-a + i eta.
  bool subtract_leading_term = true;
};

struct WeylInversionResult {
  ResponseFunction response;
  double eta = 0.0;
  /// max |phi_H(+-a + i eta) - i|
  double endpoint_decay = 0.0;
  /// Same for the integrand actually summed (after subtraction, if any).
  double integrand_decay = 0.0;
  /// Fitted c and d; 0 without subtraction.
  cplx leading_coefficient;
  cplx second_coefficient;

  /// Size of the neglected tails, e^{eta t} * integrand_decay / (pi t); only
  /// meaningful for t away from 0.
  double tail_bound(double t) const;
};

/// r(t) = e^{eta t} / (2 pi) int_{-a}^{a} e^{-i xi t} (phi_H(xi + i eta) - i) d xi
/// by the trapezoid rule on the given t-grid.
WeylInversionResult response_from_weyl(const ResolventFn& phi_H, double eta, double a_max,
                                       const Grid& grid, const WeylInversionOptions& opts = {});

/// int_0^T e^{izt} r(t) dt for a closed-form r by composite Gauss-Legendre.
cplx laplace_transform(const ComplexFn& r, cplx z, double T, std::size_t panels = 400,
                       std::size_t order = 8);
/// Same for sampled r (composite Simpson on the sample grid).
cplx laplace_transform(const SampledFunction& r, cplx z);

struct AsymptoticsReport {
  std::vector<double> tau;
  /// |Delta(i tau)|
  std::vector<double> defect;
  /// |Delta(i tau)| / (tau e^{-tau l})
  std::vector<double> normalized;
  bool decreasing = false;
};

/// Delta(i tau) = phi_H(i tau) - i - 2i int_0^l e^{-tau x} conj(omega(x)) dx,
/// with the integral by composite Simpson on the accelerant grid (l must be a
/// grid node).
AsymptoticsReport check_asymptotics(const ResolventFn& phi_H, const Accelerant& acc, double l,
                                    std::span<const double> tau_grid);

/// 50 significant digits.
using Extended = boost::multiprecision::cpp_bin_float_50;
using ComplexX = boost::multiprecision::cpp_complex_50;

/// Closed-form variant evaluated in 50-digit arithmetic. For large tau l the
/// two terms of Delta cancel far below double (and long double) resolution.
AsymptoticsReport check_asymptotics(const std::function<ComplexX(const ComplexX&)>& phi_H,
                                    const std::function<ComplexX(const Extended&)>& omega, double l,
                                    std::span<const double> tau_grid);

}  // namespace dirac
