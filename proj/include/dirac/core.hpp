#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dirac/error.hpp"

namespace dirac {

using cplx = std::complex<double>;
using Vec2 = Eigen::Vector2cd;
using Mat2 = Eigen::Matrix2cd;
using RealMat2 = Eigen::Matrix2d;

inline constexpr cplx I{0.0, 1.0};

using RealFn = std::function<double(double)>;
using ComplexFn = std::function<cplx(double)>;

/// Uniform grid x0 + k*h, k = 0..n_points-1.
class Grid {
 public:
  Grid(double x0, double h, std::size_t n_points);

  /// Grid with `intervals` equal steps covering [a, b].
  static Grid over(double a, double b, std::size_t intervals);

  double x0() const { return x0_; }
  double h() const { return h_; }
  std::size_t size() const { return n_; }
  std::size_t intervals() const { return n_ - 1; }
  double node(std::size_t k) const { return x0_ + static_cast<double>(k) * h_; }
  double back() const { return node(n_ - 1); }

  bool contains(double x, double slack = 1e-12) const;
  bool matches(const Grid& other, double rel_tol = 1e-12) const;

 private:
  double x0_;
  double h_;
  std::size_t n_;
};

/// Complex samples on a uniform grid; real functions carry zero imaginary parts.
class SampledFunction {
 public:
  SampledFunction(Grid grid, std::vector<cplx> values);

  static SampledFunction sample(const Grid& grid, const ComplexFn& fn);
  static SampledFunction sample_real(const Grid& grid, const RealFn& fn);

  const Grid& grid() const { return grid_; }
  std::span<const cplx> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  cplx operator[](std::size_t k) const { return values_[k]; }

  /// Piecewise-linear interpolation; throws a domain error outside the grid.
  cplx at(double x) const;

  bool is_real(double tol = 0.0) const;
  double sup_norm() const;

 private:
  Grid grid_;
  std::vector<cplx> values_;
};

/// A function of x given either in closed form or by samples.
template <class T>
class Profile {
 public:
  using Fn = std::function<T(double)>;

  explicit Profile(Fn fn) : repr_(std::move(fn)) {}
  explicit Profile(SampledFunction samples);

  T operator()(double x) const;

  bool sampled() const { return std::holds_alternative<SampledFunction>(repr_); }
  const SampledFunction* samples() const { return std::get_if<SampledFunction>(&repr_); }

 private:
  std::variant<Fn, SampledFunction> repr_;
};

template <>
Profile<double>::Profile(SampledFunction samples);
template <>
Profile<cplx>::Profile(SampledFunction samples);
template <>
double Profile<double>::operator()(double x) const;
template <>
cplx Profile<cplx>::operator()(double x) const;

using RealProfile = Profile<double>;
using ComplexProfile = Profile<cplx>;

/// Real pair (p, q) forming the symmetric potential [[p, q], [q, -p]] of the
/// time-domain system. `m1` is a strict upper bound for its spectral norm
/// sqrt(p^2 + q^2) when known.
struct DynamicalPotential {
  RealProfile p;
  RealProfile q;
  std::optional<double> m1;

  RealMat2 matrix(double x) const;

  /// Growth rate 2*sqrt(2)*m1 of the a-priori estimates. Throws when m1 is unknown.
  double growth_rate() const;

  /// Copy with m1 set to (1 + margin) * max_{x in grid} sqrt(p^2 + q^2).
  DynamicalPotential with_estimated_bound(const Grid& grid, double margin = 1e-6) const;
};

/// Complex v of the spectral system; V = [[0, v], [conj(v), 0]].
struct SpectralPotential {
  ComplexProfile v;

  Mat2 matrix(double x) const;
};

SpectralPotential dyn_to_spec(const DynamicalPotential& pot);
DynamicalPotential spec_to_dyn(const SpectralPotential& pot);

DynamicalPotential zero_dynamical_potential();
SpectralPotential zero_spectral_potential();

}  // namespace dirac
