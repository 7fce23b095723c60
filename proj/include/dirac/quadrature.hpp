#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "dirac/core.hpp"

namespace dirac::quad {

/// Gauss–Legendre rule mapped to [0, 1]; weights sum to 1.
template <class Real = double>
struct GaussRule {
  std::vector<Real> nodes;
  std::vector<Real> weights;
};

/// Newton iteration on P_n from the Chebyshev initial guess.
template <class Real = double>
GaussRule<Real> gauss_legendre(std::size_t order) {
  if (order < 1) throw Error(ErrorKind::parameter, "Gauss-Legendre order must be positive");
  GaussRule<Real> rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  using std::abs;
  using std::atan;
  using std::cos;
  const Real pi = 4 * atan(Real(1));
  const auto n = static_cast<Real>(order);
  for (std::size_t i = 0; i < (order + 1) / 2; ++i) {
    Real x = cos(pi * (static_cast<Real>(i) + Real(0.75)) / (n + Real(0.5)));
    Real dp = 0;
    for (int it = 0; it < 100; ++it) {
      Real p0 = 1;
      Real p1 = x;
      for (std::size_t k = 2; k <= order; ++k) {
        const auto kk = static_cast<Real>(k);
        const Real p2 = ((2 * kk - 1) * x * p1 - (kk - 1) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const Real dx = p1 / dp;
      x -= dx;
      if (abs(dx) < std::numeric_limits<Real>::epsilon() * 4) break;
    }
    const Real w = 2 / ((1 - x * x) * dp * dp);
    // map [-1, 1] -> [0, 1]
    rule.nodes[i] = (1 - x) / 2;
    rule.nodes[order - 1 - i] = (1 + x) / 2;
    rule.weights[i] = w / 2;
    rule.weights[order - 1 - i] = w / 2;
  }
  return rule;
}

/// Composite Gauss–Legendre over [a, b] with `panels` equal panels.
template <class Real, class F>
auto integrate(const F& f, Real a, Real b, std::size_t panels, const GaussRule<Real>& rule) {
  using Value = decltype(f(a));
  Value sum{};
  const Real width = (b - a) / static_cast<Real>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const Real left = a + width * static_cast<Real>(p);
    Value panel{};
    for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
      panel += rule.weights[g] * f(left + width * rule.nodes[g]);
    }
    sum += panel * width;
  }
  return sum;
}

/// Trapezoid weights on `n` nodes with step h.
std::vector<double> trapezoid_weights(std::size_t n, double h);

/// Composite trapezoid over uniformly spaced samples.
cplx trapezoid(std::span<const cplx> values, double h);

/// Running integral from the first node: composite Simpson at even nodes,
/// Simpson plus a one-interval quadratic correction at odd nodes.
std::vector<cplx> cumulative_simpson(std::span<const cplx> values, double h);

/// Running trapezoid integral from the first node.
std::vector<cplx> cumulative_trapezoid(std::span<const cplx> values, double h);

}  // namespace dirac::quad
