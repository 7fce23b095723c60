#include "dirac/quadrature.hpp"

namespace dirac::quad {

std::vector<double> trapezoid_weights(std::size_t n, double h) {
  std::vector<double> w(n, h);
  if (n > 0) {
    w.front() = h / 2;
    w.back() = h / 2;
  }
  if (n == 1) w.front() = 0.0;
  return w;
}

cplx trapezoid(std::span<const cplx> values, double h) {
  if (values.size() < 2) return {};
  cplx sum = (values.front() + values.back()) * 0.5;
  for (std::size_t k = 1; k + 1 < values.size(); ++k) sum += values[k];
  return sum * h;
}

std::vector<cplx> cumulative_simpson(std::span<const cplx> values, double h) {
  const std::size_t n = values.size();
  std::vector<cplx> out(n, cplx{});
  if (n < 2) return out;
  if (n == 2) {
    out[1] = (values[0] + values[1]) * (h / 2);
    return out;
  }
  for (std::size_t k = 2; k < n; k += 2) {
    out[k] = out[k - 2] + (values[k - 2] + 4.0 * values[k - 1] + values[k]) * (h / 3);
  }
  // Odd nodes: integral of the quadratic through (k-1, k, k+1) over [k-1, k].
  for (std::size_t k = 1; k < n; k += 2) {
    if (k + 1 < n) {
      out[k] = out[k - 1] + (5.0 * values[k - 1] + 8.0 * values[k] - values[k + 1]) * (h / 12);
    } else {
      out[k] = out[k - 1] + (-values[k - 2] + 8.0 * values[k - 1] + 5.0 * values[k]) * (h / 12);
    }
  }
  return out;
}

std::vector<cplx> cumulative_trapezoid(std::span<const cplx> values, double h) {
  std::vector<cplx> out(values.size(), cplx{});
  for (std::size_t k = 1; k < values.size(); ++k) {
    out[k] = out[k - 1] + (values[k - 1] + values[k]) * (h / 2);
  }
  return out;
}

}  // namespace dirac::quad
