#include "dirac/amplitude.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dirac/parallel.hpp"
#include "dirac/quadrature.hpp"

namespace dirac {

namespace {

void require_origin(const Grid& g, const char* what) {
  if (std::abs(g.x0()) > 1e-12 * g.h()) {
    throw Error(ErrorKind::parameter, std::string(what) + " must start at 0",
                "x0=" + std::to_string(g.x0()));
  }
}

/// Builds the symmetric omega grid on [-2L, 2L] from omega on [0, 2L].
SampledFunction hermitian_extension(const SampledFunction& pos) {
  const std::size_t n = pos.size() - 1;
  const double h = pos.grid().h();
  std::vector<cplx> values(2 * n + 1);
  for (std::size_t k = 1; k <= n; ++k) {
    values[n + k] = pos[k];
    values[n - k] = std::conj(pos[k]);
  }
  values[n] = cplx(pos[0].real(), 0.0);
  return SampledFunction(Grid(-static_cast<double>(n) * h, h, 2 * n + 1), std::move(values));
}

}  // namespace

cplx Accelerant::omega_at(double x) const {
  if (x == 0.0) return cplx(omega_pos[0].real(), 0.0);
  if (x > 0.0) return omega_pos.at(x);
  return std::conj(omega_pos.at(-x));
}

Accelerant accelerant_from_response(const ResponseFunction& r) {
  const Grid& g = r.r.grid();
  require_origin(g, "response grid");
  const std::size_t n = g.size();
  std::vector<cplx> conj_r(n);
  std::vector<cplx> omega(n);
  for (std::size_t k = 0; k < n; ++k) {
    conj_r[k] = std::conj(r.r[k]);
    omega[k] = 0.5 * I * conj_r[k];
  }
  const auto integral = quad::cumulative_simpson(conj_r, g.h());
  std::vector<cplx> s(n);
  for (std::size_t k = 0; k < n; ++k) s[k] = 0.5 * (1.0 + I * integral[k]);
  SampledFunction omega_pos(g, std::move(omega));
  auto ext = hermitian_extension(omega_pos);
  return {SampledFunction(g, std::move(s)), std::move(ext), std::move(omega_pos)};
}

Accelerant accelerant_from_omega(const SampledFunction& omega_pos) {
  require_origin(omega_pos.grid(), "accelerant grid");
  const auto integral = quad::cumulative_simpson(omega_pos.values(), omega_pos.grid().h());
  std::vector<cplx> s(integral.size());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = 0.5 + integral[k];
  return {SampledFunction(omega_pos.grid(), std::move(s)), hermitian_extension(omega_pos),
          omega_pos};
}

ResponseFunction response_from_accelerant(const Accelerant& acc) {
  std::vector<cplx> r(acc.omega_pos.size());
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = 2.0 * I * std::conj(acc.omega_pos[k]);
  return {SampledFunction(acc.omega_pos.grid(), std::move(r)), ResponseFunction::Origin::extracted};
}

double WeylInversionResult::tail_bound(double t) const {
  if (t <= 0.0) return std::numeric_limits<double>::infinity();
  return std::exp(eta * t) * integrand_decay / (std::numbers::pi * t);
}

WeylInversionResult response_from_weyl(const ResolventFn& phi_H, double eta, double a_max,
                                       const Grid& grid, const WeylInversionOptions& opts) {
  if (!(eta > 0.0)) throw Error(ErrorKind::parameter, "eta must be positive");
  if (!(a_max > 0.0)) throw Error(ErrorKind::parameter, "a_max must be positive");
  const double t_max = std::max(std::abs(grid.x0()), std::abs(grid.back()));
  double step = opts.xi_step > 0.0 ? opts.xi_step : std::numbers::pi / (4.0 * std::max(t_max, 1e-300));
  const auto intervals = static_cast<std::size_t>(std::ceil(2.0 * a_max / step));
  step = 2.0 * a_max / static_cast<double>(intervals);

  WeylInversionResult res{{SampledFunction(grid, std::vector<cplx>(grid.size())),
                           ResponseFunction::Origin::inverse_fourier},
                          eta,
                          0.0,
                          0.0,
                          cplx{},
                          cplx{}};
  std::vector<cplx> g(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k) {
    const double xi = -a_max + static_cast<double>(k) * step;
    g[k] = phi_H(cplx(xi, eta)) - I;
  }
  res.endpoint_decay = std::max(std::abs(g.front()), std::abs(g.back()));
  if (res.endpoint_decay > opts.tail_tolerance) {
    const double suggested = a_max * res.endpoint_decay / opts.tail_tolerance * 1.5;
    throw Error(ErrorKind::truncation, "phi_H - i has not decayed at +-a_max",
                "decay=" + std::to_string(res.endpoint_decay) +
                    " suggested a_max=" + std::to_string(suggested));
  }
  if (opts.subtract_leading_term) {
    const cplx wm = 1.0 / cplx(-a_max, 2.0 * eta);
    const cplx wp = 1.0 / cplx(a_max, 2.0 * eta);
    const cplx det = wp * wm * (wm - wp);
    const cplx c = (g.back() * wm * wm - g.front() * wp * wp) / det;
    const cplx d = (wp * g.front() - wm * g.back()) / det;
    res.leading_coefficient = c;
    res.second_coefficient = d;
    for (std::size_t k = 0; k <= intervals; ++k) {
      const cplx w = 1.0 / cplx(-a_max + static_cast<double>(k) * step, 2.0 * eta);
      g[k] -= c * w + d * w * w;
    }
  }
  res.integrand_decay = std::max(std::abs(g.front()), std::abs(g.back()));
  g.front() *= 0.5;
  g.back() *= 0.5;
  std::vector<cplx> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t j) {
    const double t = grid.node(j);
    // e^{-i xi t} advanced by a fixed rotation per step
    const cplx rot = std::exp(cplx(0.0, -step * t));
    cplx phase = std::exp(cplx(0.0, a_max * t));
    cplx sum{};
    for (std::size_t k = 0; k <= intervals; ++k) {
      if (k % 256 == 0) phase = std::exp(cplx(0.0, -(-a_max + static_cast<double>(k) * step) * t));
      sum += phase * g[k];
      phase *= rot;
    }
    out[j] = std::exp(eta * t) / (2.0 * std::numbers::pi) * step * sum;
    if (t >= 0.0) {
      out[j] += (-I * res.leading_coefficient - res.second_coefficient * t) * std::exp(-eta * t);
    }
  });
  res.response.r = SampledFunction(grid, std::move(out));
  return res;
}

cplx laplace_transform(const ComplexFn& r, cplx z, double T, std::size_t panels,
                       std::size_t order) {
  const auto rule = quad::gauss_legendre<double>(order);
  return quad::integrate([&](double t) { return std::exp(I * z * t) * r(t); }, 0.0, T, panels, rule);
}

cplx laplace_transform(const SampledFunction& r, cplx z) {
  const Grid& g = r.grid();
  std::vector<cplx> f(g.size());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = std::exp(I * z * g.node(k)) * r[k];
  return quad::cumulative_simpson(f, g.h()).back();
}

namespace {

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (!(v[k] < v[k - 1])) return false;
  }
  return !v.empty();
}

void require_tau(std::span<const double> tau_grid) {
  for (std::size_t k = 0; k < tau_grid.size(); ++k) {
    if (!(tau_grid[k] > 0.0) || (k > 0 && !(tau_grid[k] > tau_grid[k - 1]))) {
      throw Error(ErrorKind::parameter, "tau grid must be positive and increasing");
    }
  }
}

}  // namespace

AsymptoticsReport check_asymptotics(const ResolventFn& phi_H, const Accelerant& acc, double l,
                                    std::span<const double> tau_grid) {
  require_tau(tau_grid);
  const Grid& g = acc.omega_pos.grid();
  const double ratio = l / g.h();
  const double rounded = std::round(ratio);
  if (!(l > 0.0) || std::abs(ratio - rounded) > 1e-9 * ratio || rounded > static_cast<double>(g.intervals())) {
    throw Error(ErrorKind::parameter, "l must be a node of the accelerant grid",
                "l=" + std::to_string(l));
  }
  const auto m = static_cast<std::size_t>(rounded);
  AsymptoticsReport rep;
  std::vector<cplx> f(m + 1);
  for (double tau : tau_grid) {
    for (std::size_t k = 0; k <= m; ++k) {
      f[k] = std::exp(-tau * g.node(k)) * std::conj(acc.omega_pos[k]);
    }
    const cplx integral = quad::cumulative_simpson(f, g.h()).back();
    const cplx delta = phi_H(cplx(0.0, tau)) - I - 2.0 * I * integral;
    rep.tau.push_back(tau);
    rep.defect.push_back(std::abs(delta));
    rep.normalized.push_back(std::abs(delta) / (tau * std::exp(-tau * l)));
  }
  rep.decreasing = strictly_decreasing(rep.normalized);
  return rep;
}

AsymptoticsReport check_asymptotics(const std::function<ComplexX(const ComplexX&)>& phi_H,
                                    const std::function<ComplexX(const Extended&)>& omega, double l,
                                    std::span<const double> tau_grid) {
  require_tau(tau_grid);
  if (!(l > 0.0)) throw Error(ErrorKind::parameter, "l must be positive");
  const auto rule = quad::gauss_legendre<Extended>(24);
  const ComplexX ix(0, 1);
  const Extended ll = l;
  AsymptoticsReport rep;
  for (double tau_d : tau_grid) {
    const Extended tau = tau_d;
    const auto panels = static_cast<std::size_t>(std::max(8.0, std::ceil(tau_d * l)));
    const ComplexX integral = quad::integrate(
        [&](const Extended& x) { return ComplexX(exp(-tau * x)) * conj(omega(x)); }, Extended(0), ll, panels,
        rule);
    const ComplexX delta = phi_H(ComplexX(0, tau)) - ix - 2 * ix * integral;
    const Extended mag = abs(delta);
    rep.tau.push_back(tau_d);
    rep.defect.push_back(static_cast<double>(mag));
    rep.normalized.push_back(static_cast<double>(mag / (tau * exp(-tau * ll))));
  }
  rep.decreasing = strictly_decreasing(rep.normalized);
  return rep;
}

}  // namespace dirac
