#include "dirac/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dirac/quadrature.hpp"

namespace dirac {

namespace {

std::string complex_str(cplx z) {
  return "(" + std::to_string(z.real()) + (z.imag() < 0 ? "" : "+") + std::to_string(z.imag()) +
         "i)";
}

}  // namespace

const FrameConstants& FrameConstants::get() {
  static const FrameConstants frame = [] {
    FrameConstants f;
    const double s = 1.0 / std::numbers::sqrt2;
    f.K << s, -s, s, s;
    f.Kdyn << I * s, s, -I * s, s;
    f.J << 0.0, 1.0, 1.0, 0.0;
    f.j << 1.0, 0.0, 0.0, -1.0;
    f.Jdyn << 0.0, 1.0, -1.0, 0.0;
    const Mat2 id = Mat2::Identity();
    f.defect = std::max({(f.K * f.K.adjoint() - id).norm(), (f.Kdyn * f.Kdyn.adjoint() - id).norm(),
                         (f.K * f.j * f.K.adjoint() - f.J).norm(),
                         (f.Kdyn * f.Jdyn * f.Kdyn.adjoint() - I * f.j).norm()});
    if (f.defect > 1e-14) {
      throw Error(ErrorKind::internal, "frame constants fail their identities",
                  "defect=" + std::to_string(f.defect));
    }
    return f;
  }();
  return frame;
}

Mat2 expm_traceless(const Mat2& G) {
  const cplx mu2 = G(0, 0) * G(0, 0) + G(0, 1) * G(1, 0);
  const cplx mu = std::sqrt(mu2);
  cplx c;
  cplx sc;
  if (std::abs(mu) < 1e-4) {
    c = 1.0 + mu2 / 2.0 + mu2 * mu2 / 24.0;
    sc = 1.0 + mu2 / 6.0 + mu2 * mu2 / 120.0;
  } else {
    c = std::cosh(mu);
    sc = std::sinh(mu) / mu;
  }
  return c * Mat2::Identity() + sc * G;
}

namespace {

std::vector<Mat2> integrate_fundamental(const SpectralPotential& v, cplx z, double L,
                                        std::size_t steps) {
  const double h = L / static_cast<double>(steps);
  std::vector<Mat2> Y(steps + 1);
  Y[0] = Mat2::Identity();
  for (std::size_t k = 0; k < steps; ++k) {
    const double xm = (static_cast<double>(k) + 0.5) * h;
    const cplx vm = v.v(xm);
    Mat2 G;
    G << I * z * h, I * vm * h, -I * std::conj(vm) * h, -I * z * h;
    Y[k + 1] = expm_traceless(G) * Y[k];
  }
  return Y;
}

}  // namespace

FundamentalSolution fundamental_solution(const SpectralPotential& v, cplx z, double L, double h,
                                         const FundamentalOptions& opts) {
  if (!(L > 0.0)) throw Error(ErrorKind::parameter, "L must be positive", "L=" + std::to_string(L));
  if (!(h > 0.0)) throw Error(ErrorKind::parameter, "h must be positive", "h=" + std::to_string(h));
  const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(L / h - 1e-9)));
  FundamentalSolution sol{Grid::over(0.0, L, steps), z, integrate_fundamental(v, z, L, steps), 0.0,
                          {}};
  if (opts.estimate_error) {
    const auto fine = integrate_fundamental(v, z, L, 2 * steps);
    const double scale = std::max(1.0, sol.Y.back().norm());
    sol.error_estimate = (sol.Y.back() - fine.back()).norm() * (4.0 / 3.0) / scale;
    if (sol.error_estimate > opts.tolerance) {
      sol.diagnostics.warn("step too large: estimated relative error " +
                           std::to_string(sol.error_estimate) + " at x=L");
    }
  }
  return sol;
}

cplx herglotz_from_contractive(cplx phi, double pole_tolerance) {
  if (std::abs(1.0 - phi) <= pole_tolerance) {
    throw Error(ErrorKind::moebius_pole, "phi too close to 1", "phi=" + complex_str(phi));
  }
  return I * (1.0 + phi) / (1.0 - phi);
}

cplx contractive_from_herglotz(cplx phi_H, double pole_tolerance) {
  if (std::abs(phi_H + I) <= pole_tolerance) {
    throw Error(ErrorKind::moebius_pole, "phi_H too close to -i", "phi_H=" + complex_str(phi_H));
  }
  return (phi_H - I) / (phi_H + I);
}

namespace {

cplx least_growth(const Mat2& Y) {
  const Vec2 c1 = Y.col(0);
  const Vec2 c2 = Y.col(1);
  return -c2.dot(c1) / c2.squaredNorm();
}

}  // namespace

WeylValue weyl_estimate(const SpectralPotential& v, cplx z, double L, double h,
                        const WeylOptions& opts) {
  if (z.imag() < opts.eta_min) {
    throw Error(ErrorKind::precondition, "Weyl estimate needs Im z >= eta_min",
                "z=" + complex_str(z) + " eta_min=" + std::to_string(opts.eta_min));
  }
  if (!(L > 0.0) || !(h > 0.0)) throw Error(ErrorKind::parameter, "L and h must be positive");
  auto steps = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(L / h - 1e-9)));
  steps += steps % 2;
  FundamentalOptions fopts;
  fopts.estimate_error = false;
  const auto sol = fundamental_solution(v, z, L, L / static_cast<double>(steps), fopts);
  const std::size_t n = sol.Y.size() - 1;
  WeylValue w;
  w.z = z;
  w.phi = least_growth(sol.Y[n]);
  w.defect = std::abs(w.phi - least_growth(sol.Y[n / 2]));
  if (!std::isfinite(std::abs(w.phi))) {
    throw Error(ErrorKind::non_contractive, "Weyl estimate overflowed; reduce L",
                "z=" + complex_str(z) + " L=" + std::to_string(L));
  }
  if (std::abs(w.phi) > 1.0 + opts.contractive_tolerance) {
    throw Error(ErrorKind::non_contractive, "estimate is not contractive; increase L or Im z",
                "|phi|=" + std::to_string(std::abs(w.phi)) + " z=" + complex_str(z) +
                    " L=" + std::to_string(L));
  }
  w.phi_H = herglotz_from_contractive(w.phi, opts.pole_tolerance);
  return w;
}

double bridge_horizon(double M, cplx z, double h, double tolerance) {
  const double gap = z.imag() - M;
  if (!(gap > 0.0)) {
    throw Error(ErrorKind::precondition, "need Im z > M",
                "Im z=" + std::to_string(z.imag()) + " M=" + std::to_string(M));
  }
  const double T = std::log(1.0 / tolerance) / gap;
  return std::ceil(T / h * (1.0 + 1e-12)) * h;
}

BridgeReport verify_frequency_bridge(const WaveField& field, const BoundaryControl& ctrl,
                                     const DynamicalPotential& pot, cplx z,
                                     const BridgeOptions& opts) {
  BridgeReport rep;
  rep.M = pot.growth_rate();
  if (z.imag() <= rep.M) {
    throw Error(ErrorKind::precondition, "frequency bridge needs Im z > M",
                "Im z=" + std::to_string(z.imag()) + " M=" + std::to_string(rep.M));
  }
  if (field.nx() < 2) throw Error(ErrorKind::parameter, "field needs at least three x nodes");
  rep.truncation = std::exp(-(z.imag() - rep.M) * field.T());
  if (rep.truncation > opts.truncation_tolerance) {
    rep.diagnostics.warn("horizon too short: exp(-(Im z - M) T) = " +
                         std::to_string(rep.truncation));
  }
  (void)ctrl;

  const double h = field.h();
  const std::size_t nx = field.nx();
  const std::size_t nt = field.nt();
  const auto w = quad::trapezoid_weights(nt + 1, h);
  std::vector<cplx> kernel(nt + 1);
  for (std::size_t j = 0; j <= nt; ++j) kernel[j] = w[j] * std::exp(I * z * (static_cast<double>(j) * h));

  std::vector<Vec2> uhat(nx + 1, Vec2::Zero());
  for (std::size_t j = 0; j <= nt; ++j) {
    for (std::size_t i = 0; i <= nx; ++i) uhat[i] += kernel[j] * field.at(i, j);
  }

  const auto& frame = FrameConstants::get();
  double res = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i <= nx; ++i) scale = std::max(scale, std::abs(z) * uhat[i].norm());
  for (std::size_t i = 1; i < nx; ++i) {
    const double x = static_cast<double>(i) * h;
    const Vec2 du = (uhat[i + 1] - uhat[i - 1]) / (2.0 * h);
    const Vec2 r = z * uhat[i] + frame.Jdyn * du + pot.matrix(x).cast<cplx>() * uhat[i];
    res = std::max(res, r.norm());
  }
  rep.residual = scale > 0.0 ? res / scale : 0.0;

  const SpectralPotential v = dyn_to_spec(pot);
  const WeylValue wv = weyl_estimate(v, z, opts.weyl_length, h, opts.weyl);
  rep.phi = wv.phi;
  FundamentalOptions fopts;
  fopts.estimate_error = false;
  const auto Y = fundamental_solution(v, z, field.X(), h, fopts);
  if (Y.Y.size() != nx + 1) {
    throw Error(ErrorKind::internal, "fundamental solution grid does not match the field");
  }
  const Vec2 weyl_vec(1.0, wv.phi);
  for (std::size_t i = 0; i <= nx; ++i) {
    const Vec2 a = frame.Kdyn * uhat[i];
    const Vec2 b = Y.Y[i] * weyl_vec;
    const double denom = a.norm() * b.norm();
    if (denom == 0.0) continue;
    rep.collinearity_defect =
        std::max(rep.collinearity_defect, std::abs(a(0) * b(1) - a(1) * b(0)) / denom);
  }
  return rep;
}

}  // namespace dirac
