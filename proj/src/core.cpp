#include "dirac/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dirac {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::domain: return "domain";
    case ErrorKind::grid_mismatch: return "grid-mismatch";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::ill_posed: return "ill-posed-deconvolution";
    case ErrorKind::residual: return "residual";
    case ErrorKind::non_contractive: return "non-contractive-estimate";
    case ErrorKind::moebius_pole: return "moebius-pole";
    case ErrorKind::not_accelerant: return "not-a-valid-accelerant";
    case ErrorKind::invalid_params: return "invalid-parameters";
    case ErrorKind::pole: return "pole";
    case ErrorKind::truncation: return "truncation";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

Grid::Grid(double x0, double h, std::size_t n_points) : x0_(x0), h_(h), n_(n_points) {
  if (!(h > 0.0) || !std::isfinite(h) || !std::isfinite(x0)) {
    throw Error(ErrorKind::parameter, "grid step must be positive and finite",
                "h=" + std::to_string(h));
  }
  if (n_points < 2) {
    throw Error(ErrorKind::parameter, "grid needs at least two nodes",
                "n_points=" + std::to_string(n_points));
  }
}

Grid Grid::over(double a, double b, std::size_t intervals) {
  if (intervals == 0 || !(b > a)) {
    throw Error(ErrorKind::parameter, "invalid grid interval",
                "[" + std::to_string(a) + ", " + std::to_string(b) + "]");
  }
  return Grid(a, (b - a) / static_cast<double>(intervals), intervals + 1);
}

bool Grid::contains(double x, double slack) const {
  const double tol = slack * std::max({1.0, std::abs(x0_), std::abs(back())});
  return x >= x0_ - tol && x <= back() + tol;
}

bool Grid::matches(const Grid& other, double rel_tol) const {
  if (n_ != other.n_) return false;
  const double scale = std::max({std::abs(x0_), std::abs(back()), h_});
  return std::abs(x0_ - other.x0_) <= rel_tol * scale &&
         std::abs(h_ - other.h_) <= rel_tol * h_;
}

SampledFunction::SampledFunction(Grid grid, std::vector<cplx> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw Error(ErrorKind::parameter, "sample count does not match grid",
                std::to_string(values_.size()) + " values for " + std::to_string(grid_.size()) +
                    " nodes");
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k].real()) || !std::isfinite(values_[k].imag())) {
      throw Error(ErrorKind::parameter, "non-finite sample", "node " + std::to_string(k));
    }
  }
}

SampledFunction SampledFunction::sample(const Grid& grid, const ComplexFn& fn) {
  std::vector<cplx> values(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) values[k] = fn(grid.node(k));
  return SampledFunction(grid, std::move(values));
}

SampledFunction SampledFunction::sample_real(const Grid& grid, const RealFn& fn) {
  std::vector<cplx> values(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) values[k] = fn(grid.node(k));
  return SampledFunction(grid, std::move(values));
}

cplx SampledFunction::at(double x) const {
  if (!grid_.contains(x, 1e-9)) {
    throw Error(ErrorKind::domain, "evaluation outside sampled range",
                "x=" + std::to_string(x) + " range=[" + std::to_string(grid_.x0()) + ", " +
                    std::to_string(grid_.back()) + "]");
  }
  const double pos = (x - grid_.x0()) / grid_.h();
  const auto last = static_cast<double>(grid_.intervals());
  const double clamped = std::clamp(pos, 0.0, last);
  auto k = static_cast<std::size_t>(clamped);
  if (k >= grid_.intervals()) k = grid_.intervals() - 1;
  const double frac = clamped - static_cast<double>(k);
  if (frac == 0.0) return values_[k];
  return values_[k] + frac * (values_[k + 1] - values_[k]);
}

bool SampledFunction::is_real(double tol) const {
  return std::all_of(values_.begin(), values_.end(),
                     [tol](const cplx& v) { return std::abs(v.imag()) <= tol; });
}

double SampledFunction::sup_norm() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

template <>
Profile<double>::Profile(SampledFunction samples) : repr_(std::move(samples)) {
  if (!std::get<SampledFunction>(repr_).is_real()) {
    throw Error(ErrorKind::parameter, "real-valued profile given complex samples");
  }
}

template <>
Profile<cplx>::Profile(SampledFunction samples) : repr_(std::move(samples)) {}

template <>
double Profile<double>::operator()(double x) const {
  if (const auto* s = std::get_if<SampledFunction>(&repr_)) return s->at(x).real();
  return std::get<Fn>(repr_)(x);
}

template <>
cplx Profile<cplx>::operator()(double x) const {
  if (const auto* s = std::get_if<SampledFunction>(&repr_)) return s->at(x);
  return std::get<Fn>(repr_)(x);
}

RealMat2 DynamicalPotential::matrix(double x) const {
  const double pv = p(x);
  const double qv = q(x);
  RealMat2 m;
  m << pv, qv, qv, -pv;
  return m;
}

double DynamicalPotential::growth_rate() const {
  if (!m1) {
    throw Error(ErrorKind::precondition, "potential bound M1 is unknown",
                "attach a bound with with_estimated_bound() or set m1");
  }
  return 2.0 * std::sqrt(2.0) * *m1;
}

DynamicalPotential DynamicalPotential::with_estimated_bound(const Grid& grid, double margin) const {
  double sup = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = grid.node(k);
    sup = std::max(sup, std::hypot(p(x), q(x)));
  }
  DynamicalPotential out = *this;
  out.m1 = sup > 0.0 ? sup * (1.0 + margin) : margin;
  return out;
}

Mat2 SpectralPotential::matrix(double x) const {
  const cplx vv = v(x);
  Mat2 m;
  m << 0.0, vv, std::conj(vv), 0.0;
  return m;
}

namespace {

SampledFunction samples_on(const Grid& grid, const RealProfile& prof) {
  if (const auto* s = prof.samples()) return *s;
  return SampledFunction::sample_real(grid, [&prof](double x) { return prof(x); });
}

}  // namespace

SpectralPotential dyn_to_spec(const DynamicalPotential& pot) {
  const SampledFunction* ps = pot.p.samples();
  const SampledFunction* qs = pot.q.samples();
  if (ps == nullptr && qs == nullptr) {
    RealProfile p = pot.p;
    RealProfile q = pot.q;
    return {ComplexProfile([p, q](double x) { return cplx(-p(x), q(x)); })};
  }
  if (ps != nullptr && qs != nullptr && !ps->grid().matches(qs->grid())) {
    throw Error(ErrorKind::grid_mismatch, "p and q are sampled on different grids");
  }
  const Grid grid = ps != nullptr ? ps->grid() : qs->grid();
  const SampledFunction pv = samples_on(grid, pot.p);
  const SampledFunction qv = samples_on(grid, pot.q);
  std::vector<cplx> v(grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = cplx(-pv[k].real(), qv[k].real());
  return {ComplexProfile(SampledFunction(grid, std::move(v)))};
}

DynamicalPotential spec_to_dyn(const SpectralPotential& pot) {
  if (const SampledFunction* vs = pot.v.samples()) {
    std::vector<cplx> p(vs->size());
    std::vector<cplx> q(vs->size());
    double sup = 0.0;
    for (std::size_t k = 0; k < vs->size(); ++k) {
      p[k] = -(*vs)[k].real();
      q[k] = (*vs)[k].imag();
      sup = std::max(sup, std::abs((*vs)[k]));
    }
    DynamicalPotential out{RealProfile(SampledFunction(vs->grid(), std::move(p))),
                           RealProfile(SampledFunction(vs->grid(), std::move(q))), std::nullopt};
    out.m1 = sup > 0.0 ? sup * (1.0 + 1e-6) : 1e-6;
    return out;
  }
  ComplexProfile v = pot.v;
  return {RealProfile([v](double x) { return -v(x).real(); }),
          RealProfile([v](double x) { return v(x).imag(); }), std::nullopt};
}

DynamicalPotential zero_dynamical_potential() {
  return {RealProfile([](double) { return 0.0; }), RealProfile([](double) { return 0.0; }), 1e-6};
}

SpectralPotential zero_spectral_potential() {
  return {ComplexProfile([](double) { return cplx{}; })};
}

}  // namespace dirac
