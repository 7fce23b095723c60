#include <cmath>
#include <random>

#include "dirac/dynamical.hpp"
#include "doctest.h"

using namespace dirac;

namespace {

DynamicalPotential e1_potential() {
  return {RealProfile([](double) { return 0.0; }),
          RealProfile([](double x) { return -2.0 / (1.0 + 2.0 * x); }), 2.0};
}

double t2exp(double t) { return t <= 0.0 ? 0.0 : t * t * std::exp(-t); }

// i f + r * f for r = -2i e^{-2t}, f = t^2 e^{-t}
cplx e1_trace(double t) {
  const double conv = std::exp(-t) * (t * t - 2.0 * t + 2.0) - 2.0 * std::exp(-2.0 * t);
  return I * t2exp(t) - 2.0 * I * conv;
}

double trace_error(const WaveField& field) {
  double err = 0.0;
  for (std::size_t j = 0; j <= field.nt(); ++j) {
    const double t = static_cast<double>(j) * field.h();
    err = std::max(err, std::abs(field.u2(0, j) - e1_trace(t)));
  }
  return err;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::internal;
}

}  // namespace

TEST_CASE("S operator on simple integrands") {
  const VectorField zero = [](double, double) { return Vec2::Zero().eval(); };
  const Vec2 z = s_operator(zero, 0.3, 0.9);
  CHECK(z.norm() == 0.0);

  const VectorField constant = [](double, double) { return Vec2(1.0, I); };
  for (auto [x, t] : {std::pair{0.0, 0.5}, {0.3, 0.9}, {1.0, 1.0}, {0.25, 2.0}}) {
    const Vec2 s = s_operator(constant, x, t);
    CHECK(std::abs(s(0) - (-I * x)) < 1e-13);
    CHECK(std::abs(s(1) - cplx(x)) < 1e-13);
  }
  CHECK(kind_of([&] { s_operator(constant, 1.0, 0.5); }) == ErrorKind::domain);
}

TEST_CASE("S operator is linear and keeps u1 = 0 on the boundary") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const VectorField h = [](double x, double t) {
    return Vec2(cplx(std::sin(x + t), t * x), cplx(std::cos(2.0 * t), -x));
  };
  const cplx c(0.7, -1.3);
  const VectorField ch = [&](double x, double t) { return (c * h(x, t)).eval(); };
  for (int k = 0; k < 10; ++k) {
    const double x = U(rng);
    const double t = x + U(rng);
    CHECK((s_operator(ch, x, t) - c * s_operator(h, x, t)).norm() < 1e-13);
  }
  CHECK(std::abs(s_operator(h, 0.0, 0.8)(0)) < 1e-14);
}

TEST_CASE("free system transports the control along characteristics") {
  const auto ctrl = BoundaryControl::t2exp();
  const auto grid = SolveGrid::square(1.0, 1.5, 1.0 / 64);
  for (bool series : {true, false}) {
    const auto sol = series ? neumann_solve(zero_dynamical_potential(), ctrl, grid)
                            : characteristics_solve(zero_dynamical_potential(), ctrl, grid);
    double err = 0.0;
    for (std::size_t j = 0; j <= sol.field.nt(); ++j) {
      for (std::size_t i = 0; i <= sol.field.nx(); ++i) {
        const double s = static_cast<double>(j) - static_cast<double>(i);
        const cplx f = t2exp(s / 64.0);
        err = std::max(err, (sol.field.at(i, j) - Vec2(f, I * f)).norm());
      }
    }
    CHECK(err < 1e-13);
    const auto est = verify_estimates(sol.field, ctrl, zero_dynamical_potential());
    CHECK(est.growth_ratio <= 1.0);
  }
}

TEST_CASE("zero control gives the zero field") {
  const auto grid = SolveGrid::square(1.0, 1.0, 1.0 / 32);
  for (bool series : {true, false}) {
    const auto sol = series ? neumann_solve(e1_potential(), BoundaryControl::zero(), grid)
                            : characteristics_solve(e1_potential(), BoundaryControl::zero(), grid);
    double sup = 0.0;
    for (std::size_t j = 0; j <= sol.field.nt(); ++j) {
      for (std::size_t i = 0; i <= sol.field.nx(); ++i) sup = std::max(sup, sol.field.at(i, j).norm());
    }
    CHECK(sup == 0.0);
  }
}

TEST_CASE("E1 boundary trace matches i f + r * f") {
  const auto ctrl = BoundaryControl::t2exp();
  const auto grid = SolveGrid::square(2.0, 2.0, 1.0 / 64);
  const auto series = neumann_solve(e1_potential(), ctrl, grid);
  CHECK(trace_error(series.field) < 5e-3);
  CHECK(series.truncation_bound < 1e-6);
  CHECK(series.diagnostics.clean());

  const auto euler = characteristics_solve(e1_potential(), ctrl, grid);
  const auto trap = characteristics_solve(e1_potential(), ctrl, grid,
                                          {CharacteristicsOptions::Scheme::trapezoidal});
  CHECK(trace_error(euler.field) < 2e-2);
  CHECK(trace_error(trap.field) < 1e-3);

  // first-order scheme halves its error when h halves
  const auto fine = characteristics_solve(e1_potential(), ctrl, SolveGrid::square(2.0, 2.0, 1.0 / 128));
  const double ratio = trace_error(euler.field) / trace_error(fine.field);
  CHECK(ratio > 1.8);
  CHECK(ratio < 2.3);
}

TEST_CASE("estimates and causality on the E1 solutions") {
  const auto ctrl = BoundaryControl::t2exp();
  const auto grid = SolveGrid::square(2.0, 2.0, 1.0 / 64);
  const auto pot = e1_potential();
  for (const auto& sol : {neumann_solve(pot, ctrl, grid), characteristics_solve(pot, ctrl, grid)}) {
    const auto est = verify_estimates(sol.field, ctrl, pot);
    CHECK(est.M == doctest::Approx(4.0 * std::sqrt(2.0)));
    CHECK(est.growth_ratio <= 1.0 + 1e-6);
    CHECK(est.causality_residual <= 1e-12);
  }
}

TEST_CASE("series terms follow the factorial bound") {
  const auto ctrl = BoundaryControl::t2exp();
  const auto sol = neumann_solve(e1_potential(), ctrl, SolveGrid::square(1.0, 1.0, 1.0 / 32));
  const double M = e1_potential().growth_rate();
  double fact = 1.0;
  for (std::size_t k = 0; k < sol.term_sup.size(); ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    CHECK(sol.term_sup[k] <= ctrl.c0 * std::pow(M, static_cast<double>(k)) / fact * (1.0 + 1e-9));
  }
  CHECK(series_tail_bound(1.0, 1.0, 3) == doctest::Approx(std::exp(1.0) - 1.0 - 1.0 - 0.5 - 1.0 / 6.0));
  CHECK(series_tail_bound(0.0, 5.0, 3) == 0.0);
}

TEST_CASE("solvers reject grids they cannot handle") {
  const auto ctrl = BoundaryControl::t2exp();
  CHECK(kind_of([&] { characteristics_solve(e1_potential(), ctrl, {1.0, 1.0, 1.0 / 32, 1.0 / 64}); }) ==
        ErrorKind::parameter);
  CHECK(kind_of([&] { neumann_solve(e1_potential(), ctrl, {1.0, 1.0, 0.3, 0.3}); }) == ErrorKind::parameter);
  NeumannOptions bad;
  bad.k_max = 0;
  CHECK(kind_of([&] { neumann_solve(e1_potential(), ctrl, SolveGrid::square(1, 1, 0.25), bad); }) ==
        ErrorKind::parameter);
}

TEST_CASE("sampled controls must start flat") {
  const Grid g = Grid::over(0.0, 2.0, 256);
  const auto good = BoundaryControl::from_samples(SampledFunction::sample(g, [](double t) { return t2exp(t); }));
  CHECK(std::abs(good.f(1.0) - t2exp(1.0)) < 1e-4);
  CHECK(good.f(-1.0) == cplx{});
  CHECK(kind_of([&] {
          BoundaryControl::from_samples(SampledFunction::sample(g, [](double t) { return cplx(1.0 + t); }));
        }) == ErrorKind::parameter);
  CHECK(kind_of([&] {
          BoundaryControl::from_samples(SampledFunction::sample(g, [](double t) { return cplx(t); }));
        }) == ErrorKind::parameter);
}

TEST_CASE("deconvolution recovers the response") {
  const auto ctrl = BoundaryControl::t2exp();
  const Grid g = Grid::over(0.0, 2.0, 256);

  const auto plain = SampledFunction::sample(g, [&](double t) { return I * ctrl.f(t); });
  const auto zero = extract_response(plain, ctrl);
  CHECK(zero.r.sup_norm() < 1e-12);

  const auto data = SampledFunction::sample(g, e1_trace);
  const auto res = extract_response_detailed(data, ctrl);
  double err = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    err = std::max(err, std::abs(res.response.r[k] - (-2.0 * I * std::exp(-2.0 * g.node(k)))));
  }
  CHECK(err < 1e-3);
  CHECK(res.response.origin == ResponseFunction::Origin::extracted);

  // doubling u2 - i f doubles r
  const auto doubled = SampledFunction::sample(g, [&](double t) { return 2.0 * e1_trace(t) - I * ctrl.f(t); });
  const auto r2 = extract_response(doubled, ctrl);
  for (std::size_t k = 0; k < g.size(); k += 17) {
    CHECK(std::abs(r2.r[k] - 2.0 * res.response.r[k]) < 1e-10);
  }
}

TEST_CASE("E1 series trace deconvolves to the closed-form response") {
  const auto ctrl = BoundaryControl::t2exp();
  const auto sol = neumann_solve(e1_potential(), ctrl, SolveGrid::square(2.0, 2.0, 1.0 / 128));
  const auto r = extract_response(sol.field.boundary_u2(), ctrl);
  double err = 0.0;
  double interior = 0.0;
  for (std::size_t k = 0; k < r.r.size(); ++k) {
    const double t = r.r.grid().node(k);
    const double e = std::abs(r.r[k] - (-2.0 * I * std::exp(-2.0 * t)));
    err = std::max(err, e);
    if (t >= 0.25) interior = std::max(interior, e);
  }
  // first-order layer in the first few cells, second order beyond
  CHECK(err < 0.1);
  CHECK(interior < 1e-3);
}

TEST_CASE("response origins have names") {
  CHECK(to_string(ResponseFunction::Origin::extracted) == "extracted");
  ResponseFunction r{SampledFunction::sample(Grid::over(0.0, 1.0, 4), [](double) { return cplx(1.0); })};
  CHECK(r(-0.5) == cplx{});
  CHECK(r(0.5) == cplx(1.0));
}
