#include "dirac/dynamical.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

#include "dirac/parallel.hpp"
#include "dirac/quadrature.hpp"

namespace dirac {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kNegligibleTerm = 1e-20;

std::size_t steps_for(double length, double h, const char* what) {
  const double ratio = length / h;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(ErrorKind::parameter, std::string(what) + " is not an integer multiple of the step",
                std::string(what) + "=" + std::to_string(length) + " h=" + std::to_string(h));
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace

// ---------------------------------------------------------------------------
// BoundaryControl

BoundaryControl BoundaryControl::t2exp() {
  BoundaryControl c;
  c.name = "t2exp";
  c.f = [](double t) { return t < 0.0 ? cplx{} : cplx(t * t * std::exp(-t)); };
  c.df = [](double t) { return t < 0.0 ? cplx{} : cplx((2.0 * t - t * t) * std::exp(-t)); };
  c.d2f = [](double t) {
    return t < 0.0 ? cplx{} : cplx((2.0 - 4.0 * t + t * t) * std::exp(-t));
  };
  // max t^2 e^{-t} at t = 2; max |f'| at t = 2 - sqrt(2)
  c.c0 = kSqrt2 * 4.0 * std::exp(-2.0);
  const double ts = 2.0 - kSqrt2;
  c.c0_tilde = kSqrt2 * ts * (2.0 - ts) * std::exp(-ts);
  return c;
}

BoundaryControl BoundaryControl::t2gauss() {
  BoundaryControl c;
  c.name = "t2gauss";
  c.f = [](double t) { return t < 0.0 ? cplx{} : cplx(t * t * std::exp(-t * t)); };
  c.df = [](double t) {
    return t < 0.0 ? cplx{} : cplx((2.0 * t - 2.0 * t * t * t) * std::exp(-t * t));
  };
  c.d2f = [](double t) {
    const double t2 = t * t;
    return t < 0.0 ? cplx{} : cplx((2.0 - 10.0 * t2 + 4.0 * t2 * t2) * std::exp(-t2));
  };
  c.c0 = kSqrt2 * std::exp(-1.0);
  // |f'| peaks where 4t^4 - 10t^2 + 2 = 0, smaller root
  const double t2 = (10.0 - std::sqrt(68.0)) / 8.0;
  const double ts = std::sqrt(t2);
  c.c0_tilde = kSqrt2 * 2.0 * ts * (1.0 - t2) * std::exp(-t2);
  return c;
}

BoundaryControl BoundaryControl::zero() {
  BoundaryControl c;
  c.name = "zero";
  c.f = [](double) { return cplx{}; };
  c.df = c.f;
  c.d2f = c.f;
  return c;
}

BoundaryControl BoundaryControl::from_samples(const SampledFunction& samples) {
  const Grid& g = samples.grid();
  if (std::abs(g.x0()) > 1e-12 * g.h()) {
    throw Error(ErrorKind::parameter, "control samples must start at t = 0");
  }
  if (g.size() < 4) throw Error(ErrorKind::parameter, "control needs at least four samples");
  const std::size_t n = g.size();
  const double h = g.h();
  std::vector<cplx> d1(n);
  std::vector<cplx> d2(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0) {
      d1[k] = (-3.0 * samples[0] + 4.0 * samples[1] - samples[2]) / (2.0 * h);
      d2[k] = (2.0 * samples[0] - 5.0 * samples[1] + 4.0 * samples[2] - samples[3]) / (h * h);
    } else if (k + 1 == n) {
      d1[k] = (3.0 * samples[k] - 4.0 * samples[k - 1] + samples[k - 2]) / (2.0 * h);
      d2[k] = (2.0 * samples[k] - 5.0 * samples[k - 1] + 4.0 * samples[k - 2] - samples[k - 3]) /
              (h * h);
    } else {
      d1[k] = (samples[k + 1] - samples[k - 1]) / (2.0 * h);
      d2[k] = (samples[k + 1] - 2.0 * samples[k] + samples[k - 1]) / (h * h);
    }
  }
  const double sup = samples.sup_norm();
  const double scale = std::max(sup, 1e-300);
  if (std::abs(samples[0]) > 1e-9 * scale) {
    throw Error(ErrorKind::parameter, "control must satisfy f(0) = 0",
                "f(0)=" + std::to_string(std::abs(samples[0])));
  }
  const cplx slope0 = (-11.0 * samples[0] + 18.0 * samples[1] - 9.0 * samples[2] + 2.0 * samples[3]) / (6.0 * h);
  if (std::abs(slope0) > 1e-3 * scale / g.back()) {
    throw Error(ErrorKind::parameter, "control must satisfy f'(0) = 0",
                "f'(0)=" + std::to_string(std::abs(slope0)));
  }
  BoundaryControl c;
  c.name = "samples";
  auto fs = std::make_shared<SampledFunction>(samples);
  auto fd1 = std::make_shared<SampledFunction>(g, d1);
  auto fd2 = std::make_shared<SampledFunction>(g, d2);
  c.f = [fs](double t) { return t < 0.0 ? cplx{} : fs->at(t); };
  c.df = [fd1](double t) { return t < 0.0 ? cplx{} : fd1->at(t); };
  c.d2f = [fd2](double t) { return t < 0.0 ? cplx{} : fd2->at(t); };
  c.c0 = kSqrt2 * sup;
  c.c0_tilde = kSqrt2 * fd1->sup_norm();
  return c;
}

// ---------------------------------------------------------------------------
// WaveField / ResponseFunction

WaveField::WaveField(double h, std::size_t nx, std::size_t nt)
    : h_(h), nx_(nx), nt_(nt), u1_((nx + 1) * (nt + 1)), u2_((nx + 1) * (nt + 1)) {
  if (!(h > 0.0)) throw Error(ErrorKind::parameter, "wave field step must be positive");
}

SampledFunction WaveField::boundary_u2() const {
  std::vector<cplx> v(nt_ + 1);
  for (std::size_t j = 0; j <= nt_; ++j) v[j] = u2(0, j);
  return SampledFunction(Grid(0.0, h_, nt_ + 1), std::move(v));
}

SampledFunction WaveField::boundary_u1() const {
  std::vector<cplx> v(nt_ + 1);
  for (std::size_t j = 0; j <= nt_; ++j) v[j] = u1(0, j);
  return SampledFunction(Grid(0.0, h_, nt_ + 1), std::move(v));
}

std::string_view to_string(ResponseFunction::Origin origin) {
  switch (origin) {
    case ResponseFunction::Origin::extracted: return "extracted";
    case ResponseFunction::Origin::explicit_formula: return "explicit";
    case ResponseFunction::Origin::inverse_fourier: return "inverse-Fourier";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Duhamel operator

namespace {

/// Line integral of h over the straight segment a -> b with arclength measure.
Vec2 segment_integral(const VectorField& h, double ax, double at, double bx, double bt,
                      const quad::GaussRule<double>& rule, double cell) {
  const double param_len = std::max(std::abs(bx - ax), std::abs(bt - at));
  if (param_len == 0.0) return Vec2::Zero();
  const auto cells = static_cast<std::size_t>(std::max(1.0, std::ceil(param_len / cell - 1e-9)));
  const double length = std::hypot(bx - ax, bt - at);
  auto along = [&](double s) -> Vec2 { return h(ax + s * (bx - ax), at + s * (bt - at)); };
  const Vec2 integral = quad::integrate(along, 0.0, 1.0, cells, rule);
  return integral * length;
}

/// Combines the three segment integrals (vectors of [int h1, int h2]).
Vec2 combine_segments(const Vec2& seg12, const Vec2& seg23, const Vec2& seg14) {
  const double c = 1.0 / (2.0 * kSqrt2);
  const cplx s1 = -c * ((I * seg12(0) + seg12(1)) - (I * seg23(0) - seg23(1)) +
                        (I * seg14(0) - seg14(1)));
  const cplx s2 = c * ((seg12(0) - I * seg12(1)) - (seg23(0) + I * seg23(1)) -
                       (seg14(0) + I * seg14(1)));
  return Vec2(s1, s2);
}

}  // namespace

Vec2 s_operator(const VectorField& h, double x, double t, const SOperatorOptions& opts) {
  if (opts.quad_order < 2) {
    throw Error(ErrorKind::parameter, "quadrature order must be at least 2",
                "quad_order=" + std::to_string(opts.quad_order));
  }
  if (!(opts.cell > 0.0)) throw Error(ErrorKind::parameter, "quadrature cell must be positive");
  if (x < 0.0 || t < x - 1e-14 * std::max(1.0, t)) {
    throw Error(ErrorKind::domain, "S operator needs t >= x >= 0",
                "x=" + std::to_string(x) + " t=" + std::to_string(t));
  }
  const auto rule = quad::gauss_legendre<double>(opts.quad_order);
  const double c = std::max(0.0, t - x);
  const Vec2 seg12 = segment_integral(h, x, t, 0.0, c, rule, opts.cell);
  const Vec2 seg23 = segment_integral(h, 0.0, c, c, 0.0, rule, opts.cell);
  const Vec2 seg14 = segment_integral(h, x, t, x + t, 0.0, rule, opts.cell);
  return combine_segments(seg12, seg23, seg14);
}

double series_tail_bound(double c0, double a, std::size_t k_max) {
  if (c0 == 0.0 || a <= 0.0) return 0.0;
  double sum = 0.0;
  const double log_a = std::log(a);
  for (std::size_t k = k_max + 1;; ++k) {
    const auto kk = static_cast<double>(k);
    const double term = std::exp(kk * log_a - std::lgamma(kk + 1.0));
    sum += term;
    if (kk > a && term <= 1e-17 * sum) break;
    if (k > k_max + 100000) break;
  }
  return c0 * sum;
}

// ---------------------------------------------------------------------------
// Neumann series solver

namespace {

/// Lagrange basis on the given nodes evaluated at tau.
std::array<double, 5> lagrange_basis(const std::array<double, 5>& nodes, int count, double tau) {
  std::array<double, 5> out{};
  for (int m = 0; m < count; ++m) {
    double v = 1.0;
    for (int k = 0; k < count; ++k) {
      if (k == m) continue;
      v *= (tau - nodes[static_cast<std::size_t>(k)]) /
           (nodes[static_cast<std::size_t>(m)] - nodes[static_cast<std::size_t>(k)]);
    }
    out[static_cast<std::size_t>(m)] = v;
  }
  return out;
}

/// Interpolation rule for one diagonal cell [0, 1] (in node units from the
/// cell start). Real nodes sit at real_first, real_first + 1, ...; with `front`
/// set the interpolant also has a double zero at front_offset, where the
/// iterate and its derivative vanish. Only [a, b] of the cell is integrated.
struct CellRule {
  bool front;
  double front_offset;
  int real_first;
  int real_count;
  double a;
  double b;
};

constexpr std::array<CellRule, 16> kRules{{
    {false, 0.0, -1, 4, 0.0, 1.0},
    {false, 0.0, 0, 4, 0.0, 1.0},
    {false, 0.0, -2, 4, 0.0, 1.0},
    {false, 0.0, 0, 3, 0.0, 1.0},
    {false, 0.0, -1, 3, 0.0, 1.0},
    {false, 0.0, 0, 2, 0.0, 1.0},
    // cell cut by the front at its midpoint, and the cell after it
    {true, 0.5, 1, 3, 0.5, 1.0},
    {true, 0.5, 1, 2, 0.5, 1.0},
    {true, 0.5, 1, 1, 0.5, 1.0},
    {true, -0.5, 0, 3, 0.0, 1.0},
    {true, -0.5, 0, 2, 0.0, 1.0},
    // front on a node: first and second cell behind it
    {true, 0.0, 1, 3, 0.0, 1.0},
    {true, 0.0, 1, 2, 0.0, 1.0},
    {true, 0.0, 1, 1, 0.0, 1.0},
    {true, -1.0, 0, 3, 0.0, 1.0},
    {true, -1.0, 0, 2, 0.0, 1.0},
}};

constexpr std::size_t kCutRule = 6;
constexpr std::size_t kAfterCutRule = 9;
constexpr std::size_t kNodeFrontRule = 11;
constexpr std::size_t kAfterNodeFrontRule = 14;

/// Per-cell quadrature weights: the integral of V g over one diagonal cell is
/// sum_m coef[m] * g(real node m).
class CellCoefficients {
 public:
  CellCoefficients(const DynamicalPotential& pot, std::size_t n, double h, std::size_t order)
      : n_(n) {
    const auto rule = quad::gauss_legendre<double>(order);
    // direction 0: x decreases along the cell (left-moving characteristic)
    // direction 1: x increases (right-moving characteristic)
    table_.resize(2 * (n + 1) * kRules.size());
    const double scale = kSqrt2 * h;
    for (int dir = 0; dir < 2; ++dir) {
      for (std::size_t i = 0; i <= n; ++i) {
        if (dir == 0 && i == 0) continue;
        if (dir == 1 && i == n) continue;
        for (std::size_t r = 0; r < kRules.size(); ++r) {
          const CellRule& cr = kRules[r];
          if (dir == 1 && cr.front) continue;
          std::array<double, 5> nodes{};
          for (int m = 0; m < cr.real_count; ++m) {
            nodes[static_cast<std::size_t>(m)] = cr.real_first + m;
          }
          auto& entry = table_[slot(dir, i, r)];
          entry.fill(RealMat2::Zero());
          for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
            const double tau = cr.a + (cr.b - cr.a) * rule.nodes[g];
            const double x =
                (dir == 0 ? static_cast<double>(i) - tau : static_cast<double>(i) + tau) * h;
            const RealMat2 vg = pot.matrix(x) * (rule.weights[g] * (cr.b - cr.a) * scale);
            auto basis = lagrange_basis(nodes, cr.real_count, tau);
            for (int m = 0; m < cr.real_count; ++m) {
              auto& bm = basis[static_cast<std::size_t>(m)];
              if (cr.front) {
                const double ratio =
                    (tau - cr.front_offset) / (nodes[static_cast<std::size_t>(m)] - cr.front_offset);
                bm *= ratio * ratio;
              }
              entry[static_cast<std::size_t>(m)] += bm * vg;
            }
          }
        }
      }
    }
  }

  const std::array<RealMat2, 4>& at(int dir, std::size_t i, std::size_t rule) const {
    return table_[slot(dir, i, rule)];
  }

 private:
  std::size_t slot(int dir, std::size_t i, std::size_t r) const {
    return (static_cast<std::size_t>(dir) * (n_ + 1) + i) * kRules.size() + r;
  }

  std::size_t n_;
  std::vector<std::array<RealMat2, 4>> table_;
};

/// Square array of 2-vectors indexed (i, j), i = x index, j = t index.
struct VectorGrid {
  explicit VectorGrid(std::size_t n) : n(n), v((n + 1) * (n + 1), Vec2::Zero()) {}
  std::size_t idx(std::size_t i, std::size_t j) const { return j * (n + 1) + i; }
  const Vec2& operator()(std::size_t i, std::size_t j) const { return v[idx(i, j)]; }
  Vec2& operator()(std::size_t i, std::size_t j) { return v[idx(i, j)]; }
  std::size_t n;
  std::vector<Vec2> v;
};

inline Vec2 real_mat_vec(const RealMat2& m, const Vec2& g) {
  return Vec2(m(0, 0) * g(0) + m(0, 1) * g(1), m(1, 0) * g(0) + m(1, 1) * g(1));
}

/// Index into kRules of the plain stencil for cell c when the smooth part of
/// the diagonal has nodes 0..last.
inline std::size_t stencil_slot(std::size_t c, std::size_t last) {
  if (last >= 3) {
    if (c == 0) return 1;
    if (c + 1 == last) return 2;
    return 0;
  }
  if (last == 2) return c == 0 ? 3 : 4;
  return 5;
}

/// One application of A g = -S(V g) on the square grid. Entries with t < x
/// are never written and stay zero.
void apply_neumann_operator(const VectorGrid& g, VectorGrid& out, VectorGrid& p14,
                            VectorGrid& p12, const CellCoefficients& coef) {
  const std::size_t n = g.n;
  // cumulative integrals along left-moving diagonals x + t = s h, from the
  // front t = x upwards; the iterate vanishes ahead of the front
  parallel_for(2 * n + 1, [&](std::size_t s) {
    const std::size_t j_lo = s > n ? s - n : 0;
    const std::size_t j_hi = std::min(s, n);
    const std::size_t last = j_hi - j_lo;
    auto node = [&](std::size_t k) -> const Vec2& { return g(s - (j_lo + k), j_lo + k); };
    auto accumulate = [&](Vec2& running, std::size_t c, std::size_t rule_index) {
      const CellRule& cr = kRules[rule_index];
      const auto& w = coef.at(0, s - (j_lo + c), rule_index);
      for (int m = 0; m < cr.real_count; ++m) {
        const auto k = static_cast<std::size_t>(static_cast<int>(c) + cr.real_first + m);
        running += real_mat_vec(w[static_cast<std::size_t>(m)], node(k));
      }
    };
    Vec2 running = Vec2::Zero();
    std::size_t start = 0;  // first node on or behind the front
    if (s % 2 == 0) {
      start = s / 2 - j_lo;
      p14(s - (j_lo + start), j_lo + start) = running;
      const std::size_t behind = last - start;  // nodes strictly behind the front
      for (std::size_t c = start; c < last; ++c) {
        std::size_t rule_index;
        if (c == start) {
          rule_index = kNodeFrontRule + (3 - std::min<std::size_t>(behind, 3));
        } else if (c == start + 1) {
          rule_index = behind >= 3 ? kAfterNodeFrontRule : kAfterNodeFrontRule + 1;
        } else {
          rule_index = stencil_slot(c - start, last - start);
        }
        accumulate(running, c, rule_index);
        p14(s - (j_lo + c + 1), j_lo + c + 1) = running;
      }
    } else {
      start = (s + 1) / 2 - j_lo;
      const std::size_t avail = last - start + 1;
      accumulate(running, start - 1, kCutRule + (3 - std::min<std::size_t>(avail, 3)));
      p14(s - (j_lo + start), j_lo + start) = running;
      for (std::size_t c = start; c < last; ++c) {
        const std::size_t rule_index = c == start ? (avail >= 3 ? kAfterCutRule : kAfterCutRule + 1)
                                                  : stencil_slot(c - start, last - start);
        accumulate(running, c, rule_index);
        p14(s - (j_lo + c + 1), j_lo + c + 1) = running;
      }
    }
  });
  // cumulative integrals along right-moving diagonals t - x = d h, from x = 0
  parallel_for(n + 1, [&](std::size_t d) {
    const std::size_t last = n - d;
    Vec2 running = Vec2::Zero();
    p12(0, d) = running;
    for (std::size_t c = 0; c < last; ++c) {
      const std::size_t slot = stencil_slot(c, last);
      const CellRule& cr = kRules[slot];
      const auto& w = coef.at(1, c, slot);
      for (int m = 0; m < cr.real_count; ++m) {
        const auto k = static_cast<std::size_t>(static_cast<int>(c) + cr.real_first + m);
        running += real_mat_vec(w[static_cast<std::size_t>(m)], g(k, k + d));
      }
      p12(c + 1, c + 1 + d) = running;
    }
  });
  parallel_for(n + 1, [&](std::size_t j) {
    for (std::size_t i = 0; i <= j; ++i) {
      out(i, j) = -combine_segments(p12(i, j), p14(0, j - i), p14(i, j));
    }
  });
}

}  // namespace

ForwardSolution neumann_solve(const DynamicalPotential& pot, const BoundaryControl& ctrl,
                              const SolveGrid& grid, const NeumannOptions& opts) {
  if (std::abs(grid.dx - grid.dt) > 1e-12 * std::max(grid.dx, grid.dt)) {
    throw Error(ErrorKind::parameter, "series solver needs a square grid (dx = dt)",
                "dx=" + std::to_string(grid.dx) + " dt=" + std::to_string(grid.dt));
  }
  if (opts.k_max < 1) throw Error(ErrorKind::parameter, "k_max must be at least 1");
  if (opts.quad_order < 2) throw Error(ErrorKind::parameter, "quadrature order must be at least 2");
  const double h = grid.dt;
  const std::size_t nt = steps_for(grid.T, h, "T");
  const std::size_t nx = steps_for(grid.X, h, "X");
  const double M = pot.growth_rate();

  // Internal domain [0, T]^2: the solution vanishes for x > t.
  const std::size_t n = nt;
  const CellCoefficients coef(pot, n, h, opts.quad_order);

  VectorGrid term(n);
  for (std::size_t j = 0; j <= n; ++j) {
    for (std::size_t i = 0; i <= j; ++i) {
      const cplx fv = ctrl.f(static_cast<double>(j - i) * h);
      term(i, j) = Vec2(fv, I * fv);
    }
  }
  VectorGrid sum = term;

  auto sup_of = [](const VectorGrid& g) {
    double m = 0.0;
    for (const auto& e : g.v) m = std::max(m, e.squaredNorm());
    return std::sqrt(m);
  };

  ForwardSolution result{WaveField(h, nx, nt), 0.0, {}, {}};
  result.term_sup.push_back(sup_of(term));
  const double sum_scale = std::max(result.term_sup.front(), 1e-300);
  {
    VectorGrid next(n);
    VectorGrid p14(n);
    VectorGrid p12(n);
    for (std::size_t k = 0; k < opts.k_max; ++k) {
      // Remaining terms no longer change the sum in double precision.
      if (result.term_sup.back() <= kNegligibleTerm * sum_scale) break;
      apply_neumann_operator(term, next, p14, p12, coef);
      std::swap(term, next);
      for (std::size_t q = 0; q < sum.v.size(); ++q) sum.v[q] += term.v[q];
      result.term_sup.push_back(sup_of(term));
    }
  }

  for (std::size_t j = 0; j <= nt; ++j) {
    for (std::size_t i = 0; i <= std::min(nx, n); ++i) {
      result.field.u1(i, j) = sum(i, j)(0);
      result.field.u2(i, j) = sum(i, j)(1);
    }
  }
  result.truncation_bound = series_tail_bound(ctrl.c0, M * grid.T, opts.k_max);
  if (result.truncation_bound > opts.tolerance) {
    result.diagnostics.warn("series truncation bound " + std::to_string(result.truncation_bound) +
                            " exceeds tolerance " + std::to_string(opts.tolerance));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Characteristics solver

ForwardSolution characteristics_solve(const DynamicalPotential& pot, const BoundaryControl& ctrl,
                                      const SolveGrid& grid, const CharacteristicsOptions& opts) {
  if (std::abs(grid.dx - grid.dt) > 1e-12 * std::max(grid.dx, grid.dt)) {
    throw Error(ErrorKind::parameter, "characteristics solver needs dx = dt (unit speed)",
                "dx=" + std::to_string(grid.dx) + " dt=" + std::to_string(grid.dt));
  }
  const double h = grid.dt;
  const std::size_t nt = steps_for(grid.T, h, "T");
  const std::size_t nx = steps_for(grid.X, h, "X");
  // Nodes up to x = X + (T - t) influence the output; beyond x = t the state is zero.
  const std::size_t width = nx + nt;

  // In w = (w+, w-) the source is  d w+ = i c w-,  d w- = i conj(c) w+,  c = p + i q.
  const std::size_t n_pot = std::min(width, nt) + 2;
  std::vector<cplx> c(n_pot);
  for (std::size_t i = 0; i < n_pot; ++i) {
    const double x = static_cast<double>(i) * h;
    c[i] = cplx(pot.p(x), pot.q(x));
  }
  const bool trapezoid = opts.scheme == CharacteristicsOptions::Scheme::trapezoidal;

  ForwardSolution result{WaveField(h, nx, nt), 0.0, {}, {}};
  std::vector<cplx> wp(width + 2);
  std::vector<cplx> wm(width + 2);
  std::vector<cplx> np(width + 2);
  std::vector<cplx> nm(width + 2);
  wm[0] = kSqrt2 * ctrl.f(0.0);
  result.field.u1(0, 0) = ctrl.f(0.0);
  result.field.u2(0, 0) = I * (wm[0] - wp[0]) / kSqrt2;

  for (std::size_t step = 0; step < nt; ++step) {
    // nonzero state at this level lives on i <= step + 1
    const std::size_t live = std::min(step + 1, width + 1);
    const std::size_t upper = std::min(step + 1, width - (step + 1));
    const double t_next = static_cast<double>(step + 1) * h;
    const cplx f_next = ctrl.f(t_next);
    const double ws = trapezoid ? 0.5 * h : h;
    for (std::size_t i = 0; i <= upper; ++i) {
      // upstream values: w+ arrives from i + 1, w- from i - 1
      const cplx ap = i + 1 <= live ? wp[i + 1] + ws * I * c[i + 1] * wm[i + 1] : cplx{};
      if (i == 0) {
        if (trapezoid) {
          const cplx beta = ws * I * c[0];
          np[0] = (ap + beta * kSqrt2 * f_next) / (1.0 + beta);
        } else {
          np[0] = ap;
        }
        nm[0] = kSqrt2 * f_next - np[0];
        continue;
      }
      const cplx am = i - 1 <= live ? wm[i - 1] + ws * I * std::conj(c[i - 1]) * wp[i - 1] : cplx{};
      if (trapezoid) {
        const cplx beta = ws * I * c[i];
        const cplx gamma = ws * I * std::conj(c[i]);
        np[i] = (ap + beta * am) / (1.0 - beta * gamma);
        nm[i] = am + gamma * np[i];
      } else {
        np[i] = ap;
        nm[i] = am;
      }
    }
    for (std::size_t i = upper + 1; i <= live && i < np.size(); ++i) {
      np[i] = cplx{};
      nm[i] = cplx{};
    }
    std::swap(wp, np);
    std::swap(wm, nm);

    const std::size_t row = step + 1;
    for (std::size_t i = 0; i <= std::min(nx, upper); ++i) {
      result.field.u1(i, row) = (wp[i] + wm[i]) / kSqrt2;
      result.field.u2(i, row) = I * (wm[i] - wp[i]) / kSqrt2;
    }
    result.field.u1(0, row) = f_next;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Response extraction

DeconvolutionResult extract_response_detailed(const SampledFunction& u2_boundary,
                                              const BoundaryControl& ctrl,
                                              const DeconvolutionOptions& opts) {
  const Grid& grid = u2_boundary.grid();
  if (std::abs(grid.x0()) > 1e-12 * grid.h()) {
    throw Error(ErrorKind::parameter, "boundary trace must start at t = 0");
  }
  const std::size_t n = grid.size();
  if (n < 6) throw Error(ErrorKind::parameter, "boundary trace needs at least six samples");
  const double h = grid.h();

  const cplx f2_0 = ctrl.d2f(0.0);
  if (std::abs(f2_0) <= opts.degenerate_tolerance * std::max(1.0, ctrl.c0)) {
    throw Error(ErrorKind::ill_posed, "control has f''(0) = 0; deconvolution is ill-posed",
                "f''(0)=" + std::to_string(std::abs(f2_0)));
  }

  std::vector<cplx> d(n);
  std::vector<cplx> f(n);
  std::vector<cplx> f2(n);
  double sup_f = 0.0;
  double sup_d = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = grid.node(k);
    f[k] = ctrl.f(t);
    f2[k] = ctrl.d2f(t);
    d[k] = u2_boundary[k] - I * f[k];
    sup_f = std::max(sup_f, std::abs(f[k]));
    sup_d = std::max(sup_d, std::abs(d[k]));
  }

  // d'' by fourth-order differences (one-sided near the ends).
  std::vector<cplx> dd(n);
  const double h2 = 12.0 * h * h;
  dd[1] = (11.0 * d[0] - 20.0 * d[1] + 6.0 * d[2] + 4.0 * d[3] - d[4]) / h2;
  for (std::size_t k = 2; k + 2 < n; ++k) {
    dd[k] = (-d[k - 2] + 16.0 * d[k - 1] - 30.0 * d[k] + 16.0 * d[k + 1] - d[k + 2]) / h2;
  }
  {
    const std::size_t k = n - 2;
    dd[k] = (11.0 * d[k + 1] - 20.0 * d[k] + 6.0 * d[k - 1] + 4.0 * d[k - 2] - d[k - 3]) / h2;
  }
  {
    const std::size_t k = n - 1;
    dd[k] = (35.0 * d[k] - 104.0 * d[k - 1] + 114.0 * d[k - 2] - 56.0 * d[k - 3] + 11.0 * d[k - 4]) / h2;
  }

  // d''(t) = int_0^t r(s) f''(t - s) ds, still of the first kind with kernel
  // value f''(0) on the diagonal. Product midpoint rule with unknowns at the
  // cell centres, then averaged back to the nodes.
  std::vector<cplx> mid(n - 1);
  std::vector<cplx> kernel(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) kernel[k] = ctrl.d2f((static_cast<double>(k) + 0.5) * h);
  if (std::abs(kernel[0]) == 0.0) {
    throw Error(ErrorKind::ill_posed, "control has f''(h/2) = 0; deconvolution is ill-posed");
  }
  for (std::size_t m = 1; m < n; ++m) {
    cplx known{};
    for (std::size_t k = 0; k + 1 < m; ++k) known += mid[k] * kernel[m - 1 - k];
    mid[m - 1] = (dd[m] / h - known) / kernel[0];
  }
  std::vector<cplx> r(n);
  for (std::size_t k = 1; k + 1 < n; ++k) r[k] = 0.5 * (mid[k - 1] + mid[k]);
  r[0] = 1.5 * mid[0] - 0.5 * mid[1];
  r[n - 1] = 1.5 * mid[n - 2] - 0.5 * mid[n - 3];

  // Residual of the original first-kind equation (trapezoid product rule).
  double residual = 0.0;
  for (std::size_t m = 1; m < n; ++m) {
    cplx conv = 0.5 * (r[m] * f[0] + r[0] * f[m]);
    for (std::size_t k = 1; k < m; ++k) conv += r[m - k] * f[k];
    residual = std::max(residual, std::abs(conv * h - d[m]));
  }
  const double tol = opts.residual_tolerance > 0.0 ? opts.residual_tolerance
                                                   : 1e-3 * std::max({sup_f, sup_d, 1e-300});
  if (residual > tol) {
    throw Error(ErrorKind::residual, "Volterra residual above tolerance",
                "residual=" + std::to_string(residual) + " tolerance=" + std::to_string(tol));
  }
  return {ResponseFunction{SampledFunction(grid, std::move(r)),
                           ResponseFunction::Origin::extracted},
          residual};
}

ResponseFunction extract_response(const SampledFunction& u2_boundary, const BoundaryControl& ctrl,
                                  const DeconvolutionOptions& opts) {
  return extract_response_detailed(u2_boundary, ctrl, opts).response;
}

// ---------------------------------------------------------------------------
// Estimates

EstimateReport verify_estimates(const WaveField& field, const BoundaryControl& ctrl,
                                const DynamicalPotential& pot) {
  EstimateReport rep;
  rep.M = pot.growth_rate();
  double max_scaled = 0.0;
  for (std::size_t j = 0; j <= field.nt(); ++j) {
    const double t = static_cast<double>(j) * field.h();
    const double damp = std::exp(-rep.M * t);
    for (std::size_t i = 0; i <= field.nx(); ++i) {
      const double norm = field.at(i, j).norm();
      max_scaled = std::max(max_scaled, norm * damp);
      if (i > j) rep.causality_residual = std::max(rep.causality_residual, norm);
    }
  }
  if (ctrl.c0 > 0.0) {
    rep.growth_ratio = max_scaled / ctrl.c0;
  } else {
    rep.growth_ratio = max_scaled == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return rep;
}

}  // namespace dirac
