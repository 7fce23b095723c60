#include "dirac/inverse.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "dirac/parallel.hpp"

namespace dirac {

namespace {

const Row2& theta2_at_zero() {
  static const Row2 base(-1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2);
  return base;
}

double smallest_eigenvalue(const Eigen::MatrixXcd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::internal, "Hermitian eigensolver did not converge");
  }
  return solver.eigenvalues()(0);
}

std::vector<double> trapezoid_sqrt_weights(std::size_t n, double h) {
  std::vector<double> w(n, std::sqrt(h));
  w.front() = w.back() = std::sqrt(0.5 * h);
  return w;
}

/// Lower Cholesky factor. Returns the index of the first non-positive pivot,
/// or n on success.
std::size_t cholesky(const Eigen::MatrixXcd& a, Eigen::MatrixXcd& l) {
  const auto n = a.rows();
  l.setZero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double d = a(j, j).real() - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0)) return static_cast<std::size_t>(j);
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    const Eigen::Index rest = n - j - 1;
    if (rest > 0) {
      l.col(j).tail(rest) =
          (a.col(j).tail(rest) - l.block(j + 1, 0, rest, j) * l.row(j).head(j).adjoint()) / ljj;
    }
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

StructuredOperatorMatrix build_structured_operator(const Accelerant& acc, double l, std::size_t N) {
  if (N < 8) throw Error(ErrorKind::parameter, "structured operator needs N >= 8", "N=" + std::to_string(N));
  if (!(l > 0.0) || l > acc.length() * (1.0 + 1e-12)) {
    throw Error(ErrorKind::domain, "l must lie in (0, 2L]",
                "l=" + std::to_string(l) + " 2L=" + std::to_string(acc.length()));
  }
  const double step = l / static_cast<double>(N - 1);
  const auto sw = trapezoid_sqrt_weights(N, step);
  StructuredOperatorMatrix op{l, N, Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(N),
                                                               static_cast<Eigen::Index>(N)),
                              0.0};
  for (std::size_t i = 0; i < N; ++i) {
    op.matrix(i, i) += sw[i] * sw[i] * acc.omega_at(0.0);
    for (std::size_t j = 0; j < i; ++j) {
      const cplx w = sw[i] * sw[j] * acc.omega_at(static_cast<double>(i - j) * step);
      op.matrix(i, j) += w;
      op.matrix(j, i) += std::conj(w);
    }
  }
  op.min_eigenvalue = smallest_eigenvalue(op.matrix);
  if (!(op.min_eigenvalue > 0.0)) {
    throw Error(ErrorKind::not_accelerant, "structured operator is not positive definite",
                "l=" + std::to_string(l) + " min_eig=" + std::to_string(op.min_eigenvalue));
  }
  return op;
}

Row2 recover_theta2(const Accelerant& acc, double x, std::size_t N) {
  if (x == 0.0) return theta2_at_zero();
  if (!(x > 0.0)) throw Error(ErrorKind::domain, "x must be positive", "x=" + std::to_string(x));
  const auto op = build_structured_operator(acc, 2.0 * x, N);
  const double step = 2.0 * x / static_cast<double>(N - 1);
  const auto sw = trapezoid_sqrt_weights(N, step);
  const auto n = static_cast<Eigen::Index>(N);
  Eigen::MatrixXcd rhs(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * step;
    rhs(i, 0) = sw[i] * 2.0 * acc.s.at(t);
    rhs(i, 1) = sw[i];
  }
  const Eigen::MatrixXcd y = op.matrix.llt().solve(rhs);
  Row2 integral = Row2::Zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    const cplx c = sw[i] * std::conj(acc.omega_pos.at(static_cast<double>(i) * step));
    integral(0) += c * y(i, 0);
    integral(1) += c * y(i, 1);
  }
  return theta2_at_zero() - integral / std::numbers::sqrt2;
}

Row2 recover_theta1(const Row2& theta2) {
  return Row2(-std::conj(theta2(0)), std::conj(theta2(1)));
}

SpectralPotential recover_potential(const ThetaPair& thetas) {
  const std::size_t n = thetas.grid.size();
  if (n < 3 || thetas.theta1.size() != n || thetas.theta2.size() != n) {
    throw Error(ErrorKind::parameter, "theta samples need at least three nodes on the grid",
                "nodes=" + std::to_string(thetas.theta1.size()));
  }
  const double h = thetas.grid.h();
  const auto& t1 = thetas.theta1;
  std::vector<cplx> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    Row2 d;
    if (k == 0) {
      d = (-3.0 * t1[0] + 4.0 * t1[1] - t1[2]) / (2.0 * h);
    } else if (k == n - 1) {
      d = (3.0 * t1[n - 1] - 4.0 * t1[n - 2] + t1[n - 3]) / (2.0 * h);
    } else {
      d = (t1[k + 1] - t1[k - 1]) / (2.0 * h);
    }
    const Row2& t2 = thetas.theta2[k];
    v[k] = I * (d(0) * std::conj(t2(1)) + d(1) * std::conj(t2(0)));
  }
  return {ComplexProfile(SampledFunction(thetas.grid, std::move(v)))};
}

InversionResult invert_response_detailed(const ResponseFunction& r, std::size_t N) {
  if (N < 4 || N % 2 != 0) {
    throw Error(ErrorKind::parameter, "N must be an even number of subintervals >= 4",
                "N=" + std::to_string(N));
  }
  const Grid& rg = r.r.grid();
  if (std::abs(rg.x0()) > 1e-12 * rg.h()) {
    throw Error(ErrorKind::parameter, "response grid must start at 0", "x0=" + std::to_string(rg.x0()));
  }
  const double T = rg.back();
  const Grid grid = Grid::over(0.0, T, N);
  const double h = grid.h();
  const Accelerant acc =
      rg.matches(grid) ? accelerant_from_response(r)
                       : accelerant_from_response(
                             {SampledFunction::sample(grid, [&r](double t) { return r.r.at(t); }),
                              r.origin});

  const auto n = static_cast<Eigen::Index>(N + 1);
  // Full-interval matrix with interior weight h at the last node; each
  // S_{2x_k} is its leading block with the last row and column reweighted.
  const auto omega = [&acc](std::ptrdiff_t d) {
    if (d == 0) return cplx(acc.omega_pos[0].real(), 0.0);
    if (d > 0) return acc.omega_pos[static_cast<std::size_t>(d)];
    return std::conj(acc.omega_pos[static_cast<std::size_t>(-d)]);
  };
  std::vector<double> sw(N + 1, std::sqrt(h));
  sw[0] = std::sqrt(0.5 * h);
  Eigen::MatrixXcd full(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      full(i, j) = sw[i] * sw[j] * omega(i - j);
    }
    full(i, i) += 1.0;
  }

  Eigen::MatrixXcd chol;
  const std::size_t pivot = cholesky(full, chol);
  if (pivot < N + 1) {
    throw Error(ErrorKind::not_accelerant, "r is not a response function: S_l is not positive",
                "x=" + std::to_string(grid.node(pivot) / 2.0) + " l=" + std::to_string(grid.node(pivot)));
  }

  InversionResult res{DynamicalPotential{RealProfile([](double) { return 0.0; }),
                                         RealProfile([](double) { return 0.0; }), std::nullopt},
                      SpectralPotential{ComplexProfile([](double) { return cplx{}; })},
                      ThetaPair{Grid::over(0.0, T / 2.0, N / 2), {}, {}},
                      0.0,
                      {}};

  {
    Eigen::MatrixXcd top = full;
    top.row(n - 1) /= std::numbers::sqrt2;
    top.col(n - 1) /= std::numbers::sqrt2;
    top(n - 1, n - 1) += 0.5;
    res.min_eigenvalue = smallest_eigenvalue(top);
  }
  if (!(res.min_eigenvalue > 0.0)) {
    throw Error(ErrorKind::not_accelerant, "r is not a response function: S_l is not positive",
                "x=" + std::to_string(T / 2.0) + " min_eig=" + std::to_string(res.min_eigenvalue));
  }

  const std::size_t half = N / 2;
  std::vector<Row2> theta2(half + 1);
  parallel_for(half + 1, [&](std::size_t k) {
    if (k == 0) {
      theta2[0] = theta2_at_zero();
      return;
    }
    const auto m = static_cast<Eigen::Index>(2 * k);
    Eigen::MatrixXcd lk = chol.topLeftCorner(m + 1, m + 1);
    lk.row(m).head(m) /= std::numbers::sqrt2;
    lk(m, m) = std::sqrt((std::norm(chol(m, m)) + 1.0) / 2.0);
    Eigen::MatrixXcd rhs(m + 1, 2);
    for (Eigen::Index i = 0; i <= m; ++i) {
      const double w = (i == 0 || i == m) ? std::sqrt(0.5 * h) : std::sqrt(h);
      rhs(i, 0) = w * 2.0 * acc.s[static_cast<std::size_t>(i)];
      rhs(i, 1) = w;
    }
    const auto lower = lk.triangularView<Eigen::Lower>();
    lower.solveInPlace(rhs);
    lower.adjoint().solveInPlace(rhs);
    Row2 integral = Row2::Zero();
    for (Eigen::Index i = 0; i <= m; ++i) {
      const double w = (i == 0 || i == m) ? std::sqrt(0.5 * h) : std::sqrt(h);
      const cplx c = w * std::conj(acc.omega_pos[static_cast<std::size_t>(i)]);
      integral(0) += c * rhs(i, 0);
      integral(1) += c * rhs(i, 1);
    }
    theta2[k] = theta2_at_zero() - integral / std::numbers::sqrt2;
  });

  res.thetas.theta2 = std::move(theta2);
  res.thetas.theta1.reserve(half + 1);
  for (const auto& t2 : res.thetas.theta2) res.thetas.theta1.push_back(recover_theta1(t2));
  res.v = recover_potential(res.thetas);
  res.potential = spec_to_dyn(res.v);
  return res;
}

DynamicalPotential invert_response(const ResponseFunction& r, std::size_t N) {
  return invert_response_detailed(r, N).potential;
}

}  // namespace dirac
