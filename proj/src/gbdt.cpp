#include "dirac/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "dirac/quadrature.hpp"
#include "json.hpp"

namespace dirac::gbdt {

namespace {

using json = nlohmann::json;

constexpr double kEigenvectorCondLimit = 1e6;

/// (e^w - 1) / w
cplx phi1(cplx w) {
  if (std::abs(w) < 1e-3) return 1.0 + w / 2.0 + w * w / 6.0 + w * w * w / 24.0;
  return (std::exp(w) - 1.0) / w;
}

double condition_number(const MatrixC& m) {
  Eigen::JacobiSVD<MatrixC> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

MatrixC integrand(const Params& p, double t) {
  const VectorC l1 = (cplx(0.0, -t) * p.A).exp() * p.theta1;
  const VectorC l2 = (cplx(0.0, t) * p.A).exp() * p.theta2;
  return l1 * l1.adjoint() + l2 * l2.adjoint();
}

/// int_0^x Lambda Lambda* by composite Gauss-Legendre, doubling the panels
/// until two successive sums agree.
MatrixC gram_by_quadrature(const Params& p, double x) {
  const auto rule = quad::gauss_legendre<double>(10);
  const auto eval = [&](std::size_t panels) {
    const double width = x / static_cast<double>(panels);
    MatrixC sum = MatrixC::Zero(p.n, p.n);
    for (std::size_t k = 0; k < panels; ++k) {
      for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
        sum += rule.weights[g] * width * integrand(p, (static_cast<double>(k) + rule.nodes[g]) * width);
      }
    }
    return sum;
  };
  std::size_t panels = std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(x)));
  MatrixC prev = eval(panels);
  for (int it = 0; it < 12; ++it) {
    panels *= 2;
    MatrixC next = eval(panels);
    if ((next - prev).norm() <= 1e-14 * std::max(1.0, next.norm())) return next;
    prev = std::move(next);
  }
  return prev;
}

/// Closed form through the eigendecomposition A = P D P^{-1}; empty when P is
/// badly conditioned.
std::optional<MatrixC> gram_closed_form(const Params& p, double x) {
  Eigen::ComplexEigenSolver<MatrixC> es(p.A);
  if (es.info() != Eigen::Success) return std::nullopt;
  const MatrixC& P = es.eigenvectors();
  if (condition_number(P) > kEigenvectorCondLimit) return std::nullopt;
  const VectorC& d = es.eigenvalues();
  const auto lu = P.partialPivLu();
  const VectorC a1 = lu.solve(p.theta1);
  const VectorC a2 = lu.solve(p.theta2);
  MatrixC inner(p.n, p.n);
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    for (Eigen::Index l = 0; l < d.size(); ++l) {
      const cplx mu = d(k) - std::conj(d(l));
      inner(k, l) = a1(k) * std::conj(a1(l)) * x * phi1(cplx(0.0, -x) * mu) +
                    a2(k) * std::conj(a2(l)) * x * phi1(cplx(0.0, x) * mu);
    }
  }
  return MatrixC(P * inner * P.adjoint());
}

void require_pole_free(const Params& p, cplx z) {
  Eigen::ComplexEigenSolver<MatrixC> es(p.alpha, false);
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    if (std::abs(z - es.eigenvalues()(k)) <= 1e-12) {
      throw Error(ErrorKind::pole, "z is an eigenvalue of alpha",
                  "z=(" + std::to_string(z.real()) + "," + std::to_string(z.imag()) + ")");
    }
  }
}

cplx resolvent_form(const Params& p, cplx z) {
  const MatrixC m = z * MatrixC::Identity(p.n, p.n) - p.alpha;
  const VectorC y = m.partialPivLu().solve(p.theta1);
  return 2.0 * p.theta2.dot(y);
}

cplx parse_complex(const json& v, const char* field) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw Error(ErrorKind::parse, std::string("entries of ") + field + " must be numbers or [re, im] pairs");
}

VectorC parse_vector(const json& doc, const char* field, std::size_t n) {
  if (!doc.contains(field) || !doc[field].is_array()) {
    throw Error(ErrorKind::parse, std::string("params need an array field ") + field);
  }
  const json& arr = doc[field];
  if (arr.size() != n) {
    throw Error(ErrorKind::invalid_params, std::string(field) + " has the wrong length",
                "expected " + std::to_string(n) + ", got " + std::to_string(arr.size()));
  }
  VectorC v(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) v(static_cast<Eigen::Index>(k)) = parse_complex(arr[k], field);
  return v;
}

json complex_json(cplx c) { return json::array({c.real(), c.imag()}); }

}  // namespace

Params validate_params(std::size_t n, const MatrixC& A, const VectorC& theta1,
                       const VectorC& theta2, double tolerance) {
  const auto nn = static_cast<Eigen::Index>(n);
  if (n == 0 || A.rows() != nn || A.cols() != nn || theta1.size() != nn || theta2.size() != nn) {
    throw Error(ErrorKind::invalid_params, "inconsistent dimensions", "n=" + std::to_string(n));
  }
  Params p{n, A, theta1, theta2, MatrixC(), 0.0};
  const cplx i(0.0, 1.0);
  const MatrixC lhs = A - A.adjoint();
  const MatrixC rhs = i * (theta1 * theta1.adjoint() - theta2 * theta2.adjoint());
  const double scale = std::max({1.0, A.norm(), theta1.squaredNorm(), theta2.squaredNorm()});
  p.defect = (lhs - rhs).norm();
  if (p.defect > tolerance * scale) {
    throw Error(ErrorKind::invalid_params, "A - A* != i(theta1 theta1* - theta2 theta2*)",
                "defect=" + std::to_string(p.defect));
  }
  const VectorC sum = theta1 + theta2;
  p.alpha = A - i * theta1 * sum.adjoint();
  const double alpha_defect = (p.alpha - p.alpha.adjoint() + i * sum * sum.adjoint()).norm();
  if (alpha_defect > tolerance * scale) {
    throw Error(ErrorKind::invalid_params, "alpha - alpha* != -i(theta1 + theta2)(theta1 + theta2)*",
                "defect=" + std::to_string(alpha_defect));
  }
  return p;
}

State state(const Params& p, double x) {
  if (!(x >= 0.0)) throw Error(ErrorKind::domain, "x must be nonnegative", "x=" + std::to_string(x));
  State s;
  s.x = x;
  s.Lambda1 = (cplx(0.0, -x) * p.A).exp() * p.theta1;
  s.Lambda2 = (cplx(0.0, x) * p.A).exp() * p.theta2;
  const MatrixC id = MatrixC::Identity(p.n, p.n);
  if (x == 0.0) {
    s.S = id;
    return s;
  }
  const auto closed = gram_closed_form(p, x);
  s.S = id + (closed ? *closed : gram_by_quadrature(p, x));
  s.S = 0.5 * (s.S + s.S.adjoint()).eval();
  return s;
}

cplx potential(const Params& p, double x) {
  const State s = state(p, x);
  const auto llt = s.S.llt();
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::internal, "S(x) is not positive definite", "x=" + std::to_string(x));
  }
  return cplx(0.0, -2.0) * s.Lambda1.dot(llt.solve(s.Lambda2));
}

cplx weyl(const Params& p, cplx z) {
  require_pole_free(p, z);
  return cplx(0.0, 1.0) + resolvent_form(p, z);
}

cplx response(const Params& p, double t) {
  const VectorC y = (cplx(0.0, -t) * p.alpha).exp() * p.theta1;
  return cplx(0.0, -2.0) * p.theta2.dot(y);
}

double alpha_norm(const Params& p) {
  Eigen::JacobiSVD<MatrixC> svd(p.alpha);
  return svd.singularValues()(0);
}

ResponseHat response_hat(const Params& p, cplx z) {
  require_pole_free(p, z);
  return {resolvent_form(p, z), z.imag() <= alpha_norm(p)};
}

Params params_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, "params file is not valid JSON", e.what());
  }
  if (!doc.is_object() || !doc.contains("n") || !doc["n"].is_number_integer()) {
    throw Error(ErrorKind::parse, "params need an integer field n");
  }
  const auto n_signed = doc["n"].get<long long>();
  if (n_signed <= 0) throw Error(ErrorKind::invalid_params, "n must be positive");
  const auto n = static_cast<std::size_t>(n_signed);
  const VectorC a = parse_vector(doc, "A", n * n);
  MatrixC A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a(static_cast<Eigen::Index>(r * n + c));
    }
  }
  return validate_params(n, A, parse_vector(doc, "theta1", n), parse_vector(doc, "theta2", n));
}

std::string params_to_json(const Params& p) {
  json doc;
  doc["n"] = p.n;
  json a = json::array();
  for (Eigen::Index r = 0; r < p.A.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.A.cols(); ++c) a.push_back(complex_json(p.A(r, c)));
  }
  doc["A"] = a;
  json t1 = json::array();
  json t2 = json::array();
  for (Eigen::Index k = 0; k < p.theta1.size(); ++k) {
    t1.push_back(complex_json(p.theta1(k)));
    t2.push_back(complex_json(p.theta2(k)));
  }
  doc["theta1"] = t1;
  doc["theta2"] = t2;
  return doc.dump(2);
}

Params example_e1() {
  MatrixC A = MatrixC::Zero(1, 1);
  VectorC t = VectorC::Ones(1);
  return validate_params(1, A, t, t);
}

Params example_e2() {
  MatrixC A(1, 1);
  A(0, 0) = cplx(0.0, -1.5);
  VectorC t1 = VectorC::Ones(1);
  VectorC t2 = VectorC::Constant(1, 2.0);
  return validate_params(1, A, t1, t2);
}

}  // namespace dirac::gbdt
