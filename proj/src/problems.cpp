#include "sgm/problems.hpp"

#include <cmath>

#include "sgm/kernels.hpp"
#include "sgm/rng.hpp"

namespace sgm {

namespace {

Matrix tridiagonal(std::size_t n, double diag, double off) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = diag;
    if (i + 1 < n) {
      m(i, i + 1) = off;
      m(i + 1, i) = off;
    }
  }
  return m;
}

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Ex1Problem build_ex1() {
  const std::size_t n = 5;
  Matrix W(n, n);
  const double w_data[5][5] = {{5, -1, 2, 0, 2},
                               {-1, 6, -1, 3, 0},
                               {2, -1, 3, 0, 1},
                               {0, 3, 0, 5, 0},
                               {2, 0, 1, 0, 4}};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) W(i, j) = w_data[i][j];
  const Vector w1 = {1, 2, -1, -2, 1};
  const Vector w2 = {1, 0, -1, 0, 1};
  const double v1 = -2.0;
  const double v2 = 20.0;

  SpdMatrix::checked(W);  // the printed W must be SPD

  // Exact denominator bound: w2'x + v2 is affine, so its minimum over the
  // box is attained at a vertex.
  double den_min = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double q = v2;
    for (std::size_t i = 0; i < n; ++i)
      q += w2[i] * ((mask >> i) & 1u ? 1.0 : -1.0);
    den_min = std::min(den_min, q);
  }
  if (!(den_min > 0.0))
    throw ArgumentError("build_ex1: denominator not positive on the box");

  return Ex1Problem{FractionalQuadratic::ratio_form(W, w1, v1, w2, v2),
                    BoxSet(Vector(n, -1.0), Vector(n, 1.0)),
                    Vector(n, 1.0),
                    std::move(W),
                    w1,
                    w2,
                    v1,
                    v2,
                    den_min};
}

Ex2Problem build_ex2(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ArgumentError("build_ex2: n must be at least 2");
  NormalSampler rng(seed);

  // Draw order is part of the format: A row-major, then B, then a, then b.
  Matrix A(n, n);
  for (auto& v : A.data()) v = rng.next();
  Matrix B(n, n);
  for (auto& v : B.data()) v = rng.next();
  Vector a(n);
  for (auto& v : a) v = 0.1 * rng.next();
  Vector b(n);
  for (auto& v : b) v = 0.05 * rng.next();

  A = symmetrized(A);
  SymmetricEigen eigA = symmetric_eigen(A, /*want_vectors=*/false);
  const double shift = std::abs(eigA.values.front()) + 0.1;
  for (std::size_t i = 0; i < n; ++i) A(i, i) += shift;

  B = symmetrized(B);
  SymmetricEigen eigB = symmetric_eigen(B);
  Vector clamped = eigB.values;
  for (auto& v : clamped) v = std::max(v, 0.0);
  B = symmetrized(eigB.reassemble(clamped));

  const double alpha = 1.0;
  const double beta = 100.0;
  const double m = -1.0;
  const double M = 1.0;

  FractionalQuadratic objective(A, a, alpha, B, b, beta);
  QuadraticBandSet set(B, b, beta, m, M);
  Vector x0(n, 1.0);

  // Sampled hypothesis checks over the feasible set.
  FeasibleSet wrapped = set;
  bool numerator_ok = true;
  double den_min = std::numeric_limits<double>::infinity();
  for (const Vector& x : sample_feasible_points(wrapped, 64, seed ^ 0x9E3779B9u)) {
    if (objective.numerator(x) > 0.0) numerator_ok = false;
    den_min = std::min(den_min, objective.denominator(x));
  }

  return Ex2Problem{std::move(objective), std::move(set), std::move(x0),
                    n,    seed,           shift,          numerator_ok,
                    den_min};
}

Ex3Problem build_ex3(std::size_t n) {
  if (n < 2) throw ArgumentError("build_ex3: n must be at least 2");
  Matrix V = tridiagonal(n, 2.0, 1.0);
  Matrix W = tridiagonal(n, 3.0, 0.5);
  Vector p(n, 0.0);
  p[0] = 1.0;
  BoxQuadratic objective(std::move(V), std::move(W), std::move(p));
  const double gamma = objective.gamma();
  const double L = objective.lipschitz();
  return Ex3Problem{std::move(objective),
                    BoxSet(Vector(n, -1.0), Vector(n, 1.0)),
                    Vector(n, 0.8),
                    gamma,
                    L};
}

nlohmann::json export_problem_json(const Ex1Problem& p) {
  nlohmann::json j;
  j["experiment"] = "ex1";
  j["n"] = 5;
  j["W"] = matrix_json(p.W);
  j["w1"] = p.w1;
  j["w2"] = p.w2;
  j["v1"] = p.v1;
  j["v2"] = p.v2;
  j["box"] = {{"lower", p.set.lower()}, {"upper", p.set.upper()}};
  j["x0"] = p.x0;
  return j;
}

nlohmann::json export_problem_json(const Ex2Problem& p) {
  nlohmann::json j;
  j["experiment"] = "ex2";
  j["n"] = p.n;
  j["seed"] = p.seed;
  j["generator"] = NormalSampler::kGeneratorName;
  j["A"] = matrix_json(p.objective.numerator_quadratic());
  j["B"] = matrix_json(p.objective.denominator_quadratic());
  j["a"] = p.objective.numerator_linear();
  j["b"] = p.objective.denominator_linear();
  j["alpha"] = p.objective.numerator_constant();
  j["beta"] = p.objective.denominator_constant();
  j["band"] = {{"m", p.set.band_lower()}, {"M", p.set.band_upper()}};
  j["spd_shift"] = p.shift_applied;
  j["x0"] = p.x0;
  return j;
}

nlohmann::json export_problem_json(const Ex3Problem& p) {
  nlohmann::json j;
  j["experiment"] = "ex3";
  j["n"] = p.x0.size();
  j["V"] = matrix_json(p.objective.V());
  j["W"] = matrix_json(p.objective.W());
  j["p"] = p.objective.p();
  j["box"] = {{"lower", p.set.lower()}, {"upper", p.set.upper()}};
  j["x0"] = p.x0;
  j["gamma"] = p.gamma;
  j["lipschitz"] = p.lipschitz;
  return j;
}

}  // namespace sgm
