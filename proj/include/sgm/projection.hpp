#pragma once

#include <optional>
#include <variant>

#include "sgm/linalg.hpp"

namespace sgm {

// Axis-aligned box {x : lower <= x <= upper}. Degenerate coordinates
// (lower == upper) are allowed and stay fixed under projection.
class BoxSet {
 public:
  BoxSet(Vector lower, Vector upper);

  std::size_t dim() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  bool contains(const Vector& x, double tol = tol::membership) const;
  Vector clamp(const Vector& x) const;

 private:
  Vector lower_, upper_;
};

// Quadratic band {x : m <= q(x) <= M} with q(x) = x'Bx/2 + b'x + beta and
// B positive semidefinite. Nonemptiness is certified at construction by
// exhibiting a feasible point (searched along the flattest eigendirections
// unless a hint is supplied).
class QuadraticBandSet {
 public:
  QuadraticBandSet(Matrix B, Vector b, double beta, double m, double M,
                   std::optional<Vector> feasible_hint = std::nullopt);

  std::size_t dim() const { return b_.size(); }
  double q(const Vector& x) const;
  Vector grad_q(const Vector& x) const;
  bool contains(const Vector& x, double tol = tol::membership) const;

  const Matrix& quadratic() const { return B_; }
  const Vector& linear() const { return b_; }
  double constant() const { return beta_; }
  double band_lower() const { return m_; }
  double band_upper() const { return M_; }
  const Vector& feasible_point() const { return feasible_; }
  double lambda_max() const { return lambda_max_B_; }

 private:
  Matrix B_;
  Vector b_;
  double beta_, m_, M_;
  Vector feasible_;
  double lambda_max_B_;
};

using FeasibleSet = std::variant<BoxSet, QuadraticBandSet>;

bool contains(const FeasibleSet& set, const Vector& x,
              double tol = tol::membership);
std::size_t set_dim(const FeasibleSet& set);

struct ProjectionResult {
  Vector point;
  int inner_iterations = 0;
  double kkt_residual = 0.0;
};

struct ProjectionOptions {
  int max_inner = 10000;
  double kkt_tol = tol::projection_kkt;
  // Box/APG path: starting iterate (previous projection).
  const Vector* warm_start = nullptr;
  // Band path: multiplier carried across calls; updated on success.
  double* multiplier = nullptr;
};

// argmin_{y in set} ||y - x||_D. Boxes use the closed-form clamp for
// diagonal D and an accelerated projected-gradient inner solve otherwise;
// the band uses a safeguarded Newton iteration on the single active-face
// multiplier.
ProjectionResult project_scaled(const BoxSet& set, const Vector& x,
                                const SpdMatrix& D,
                                const ProjectionOptions& opts = {});
ProjectionResult project_scaled(const QuadraticBandSet& set, const Vector& x,
                                const SpdMatrix& D,
                                const ProjectionOptions& opts = {});
ProjectionResult project_scaled(const FeasibleSet& set, const Vector& x,
                                const SpdMatrix& D,
                                const ProjectionOptions& opts = {});

// argmin_{y in set} ||y - x||_{S^{-1}}. The metric's inverse is never
// formed; S's Cholesky factor drives the inner solves directly.
ProjectionResult project_scaled_inverse_metric(const FeasibleSet& set,
                                               const Vector& x,
                                               const SpdMatrix& S,
                                               const ProjectionOptions& opts = {});

// Euclidean projection (identity metric).
ProjectionResult project_euclidean_result(const FeasibleSet& set,
                                          const Vector& x,
                                          const ProjectionOptions& opts = {});
Vector project_euclidean(const FeasibleSet& set, const Vector& x);

}  // namespace sgm
