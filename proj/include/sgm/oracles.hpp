#pragma once

#include "sgm/linalg.hpp"
#include "sgm/projection.hpp"

// Reference solvers used to verify the production code paths. They share
// only the dense containers with the rest of the library; the numerics
// (elimination, enumeration, projected gradient) are self-contained so a
// bug in the production projection or solver cannot hide here.
namespace sgm::oracles {

// Global minimizer of y'Qy/2 + c'y over a box by enumerating all 3^n
// active-set patterns and keeping the best feasible stationary point.
// Q must be positive definite; intended for n <= 8.
Vector box_qp_enumerate(const Matrix& Q, const Vector& c, const BoxSet& box);

// argmin_{y in box} ||y - x||_metric through the enumeration oracle.
Vector project_scaled_reference(const BoxSet& box, const Vector& x,
                                const Matrix& metric);

struct FractionalMin {
  Vector x;
  double value = 0.0;
  int dinkelbach_steps = 0;
};

// Global minimum of (x'Wx + w1'x + v1)/(w2'x + v2) over a box with a
// positive denominator, by Dinkelbach reduction to a sequence of convex
// box QPs solved exactly by enumeration.
FractionalMin fractional_box_min(const Matrix& W, const Vector& w1, double v1,
                                 const Vector& w2, double v2,
                                 const BoxSet& box);

struct QuadraticMin {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  bool polished = false;
};

// min x'Qx/2 + c'x + c0 over a box: long-horizon accelerated projected
// gradient with fixed step 1/lambda_max(Q), then an exact solve on the
// identified active set.
QuadraticMin box_quadratic_min(const Matrix& Q, const Vector& c, double c0,
                               const BoxSet& box, int max_iters = 200000);

}  // namespace sgm::oracles
