#pragma once

#include <cstdint>

#include "json.hpp"
#include "sgm/objectives.hpp"
#include "sgm/projection.hpp"

namespace sgm {

// (x'Wx + w1'x + v1)/(w2'x + v2) over the box [-1,1]^5, with the printed
// 5x5 W. The affine denominator is certified positive by enumerating the
// box vertices.
struct Ex1Problem {
  FractionalQuadratic objective;
  BoxSet set;
  Vector x0;
  Matrix W;
  Vector w1, w2;
  double v1, v2;
  double denominator_min;  // exact minimum of the denominator over the box
};
Ex1Problem build_ex1();

// Seeded fractional program (p/q with p = x'Ax/2 + a'x + 1 and
// q = x'Bx/2 + b'x + 100) over the band {-1 <= q <= 1}. Raw Gaussians are
// symmetrized, A is shifted positive definite, B has its negative
// eigenvalues clamped to zero. The stated hypothesis p <= 0 on K cannot
// hold for this data; its sampled status is recorded, not enforced.
struct Ex2Problem {
  FractionalQuadratic objective;
  QuadraticBandSet set;
  Vector x0;
  std::size_t n;
  std::uint64_t seed;
  double shift_applied;             // |lambda_min(sym A_raw)| + 0.1
  bool numerator_hypothesis_met;    // sampled p <= 0 over K
  double denominator_sampled_min;   // sampled min of q over K
};
Ex2Problem build_ex2(std::size_t n, std::uint64_t seed);

// x'Vx - p'Vp + p'W(x-p) over [-1,1]^n with tridiagonal V (1,2,1) and
// W (0.5,3,0.5), p = e1, x0 = 0.8*ones.
struct Ex3Problem {
  BoxQuadratic objective;
  BoxSet set;
  Vector x0;
  double gamma;      // lambda_min(V)
  double lipschitz;  // 2 lambda_max(V)
};
Ex3Problem build_ex3(std::size_t n);

// Problem data as JSON: matrices row-major, vectors flat, metadata with
// the seed and generator name where applicable.
nlohmann::json export_problem_json(const Ex1Problem& p);
nlohmann::json export_problem_json(const Ex2Problem& p);
nlohmann::json export_problem_json(const Ex3Problem& p);

}  // namespace sgm
