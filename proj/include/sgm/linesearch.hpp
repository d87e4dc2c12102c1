#pragma once

#include <deque>
#include <functional>

#include "sgm/linalg.hpp"

namespace sgm {

struct SgmParams {
  double delta1 = 1e-3;
  double delta2 = 1e-4;
  double beta = 0.5;
  double eta_max = 0.0;
  int max_backtracks = 60;

  // Enforces 0 < delta1 < beta < 1, delta2 > 0, 0 <= eta_max < 1.
  void validate() const;
};

// Non-monotone references. The modified rule carries a single scalar T;
// the averaging rule carries (C, Q); the max rule keeps a value window.
struct AveragingRef {
  double C = 0.0;
  double Q = 1.0;
};

struct MaxWindowRef {
  std::deque<double> window;
  int cap = 10;  // M; window holds at most cap+1 values

  double reference() const;
  void push(double f_new);
};

struct StepResult {
  double lambda = 0.0;
  int j = 0;
  double f_new = 0.0;
  double accepted_lhs = 0.0;
  double accepted_rhs = 0.0;
  double s = 0.0;   // initial trial step, lambda = s*beta^j
  int f_evals = 0;
};

using ValueFn = std::function<double(const Vector&)>;

// Backtracking under f(x + l d) <= T + delta1 l g'd - delta2 l^2 ||d||^2
// with trial steps l = s beta^j, s = -g'd/||d||^2. Requires g'd < 0.
StepResult sgm_search(const ValueFn& f, const Vector& x, const Vector& d,
                      double grad_dot_d, double T, const SgmParams& params);

// T' = eta T + (1 - eta) f_new.
double sgm_ref_update(double T, double f_new, double eta_next, double eta_max);

// Averaging rule: f(x + l d) <= C + delta l g'd with a fixed initial trial
// step s.
StepResult zh_search(const ValueFn& f, const Vector& x, const Vector& d,
                     double grad_dot_d, double C, double delta, double beta,
                     double s, int max_backtracks);

// Q' = eta Q + 1; C' = (eta Q C + f_new)/Q'.
void zh_ref_update(AveragingRef& ref, double f_new, double eta_next);

// Max rule: f(x + l d) <= max(window) + delta l g'd.
StepResult gll_search(const ValueFn& f, const Vector& x, const Vector& d,
                      double grad_dot_d, const MaxWindowRef& ref, double delta,
                      double beta, double s, int max_backtracks);

}  // namespace sgm
