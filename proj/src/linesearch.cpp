#include "sgm/linesearch.hpp"

#include <algorithm>
#include <cmath>

#include "sgm/kernels.hpp"

namespace sgm {

void SgmParams::validate() const {
  if (!(delta1 > 0.0 && delta1 < beta && beta < 1.0))
    throw ArgumentError("SgmParams: need 0 < delta1 < beta < 1");
  if (!(delta2 > 0.0)) throw ArgumentError("SgmParams: need delta2 > 0");
  if (!(eta_max >= 0.0 && eta_max < 1.0))
    throw ArgumentError("SgmParams: need 0 <= eta_max < 1");
  if (max_backtracks < 1)
    throw ArgumentError("SgmParams: need max_backtracks >= 1");
}

double MaxWindowRef::reference() const {
  if (window.empty()) throw ArgumentError("MaxWindowRef: empty window");
  return *std::max_element(window.begin(), window.end());
}

void MaxWindowRef::push(double f_new) {
  window.push_back(f_new);
  while (static_cast<int>(window.size()) > cap + 1) window.pop_front();
}

namespace {

struct Backtracker {
  const ValueFn& f;
  const Vector& x;
  const Vector& d;
  Vector trial;
  int f_evals = 0;

  Backtracker(const ValueFn& fn, const Vector& x0, const Vector& dir)
      : f(fn), x(x0), d(dir), trial(x0.size()) {}

  double eval(double lambda) {
    std::copy(x.begin(), x.end(), trial.begin());
    kernels::axpy(lambda, d.data(), trial.data(), trial.size());
    ++f_evals;
    return f(trial);
  }
};

void check_descent(double grad_dot_d, double d_norm_sq) {
  if (d_norm_sq <= 0.0)
    throw NonDescentError("line search: zero direction");
  if (!(grad_dot_d < 0.0))
    throw NonDescentError("line search: grad'd must be negative");
}

}  // namespace

StepResult sgm_search(const ValueFn& f, const Vector& x, const Vector& d,
                      double grad_dot_d, double T, const SgmParams& params) {
  params.validate();
  const double dsq = norm2_sq(d);
  check_descent(grad_dot_d, dsq);

  const double s = -grad_dot_d / dsq;
  Backtracker bt(f, x, d);
  double lambda = s;
  for (int j = 0; j <= params.max_backtracks; ++j) {
    const double lhs = bt.eval(lambda);
    const double rhs = T + params.delta1 * lambda * grad_dot_d -
                       params.delta2 * lambda * lambda * dsq;
    if (lhs <= rhs)
      return {lambda, j, lhs, lhs, rhs, s, bt.f_evals};
    lambda *= params.beta;
  }
  throw BacktrackExhausted("sgm_search: backtracking exhausted");
}

double sgm_ref_update(double T, double f_new, double eta_next, double eta_max) {
  if (!(eta_next >= 0.0 && eta_next <= eta_max))
    throw ArgumentError("sgm_ref_update: eta outside [0, eta_max]");
  return eta_next * T + (1.0 - eta_next) * f_new;
}

StepResult zh_search(const ValueFn& f, const Vector& x, const Vector& d,
                     double grad_dot_d, double C, double delta, double beta,
                     double s, int max_backtracks) {
  if (!(delta > 0.0 && delta < 1.0 && beta > 0.0 && beta < 1.0 && s > 0.0))
    throw ArgumentError("zh_search: bad parameters");
  const double dsq = norm2_sq(d);
  check_descent(grad_dot_d, dsq);

  Backtracker bt(f, x, d);
  double lambda = s;
  for (int j = 0; j <= max_backtracks; ++j) {
    const double lhs = bt.eval(lambda);
    const double rhs = C + delta * lambda * grad_dot_d;
    if (lhs <= rhs)
      return {lambda, j, lhs, lhs, rhs, s, bt.f_evals};
    lambda *= beta;
  }
  throw BacktrackExhausted("zh_search: backtracking exhausted");
}

void zh_ref_update(AveragingRef& ref, double f_new, double eta_next) {
  if (!(eta_next >= 0.0 && eta_next < 1.0))
    throw ArgumentError("zh_ref_update: eta outside [0, 1)");
  const double q_next = eta_next * ref.Q + 1.0;
  ref.C = (eta_next * ref.Q * ref.C + f_new) / q_next;
  ref.Q = q_next;
}

StepResult gll_search(const ValueFn& f, const Vector& x, const Vector& d,
                      double grad_dot_d, const MaxWindowRef& ref, double delta,
                      double beta, double s, int max_backtracks) {
  return zh_search(f, x, d, grad_dot_d, ref.reference(), delta, beta, s,
                   max_backtracks);
}

}  // namespace sgm
