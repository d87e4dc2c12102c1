#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "sgm/linesearch.hpp"
#include "sgm/objectives.hpp"
#include "sgm/projection.hpp"

namespace sgm {

// Per-iteration parameter schedules with their admissible bands:
// 0 < alpha_min <= alpha_k <= alpha_max, 1 <= mu_k <= mu_bar,
// 0 <= eta_k <= eta_max < 1. Every emitted value is checked.
struct Schedules {
  std::function<double(int)> alpha;
  std::function<double(int)> eta;
  std::function<double(int)> mu;
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  double eta_max = 0.0;
  double mu_bar = 1.0;
  double lambda0 = 1.0;  // fixed initial trial step for the baselines

  double alpha_at(int k) const;
  double eta_at(int k) const;
  double mu_at(int k) const;
  void validate() const;
};

// Constant-in-k schedules from the experiment recipe:
// alpha_k = eta_k = 1 - (n+1)^{-1/2}, mu_k = 1 + (n+1)^{-2}, mu_bar = 1.25,
// lambda0 = 1.
Schedules paper_schedules(std::size_t n);

// How the algorithm's scaling matrix D_k is produced. The projection step
// runs in the D_k^{-1} norm. With the Hessian rules the Hessian H(x_k) is
// the projection metric (D_k = H^{-1}, a damped projected-Newton step);
// hessian_direct instead uses D_k = H(x_k) itself.
struct ScalingRule {
  enum class Kind {
    identity,
    hessian_metric,    // D_k = H(x_k)^{-1}, projection in the H-norm
    hessian_direct,    // D_k = H(x_k); clipped fallback when not SPD
    hessian_clipped,   // metric spectral_clip(H(x_k), lo, hi)
    diagonal_hessian,  // D_k = diag(H(x_k)) floored at lo
    constant_spd,      // fixed user-supplied D
  };
  Kind kind = Kind::identity;
  double lo = 1e-6;
  double hi = 1e6;
  // Tikhonov term added to the Hessian before it is used as the metric
  // (or as D itself for hessian_direct).
  double regularization = 0.0;
  std::optional<Matrix> fixed_matrix;

  static ScalingRule identity_rule();
  static ScalingRule hessian(double regularization = 0.0);  // hessian_metric
  static ScalingRule hessian_direct_rule(double regularization = 0.0);
  static ScalingRule hessian_clipped(double lo, double hi);
  static ScalingRule diagonal_hessian(double lo = 1e-6);
  static ScalingRule constant(Matrix m);
};

struct SolverConfig {
  Schedules schedules;
  SgmParams params;
  ScalingRule scaling;
  double stop_dnorm = 1e-10;  // scaled by (1 + ||x_k||) at each test
  double stop_grad = 1e-13;
  int max_iters = 100;
  std::optional<double> reference_value;  // known f(x*), echoed into traces
};

enum class Status {
  converged_dnorm,
  converged_grad,
  max_iters,
  linesearch_failure,
  numerical_error,
};

const char* to_string(Status s);
enum class Method { SGM, YWH, ZH };
const char* to_string(Method m);

struct IterationRecord {
  int k = 0;
  double f_val = 0.0;
  double grad_norm = 0.0;
  double d_norm = 0.0;
  double lambda = 0.0;  // 0 marks a terminal record (no step taken)
  int j = 0;
  double T = 0.0;  // non-monotone reference used at this iteration
  double s = 0.0;
  double grad_dot_d = 0.0;
  long long f_evals = 0;
  long long wall_nanos = 0;
};

// Quantities needed by the diagnostics that are not part of the trace
// schema: the metric geometry of each iteration.
struct IterationGeometry {
  double alpha = 0.0;
  double eta_next = 0.0;
  double d_invnorm_sq = 0.0;  // ||d||^2 in the D_k^{-1} norm
  double mu_eff = 1.0;        // max(lambda_max(D), 1/lambda_min(D)), inflated 2%
};

struct RunReport {
  Method method = Method::SGM;
  Status status = Status::max_iters;
  std::vector<IterationRecord> trace;
  std::vector<IterationGeometry> geometry;
  Vector final_x;
  long long total_f_evals = 0;
  long long total_grad_evals = 0;
  bool x0_projected = false;
  int scaling_fallbacks = 0;  // iterations where the SPD fallback fired
  double mu_eff_max = 1.0;
  double alpha_max_used = 0.0;
  double eta_max_used = 0.0;
  std::string error_message;

  double final_f() const;
  double final_grad_norm() const;
};

// Algorithm: y_k = P_{K, D_k^{-1}}(x_k - alpha_k D_k grad f(x_k)),
// d_k = y_k - x_k, step by the modified non-monotone rule, T by the
// convex-combination update.
RunReport sgm_solve(const Objective& obj, const FeasibleSet& set, Vector x0,
                    const SolverConfig& cfg);

// Baseline: same scaled projection, delta2 = 0, fixed initial trial step
// lambda0, averaging reference.
RunReport ywh_solve(const Objective& obj, const FeasibleSet& set, Vector x0,
                    const SolverConfig& cfg);

// Baseline: Euclidean projection (identity scaling), averaging reference.
RunReport zh_solve(const Objective& obj, const FeasibleSet& set, Vector x0,
                   const SolverConfig& cfg);

// || P_{K, D^{-1}}(x - alpha D grad f(x)) - x ||; zero exactly at VIP
// solutions.
double stationarity_gap(const Objective& obj, const FeasibleSet& set,
                        const Vector& x, double alpha, const SpdMatrix& D);

}  // namespace sgm
