#pragma once

#include <string>
#include <vector>

#include "sgm/solver.hpp"

namespace sgm {

struct Violation {
  std::string check;
  int k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

// Constants a run is checked against. mu/alpha_max/eta_max come from the
// report; L must be a Lipschitz bound for the gradient on the set.
struct RunConstants {
  double mu = 1.0;
  double alpha_max = 0.0;
  double eta_max = 0.0;
  double L = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double beta = 0.0;

  static RunConstants from_report(const RunReport& report,
                                  const SgmParams& params, double L);
};

// min(delta1 + delta2,
//     beta delta1 (1-delta1)/(L+delta2) +
//     beta^2 delta2 (1-delta1)^2/(L+delta2)^2); always < 1.
double zeta_constant(double delta1, double delta2, double beta, double L);

// Per-iteration inequalities: descent and direction bounds, the reference
// monotonicity chain, level-set containment, and the step-size bounds.
// Returns one entry per violated (check, iteration).
std::vector<Violation> check_propositions(const RunReport& report,
                                          const RunConstants& constants);

// T_k - f(x_{k+1}) >= zeta (grad'd/||d||)^2 on every full step.
std::vector<Violation> sufficient_decrease_check(const RunReport& report,
                                                 double zeta);

struct ConstantsEstimate {
  double c_hat = 0.0;
  double kappa_hat = 0.0;
  double zeta_hat = 0.0;
  double lambda_min_bound = 0.0;
};

ConstantsEstimate estimate_constants(const RunReport& report,
                                     const RunConstants& constants);

struct ErrorEstimateResult {
  bool applicable = false;  // false when the measured c_hat is degenerate
  double c_hat = 0.0;
  double kappa = 0.0;
  std::vector<Violation> violations;
};

// ||grad f(x_k)||^2 <= (T_k - T_{k+1}) / (kappa (1 - eta_max)) with
// kappa = c_hat^2 zeta / (mu^6 alpha_max^2) and c_hat measured on the run.
ErrorEstimateResult error_estimate_check(const RunReport& report,
                                         const RunConstants& constants);

struct RateFit {
  double theta_hat = 0.0;
  double r_squared = 0.0;
  int k_begin = 0;
  int k_end = 0;
};

// Least-squares fit of log(f(x_k) - f_star) against k over the iterations
// above the floor 10 eps |f_star|. Throws InsufficientData below 5 points.
RateFit fit_linear_rate(const RunReport& report, double f_star);

// max over the points of f(x) - f_star - (L/gamma^2) ||grad f(x)||^2.
double strong_quasiconvexity_gap(const Objective& obj, double f_star, double L,
                                 double gamma,
                                 const std::vector<Vector>& points);

}  // namespace sgm
