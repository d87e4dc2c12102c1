#include "sgm/diagnostics.hpp"

#include <cmath>
#include <limits>

namespace sgm {

namespace {

constexpr double kSlack = tol::invariant_slack;

bool is_full_step(const IterationRecord& r) { return r.lambda > 0.0; }

}  // namespace

RunConstants RunConstants::from_report(const RunReport& report,
                                       const SgmParams& params, double L) {
  RunConstants c;
  c.mu = report.mu_eff_max;
  c.alpha_max = report.alpha_max_used;
  c.eta_max = report.eta_max_used;
  c.L = L;
  c.delta1 = params.delta1;
  c.delta2 = params.delta2;
  c.beta = params.beta;
  return c;
}

double zeta_constant(double delta1, double delta2, double beta, double L) {
  if (!(delta1 > 0.0 && delta2 > 0.0 && beta > 0.0 && beta < 1.0 && L > 0.0))
    throw ArgumentError("zeta_constant: bad parameters");
  const double first = delta1 + delta2;
  const double den = L + delta2;
  const double second = beta * delta1 * (1.0 - delta1) / den +
                        beta * beta * delta2 * (1.0 - delta1) * (1.0 - delta1) /
                            (den * den);
  return std::min(first, second);
}

std::vector<Violation> check_propositions(const RunReport& report,
                                          const RunConstants& constants) {
  std::vector<Violation> out;
  if (report.trace.empty())
    throw ArgumentError("check_propositions: empty trace");
  const auto& tr = report.trace;
  const auto& geo = report.geometry;
  const double f0 = tr.front().f_val;
  const bool sgm_rule = report.method == Method::SGM;

  // c_hat for the step-size upper bound (lm6(b)).
  double c_hat = std::numeric_limits<double>::infinity();
  for (const auto& r : tr)
    if (is_full_step(r) && r.grad_norm > 1e-14)
      c_hat = std::min(c_hat, -r.grad_dot_d / (r.grad_norm * r.grad_norm));

  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto& r = tr[i];
    const auto& g = geo[i];
    const int k = r.k;

    // lm2(b): f(x_k) <= T_k; lm2(d): f(x_k) <= f(x_0). Hold on every record.
    if (r.f_val > r.T + kSlack * std::max(1.0, std::abs(r.T)))
      out.push_back({"lm2b_f_le_T", k, r.f_val, r.T});
    if (r.f_val > f0 + kSlack * std::max(1.0, std::abs(f0)))
      out.push_back({"lm2d_level_set", k, r.f_val, f0});

    if (!is_full_step(r)) continue;

    // lm1(a): grad'd <= -||d||^2_{D^-1} / alpha_k < 0.
    if (r.d_norm > 0.0) {
      const double bound = -g.d_invnorm_sq / g.alpha;
      if (r.grad_dot_d > bound + kSlack * std::max(1.0, std::abs(bound)))
        out.push_back({"lm1a_descent", k, r.grad_dot_d, bound});
      if (!(r.grad_dot_d < 0.0))
        out.push_back({"lm1a_negative", k, r.grad_dot_d, 0.0});
      // lm1(b): ||d|| <= mu^3 alpha_max ||grad||, slack 1e-9 ||grad||.
      const double mu3 = constants.mu * constants.mu * constants.mu;
      const double dir_bound = mu3 * constants.alpha_max * r.grad_norm;
      if (r.d_norm > dir_bound + kSlack * r.grad_norm)
        out.push_back({"lm1b_direction", k, r.d_norm, dir_bound});
    }

    if (sgm_rule) {
      // s_k >= 1/(mu alpha_max).
      const double s_bound = 1.0 / (constants.mu * constants.alpha_max);
      if (r.s < s_bound - kSlack * std::max(1.0, s_bound))
        out.push_back({"lm1a_s_lower", k, r.s, s_bound});
      // lm6(a): lambda_k >= (1-delta1)/((1+delta2 L/2) mu alpha_max).
      const double lam_min =
          (1.0 - constants.delta1) /
          ((1.0 + constants.delta2 * constants.L / 2.0) * constants.mu *
           constants.alpha_max);
      if (r.lambda < lam_min - 1e-12)
        out.push_back({"lm6a_lambda_lower", k, r.lambda, lam_min});
      // lm6(b): lambda_k <= 1/c_hat.
      if (std::isfinite(c_hat) && c_hat > 0.0 &&
          r.lambda > 1.0 / c_hat + kSlack)
        out.push_back({"lm6b_lambda_upper", k, r.lambda, 1.0 / c_hat});
    }

    if (i + 1 < tr.size()) {
      const auto& next = tr[i + 1];
      // lm2(a): f(x_{k+1}) <= T_k.
      if (next.f_val > r.T + kSlack * std::max(1.0, std::abs(r.T)))
        out.push_back({"lm2a_f_next_le_T", k, next.f_val, r.T});
      // lm2(c): T_{k+1} <= T_k.
      if (next.T > r.T + kSlack * std::max(1.0, std::abs(r.T)))
        out.push_back({"lm2c_T_monotone", k, next.T, r.T});
    }
  }
  return out;
}

std::vector<Violation> sufficient_decrease_check(const RunReport& report,
                                                 double zeta) {
  if (!(zeta > 0.0 && zeta < 1.0))
    throw ArgumentError("sufficient_decrease_check: zeta outside (0,1)");
  std::vector<Violation> out;
  const auto& tr = report.trace;
  for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
    const auto& r = tr[i];
    if (!is_full_step(r) || r.d_norm <= 0.0) continue;
    const double lhs = r.T - tr[i + 1].f_val;
    const double ratio = r.grad_dot_d / r.d_norm;
    const double rhs = zeta * ratio * ratio;
    if (lhs < rhs - kSlack * std::max(1.0, std::abs(rhs)))
      out.push_back({"lm3_sufficient_decrease", r.k, lhs, rhs});
  }
  return out;
}

ConstantsEstimate estimate_constants(const RunReport& report,
                                     const RunConstants& constants) {
  ConstantsEstimate est;
  est.zeta_hat = zeta_constant(constants.delta1, constants.delta2,
                               constants.beta, constants.L);
  double c_hat = std::numeric_limits<double>::infinity();
  for (const auto& r : report.trace)
    if (is_full_step(r) && r.grad_norm > 1e-14)
      c_hat = std::min(c_hat, -r.grad_dot_d / (r.grad_norm * r.grad_norm));
  est.c_hat = std::isfinite(c_hat) ? c_hat : 0.0;
  const double mu6 = std::pow(constants.mu, 6);
  est.kappa_hat = est.c_hat * est.c_hat * est.zeta_hat /
                  (mu6 * constants.alpha_max * constants.alpha_max);
  est.lambda_min_bound =
      (1.0 - constants.delta1) /
      ((1.0 + constants.delta2 * constants.L / 2.0) * constants.mu *
       constants.alpha_max);
  return est;
}

ErrorEstimateResult error_estimate_check(const RunReport& report,
                                         const RunConstants& constants) {
  ErrorEstimateResult res;
  const ConstantsEstimate est = estimate_constants(report, constants);
  res.c_hat = est.c_hat;
  res.kappa = est.kappa_hat;
  if (!(est.c_hat > 0.0)) {
    res.applicable = false;
    return res;
  }
  res.applicable = true;
  const double denom = est.kappa_hat * (1.0 - constants.eta_max);
  const auto& tr = report.trace;
  for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
    const auto& r = tr[i];
    if (!is_full_step(r)) continue;
    const double lhs = r.grad_norm * r.grad_norm;
    const double rhs = (r.T - tr[i + 1].T) / denom;
    if (lhs > rhs + kSlack * std::max(1.0, lhs))
      res.violations.push_back({"th1b_error_estimate", r.k, lhs, rhs});
  }
  return res;
}

RateFit fit_linear_rate(const RunReport& report, double f_star) {
  const double eps = std::numeric_limits<double>::epsilon();
  const double floor = 10.0 * eps * std::max(std::abs(f_star), 1e-300);
  std::vector<double> ks, logs;
  for (const auto& r : report.trace) {
    const double gap = r.f_val - f_star;
    if (gap > floor) {
      ks.push_back(static_cast<double>(r.k));
      logs.push_back(std::log(gap));
    }
  }
  if (ks.size() < 5)
    throw InsufficientData("fit_linear_rate: fewer than 5 usable iterations");

  const std::size_t n = ks.size();
  double mean_k = 0.0, mean_l = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_k += ks[i];
    mean_l += logs[i];
  }
  mean_k /= n;
  mean_l /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (ks[i] - mean_k) * (ks[i] - mean_k);
    sxy += (ks[i] - mean_k) * (logs[i] - mean_l);
    syy += (logs[i] - mean_l) * (logs[i] - mean_l);
  }
  RateFit fit;
  const double slope = sxy / sxx;
  fit.theta_hat = std::exp(slope);
  if (syy > 0.0) {
    const double ss_res = syy - sxy * sxy / sxx;
    fit.r_squared = 1.0 - ss_res / syy;
  } else {
    fit.r_squared = 0.0;  // constant data; no explainable variance
  }
  fit.k_begin = static_cast<int>(ks.front());
  fit.k_end = static_cast<int>(ks.back());
  return fit;
}

double strong_quasiconvexity_gap(const Objective& obj, double f_star, double L,
                                 double gamma,
                                 const std::vector<Vector>& points) {
  if (!(L > 0.0 && gamma > 0.0))
    throw ArgumentError("strong_quasiconvexity_gap: need L, gamma > 0");
  double worst = -std::numeric_limits<double>::infinity();
  const double factor = L / (gamma * gamma);
  for (const auto& x : points) {
    const double fx = obj.value(x);
    const double gsq = norm2_sq(obj.gradient(x));
    worst = std::max(worst, fx - f_star - factor * gsq);
  }
  return worst;
}

}  // namespace sgm
