#include "sgm/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "sgm/kernels.hpp"

namespace sgm {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw ArgumentError(msg);
}

double checked_band(double v, double lo, double hi, const char* what) {
  if (!(v >= lo && v <= hi))
    throw ArgumentError(std::string("schedule value outside its band: ") + what);
  return v;
}

}  // namespace

double Schedules::alpha_at(int k) const {
  return checked_band(alpha(k), alpha_min, alpha_max, "alpha");
}

double Schedules::eta_at(int k) const {
  return checked_band(eta(k), 0.0, eta_max, "eta");
}

double Schedules::mu_at(int k) const {
  return checked_band(mu(k), 1.0, mu_bar, "mu");
}

void Schedules::validate() const {
  require(static_cast<bool>(alpha) && static_cast<bool>(eta) &&
              static_cast<bool>(mu),
          "Schedules: missing schedule function");
  require(alpha_min > 0.0 && alpha_min <= alpha_max &&
              std::isfinite(alpha_max),
          "Schedules: need 0 < alpha_min <= alpha_max < inf");
  require(eta_max >= 0.0 && eta_max < 1.0,
          "Schedules: need 0 <= eta_max < 1");
  require(mu_bar >= 1.0, "Schedules: need mu_bar >= 1");
  require(lambda0 > 0.0, "Schedules: need lambda0 > 0");
}

Schedules paper_schedules(std::size_t n) {
  require(n >= 1, "paper_schedules: n must be positive");
  const double root = std::sqrt(static_cast<double>(n) + 1.0);
  const double a = 1.0 - 1.0 / root;
  const double mu_k = 1.0 + 1.0 / ((static_cast<double>(n) + 1.0) *
                                   (static_cast<double>(n) + 1.0));
  Schedules s;
  s.alpha = [a](int) { return a; };
  s.eta = [a](int) { return a; };
  s.mu = [mu_k](int) { return mu_k; };
  s.alpha_min = a;
  s.alpha_max = a;
  s.eta_max = a;
  s.mu_bar = 1.25;
  s.lambda0 = 1.0;
  return s;
}

ScalingRule ScalingRule::identity_rule() { return {}; }

ScalingRule ScalingRule::hessian(double regularization) {
  require(regularization >= 0.0, "ScalingRule: regularization must be >= 0");
  ScalingRule r;
  r.kind = Kind::hessian_metric;
  r.regularization = regularization;
  return r;
}

ScalingRule ScalingRule::hessian_direct_rule(double regularization) {
  require(regularization >= 0.0, "ScalingRule: regularization must be >= 0");
  ScalingRule r;
  r.kind = Kind::hessian_direct;
  r.regularization = regularization;
  return r;
}

ScalingRule ScalingRule::hessian_clipped(double lo, double hi) {
  require(lo > 0.0 && hi >= lo, "hessian_clipped: need 0 < lo <= hi");
  ScalingRule r;
  r.kind = Kind::hessian_clipped;
  r.lo = lo;
  r.hi = hi;
  return r;
}

ScalingRule ScalingRule::diagonal_hessian(double lo) {
  require(lo > 0.0, "diagonal_hessian: need lo > 0");
  ScalingRule r;
  r.kind = Kind::diagonal_hessian;
  r.lo = lo;
  return r;
}

ScalingRule ScalingRule::constant(Matrix m) {
  ScalingRule r;
  r.kind = Kind::constant_spd;
  r.fixed_matrix = std::move(m);
  return r;
}

const char* to_string(Status s) {
  switch (s) {
    case Status::converged_dnorm: return "converged_dnorm";
    case Status::converged_grad: return "converged_grad";
    case Status::max_iters: return "max_iters";
    case Status::linesearch_failure: return "linesearch_failure";
    case Status::numerical_error: return "numerical_error";
  }
  return "unknown";
}

const char* to_string(Method m) {
  switch (m) {
    case Method::SGM: return "SGM";
    case Method::YWH: return "YWH";
    case Method::ZH: return "ZH";
  }
  return "unknown";
}

double RunReport::final_f() const {
  require(!trace.empty(), "RunReport: empty trace");
  return trace.back().f_val;
}

double RunReport::final_grad_norm() const {
  require(!trace.empty(), "RunReport: empty trace");
  return trace.back().grad_norm;
}

namespace {

// max(lambda_max(D), 1/lambda_min(D)), inflated by 2% so that the power
// iteration estimates (which converge from below) never understate the
// effective band.
double effective_mu(const SpdMatrix& D) {
  const std::size_t n = D.dim();
  const double lmax = power_lambda_max(
      [&](const double* v, double* out) { matvec_into(D.entries(), v, out); },
      n, 80, 1e-10);
  const double lmax_inv = power_lambda_max(
      [&](const double* v, double* out) {
        Vector t(v, v + n);
        t = D.factor().solve(t);
        std::copy(t.begin(), t.end(), out);
      },
      n, 80, 1e-10);
  return std::max(1.0, 1.02 * std::max(lmax, lmax_inv));
}

// mat is either the scaling matrix D itself or, when is_metric is set,
// the projection metric H with D = H^{-1} (handled through H's factor,
// never an explicit inverse).
struct ScalingOutput {
  SpdMatrix mat;
  bool is_metric;
  double mu_eff;
  bool fell_back;
};

ScalingOutput make_scaling(const ScalingRule& rule, const Objective& obj,
                           const Vector& x) {
  switch (rule.kind) {
    case ScalingRule::Kind::identity: {
      SpdMatrix D = SpdMatrix::with_band(Matrix::identity(x.size()), 1.0);
      return {std::move(D), false, 1.0, false};
    }
    case ScalingRule::Kind::constant_spd: {
      SpdMatrix D = SpdMatrix::checked(*rule.fixed_matrix);
      const double mu = effective_mu(D);
      return {std::move(D), false, mu, false};
    }
    case ScalingRule::Kind::hessian_metric:
    case ScalingRule::Kind::hessian_direct: {
      const bool metric = rule.kind == ScalingRule::Kind::hessian_metric;
      Matrix H = symmetrized(obj.hessian(x));
      if (rule.regularization > 0.0)
        for (std::size_t i = 0; i < H.rows(); ++i)
          H(i, i) += rule.regularization;
      try {
        SpdMatrix D = SpdMatrix::checked(H);
        const double mu = effective_mu(D);
        return {std::move(D), metric, mu, false};
      } catch (const std::exception&) {
        // Indefinite Hessian: clip into an SPD band instead.
        double frob = 0.0;
        for (double v : H.data()) frob += v * v;
        const double hi = std::max(1e-6, std::sqrt(frob));
        SpdMatrix D = spectral_clip(H, 1e-6, hi);
        const double mu = effective_mu(D);
        return {std::move(D), metric, mu, true};
      }
    }
    case ScalingRule::Kind::hessian_clipped: {
      SpdMatrix D = spectral_clip(obj.hessian(x), rule.lo, rule.hi);
      const double mu = effective_mu(D);
      return {std::move(D), true, mu, false};
    }
    case ScalingRule::Kind::diagonal_hessian: {
      Matrix H = obj.hessian(x);
      Matrix D(x.size(), x.size());
      for (std::size_t i = 0; i < x.size(); ++i)
        D(i, i) = std::max(H(i, i), rule.lo);
      double dmax = 0.0;
      double dmin = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < x.size(); ++i) {
        dmax = std::max(dmax, D(i, i));
        dmin = std::min(dmin, D(i, i));
      }
      SpdMatrix spd = SpdMatrix::checked(std::move(D));
      return {std::move(spd), false, std::max(1.0, std::max(dmax, 1.0 / dmin)),
              false};
    }
  }
  throw ArgumentError("make_scaling: unknown rule");
}

bool scaling_is_constant(const ScalingRule& rule, const Objective& obj) {
  switch (rule.kind) {
    case ScalingRule::Kind::identity:
    case ScalingRule::Kind::constant_spd:
      return true;
    default:
      return obj.hessian_is_constant();
  }
}

RunReport run_method(Method method, const Objective& obj,
                     const FeasibleSet& set, Vector x0,
                     const SolverConfig& cfg) {
  cfg.schedules.validate();
  cfg.params.validate();
  require(cfg.max_iters >= 1, "SolverConfig: max_iters must be >= 1");
  require(cfg.stop_dnorm > 0.0 && cfg.stop_grad > 0.0,
          "SolverConfig: tolerances must be positive");
  require(x0.size() == set_dim(set), "solver: x0 dimension mismatch");
  require(obj.dim() == set_dim(set), "solver: objective dimension mismatch");

  RunReport report;
  report.method = method;
  report.alpha_max_used = cfg.schedules.alpha_max;
  report.eta_max_used = cfg.schedules.eta_max;

  if (!all_finite(x0)) {
    report.status = Status::numerical_error;
    report.error_message = "x0 has non-finite entries";
    report.final_x = std::move(x0);
    report.trace.push_back({});
    report.geometry.push_back({});
    return report;
  }
  if (!contains(set, x0, tol::membership)) {
    x0 = project_euclidean(set, x0);
    report.x0_projected = true;
  }

  const ScalingRule rule = (method == Method::ZH)
                               ? ScalingRule::identity_rule()
                               : cfg.scaling;
  const bool constant_scaling = scaling_is_constant(rule, obj);
  std::optional<ScalingOutput> cached_scaling;

  Vector x = std::move(x0);
  double fval;
  try {
    fval = obj.value(x);
  } catch (const std::exception& e) {
    report.status = Status::numerical_error;
    report.error_message = std::string("f(x0) evaluation failed: ") + e.what();
    report.final_x = std::move(x);
    report.trace.push_back({});
    report.geometry.push_back({});
    return report;
  }
  report.total_f_evals = 1;

  // Non-monotone references: scalar T for the modified rule, (C, Q) for
  // the averaging rule used by both baselines.
  double T = fval;
  AveragingRef avg{fval, 1.0};

  Vector proj_warm;
  double band_nu = std::numeric_limits<double>::quiet_NaN();

  // Trial objective for the line searches; out-of-domain trials count as
  // +inf so backtracking retreats into the domain.
  const ValueFn trial_f = [&](const Vector& y) {
    try {
      return obj.value(y);
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  report.status = Status::max_iters;
  for (int k = 0; k <= cfg.max_iters; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    IterationRecord rec;
    IterationGeometry geo;
    rec.k = k;
    rec.f_val = fval;
    rec.T = (method == Method::SGM) ? T : avg.C;

    try {
      const Vector g = obj.gradient(x);
      ++report.total_grad_evals;
      rec.grad_norm = norm2(g);

      const double alpha_k = cfg.schedules.alpha_at(k);
      geo.alpha = alpha_k;
      cfg.schedules.mu_at(k);  // band check of the emitted value

      if (constant_scaling && !cached_scaling)
        cached_scaling = make_scaling(rule, obj, x);
      ScalingOutput scaling =
          constant_scaling ? *cached_scaling : make_scaling(rule, obj, x);
      if (scaling.fell_back) ++report.scaling_fallbacks;
      geo.mu_eff = scaling.mu_eff;
      report.mu_eff_max = std::max(report.mu_eff_max, scaling.mu_eff);

      // y_k = P_{K, D^{-1}}(x - alpha D g). With a metric rule D = H^{-1},
      // so the step is a damped Newton step and the projection runs in the
      // H-norm; with the identity rule this is the Euclidean projection of
      // the plain gradient step.
      Vector z = x;
      if (rule.kind == ScalingRule::Kind::identity) {
        axpy_inplace(-alpha_k, g, z);
      } else if (scaling.is_metric) {
        Vector Dg = scaling.mat.factor().solve(g);
        axpy_inplace(-alpha_k, Dg, z);
      } else {
        Vector Dg = matvec(scaling.mat.entries(), g);
        axpy_inplace(-alpha_k, Dg, z);
      }
      ProjectionOptions popts;
      popts.warm_start = proj_warm.empty() ? nullptr : &proj_warm;
      popts.multiplier = &band_nu;
      ProjectionResult proj =
          scaling.is_metric
              ? project_scaled(set, z, scaling.mat, popts)
              : project_scaled_inverse_metric(set, z, scaling.mat, popts);
      Vector d = sub(proj.point, x);
      proj_warm = std::move(proj.point);

      rec.d_norm = norm2(d);
      rec.grad_dot_d = dot(g, d);
      if (rule.kind == ScalingRule::Kind::identity) {
        geo.d_invnorm_sq = rec.d_norm * rec.d_norm;
      } else if (scaling.is_metric) {
        geo.d_invnorm_sq = dnorm_sq(d, scaling.mat);
      } else {
        geo.d_invnorm_sq = std::max(0.0, dot(d, scaling.mat.factor().solve(d)));
      }

      // Termination tests, then the terminal record.
      const bool grad_stop = rec.grad_norm <= cfg.stop_grad;
      const bool dnorm_stop = rec.d_norm <= cfg.stop_dnorm * (1.0 + norm2(x));
      if (grad_stop || dnorm_stop || k == cfg.max_iters) {
        rec.wall_nanos = std::chrono::duration_cast<std::chrono::nanoseconds>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
        report.trace.push_back(rec);
        report.geometry.push_back(geo);
        report.status = grad_stop ? Status::converged_grad
                        : dnorm_stop ? Status::converged_dnorm
                                     : Status::max_iters;
        break;
      }

      StepResult step;
      const double eta_next = cfg.schedules.eta_at(k + 1);
      geo.eta_next = eta_next;
      if (method == Method::SGM) {
        SgmParams p = cfg.params;
        p.eta_max = cfg.schedules.eta_max;
        step = sgm_search(trial_f, x, d, rec.grad_dot_d, T, p);
        T = sgm_ref_update(T, step.f_new, eta_next, cfg.schedules.eta_max);
      } else {
        // Both baselines backtrack from a fixed trial step. The scaled
        // baseline starts at lambda0; the unscaled one applies the
        // step-size schedule to its trial as well.
        const double trial = (method == Method::ZH)
                                 ? cfg.schedules.lambda0 * alpha_k
                                 : cfg.schedules.lambda0;
        step = zh_search(trial_f, x, d, rec.grad_dot_d, avg.C,
                         cfg.params.delta1, cfg.params.beta, trial,
                         cfg.params.max_backtracks);
        zh_ref_update(avg, step.f_new, eta_next);
      }

      axpy_inplace(step.lambda, d, x);
      if (!all_finite(x) || !std::isfinite(step.f_new))
        throw NumericalError("iterate left the finite domain");
      fval = step.f_new;

      rec.lambda = step.lambda;
      rec.j = step.j;
      rec.s = step.s;
      rec.f_evals = step.f_evals;
      report.total_f_evals += step.f_evals;
      rec.wall_nanos = std::chrono::duration_cast<std::chrono::nanoseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
      report.trace.push_back(rec);
      report.geometry.push_back(geo);
    } catch (const NonDescentError& e) {
      report.status = Status::linesearch_failure;
      report.error_message = e.what();
      report.trace.push_back(rec);
      report.geometry.push_back(geo);
      break;
    } catch (const BacktrackExhausted& e) {
      report.status = Status::linesearch_failure;
      report.error_message = e.what();
      report.trace.push_back(rec);
      report.geometry.push_back(geo);
      break;
    } catch (const ArgumentError&) {
      throw;  // configuration bugs surface to the caller
    } catch (const std::exception& e) {
      report.status = Status::numerical_error;
      report.error_message = e.what();
      report.trace.push_back(rec);
      report.geometry.push_back(geo);
      break;
    }
  }

  report.final_x = std::move(x);
  return report;
}

}  // namespace

RunReport sgm_solve(const Objective& obj, const FeasibleSet& set, Vector x0,
                    const SolverConfig& cfg) {
  return run_method(Method::SGM, obj, set, std::move(x0), cfg);
}

RunReport ywh_solve(const Objective& obj, const FeasibleSet& set, Vector x0,
                    const SolverConfig& cfg) {
  return run_method(Method::YWH, obj, set, std::move(x0), cfg);
}

RunReport zh_solve(const Objective& obj, const FeasibleSet& set, Vector x0,
                   const SolverConfig& cfg) {
  return run_method(Method::ZH, obj, set, std::move(x0), cfg);
}

double stationarity_gap(const Objective& obj, const FeasibleSet& set,
                        const Vector& x, double alpha, const SpdMatrix& D) {
  require(alpha > 0.0, "stationarity_gap: alpha must be positive");
  Vector z = x;
  Vector Dg = matvec(D.entries(), obj.gradient(x));
  axpy_inplace(-alpha, Dg, z);
  ProjectionResult proj = project_scaled_inverse_metric(set, z, D);
  return norm2(sub(proj.point, x));
}

}  // namespace sgm
