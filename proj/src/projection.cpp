#include "sgm/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sgm/kernels.hpp"

namespace sgm {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw ArgumentError(msg);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

BoxSet::BoxSet(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  require(lower_.size() == upper_.size(), "BoxSet: bound dimension mismatch");
  require(all_finite(lower_) && all_finite(upper_), "BoxSet: bounds not finite");
  for (std::size_t i = 0; i < lower_.size(); ++i)
    require(lower_[i] <= upper_[i], "BoxSet: lower bound exceeds upper bound");
}

bool BoxSet::contains(const Vector& x, double tol) const {
  require(x.size() == dim(), "BoxSet::contains: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < lower_[i] - tol || x[i] > upper_[i] + tol) return false;
  return true;
}

Vector BoxSet::clamp(const Vector& x) const {
  require(x.size() == dim(), "BoxSet::clamp: dimension mismatch");
  Vector out(x.size());
  kernels::clamp(x.data(), lower_.data(), upper_.data(), out.data(), x.size());
  return out;
}

QuadraticBandSet::QuadraticBandSet(Matrix B, Vector b, double beta, double m,
                                   double M, std::optional<Vector> feasible_hint)
    : B_(std::move(B)), b_(std::move(b)), beta_(beta), m_(m), M_(M) {
  require(B_.square() && B_.rows() == b_.size(),
          "QuadraticBandSet: dimension mismatch");
  require(m_ < M_, "QuadraticBandSet: requires m < M");
  require(is_symmetric(B_), "QuadraticBandSet: B is not symmetric");

  SymmetricEigen eig = symmetric_eigen(B_);
  const double scale = std::max(1.0, std::abs(eig.values.back()));
  require(eig.values.front() >= -tol::invariant_slack * scale,
          "QuadraticBandSet: B is not positive semidefinite");
  lambda_max_B_ = std::max(0.0, eig.values.back());

  if (feasible_hint) {
    require(contains(*feasible_hint, tol::membership),
            "QuadraticBandSet: supplied feasible point is not feasible");
    feasible_ = std::move(*feasible_hint);
    return;
  }

  // Search for a feasible point, targeting the band midpoint.
  const double target = 0.5 * (m_ + M_);
  const std::size_t n = dim();
  const Vector zero(n, 0.0);
  if (beta_ >= m_ && beta_ <= M_) {
    feasible_ = zero;
    return;
  }
  Vector btilde(n);  // b in B's eigenbasis
  for (std::size_t i = 0; i < n; ++i)
    btilde[i] = kernels::dot(eig.vectors_rows.row(i), b_.data(), n);
  const double lam_tol = 1e-12 * std::max(1.0, lambda_max_B_);

  // Along a single eigendirection v_i, q(t v_i) = lam t^2/2 + btilde t + beta.
  for (std::size_t i = 0; i < n; ++i) {
    const double lam = eig.values[i];
    const double bt = btilde[i];
    double t = 0.0;
    if (lam <= lam_tol) {
      if (std::abs(bt) < 1e-14) continue;
      t = (target - beta_) / bt;
    } else {
      const double disc = bt * bt - 2.0 * lam * (beta_ - target);
      if (disc < 0.0) continue;
      t = (-bt + std::sqrt(disc)) / lam;
    }
    Vector cand(n);
    kernels::axpy(t, eig.vectors_rows.row(i), cand.data(), n);
    if (contains(cand, tol::membership)) {
      feasible_ = std::move(cand);
      return;
    }
  }

  // Walk from the unconstrained minimizer of q towards large q values and
  // bisect for the band midpoint.
  Vector zmin(n, 0.0);
  double qmin = beta_;
  for (std::size_t i = 0; i < n; ++i) {
    if (eig.values[i] > lam_tol) {
      const double zi = -btilde[i] / eig.values[i];
      kernels::axpy(zi, eig.vectors_rows.row(i), zmin.data(), n);
      qmin -= 0.5 * btilde[i] * btilde[i] / eig.values[i];
    }
  }
  if (qmin > M_ + tol::membership)
    throw ArgumentError("QuadraticBandSet: set is empty (min q above band)");
  if (qmin >= m_) {
    feasible_ = std::move(zmin);
    return;
  }
  // qmin < m: march along the top eigendirection until q exceeds the target.
  const double* vtop = eig.vectors_rows.row(n - 1);
  Vector hi_pt = zmin;
  double step = 1.0;
  for (int k = 0; k < 600 && q(hi_pt) < target; ++k) {
    kernels::axpy(step, vtop, hi_pt.data(), n);
    step *= 2.0;
  }
  if (q(hi_pt) < target)
    throw ArgumentError("QuadraticBandSet: could not certify nonemptiness");
  Vector lo_pt = std::move(zmin);
  for (int it = 0; it < 200; ++it) {
    Vector mid(n);
    for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (lo_pt[i] + hi_pt[i]);
    if (q(mid) < target)
      lo_pt = std::move(mid);
    else
      hi_pt = std::move(mid);
    if (contains(hi_pt, 0.0)) break;
  }
  require(contains(hi_pt, tol::membership),
          "QuadraticBandSet: could not certify nonemptiness");
  feasible_ = std::move(hi_pt);
}

double QuadraticBandSet::q(const Vector& x) const {
  require(x.size() == dim(), "QuadraticBandSet::q: dimension mismatch");
  Vector Bx(dim());
  matvec_into(B_, x.data(), Bx.data());
  return 0.5 * dot(x, Bx) + dot(b_, x) + beta_;
}

Vector QuadraticBandSet::grad_q(const Vector& x) const {
  Vector g = matvec(B_, x);
  axpy_inplace(1.0, b_, g);
  return g;
}

bool QuadraticBandSet::contains(const Vector& x, double tol) const {
  const double v = q(x);
  return v >= m_ - tol && v <= M_ + tol;
}

bool contains(const FeasibleSet& set, const Vector& x, double tol) {
  return std::visit([&](const auto& s) { return s.contains(x, tol); }, set);
}

std::size_t set_dim(const FeasibleSet& set) {
  return std::visit([](const auto& s) { return s.dim(); }, set);
}

// ---------------------------------------------------------------------------
// Box projection under a general metric: accelerated projected gradient on
// phi(y) = (y-x)' Metric (y-x) / 2 over the box, step 1/lambda_max(Metric).
// ---------------------------------------------------------------------------

namespace {

using MetricApply = std::function<void(const double*, double*)>;

ProjectionResult box_apg(const BoxSet& set, const Vector& x,
                         const MetricApply& apply, double metric_lambda_max,
                         const ProjectionOptions& opts) {
  const std::size_t n = set.dim();
  const double step = 1.0 / (metric_lambda_max * 1.01);

  Vector y_prev = set.clamp(opts.warm_start ? *opts.warm_start : x);
  Vector v = y_prev;
  Vector diff(n), g(n), trial(n), gy(n), fp(n);
  double t = 1.0;
  double psi_prev = kInf;
  double residual = kInf;

  for (int it = 1; it <= opts.max_inner; ++it) {
    for (std::size_t i = 0; i < n; ++i) diff[i] = v[i] - x[i];
    apply(diff.data(), g.data());
    for (std::size_t i = 0; i < n; ++i) trial[i] = v[i] - step * g[i];
    kernels::clamp(trial.data(), set.lower().data(), set.upper().data(),
                   trial.data(), n);

    for (std::size_t i = 0; i < n; ++i) diff[i] = trial[i] - x[i];
    apply(diff.data(), gy.data());
    const double psi = 0.5 * kernels::dot(diff.data(), gy.data(), n);

    for (std::size_t i = 0; i < n; ++i) fp[i] = trial[i] - gy[i];
    kernels::clamp(fp.data(), set.lower().data(), set.upper().data(), fp.data(),
                   n);
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      residual = std::max(residual, std::abs(trial[i] - fp[i]));
    if (residual <= opts.kkt_tol) return {std::move(trial), it, residual};

    if (psi > psi_prev) {
      v = trial;
      t = 1.0;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double mom = (t - 1.0) / t_next;
      for (std::size_t i = 0; i < n; ++i)
        v[i] = trial[i] + mom * (trial[i] - y_prev[i]);
      t = t_next;
    }
    y_prev = trial;
    psi_prev = psi;
  }
  throw ProjectionFailure("box projection: inner solver did not converge",
                          residual);
}

// ---------------------------------------------------------------------------
// Band projection. In whitened coordinates the problem is
//   minimize ||w||^2/2  s.t.  m <= q0 + c'w + w'Cw/2 <= M
// whose KKT system is (I + nu C) w = -nu c with a single multiplier nu on
// the active face. phi(nu) = q(w(nu)) is strictly decreasing, so the root
// is found by safeguarded Newton; phi' = -u'(I + nu C)^{-1} u is available
// from a second solve with the same factorization.
// ---------------------------------------------------------------------------

struct BandEval {
  double phi;
  double dphi;
  Vector u;  // (I + nu C)^{-1} c
};

std::optional<BandEval> band_eval(const Matrix& C, const Vector& c, double q0,
                                  double nu) {
  const std::size_t n = c.size();
  Matrix A = C;
  kernels::scal(nu, A.data().data(), A.data().size());
  for (std::size_t i = 0; i < n; ++i) A(i, i) += 1.0;
  auto chol = CholeskyFactor::try_compute(A);
  if (!chol) return std::nullopt;
  BandEval out;
  out.u = chol->solve(c);
  Vector z = chol->solve(out.u);
  const double cu = kernels::dot(c.data(), out.u.data(), n);
  const double uu = kernels::dot(out.u.data(), out.u.data(), n);
  out.phi = q0 - 0.5 * nu * (cu + uu);
  out.dphi = -kernels::dot(out.u.data(), z.data(), n);
  return out;
}

struct BandSolution {
  Vector w;
  double nu;
  int iters;
};

BandSolution band_multiplier_solve(const Matrix& C, const Vector& c, double q0,
                                   double m, double M,
                                   const ProjectionOptions& opts) {
  const std::size_t n = c.size();
  if (q0 >= m && q0 <= M) return {Vector(n, 0.0), 0.0, 0};

  const bool upper_face = q0 > M;
  const double target = upper_face ? M : m;
  const double tol_q = 1e-11 * (1.0 + std::abs(target));
  int evals = 0;

  double lo, hi;  // phi(lo) > target > phi(hi), lo < hi
  if (upper_face) {
    lo = 0.0;
    const double cc = std::max(norm2_sq(c), 1e-300);
    hi = 2.0 * (q0 - target) / cc;
    for (int k = 0; k < 400; ++k) {
      auto ev = band_eval(C, c, q0, hi);
      ++evals;
      if (!ev) throw ProjectionFailure("band projection: factorization failed",
                                       kInf);
      if (ev->phi < target) break;
      lo = hi;
      hi *= 4.0;
      if (k == 399)
        throw ProjectionFailure(
            "band projection: upper face unreachable (set empty?)",
            std::abs(ev->phi - target));
    }
  } else {
    hi = 0.0;
    const double lam_max = power_lambda_max(
        [&](const double* vv, double* out) { matvec_into(C, vv, out); }, n);
    double nu_crit = (lam_max > 1e-14) ? -1.0 / lam_max : -kInf;
    lo = kInf;  // marks "not found yet"
    if (!std::isfinite(nu_crit)) {
      // C is (numerically) zero: q is affine, root is analytic.
      const double cc = std::max(norm2_sq(c), 1e-300);
      lo = 2.0 * (q0 - target) / cc;  // negative
      auto ev = band_eval(C, c, q0, lo);
      ++evals;
      while (ev && ev->phi < target) {
        lo *= 4.0;
        ev = band_eval(C, c, q0, lo);
        ++evals;
      }
      if (!ev)
        throw ProjectionFailure("band projection: factorization failed", kInf);
    } else {
      double frac = 0.5;
      double best_phi = -kInf;
      for (int k = 0; k < 60; ++k) {
        const double cand = nu_crit * (1.0 - frac);
        auto ev = band_eval(C, c, q0, cand);
        ++evals;
        if (ev) {
          if (ev->phi > target) {
            lo = cand;
            break;
          }
          best_phi = std::max(best_phi, ev->phi);
          hi = std::min(hi, 0.0);
        }
        frac *= 0.5;
      }
      if (!std::isfinite(lo)) {
        // Hard case: c has no component on the top eigenspace, so phi
        // stays below the target as nu approaches -1/lambda_max. Move
        // along the top eigenvector from the limiting point instead.
        Vector ztop(n);
        {
          Vector v(n);
          for (std::size_t i = 0; i < n; ++i)
            v[i] = 1.0 + 0.5 * static_cast<double>(i % 7) / 7.0;
          kernels::scal(1.0 / norm2(v), v.data(), n);
          Vector tmp(n);
          for (int it = 0; it < 300; ++it) {
            matvec_into(C, v.data(), tmp.data());
            const double nrm = norm2(tmp);
            if (nrm == 0.0) break;
            kernels::scal(1.0 / nrm, tmp.data(), n);
            v.swap(tmp);
          }
          ztop = v;
        }
        const double nu_hat = nu_crit * (1.0 - 1e-9);
        auto ev = band_eval(C, c, q0, nu_hat);
        ++evals;
        if (!ev)
          throw ProjectionFailure("band projection: hard-case breakdown", kInf);
        Vector w = scaled(ev->u, -nu_hat);
        const double bcoef = dot(ev->u, ztop);
        const double disc = bcoef * bcoef - 2.0 * lam_max * (ev->phi - target);
        if (disc < 0.0)
          throw ProjectionFailure("band projection: hard-case breakdown",
                                  std::abs(ev->phi - target));
        const double r1 = (-bcoef + std::sqrt(disc)) / lam_max;
        const double r2 = (-bcoef - std::sqrt(disc)) / lam_max;
        const double t = (std::abs(r1) <= std::abs(r2)) ? r1 : r2;
        kernels::axpy(t, ztop.data(), w.data(), n);
        return {std::move(w), nu_hat, evals};
      }
    }
  }

  // Safeguarded Newton on phi(nu) = target within (lo, hi).
  double nu = 0.5 * (lo + hi);
  if (opts.multiplier && std::isfinite(*opts.multiplier) &&
      *opts.multiplier > lo && *opts.multiplier < hi)
    nu = *opts.multiplier;

  BandEval last{};
  double best_nu = nu;
  double best_gap = kInf;
  for (int it = 0; it < 200; ++it) {
    auto ev = band_eval(C, c, q0, nu);
    ++evals;
    if (!ev) {
      // Should not happen inside the bracket; bisect defensively.
      nu = 0.5 * (lo + hi);
      continue;
    }
    last = *ev;
    const double gap = ev->phi - target;
    if (std::abs(gap) < best_gap) {
      best_gap = std::abs(gap);
      best_nu = nu;
    }
    if (std::abs(gap) <= tol_q) break;
    if (gap > 0.0)
      lo = nu;
    else
      hi = nu;
    double next = nu - gap / ev->dphi;
    if (!std::isfinite(next) || next <= lo || next >= hi)
      next = 0.5 * (lo + hi);
    if (std::abs(next - nu) <= 1e-17 * (1.0 + std::abs(nu))) {
      nu = next;
      break;
    }
    nu = next;
    if (evals >= opts.max_inner)
      throw ProjectionFailure("band projection: multiplier solve stalled",
                              best_gap);
  }
  if (std::abs(last.phi - target) > best_gap) {
    auto ev = band_eval(C, c, q0, best_nu);
    ++evals;
    if (ev) {
      last = *ev;
      nu = best_nu;
    }
  }
  Vector w = scaled(last.u, -nu);
  if (opts.multiplier) *opts.multiplier = nu;
  return {std::move(w), nu, evals};
}

enum class MetricKind { explicit_matrix, inverse_of, euclidean };

bool is_identity(const Matrix& A) {
  if (!is_diagonal(A)) return false;
  for (std::size_t i = 0; i < A.rows(); ++i)
    if (A(i, i) != 1.0) return false;
  return true;
}

// Shared driver for all band projections: builds the whitened data for the
// requested metric, solves for the multiplier, maps back and evaluates the
// KKT residual in the original space.
ProjectionResult band_project(const QuadraticBandSet& set, const Vector& x,
                              MetricKind kind, const SpdMatrix* metric,
                              const ProjectionOptions& opts) {
  require(x.size() == set.dim(), "band projection: dimension mismatch");
  const std::size_t n = set.dim();
  if (set.contains(x, 0.0)) return {x, 0, 0.0};

  const Matrix& B = set.quadratic();
  const Vector grad_x = set.grad_q(x);
  const double q0 = set.q(x);

  Matrix C;
  Vector c;
  const CholeskyFactor* F = metric ? &metric->factor() : nullptr;
  switch (kind) {
    case MetricKind::euclidean:
      C = B;
      c = grad_x;
      break;
    case MetricKind::explicit_matrix: {
      // C = L^{-1} B L^{-T}, c = L^{-1} grad.
      c = grad_x;
      F->forward_solve(c);
      Matrix G(n, n);  // G = B L^{-T} built row-wise
      Vector colbuf(n);
      for (std::size_t j = 0; j < n; ++j) {
        std::copy(B.row(j), B.row(j) + n, colbuf.begin());
        F->forward_solve(colbuf);
        std::copy(colbuf.begin(), colbuf.end(), G.row(j));
      }
      C = Matrix(n, n);
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) colbuf[i] = G(i, j);
        F->forward_solve(colbuf);
        std::copy(colbuf.begin(), colbuf.end(), C.row(j));
      }
      C = symmetrized(C);
      break;
    }
    case MetricKind::inverse_of: {
      // Metric is S^{-1} with S = L L^T: C = L' B L, c = L' grad.
      c = F->lower_transpose_apply(grad_x);
      C = symmetrized(matmul(transpose(F->lower()), matmul(B, F->lower())));
      break;
    }
  }

  BandSolution sol = band_multiplier_solve(C, c, q0, set.band_lower(),
                                           set.band_upper(), opts);

  Vector y = x;
  switch (kind) {
    case MetricKind::euclidean:
      axpy_inplace(1.0, sol.w, y);
      break;
    case MetricKind::explicit_matrix: {
      Vector t = sol.w;
      F->backward_solve(t);  // L^{-T} w
      axpy_inplace(1.0, t, y);
      break;
    }
    case MetricKind::inverse_of: {
      Vector t = F->lower_apply(sol.w);
      axpy_inplace(1.0, t, y);
      break;
    }
  }

  // KKT residual in the original space: Metric (y-x) + nu grad q(y) = 0
  // plus band membership.
  Vector step = sub(y, x);
  Vector metric_step;
  switch (kind) {
    case MetricKind::euclidean:
      metric_step = step;
      break;
    case MetricKind::explicit_matrix:
      metric_step = matvec(metric->entries(), step);
      break;
    case MetricKind::inverse_of:
      metric_step = F->solve(step);
      break;
  }
  Vector grad_y = set.grad_q(y);
  axpy_inplace(sol.nu, grad_y, metric_step);
  const double stat = norm_inf(metric_step);
  const double qy = set.q(y);
  const double mem =
      std::max({0.0, qy - set.band_upper(), set.band_lower() - qy});
  const double scale = std::max(1.0, norm_inf(grad_y) * std::abs(sol.nu));
  const double residual = std::max(stat / scale, mem);
  if (residual > opts.kkt_tol)
    throw ProjectionFailure("band projection: KKT residual above tolerance",
                            residual);
  return {std::move(y), sol.iters, residual};
}

}  // namespace

ProjectionResult project_scaled(const BoxSet& set, const Vector& x,
                                const SpdMatrix& D,
                                const ProjectionOptions& opts) {
  require(x.size() == set.dim() && D.dim() == set.dim(),
          "project_scaled: dimension mismatch");
  if (set.contains(x, 0.0)) return {x, 0, 0.0};
  if (is_diagonal(D.entries())) return {set.clamp(x), 0, 0.0};
  const double lmax = power_lambda_max(
      [&](const double* v, double* out) { matvec_into(D.entries(), v, out); },
      set.dim());
  return box_apg(
      set, x,
      [&](const double* v, double* out) { matvec_into(D.entries(), v, out); },
      lmax, opts);
}

ProjectionResult project_scaled(const QuadraticBandSet& set, const Vector& x,
                                const SpdMatrix& D,
                                const ProjectionOptions& opts) {
  require(D.dim() == set.dim(), "project_scaled: dimension mismatch");
  if (is_identity(D.entries()))
    return band_project(set, x, MetricKind::euclidean, nullptr, opts);
  return band_project(set, x, MetricKind::explicit_matrix, &D, opts);
}

ProjectionResult project_scaled(const FeasibleSet& set, const Vector& x,
                                const SpdMatrix& D,
                                const ProjectionOptions& opts) {
  return std::visit(
      [&](const auto& s) { return project_scaled(s, x, D, opts); }, set);
}

ProjectionResult project_scaled_inverse_metric(const FeasibleSet& set,
                                               const Vector& x,
                                               const SpdMatrix& S,
                                               const ProjectionOptions& opts) {
  require(S.dim() == set_dim(set),
          "project_scaled_inverse_metric: dimension mismatch");
  if (const auto* box = std::get_if<BoxSet>(&set)) {
    require(x.size() == box->dim(),
            "project_scaled_inverse_metric: dimension mismatch");
    if (box->contains(x, 0.0)) return {x, 0, 0.0};
    if (is_diagonal(S.entries())) return {box->clamp(x), 0, 0.0};
    // Metric S^{-1}: its largest eigenvalue is 1/lambda_min(S), reached by
    // power iteration on the solve operator.
    const double lmax = power_lambda_max(
        [&](const double* v, double* out) {
          Vector t(v, v + box->dim());
          t = S.factor().solve(t);
          std::copy(t.begin(), t.end(), out);
        },
        box->dim());
    return box_apg(
        *box, x,
        [&](const double* v, double* out) {
          Vector t(v, v + box->dim());
          t = S.factor().solve(t);
          std::copy(t.begin(), t.end(), out);
        },
        lmax, opts);
  }
  const auto& band = std::get<QuadraticBandSet>(set);
  if (is_identity(S.entries()))
    return band_project(band, x, MetricKind::euclidean, nullptr, opts);
  return band_project(band, x, MetricKind::inverse_of, &S, opts);
}

ProjectionResult project_euclidean_result(const FeasibleSet& set,
                                          const Vector& x,
                                          const ProjectionOptions& opts) {
  if (const auto* box = std::get_if<BoxSet>(&set)) return {box->clamp(x), 0, 0.0};
  const auto& band = std::get<QuadraticBandSet>(set);
  return band_project(band, x, MetricKind::euclidean, nullptr, opts);
}

Vector project_euclidean(const FeasibleSet& set, const Vector& x) {
  return project_euclidean_result(set, x).point;
}

}  // namespace sgm
