#include "sgm/objectives.hpp"

#include <cmath>
#include <random>

#include "sgm/kernels.hpp"

namespace sgm {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw ArgumentError(msg);
}

// out += s * (a b' + b a')
void add_symmetric_outer(Matrix& out, double s, const Vector& a,
                         const Vector& b) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    kernels::axpy(s * a[i], b.data(), out.row(i), n);
    kernels::axpy(s * b[i], a.data(), out.row(i), n);
  }
}

double quadratic_form(const Matrix& A, const Vector& lin, double c0,
                      const Vector& x) {
  Vector Ax(x.size());
  matvec_into(A, x.data(), Ax.data());
  return 0.5 * dot(x, Ax) + dot(lin, x) + c0;
}

}  // namespace

Matrix Objective::hessian(const Vector&) const {
  throw ArgumentError("objective: no Hessian available");
}

ObjectiveReport Objective::evaluate(const Vector& x, bool want_hessian) const {
  ObjectiveReport r;
  r.value = value(x);
  r.gradient = gradient(x);
  if (want_hessian && has_hessian()) r.hessian = hessian(x);
  if (!std::isfinite(r.value) || !all_finite(r.gradient) ||
      (r.hessian && !all_finite(r.hessian->data())))
    throw NumericalError("objective evaluation produced non-finite entries");
  return r;
}

FractionalQuadratic::FractionalQuadratic(Matrix P, Vector p, double p0,
                                         Matrix Q, Vector q, double q0)
    : P_(std::move(P)), Q_(std::move(Q)), p_(std::move(p)), q_(std::move(q)),
      p0_(p0), q0_(q0) {
  require(P_.square() && Q_.square(), "FractionalQuadratic: matrices not square");
  require(P_.rows() == p_.size() && Q_.rows() == q_.size() &&
              p_.size() == q_.size(),
          "FractionalQuadratic: dimension mismatch");
  require(is_symmetric(P_) && is_symmetric(Q_),
          "FractionalQuadratic: matrices must be symmetric");
}

FractionalQuadratic FractionalQuadratic::ratio_form(const Matrix& W,
                                                    const Vector& w1, double v1,
                                                    const Vector& w2,
                                                    double v2) {
  Matrix P = W;
  kernels::scal(2.0, P.data().data(), P.data().size());
  Matrix Q(W.rows(), W.cols());
  return FractionalQuadratic(std::move(P), w1, v1, std::move(Q), w2, v2);
}

double FractionalQuadratic::numerator(const Vector& x) const {
  return quadratic_form(P_, p_, p0_, x);
}

double FractionalQuadratic::denominator(const Vector& x) const {
  return quadratic_form(Q_, q_, q0_, x);
}

double FractionalQuadratic::denominator_checked(const Vector& x) const {
  const double d = denominator(x);
  if (std::abs(d) < 1e-12)
    throw DomainError("FractionalQuadratic: denominator below threshold");
  return d;
}

double FractionalQuadratic::value(const Vector& x) const {
  require(x.size() == dim(), "FractionalQuadratic: dimension mismatch");
  return numerator(x) / denominator_checked(x);
}

Vector FractionalQuadratic::gradient(const Vector& x) const {
  require(x.size() == dim(), "FractionalQuadratic: dimension mismatch");
  const double den = denominator_checked(x);
  const double num = numerator(x);
  Vector gp = matvec(P_, x);
  axpy_inplace(1.0, p_, gp);
  Vector gq = matvec(Q_, x);
  axpy_inplace(1.0, q_, gq);
  // (den*gp - num*gq)/den^2
  kernels::scal(1.0 / den, gp.data(), gp.size());
  axpy_inplace(-num / (den * den), gq, gp);
  return gp;
}

Matrix FractionalQuadratic::hessian(const Vector& x) const {
  require(x.size() == dim(), "FractionalQuadratic: dimension mismatch");
  const double den = denominator_checked(x);
  const double num = numerator(x);
  Vector gp = matvec(P_, x);
  axpy_inplace(1.0, p_, gp);
  Vector gq = matvec(Q_, x);
  axpy_inplace(1.0, q_, gq);

  const std::size_t n = dim();
  Matrix H(n, n);
  // P/den - num Q/den^2 - (gp gq' + gq gp')/den^2 + 2 num (gq gq')/den^3
  const double id = 1.0 / den;
  const double id2 = id * id;
  for (std::size_t i = 0; i < n; ++i) {
    kernels::axpy(id, P_.row(i), H.row(i), n);
    kernels::axpy(-num * id2, Q_.row(i), H.row(i), n);
  }
  add_symmetric_outer(H, -id2, gp, gq);
  add_symmetric_outer(H, num * id2 * id, gq, gq);
  return H;
}

Matrix FractionalQuadratic::hessian_gform(const Vector& x) const {
  require(x.size() == dim(), "FractionalQuadratic: dimension mismatch");
  const double den = denominator_checked(x);
  const double num = numerator(x);
  Vector gp = matvec(P_, x);
  axpy_inplace(1.0, p_, gp);
  Vector gq = matvec(Q_, x);
  axpy_inplace(1.0, q_, gq);
  // g = grad p - (num/den) grad q
  Vector g = gp;
  axpy_inplace(-num / den, gq, g);

  const std::size_t n = dim();
  Matrix H(n, n);
  const double id = 1.0 / den;
  const double id2 = id * id;
  // (den P - num Q)/den^2 - (g gq' + gq g')/den^2
  for (std::size_t i = 0; i < n; ++i) {
    kernels::axpy(id, P_.row(i), H.row(i), n);
    kernels::axpy(-num * id2, Q_.row(i), H.row(i), n);
  }
  add_symmetric_outer(H, -id2, g, gq);
  return H;
}

BoxQuadratic::BoxQuadratic(Matrix V, Matrix W, Vector p)
    : V_(std::move(V)), W_(std::move(W)), p_(std::move(p)) {
  require(V_.square() && W_.square() && V_.rows() == p_.size() &&
              W_.rows() == p_.size(),
          "BoxQuadratic: dimension mismatch");
  require(is_symmetric(V_) && is_symmetric(W_),
          "BoxQuadratic: matrices must be symmetric");
  if (!CholeskyFactor::try_compute(V_) || !CholeskyFactor::try_compute(W_))
    throw ArgumentError("BoxQuadratic: V and W must be positive definite");
  SymmetricEigen ev = symmetric_eigen(V_, /*want_vectors=*/false);
  gamma_ = ev.values.front();
  lambda_max_ = ev.values.back();
  require(gamma_ > 0.0, "BoxQuadratic: V must be positive definite");
  Wp_ = matvec(W_, p_);
}

double BoxQuadratic::value(const Vector& x) const {
  require(x.size() == dim(), "BoxQuadratic: dimension mismatch");
  Vector Vx(dim());
  matvec_into(V_, x.data(), Vx.data());
  Vector Vp(dim());
  matvec_into(V_, p_.data(), Vp.data());
  return dot(x, Vx) - dot(p_, Vp) + dot(Wp_, sub(x, p_));
}

Vector BoxQuadratic::gradient(const Vector& x) const {
  require(x.size() == dim(), "BoxQuadratic: dimension mismatch");
  Vector g = matvec(V_, x);
  kernels::scal(2.0, g.data(), g.size());
  axpy_inplace(1.0, Wp_, g);
  return g;
}

Matrix BoxQuadratic::hessian(const Vector&) const {
  Matrix H = V_;
  kernels::scal(2.0, H.data().data(), H.data().size());
  return H;
}

CallbackObjective::CallbackObjective(std::size_t n,
                                     std::function<double(const Vector&)> value,
                                     std::function<Vector(const Vector&)> gradient,
                                     std::function<Matrix(const Vector&)> hessian)
    : n_(n), value_(std::move(value)), gradient_(std::move(gradient)),
      hessian_(std::move(hessian)) {
  require(n_ > 0 && value_ && gradient_, "CallbackObjective: missing callbacks");
}

Matrix CallbackObjective::hessian(const Vector& x) const {
  if (!hessian_) throw ArgumentError("CallbackObjective: no Hessian callback");
  return hessian_(x);
}

double check_gradient(const Objective& f, const Vector& x, double h) {
  require(h > 0.0, "check_gradient: h must be positive");
  const Vector g = f.gradient(x);
  const double scale = std::max(1.0, norm_inf(g));
  double worst = 0.0;
  Vector xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double fp = f.value(xp);
    xp[i] = x[i] - h;
    const double fm = f.value(xp);
    xp[i] = x[i];
    worst = std::max(worst, std::abs((fp - fm) / (2.0 * h) - g[i]) / scale);
  }
  return worst;
}

double check_hessian(const Objective& f, const Vector& x, double h,
                     int directions, std::uint64_t seed) {
  require(h > 0.0, "check_hessian: h must be positive");
  const Matrix H = f.hessian(x);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int d = 0; d < directions; ++d) {
    Vector v(x.size());
    for (auto& e : v) e = normal(gen);
    kernels::scal(1.0 / norm2(v), v.data(), v.size());
    Vector xp = x;
    axpy_inplace(h, v, xp);
    Vector gp = f.gradient(xp);
    Vector xm = x;
    axpy_inplace(-h, v, xm);
    Vector gm = f.gradient(xm);
    Vector hv = matvec(H, v);
    const double scale = std::max(1.0, norm_inf(hv));
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double fd = (gp[i] - gm[i]) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - hv[i]) / scale);
    }
  }
  return worst;
}

std::vector<Vector> sample_feasible_points(const FeasibleSet& set, int count,
                                           std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<Vector> out;
  out.reserve(count);
  if (const auto* box = std::get_if<BoxSet>(&set)) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < count; ++k) {
      Vector x(box->dim());
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = unit(gen);
        x[i] = box->lower()[i] + t * (box->upper()[i] - box->lower()[i]);
      }
      out.push_back(std::move(x));
    }
    return out;
  }
  const auto& band = std::get<QuadraticBandSet>(set);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double radius = 1.0 + norm_inf(band.feasible_point());
  FeasibleSet wrapped = band;
  for (int k = 0; k < count; ++k) {
    Vector x = band.feasible_point();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += radius * normal(gen);
    out.push_back(project_euclidean(wrapped, x));
  }
  return out;
}

double lipschitz_estimate(const Objective& f, const FeasibleSet& set,
                          int samples, std::uint64_t seed) {
  if (f.hessian_is_constant()) {
    const Matrix H = f.hessian(Vector(f.dim(), 0.0));
    const double l2 = std::sqrt(power_lambda_max(
        [&](const double* v, double* out) {
          Vector t(f.dim());
          matvec_into(H, v, t.data());
          matvec_into(H, t.data(), out);
        },
        f.dim()));
    if (const auto* bq = dynamic_cast<const BoxQuadratic*>(&f))
      return std::max(l2, bq->lipschitz());
    return l2;
  }
  double best = 0.0;
  for (const Vector& x : sample_feasible_points(set, samples, seed)) {
    Matrix H;
    try {
      H = f.hessian(x);
    } catch (const DomainError&) {
      continue;  // sample fell outside the objective's domain
    }
    // ||H||_2 from power iteration on H^2 (robust for indefinite H).
    const double l2sq = power_lambda_max(
        [&](const double* v, double* out) {
          Vector t(f.dim());
          matvec_into(H, v, t.data());
          matvec_into(H, t.data(), out);
        },
        f.dim(), 80);
    best = std::max(best, std::sqrt(std::max(0.0, l2sq)));
  }
  return best;
}

}  // namespace sgm
