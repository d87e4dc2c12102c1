#include "sgm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "sgm/kernels.hpp"

namespace sgm {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw ArgumentError(msg);
}

}  // namespace

bool all_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

double dot(const Vector& x, const Vector& y) {
  require(x.size() == y.size(), "dot: dimension mismatch");
  return kernels::dot(x.data(), y.data(), x.size());
}

double norm2_sq(const Vector& x) {
  return kernels::dot(x.data(), x.data(), x.size());
}

double norm2(const Vector& x) { return std::sqrt(norm2_sq(x)); }

double norm_inf(const Vector& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

void axpy_inplace(double a, const Vector& x, Vector& y) {
  require(x.size() == y.size(), "axpy: dimension mismatch");
  kernels::axpy(a, x.data(), y.data(), x.size());
}

Vector scaled(const Vector& x, double a) {
  Vector out = x;
  kernels::scal(a, out.data(), out.size());
  return out;
}

Vector add(const Vector& x, const Vector& y) {
  Vector out = x;
  axpy_inplace(1.0, y, out);
  return out;
}

Vector sub(const Vector& x, const Vector& y) {
  Vector out = x;
  axpy_inplace(-1.0, y, out);
  return out;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector matvec(const Matrix& A, const Vector& x) {
  require(A.cols() == x.size(), "matvec: dimension mismatch");
  Vector y(A.rows());
  matvec_into(A, x.data(), y.data());
  return y;
}

void matvec_into(const Matrix& A, const double* x, double* y) {
  for (std::size_t i = 0; i < A.rows(); ++i)
    y[i] = kernels::dot(A.row(i), x, A.cols());
}

Matrix matmul(const Matrix& A, const Matrix& B) {
  require(A.cols() == B.rows(), "matmul: dimension mismatch");
  Matrix C(A.rows(), B.cols());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double* ci = C.row(i);
    for (std::size_t k = 0; k < A.cols(); ++k)
      kernels::axpy(A(i, k), B.row(k), ci, B.cols());
  }
  return C;
}

Matrix transpose(const Matrix& A) {
  Matrix T(A.cols(), A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) T(j, i) = A(i, j);
  return T;
}

Matrix symmetrized(const Matrix& A) {
  require(A.square(), "symmetrized: matrix not square");
  Matrix S(A.rows(), A.cols());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j)
      S(i, j) = 0.5 * (A(i, j) + A(j, i));
  return S;
}

bool is_symmetric(const Matrix& A, double rel_tol) {
  if (!A.square()) return false;
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = i + 1; j < A.cols(); ++j) {
      const double d = std::abs(A(i, j) - A(j, i));
      if (d > rel_tol * std::max(1.0, std::abs(A(i, j)))) return false;
    }
  return true;
}

double max_abs(const Matrix& A) {
  double m = 0.0;
  for (double v : A.data()) m = std::max(m, std::abs(v));
  return m;
}

bool is_diagonal(const Matrix& A) {
  if (!A.square()) return false;
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j)
      if (i != j && A(i, j) != 0.0) return false;
  return true;
}

CholeskyFactor CholeskyFactor::compute(const Matrix& A) {
  auto f = try_compute(A);
  if (!f) throw NumericalError("Cholesky: matrix is not positive definite");
  return std::move(*f);
}

std::optional<CholeskyFactor> CholeskyFactor::try_compute(const Matrix& A) {
  if (!A.square()) throw ArgumentError("Cholesky: matrix not square");
  const std::size_t n = A.rows();
  Matrix L(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double s = kernels::dot(L.row(i), L.row(j), j);
      L(i, j) = (A(i, j) - s) / L(j, j);
    }
    const double d = A(i, i) - kernels::dot(L.row(i), L.row(i), i);
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    L(i, i) = std::sqrt(d);
  }
  return CholeskyFactor(std::move(L));
}

void CholeskyFactor::forward_solve(Vector& v) const {
  const std::size_t n = dim();
  for (std::size_t i = 0; i < n; ++i) {
    const double s = kernels::dot(L_.row(i), v.data(), i);
    v[i] = (v[i] - s) / L_(i, i);
  }
}

void CholeskyFactor::backward_solve(Vector& v) const {
  const std::size_t n = dim();
  for (std::size_t jj = n; jj-- > 0;) {
    v[jj] /= L_(jj, jj);
    kernels::axpy(-v[jj], L_.row(jj), v.data(), jj);
  }
}

Vector CholeskyFactor::solve(const Vector& v) const {
  require(v.size() == dim(), "Cholesky solve: dimension mismatch");
  Vector w = v;
  forward_solve(w);
  backward_solve(w);
  return w;
}

Vector CholeskyFactor::lower_apply(const Vector& v) const {
  require(v.size() == dim(), "lower_apply: dimension mismatch");
  Vector y(dim());
  for (std::size_t i = 0; i < dim(); ++i)
    y[i] = kernels::dot(L_.row(i), v.data(), i + 1);
  return y;
}

Vector CholeskyFactor::lower_transpose_apply(const Vector& v) const {
  require(v.size() == dim(), "lower_transpose_apply: dimension mismatch");
  Vector y(dim(), 0.0);
  for (std::size_t i = 0; i < dim(); ++i)
    kernels::axpy(v[i], L_.row(i), y.data(), i + 1);
  return y;
}

Matrix SymmetricEigen::reassemble(const Vector& new_values) const {
  const std::size_t n = values.size();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = vectors_rows.row(i);
    for (std::size_t a = 0; a < n; ++a)
      kernels::axpy(new_values[i] * r[a], r, out.row(a), n);
  }
  return out;
}

SymmetricEigen jacobi_eigen(const Matrix& M, int max_sweeps) {
  Matrix A = symmetrized(M);
  const std::size_t n = A.rows();
  Matrix R = Matrix::identity(n);

  double frob = 0.0;
  for (double v : A.data()) frob += v * v;
  frob = std::sqrt(frob);
  const double stop = 1e-14 * std::max(frob, 1e-300);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * A(i, j) * A(i, j);
    if (std::sqrt(off) <= stop) break;
    if (sweep == max_sweeps - 1)
      throw NumericalError("jacobi_eigen: did not converge");

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double tau = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0)
                             ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                             : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        kernels::rot(A.row(p), A.row(q), c, s, n);
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = A(i, p);
          const double aiq = A(i, q);
          A(i, p) = c * aip - s * aiq;
          A(i, q) = s * aip + c * aiq;
        }
        // Pivot is analytically zero after the rotation.
        A(p, q) = 0.0;
        A(q, p) = 0.0;
        kernels::rot(R.row(p), R.row(q), c, s, n);
      }
    }
  }

  SymmetricEigen out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = A(i, i);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.values[a] < out.values[b];
  });
  Vector sorted(n);
  Matrix rows(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    sorted[i] = out.values[order[i]];
    std::copy(R.row(order[i]), R.row(order[i]) + n, rows.row(i));
  }
  out.values = std::move(sorted);
  out.vectors_rows = std::move(rows);
  return out;
}

namespace {

// Reduces the symmetric matrix held in W (lower triangle) to tridiagonal
// form. Householder vectors are left in the strict lower rows of W with
// their scaling in hs; d and e receive the diagonal and sub-diagonal.
void householder_tridiagonalize(Matrix& W, Vector& d, Vector& e, Vector& hs) {
  const std::size_t n = W.rows();
  Vector p(n), q(n);
  for (std::size_t i = n; i-- > 1;) {
    const std::size_t l = i - 1;
    hs[i] = 0.0;
    if (l == 0) {
      e[i] = W(i, 0);
      continue;
    }
    double scale = 0.0;
    for (std::size_t k = 0; k <= l; ++k) scale += std::abs(W(i, k));
    if (scale == 0.0) {
      e[i] = W(i, l);
      continue;
    }
    double* u = W.row(i);
    kernels::scal(1.0 / scale, u, l + 1);
    const double sigma = kernels::dot(u, u, l + 1);
    const double f = u[l];
    const double g = (f >= 0.0) ? -std::sqrt(sigma) : std::sqrt(sigma);
    e[i] = scale * g;
    const double h = sigma - f * g;
    u[l] = f - g;
    hs[i] = h;

    // p = (leading block) * u / h, reading the lower triangle only.
    std::fill(p.begin(), p.begin() + l + 1, 0.0);
    for (std::size_t j = 0; j <= l; ++j) {
      p[j] += kernels::dot(W.row(j), u, j + 1);
      kernels::axpy(u[j], W.row(j), p.data(), j);
    }
    kernels::scal(1.0 / h, p.data(), l + 1);
    const double K = kernels::dot(u, p.data(), l + 1) / (2.0 * h);
    for (std::size_t j = 0; j <= l; ++j) q[j] = p[j] - K * u[j];
    for (std::size_t j = 0; j <= l; ++j) {
      kernels::axpy(-q[j], u, W.row(j), j + 1);
      kernels::axpy(-u[j], q.data(), W.row(j), j + 1);
    }
  }
  for (std::size_t k = 0; k < n; ++k) d[k] = W(k, k);
  e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal (d, e); accumulates the plane
// rotations into the rows of Zt when present.
void tridiagonal_ql(Vector& d, Vector& e, Matrix* Zt) {
  const std::size_t n = d.size();
  if (n <= 1) return;
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();

  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    while (true) {
      std::size_t m = l;
      while (m + 1 < n &&
             std::abs(e[m]) > eps * (std::abs(d[m]) + std::abs(d[m + 1])))
        ++m;
      if (m == l) break;
      if (++iter > 50)
        throw NumericalError("symmetric_eigen: QL did not converge");

      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double pshift = 0.0;
      bool underflow = false;
      for (std::size_t i = m; i-- > l;) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= pshift;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - pshift;
        r = (d[i] - g) * s + 2.0 * c * b;
        pshift = s * r;
        d[i + 1] = g + pshift;
        g = c * r - b;
        if (Zt) kernels::rot(Zt->row(i), Zt->row(i + 1), c, s, n);
      }
      if (underflow) continue;
      d[l] -= pshift;
      e[l] = g;
      e[m] = 0.0;
    }
  }
}

}  // namespace

SymmetricEigen symmetric_eigen(const Matrix& A, bool want_vectors) {
  Matrix W = symmetrized(A);
  const std::size_t n = W.rows();
  Vector d(n, 0.0), e(n, 0.0), hs(n, 0.0);
  if (n == 0) return {};
  householder_tridiagonalize(W, d, e, hs);

  Matrix Zt;
  if (want_vectors) Zt = Matrix::identity(n);
  tridiagonal_ql(d, e, want_vectors ? &Zt : nullptr);

  if (want_vectors) {
    // Back-transform: each eigenvector v of the tridiagonal becomes
    // H_1 H_2 ... H_{n-1} v using the stored Householder vectors.
    for (std::size_t i = 1; i < n; ++i) {
      if (hs[i] == 0.0) continue;
      const double* u = W.row(i);
      for (std::size_t v = 0; v < n; ++v) {
        const double t = kernels::dot(u, Zt.row(v), i) / hs[i];
        kernels::axpy(-t, u, Zt.row(v), i);
      }
    }
  }

  SymmetricEigen out;
  out.values = std::move(d);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.values[a] < out.values[b];
  });
  Vector sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = out.values[order[i]];
  if (want_vectors) {
    Matrix rows(n, n);
    for (std::size_t i = 0; i < n; ++i)
      std::copy(Zt.row(order[i]), Zt.row(order[i]) + n, rows.row(i));
    out.vectors_rows = std::move(rows);
  }
  out.values = std::move(sorted);
  return out;
}

double power_lambda_max(const std::function<void(const double*, double*)>& apply,
                        std::size_t n, int max_iters, double rel_tol) {
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = 1.0 + 0.5 * static_cast<double>(i % 7) / 7.0;
  kernels::scal(1.0 / norm2(v), v.data(), n);

  Vector y(n);
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    apply(v.data(), y.data());
    const double next = dot(v, y);
    const double ny = norm2(y);
    if (ny == 0.0) return 0.0;
    kernels::scal(1.0 / ny, y.data(), n);
    v.swap(y);
    if (it > 0 && std::abs(next - lambda) <= rel_tol * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

SpdMatrix SpdMatrix::checked(Matrix m) {
  require(m.square(), "SpdMatrix: matrix not square");
  if (!is_symmetric(m))
    throw ArgumentError("SpdMatrix: matrix is not symmetric");
  auto chol = CholeskyFactor::compute(m);
  return SpdMatrix(std::move(m), std::move(chol), -1.0);
}

SpdMatrix SpdMatrix::with_band(Matrix m, double mu) {
  require(mu >= 1.0, "SpdMatrix: band certificate requires mu >= 1");
  SpdMatrix spd = checked(std::move(m));
  const std::size_t n = spd.dim();
  const double lo = 1.0 / mu - tol::invariant_slack;
  const double hi = mu + tol::invariant_slack;

  if (n <= 64) {
    SymmetricEigen eig = symmetric_eigen(spd.entries());
    if (eig.values.front() < lo || eig.values.back() > hi)
      throw ArgumentError("SpdMatrix: eigenvalues violate the certified band");
  } else {
    // Rayleigh quotients always lie in [lambda_min, lambda_max]; sampling
    // them (plus the diagonal) is the documented large-n check.
    std::mt19937_64 gen(0x5D0u);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector u(n), w(n);
    for (int k = 0; k < 32; ++k) {
      for (auto& e : u) e = normal(gen);
      kernels::scal(1.0 / norm2(u), u.data(), n);
      matvec_into(spd.entries(), u.data(), w.data());
      const double rho = kernels::dot(u.data(), w.data(), n);
      if (rho < lo || rho > hi)
        throw ArgumentError("SpdMatrix: sampled Rayleigh quotient outside band");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double d = spd.entries()(i, i);
      if (d < lo || d > hi)
        throw ArgumentError("SpdMatrix: diagonal entry outside band");
    }
  }
  spd.mu_ = mu;
  return spd;
}

double SpdMatrix::mu_certificate() const {
  if (!has_certificate())
    throw ArgumentError("SpdMatrix: no band certificate attached");
  return mu_;
}

double dnorm_sq(const Vector& x, const SpdMatrix& D) {
  require(x.size() == D.dim(), "dnorm_sq: dimension mismatch");
  Vector y(x.size());
  matvec_into(D.entries(), x.data(), y.data());
  return std::max(0.0, dot(x, y));
}

Vector apply_inverse(const SpdMatrix& D, const Vector& v) {
  require(v.size() == D.dim(), "apply_inverse: dimension mismatch");
  Vector w = D.factor().solve(v);
  const double scale = std::max(norm_inf(v), 1e-30);
  Vector r = sub(matvec(D.entries(), w), v);
  if (norm_inf(r) > tol::spd_residual * scale) {
    // One step of iterative refinement for ill-conditioned matrices.
    Vector corr = D.factor().solve(r);
    axpy_inplace(-1.0, corr, w);
    r = sub(matvec(D.entries(), w), v);
    if (norm_inf(r) > tol::spd_residual * scale)
      throw NumericalError("apply_inverse: residual tolerance not met");
  }
  return w;
}

SpdMatrix spectral_clip(const Matrix& M, double lo, double hi) {
  require(lo > 0.0 && hi >= lo, "spectral_clip: need 0 < lo <= hi");
  Matrix S = symmetrized(M);
  const std::size_t n = S.rows();
  const double mu = std::max(hi, 1.0 / lo);

  if (n <= 1024) {
    SymmetricEigen eig = symmetric_eigen(S);
    Vector clamped = eig.values;
    for (auto& v : clamped) v = std::min(std::max(v, lo), hi);
    Matrix out = symmetrized(eig.reassemble(clamped));
    return SpdMatrix::with_band(std::move(out), mu);
  }

  // Large n: map the spectrum affinely into [lo, hi] using Gershgorin
  // bounds. Eigenvectors are preserved; this is coarser than a clamp but
  // certified without an eigensolve.
  double g_lo = S(0, 0);
  double g_hi = S(0, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) r += std::abs(S(i, j));
    g_lo = std::min(g_lo, S(i, i) - r);
    g_hi = std::max(g_hi, S(i, i) + r);
  }
  if (g_lo >= lo && g_hi <= hi)
    return SpdMatrix::with_band(std::move(S), mu);
  double a = 1.0;
  double b = 0.0;
  if (g_hi - g_lo > 0.0) {
    a = (hi - lo) / (g_hi - g_lo);
    b = lo - a * g_lo;
  } else {
    a = 0.0;
    b = std::min(std::max(g_lo, lo), hi);
  }
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out(i, j) = a * S(i, j) + (i == j ? b : 0.0);
  return SpdMatrix::with_band(std::move(out), mu);
}

}  // namespace sgm
