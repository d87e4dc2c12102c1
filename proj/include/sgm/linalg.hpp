#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sgm/constants.hpp"
#include "sgm/errors.hpp"

namespace sgm {

using Vector = std::vector<double>;

bool all_finite(std::span<const double> x);

double dot(const Vector& x, const Vector& y);
double norm2_sq(const Vector& x);
double norm2(const Vector& x);
double norm_inf(const Vector& x);
// y += a*x
void axpy_inplace(double a, const Vector& x, Vector& y);
Vector scaled(const Vector& x, double a);
Vector add(const Vector& x, const Vector& y);
Vector sub(const Vector& x, const Vector& y);

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Matrix identity(std::size_t n);

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Vector matvec(const Matrix& A, const Vector& x);
void matvec_into(const Matrix& A, const double* x, double* y);
Matrix matmul(const Matrix& A, const Matrix& B);
Matrix transpose(const Matrix& A);
Matrix symmetrized(const Matrix& A);
bool is_symmetric(const Matrix& A, double rel_tol = tol::symmetry);
double max_abs(const Matrix& A);
bool is_diagonal(const Matrix& A);

// Lower-triangular Cholesky factor of an SPD matrix: A = L L^T.
class CholeskyFactor {
 public:
  // Throws NumericalError when a pivot is not strictly positive.
  static CholeskyFactor compute(const Matrix& A);
  static std::optional<CholeskyFactor> try_compute(const Matrix& A);

  // Solves A w = v.
  Vector solve(const Vector& v) const;
  // L y = v and L^T y = v.
  void forward_solve(Vector& v) const;
  void backward_solve(Vector& v) const;
  // y = L v and y = L^T v.
  Vector lower_apply(const Vector& v) const;
  Vector lower_transpose_apply(const Vector& v) const;

  const Matrix& lower() const { return L_; }
  std::size_t dim() const { return L_.rows(); }

 private:
  explicit CholeskyFactor(Matrix L) : L_(std::move(L)) {}
  Matrix L_;
};

// Eigendecomposition of a symmetric matrix, values ascending.
struct SymmetricEigen {
  Vector values;
  Matrix vectors_rows;  // row i is the eigenvector of values[i]

  Matrix reassemble(const Vector& new_values) const;
};

// Cyclic Jacobi. Input is symmetrized first; throws NumericalError if the
// off-diagonal mass fails to vanish within the sweep cap. Kept as a slow,
// independent reference; production code uses symmetric_eigen.
SymmetricEigen jacobi_eigen(const Matrix& A, int max_sweeps = 50);

// Householder tridiagonalization followed by implicit-shift QL.
SymmetricEigen symmetric_eigen(const Matrix& A, bool want_vectors = true);

// Largest eigenvalue (in magnitude assumed positive for SPD use) of the
// operator `apply`, by power iteration from a fixed deterministic start.
double power_lambda_max(const std::function<void(const double*, double*)>& apply,
                        std::size_t n, int max_iters = 200, double rel_tol = 1e-12);

// Symmetric positive definite matrix, optionally carrying a certificate
// mu >= 1 that all eigenvalues lie in [1/mu, mu]. The Cholesky factor
// produced by the SPD check is retained for solves.
class SpdMatrix {
 public:
  // Symmetry + positive-pivot checks; no band certificate.
  static SpdMatrix checked(Matrix m);
  // Additionally certifies the [1/mu, mu] eigenvalue band: eagerly for
  // n <= 64, by sampled Rayleigh quotients for larger n.
  static SpdMatrix with_band(Matrix m, double mu);

  const Matrix& entries() const { return m_; }
  std::size_t dim() const { return m_.rows(); }
  bool has_certificate() const { return mu_ > 0.0; }
  double mu_certificate() const;
  const CholeskyFactor& factor() const { return chol_; }

 private:
  SpdMatrix(Matrix m, CholeskyFactor chol, double mu)
      : m_(std::move(m)), chol_(std::move(chol)), mu_(mu) {}
  Matrix m_;
  CholeskyFactor chol_;
  double mu_;  // <= 0 means no certificate
};

// x^T D x
double dnorm_sq(const Vector& x, const SpdMatrix& D);

// Solves D w = v through the retained factorization and verifies the
// residual; never forms an explicit inverse.
Vector apply_inverse(const SpdMatrix& D, const Vector& v);

// Clamps the spectrum of (the symmetrized) M into [lo, hi], keeping the
// eigenvectors. Dense eigensolve up to n = 1024; beyond that an affine
// spectral map based on Gershgorin bounds is used instead.
SpdMatrix spectral_clip(const Matrix& M, double lo, double hi);

}  // namespace sgm
