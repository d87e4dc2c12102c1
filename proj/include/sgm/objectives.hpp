#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "sgm/linalg.hpp"
#include "sgm/projection.hpp"

namespace sgm {

struct ObjectiveReport {
  double value;
  Vector gradient;
  std::optional<Matrix> hessian;
};

class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual bool has_hessian() const { return false; }
  virtual Matrix hessian(const Vector& x) const;
  virtual bool hessian_is_constant() const { return false; }

  // Bundles value/gradient(/Hessian) and rejects non-finite entries.
  ObjectiveReport evaluate(const Vector& x, bool want_hessian = false) const;
};

// f(x) = p(x)/q(x) with p(x) = x'Px/2 + p'x + p0 and
// q(x) = x'Qx/2 + q'x + q0. The Hessian is the full quotient-rule second
// derivative; hessian_gform assembles the same matrix the way the source
// formula groups it (through g = grad p - (p/q) grad q) for cross-checking.
class FractionalQuadratic final : public Objective {
 public:
  FractionalQuadratic(Matrix P, Vector p, double p0, Matrix Q, Vector q,
                      double q0);

  // (x'Wx + w1'x + v1)/(w2'x + v2); the quadratic term carries no 1/2, so
  // P = 2W internally.
  static FractionalQuadratic ratio_form(const Matrix& W, const Vector& w1,
                                        double v1, const Vector& w2, double v2);

  std::size_t dim() const override { return p_.size(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  bool has_hessian() const override { return true; }
  Matrix hessian(const Vector& x) const override;
  Matrix hessian_gform(const Vector& x) const;

  double numerator(const Vector& x) const;
  double denominator(const Vector& x) const;
  const Matrix& numerator_quadratic() const { return P_; }
  const Matrix& denominator_quadratic() const { return Q_; }
  const Vector& numerator_linear() const { return p_; }
  const Vector& denominator_linear() const { return q_; }
  double numerator_constant() const { return p0_; }
  double denominator_constant() const { return q0_; }

 private:
  double denominator_checked(const Vector& x) const;
  Matrix P_, Q_;
  Vector p_, q_;
  double p0_, q0_;
};

// f(x) = x'Vx - p'Vp + p'W(x - p) with V, W symmetric positive definite.
// gradient = 2Vx + Wp, Hessian = 2V (constant).
class BoxQuadratic final : public Objective {
 public:
  BoxQuadratic(Matrix V, Matrix W, Vector p);

  std::size_t dim() const override { return p_.size(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  bool has_hessian() const override { return true; }
  Matrix hessian(const Vector& x) const override;
  bool hessian_is_constant() const override { return true; }

  double gamma() const { return gamma_; }  // lambda_min(V)
  double lambda_max_V() const { return lambda_max_; }
  double lipschitz() const { return 2.0 * lambda_max_; }
  const Matrix& V() const { return V_; }
  const Matrix& W() const { return W_; }
  const Vector& p() const { return p_; }

 private:
  Matrix V_, W_;
  Vector p_;
  Vector Wp_;
  double gamma_, lambda_max_;
};

// User-supplied callbacks.
class CallbackObjective final : public Objective {
 public:
  CallbackObjective(std::size_t n, std::function<double(const Vector&)> value,
                    std::function<Vector(const Vector&)> gradient,
                    std::function<Matrix(const Vector&)> hessian = nullptr);

  std::size_t dim() const override { return n_; }
  double value(const Vector& x) const override { return value_(x); }
  Vector gradient(const Vector& x) const override { return gradient_(x); }
  bool has_hessian() const override { return static_cast<bool>(hessian_); }
  Matrix hessian(const Vector& x) const override;

 private:
  std::size_t n_;
  std::function<double(const Vector&)> value_;
  std::function<Vector(const Vector&)> gradient_;
  std::function<Matrix(const Vector&)> hessian_;
};

// Max relative discrepancy between the analytic gradient and central
// finite differences with step h, coordinate by coordinate.
double check_gradient(const Objective& f, const Vector& x, double h);

// Hessian check through directional probes: compares H v against the
// central difference of the gradient along v for a few random directions.
double check_hessian(const Objective& f, const Vector& x, double h,
                     int directions = 4, std::uint64_t seed = 12345);

// Deterministic feasible samples: coordinate-uniform on boxes, projected
// Gaussians around the certified feasible point on bands.
std::vector<Vector> sample_feasible_points(const FeasibleSet& set, int count,
                                           std::uint64_t seed);

// Upper estimate of sup ||hessian||_2 over the set by sampling; exact for
// constant Hessians.
double lipschitz_estimate(const Objective& f, const FeasibleSet& set,
                          int samples = 1000, std::uint64_t seed = 2024);

}  // namespace sgm
