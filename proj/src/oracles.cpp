#include "sgm/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sgm::oracles {

namespace {

// Gaussian elimination with partial pivoting on a small dense system.
// Returns false on a (near-)singular pivot.
bool solve_small(std::vector<std::vector<double>> A, std::vector<double>& rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-300) return false;
    std::swap(A[piv], A[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = A[r][col] / A[col][col];
      for (std::size_t cc = col; cc < n; ++cc) A[r][cc] -= factor * A[col][cc];
      rhs[r] -= factor * rhs[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= A[i][j] * rhs[j];
    rhs[i] = s / A[i][i];
  }
  return true;
}

double qp_objective(const Matrix& Q, const Vector& c, const Vector& y) {
  double quad = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) row += Q(i, j) * y[j];
    quad += y[i] * row;
  }
  double lin = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) lin += c[i] * y[i];
  return 0.5 * quad + lin;
}

}  // namespace

Vector box_qp_enumerate(const Matrix& Q, const Vector& c, const BoxSet& box) {
  const std::size_t n = box.dim();
  if (n > 8) throw ArgumentError("box_qp_enumerate: n too large");
  std::size_t patterns = 1;
  for (std::size_t i = 0; i < n; ++i) patterns *= 3;

  Vector best;
  double best_val = std::numeric_limits<double>::infinity();

  std::vector<int> state(n);  // 0 free, 1 at lower, 2 at upper
  for (std::size_t code = 0; code < patterns; ++code) {
    std::size_t rem = code;
    for (std::size_t i = 0; i < n; ++i) {
      state[i] = static_cast<int>(rem % 3);
      rem /= 3;
    }
    Vector y(n);
    std::vector<std::size_t> free_idx;
    for (std::size_t i = 0; i < n; ++i) {
      if (state[i] == 1)
        y[i] = box.lower()[i];
      else if (state[i] == 2)
        y[i] = box.upper()[i];
      else
        free_idx.push_back(i);
    }
    if (!free_idx.empty()) {
      const std::size_t f = free_idx.size();
      std::vector<std::vector<double>> A(f, std::vector<double>(f));
      std::vector<double> rhs(f);
      for (std::size_t r = 0; r < f; ++r) {
        for (std::size_t cidx = 0; cidx < f; ++cidx)
          A[r][cidx] = Q(free_idx[r], free_idx[cidx]);
        double s = -c[free_idx[r]];
        for (std::size_t i = 0; i < n; ++i)
          if (state[i] != 0) s -= Q(free_idx[r], i) * y[i];
        rhs[r] = s;
      }
      if (!solve_small(std::move(A), rhs)) continue;
      bool inside = true;
      for (std::size_t r = 0; r < f; ++r) {
        y[free_idx[r]] = rhs[r];
        if (rhs[r] < box.lower()[free_idx[r]] - 1e-10 ||
            rhs[r] > box.upper()[free_idx[r]] + 1e-10)
          inside = false;
      }
      if (!inside) continue;
      for (std::size_t r = 0; r < f; ++r)
        y[free_idx[r]] = std::min(std::max(y[free_idx[r]],
                                           box.lower()[free_idx[r]]),
                                  box.upper()[free_idx[r]]);
    }
    const double val = qp_objective(Q, c, y);
    if (val < best_val) {
      best_val = val;
      best = std::move(y);
    }
  }
  return best;
}

Vector project_scaled_reference(const BoxSet& box, const Vector& x,
                                const Matrix& metric) {
  Vector c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += metric(i, j) * x[j];
    c[i] = -s;
  }
  return box_qp_enumerate(metric, c, box);
}

FractionalMin fractional_box_min(const Matrix& W, const Vector& w1, double v1,
                                 const Vector& w2, double v2,
                                 const BoxSet& box) {
  const std::size_t n = box.dim();
  Matrix Q = W;
  for (auto& v : Q.data()) v *= 2.0;  // numerator quadratic carries no 1/2

  auto numerator = [&](const Vector& x) {
    double s = v1;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += W(i, j) * x[j];
      s += x[i] * row + w1[i] * x[i];
    }
    return s;
  };
  auto denominator = [&](const Vector& x) {
    double s = v2;
    for (std::size_t i = 0; i < n; ++i) s += w2[i] * x[i];
    return s;
  };

  FractionalMin out;
  Vector x(n, 0.0);
  double theta = numerator(x) / denominator(x);
  for (int it = 0; it < 100; ++it) {
    ++out.dinkelbach_steps;
    Vector c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = w1[i] - theta * w2[i];
    x = box_qp_enumerate(Q, c, box);
    const double num = numerator(x);
    const double den = denominator(x);
    const double gap = num - theta * den;  // parametric optimum value
    theta = num / den;
    if (std::abs(gap) <= 1e-14 * std::max(1.0, std::abs(num))) break;
  }
  out.x = std::move(x);
  out.value = theta;
  return out;
}

QuadraticMin box_quadratic_min(const Matrix& Q, const Vector& c, double c0,
                               const BoxSet& box, int max_iters) {
  const std::size_t n = box.dim();
  auto grad = [&](const Vector& y, Vector& g) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = c[i];
      for (std::size_t j = 0; j < n; ++j) s += Q(i, j) * y[j];
      g[i] = s;
    }
  };
  auto value = [&](const Vector& y) {
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += Q(i, j) * y[j];
      quad += y[i] * row;
    }
    double lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) lin += c[i] * y[i];
    return 0.5 * quad + lin + c0;
  };
  auto clamp_in = [&](Vector& y) {
    for (std::size_t i = 0; i < n; ++i)
      y[i] = std::min(std::max(y[i], box.lower()[i]), box.upper()[i]);
  };

  // Step from a plain power iteration on Q.
  Vector pv(n, 1.0);
  double lmax = 1.0;
  for (int it = 0; it < 200; ++it) {
    Vector t(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) t[i] += Q(i, j) * pv[j];
    double nrm = 0.0;
    for (double v : t) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) break;
    double rq = 0.0;
    for (std::size_t i = 0; i < n; ++i) rq += pv[i] * t[i];
    lmax = rq;
    for (std::size_t i = 0; i < n; ++i) pv[i] = t[i] / nrm;
  }
  const double step = 1.0 / (std::max(lmax, 1e-30) * 1.01);

  QuadraticMin out;
  Vector y(n, 0.0);
  clamp_in(y);
  Vector y_prev = y, v = y, g(n);
  double t_mom = 1.0;
  double best = value(y);
  for (int it = 1; it <= max_iters; ++it) {
    out.iterations = it;
    grad(v, g);
    Vector trial = v;
    for (std::size_t i = 0; i < n; ++i) trial[i] -= step * g[i];
    clamp_in(trial);

    grad(trial, g);
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double proj = std::min(
          std::max(trial[i] - g[i], box.lower()[i]), box.upper()[i]);
      resid = std::max(resid, std::abs(trial[i] - proj));
    }
    const double val = value(trial);
    if (val > best) {
      v = trial;
      t_mom = 1.0;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
      const double mom = (t_mom - 1.0) / t_next;
      for (std::size_t i = 0; i < n; ++i)
        v[i] = trial[i] + mom * (trial[i] - y_prev[i]);
      t_mom = t_next;
    }
    best = std::min(best, val);
    y_prev = trial;
    y = trial;
    if (resid <= 1e-12) break;
  }

  // Exact polish on the identified active set.
  Vector g_final(n);
  grad(y, g_final);
  std::vector<std::size_t> free_idx;
  Vector polished = y;
  for (std::size_t i = 0; i < n; ++i) {
    const bool at_lower = std::abs(y[i] - box.lower()[i]) < 1e-9;
    const bool at_upper = std::abs(y[i] - box.upper()[i]) < 1e-9;
    if (at_lower && g_final[i] > 0.0)
      polished[i] = box.lower()[i];
    else if (at_upper && g_final[i] < 0.0)
      polished[i] = box.upper()[i];
    else
      free_idx.push_back(i);
  }
  if (!free_idx.empty() && free_idx.size() <= 4096) {
    const std::size_t f = free_idx.size();
    std::vector<std::vector<double>> A(f, std::vector<double>(f));
    std::vector<double> rhs(f);
    for (std::size_t r = 0; r < f; ++r) {
      for (std::size_t cc = 0; cc < f; ++cc)
        A[r][cc] = Q(free_idx[r], free_idx[cc]);
      double s = -c[free_idx[r]];
      for (std::size_t i = 0; i < n; ++i) {
        bool is_free = std::find(free_idx.begin(), free_idx.end(), i) !=
                       free_idx.end();
        if (!is_free) s -= Q(free_idx[r], i) * polished[i];
      }
      rhs[r] = s;
    }
    if (solve_small(std::move(A), rhs)) {
      Vector cand = polished;
      bool inside = true;
      for (std::size_t r = 0; r < f; ++r) {
        cand[free_idx[r]] = rhs[r];
        if (rhs[r] < box.lower()[free_idx[r]] - 1e-9 ||
            rhs[r] > box.upper()[free_idx[r]] + 1e-9)
          inside = false;
      }
      if (inside) {
        clamp_in(cand);
        if (value(cand) <= value(y)) {
          y = std::move(cand);
          out.polished = true;
        }
      }
    }
  }

  out.x = std::move(y);
  out.value = value(out.x);
  return out;
}

}  // namespace sgm::oracles
