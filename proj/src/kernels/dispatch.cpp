#include "sgm/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

#include "kernel_table.hpp"

namespace sgm::kernels {
namespace {

struct Backend {
  std::string name;
  const KernelTable* table;
};

std::vector<Backend> detect_backends() {
  std::vector<Backend> out;
#if SGM_HAVE_AVX2
  if (avx2_supported()) out.push_back({"avx2", &kAvx2Table});
#endif
#if SGM_HAVE_NEON
  out.push_back({"neon", &kNeonTable});
#endif
  out.push_back({"scalar", &kScalarTable});
  return out;
}

struct Dispatch {
  std::vector<Backend> backends;
  const KernelTable* active = nullptr;
  std::string active_name;

  Dispatch() : backends(detect_backends()) {
    std::string wanted;
    if (const char* env = std::getenv("SGM_KERNEL_BACKEND")) wanted = env;
    for (const auto& b : backends) {
      if (wanted.empty() || b.name == wanted) {
        active = b.table;
        active_name = b.name;
        return;
      }
    }
    // Unknown env value: fall back to the best available backend.
    active = backends.front().table;
    active_name = backends.front().name;
  }
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
  return dispatch().active->dot(x, y, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  dispatch().active->axpy(a, x, y, n);
}

void scal(double a, double* x, std::size_t n) {
  dispatch().active->scal(a, x, n);
}

void clamp(const double* x, const double* lo, const double* hi, double* out,
           std::size_t n) {
  dispatch().active->clamp(x, lo, hi, out, n);
}

void rot(double* x, double* y, double c, double s, std::size_t n) {
  dispatch().active->rot(x, y, c, s, n);
}

const std::string& backend_name() { return dispatch().active_name; }

std::vector<std::string> available_backends() {
  std::vector<std::string> names;
  for (const auto& b : dispatch().backends) names.push_back(b.name);
  return names;
}

void force_backend(const std::string& name) {
  for (const auto& b : dispatch().backends) {
    if (b.name == name) {
      dispatch().active = b.table;
      dispatch().active_name = b.name;
      return;
    }
  }
  throw std::invalid_argument("unknown kernel backend: " + name);
}

}  // namespace sgm::kernels
