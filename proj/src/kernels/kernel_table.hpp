#pragma once

#include <cstddef>

namespace sgm::kernels {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scal)(double, double*, std::size_t);
  void (*clamp)(const double*, const double*, const double*, double*,
                std::size_t);
  void (*rot)(double*, double*, double, double, std::size_t);
};

extern const KernelTable kScalarTable;
#if SGM_HAVE_AVX2
extern const KernelTable kAvx2Table;
bool avx2_supported();
#endif
#if SGM_HAVE_NEON
extern const KernelTable kNeonTable;
#endif

}  // namespace sgm::kernels
