#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Data-parallel inner loops used by the dense linear algebra layer.
// A scalar reference implementation always exists; on x86-64 an AVX2+FMA
// variant and on arm64 a NEON variant are compiled in and selected at
// runtime. The active backend is fixed for the lifetime of the process
// unless force_backend() is called (tests only), so a given run is
// bitwise deterministic.
namespace sgm::kernels {

// sum_i x[i]*y[i]
double dot(const double* x, const double* y, std::size_t n);

// y[i] += a*x[i]
void axpy(double a, const double* x, double* y, std::size_t n);

// x[i] *= a
void scal(double a, double* x, std::size_t n);

// out[i] = min(max(x[i], lo[i]), hi[i])
void clamp(const double* x, const double* lo, const double* hi, double* out,
           std::size_t n);

// Plane rotation: (x[i], y[i]) <- (c*x[i] - s*y[i], s*x[i] + c*y[i])
void rot(double* x, double* y, double c, double s, std::size_t n);

// Name of the backend currently in use ("scalar", "avx2", "neon").
const std::string& backend_name();

// Backends compiled in and usable on this machine.
std::vector<std::string> available_backends();

// Select a backend by name; throws std::invalid_argument if unknown or
// unavailable. Not safe while kernels run on other threads.
void force_backend(const std::string& name);

}  // namespace sgm::kernels
