#pragma once

#include <cstddef>

// Low-level vector kernels used by the autodiff engine and the metric
// computations. Scalar reference implementations always exist; on x86 an
// AVX2+FMA variant is selected at process start-up. The active variant can
// be overridden (forced scalar) for equivalence testing.

namespace traj::kernels {

// y[i] += a * x[i]
using AxpyFn = void (*)(double a, const double* x, double* y, std::size_t n);
// sum_i x[i] * y[i]
using DotFn = double (*)(const double* x, const double* y, std::size_t n);
// sum_i (x[i] - y[i])^2
using SqDistFn = double (*)(const double* x, const double* y, std::size_t n);
// out[i] = x[i] * y[i]
using MulFn = void (*)(const double* x, const double* y, double* out,
                       std::size_t n);
// out[i] += x[i] * y[i]
using MulAccFn = void (*)(const double* x, const double* y, double* out,
                          std::size_t n);

struct Dispatch {
  AxpyFn axpy;
  DotFn dot;
  SqDistFn sq_dist;
  MulFn mul;
  MulAccFn mul_acc;
  const char* name;
};

namespace scalar {
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sq_dist(const double* x, const double* y, std::size_t n);
void mul(const double* x, const double* y, double* out, std::size_t n);
void mul_acc(const double* x, const double* y, double* out, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sq_dist(const double* x, const double* y, std::size_t n);
void mul(const double* x, const double* y, double* out, std::size_t n);
void mul_acc(const double* x, const double* y, double* out, std::size_t n);
}  // namespace avx2
#endif

// Active dispatch table, chosen once at start-up from CPU features.
const Dispatch& active();
// Force a specific table (tests); pass nullptr to restore auto-detection.
void set_active(const Dispatch* d);

const Dispatch& scalar_table();
bool avx2_available();
#if defined(__x86_64__) || defined(_M_X64)
const Dispatch& avx2_table();
#endif

inline void axpy(double a, const double* x, double* y, std::size_t n) {
  active().axpy(a, x, y, n);
}
inline double dot(const double* x, const double* y, std::size_t n) {
  return active().dot(x, y, n);
}
inline double sq_dist(const double* x, const double* y, std::size_t n) {
  return active().sq_dist(x, y, n);
}
inline void mul(const double* x, const double* y, double* out, std::size_t n) {
  active().mul(x, y, out, n);
}
inline void mul_acc(const double* x, const double* y, double* out,
                    std::size_t n) {
  active().mul_acc(x, y, out, n);
}

}  // namespace traj::kernels
