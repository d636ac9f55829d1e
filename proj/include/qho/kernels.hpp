#pragma once

#include <cstddef>

// Dense inner loops with a scalar reference and SIMD variants chosen at runtime.
// Every variant must agree with the scalar one up to summation-order rounding.
namespace qho::kernels {

// Points handed to hermite_block must satisfy |x| <= this, so that the
// unscaled start value exp(-x^2/2) stays far from underflow.
inline constexpr double kHermiteDirectLimit = 30.0;

struct Table {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*dot3)(const double* a, const double* b, const double* c, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[m * ld + i] = h_{m+1}(x_i), m < count, i < npts.
  void (*hermite_block)(const double* x, std::size_t npts, std::size_t count, double* out, std::size_t ld);
  // out = w * (re^2 + im^2)^p * (re + i im)
  void (*nls_pointwise)(const double* re, const double* im, const double* w, int p, double* out_re,
                        double* out_im, std::size_t n);
  // (re + i im) *= (c + i s)
  void (*rotate)(const double* c, const double* s, double* re, double* im, std::size_t n);
};

const Table& scalar();
const Table* avx2();  // nullptr unless compiled in and supported by the CPU
const Table* neon();  // nullptr unless compiled in

// Selected once: QHO_KERNELS=scalar|avx2|neon overrides the CPU probe.
const Table& active();

}  // namespace qho::kernels
