#include <cmath>

#include "qho/kernels.hpp"
#include "kernels_impl.hpp"

namespace qho::kernels {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i] * c[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void hermite_block(const double* x, std::size_t npts, std::size_t count, double* out, std::size_t ld) {
  if (count == 0) return;
  const double c0 = detail::kPiQuarterInv;
  for (std::size_t i = 0; i < npts; ++i) out[i] = c0 * std::exp(-0.5 * x[i] * x[i]);
  if (count == 1) return;
  double* h1 = out + ld;
  for (std::size_t i = 0; i < npts; ++i) h1[i] = detail::kSqrt2 * x[i] * out[i];
  for (std::size_t m = 2; m < count; ++m) {
    const double a = std::sqrt(2.0 / static_cast<double>(m));
    const double b = std::sqrt(static_cast<double>(m - 1) / static_cast<double>(m));
    const double* p1 = out + (m - 1) * ld;
    const double* p2 = out + (m - 2) * ld;
    double* cur = out + m * ld;
    for (std::size_t i = 0; i < npts; ++i) cur[i] = a * x[i] * p1[i] - b * p2[i];
  }
}

void nls_pointwise(const double* re, const double* im, const double* w, int p, double* out_re,
                   double* out_im, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double m = re[i] * re[i] + im[i] * im[i];
    double f = w[i];
    for (int q = 0; q < p; ++q) f *= m;
    out_re[i] = f * re[i];
    out_im[i] = f * im[i];
  }
}

void rotate(const double* c, const double* s, double* re, double* im, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = re[i];
    const double b = im[i];
    re[i] = c[i] * a - s[i] * b;
    im[i] = c[i] * b + s[i] * a;
  }
}

constexpr Table kScalar{"scalar", dot, dot3, axpy, hermite_block, nls_pointwise, rotate};

}  // namespace

const Table& scalar() { return kScalar; }

}  // namespace qho::kernels
