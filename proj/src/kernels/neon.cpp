#include "qho/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#define QHO_HAVE_NEON 1
#include <arm_neon.h>

#include <cmath>

#include "kernels_impl.hpp"
#endif

namespace qho::kernels {

#ifdef QHO_HAVE_NEON
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)), vld1q_f64(c + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i] * b[i] * c[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void hermite_block(const double* x, std::size_t npts, std::size_t count, double* out, std::size_t ld) {
  if (count == 0) return;
  for (std::size_t i = 0; i < npts; ++i) out[i] = detail::kPiQuarterInv * std::exp(-0.5 * x[i] * x[i]);
  if (count == 1) return;
  double* h1 = out + ld;
  for (std::size_t i = 0; i < npts; ++i) h1[i] = detail::kSqrt2 * x[i] * out[i];
  for (std::size_t m = 2; m < count; ++m) {
    const double a = std::sqrt(2.0 / static_cast<double>(m));
    const double b = std::sqrt(static_cast<double>(m - 1) / static_cast<double>(m));
    const double* p1 = out + (m - 1) * ld;
    const double* p2 = out + (m - 2) * ld;
    double* cur = out + m * ld;
    std::size_t i = 0;
    for (; i + 2 <= npts; i += 2) {
      const float64x2_t ax = vmulq_n_f64(vld1q_f64(x + i), a);
      const float64x2_t bp = vmulq_n_f64(vld1q_f64(p2 + i), b);
      vst1q_f64(cur + i, vfmaq_f64(vnegq_f64(bp), ax, vld1q_f64(p1 + i)));
    }
    for (; i < npts; ++i) cur[i] = a * x[i] * p1[i] - b * p2[i];
  }
}

void nls_pointwise(const double* re, const double* im, const double* w, int p, double* out_re, double* out_im,
                   std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vr = vld1q_f64(re + i);
    const float64x2_t vi = vld1q_f64(im + i);
    const float64x2_t m = vfmaq_f64(vmulq_f64(vi, vi), vr, vr);
    float64x2_t f = vld1q_f64(w + i);
    for (int q = 0; q < p; ++q) f = vmulq_f64(f, m);
    vst1q_f64(out_re + i, vmulq_f64(f, vr));
    vst1q_f64(out_im + i, vmulq_f64(f, vi));
  }
  for (; i < n; ++i) {
    const double m = re[i] * re[i] + im[i] * im[i];
    double f = w[i];
    for (int q = 0; q < p; ++q) f *= m;
    out_re[i] = f * re[i];
    out_im[i] = f * im[i];
  }
}

void rotate(const double* c, const double* s, double* re, double* im, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vc = vld1q_f64(c + i);
    const float64x2_t vs = vld1q_f64(s + i);
    const float64x2_t a = vld1q_f64(re + i);
    const float64x2_t b = vld1q_f64(im + i);
    vst1q_f64(re + i, vfmsq_f64(vmulq_f64(vc, a), vs, b));
    vst1q_f64(im + i, vfmaq_f64(vmulq_f64(vc, b), vs, a));
  }
  for (; i < n; ++i) {
    const double a = re[i];
    const double b = im[i];
    re[i] = c[i] * a - s[i] * b;
    im[i] = c[i] * b + s[i] * a;
  }
}

constexpr Table kNeon{"neon", dot, dot3, axpy, hermite_block, nls_pointwise, rotate};

}  // namespace

const Table* neon() { return &kNeon; }

#else

const Table* neon() { return nullptr; }

#endif

}  // namespace qho::kernels
