#include "qho/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define QHO_HAVE_AVX2 1
#include <immintrin.h>

#include <cmath>

#include "kernels_impl.hpp"
#endif

namespace qho::kernels {

#ifdef QHO_HAVE_AVX2
namespace {

#define QHO_AVX2 __attribute__((target("avx2,fma")))

QHO_AVX2 double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

QHO_AVX2 double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

QHO_AVX2 double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(ab, _mm256_loadu_pd(c + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i] * c[i];
  return s;
}

QHO_AVX2 void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

QHO_AVX2 void hermite_block(const double* x, std::size_t npts, std::size_t count, double* out, std::size_t ld) {
  if (count == 0) return;
  for (std::size_t i = 0; i < npts; ++i) out[i] = detail::kPiQuarterInv * std::exp(-0.5 * x[i] * x[i]);
  if (count == 1) return;
  double* h1 = out + ld;
  for (std::size_t i = 0; i < npts; ++i) h1[i] = detail::kSqrt2 * x[i] * out[i];
  for (std::size_t m = 2; m < count; ++m) {
    const double a = std::sqrt(2.0 / static_cast<double>(m));
    const double b = std::sqrt(static_cast<double>(m - 1) / static_cast<double>(m));
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    const double* p1 = out + (m - 1) * ld;
    const double* p2 = out + (m - 2) * ld;
    double* cur = out + m * ld;
    std::size_t i = 0;
    for (; i + 4 <= npts; i += 4) {
      const __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
      const __m256d bp = _mm256_mul_pd(vb, _mm256_loadu_pd(p2 + i));
      _mm256_storeu_pd(cur + i, _mm256_fmsub_pd(ax, _mm256_loadu_pd(p1 + i), bp));
    }
    for (; i < npts; ++i) cur[i] = a * x[i] * p1[i] - b * p2[i];
  }
}

QHO_AVX2 void nls_pointwise(const double* re, const double* im, const double* w, int p, double* out_re,
                            double* out_im, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vr = _mm256_loadu_pd(re + i);
    const __m256d vi = _mm256_loadu_pd(im + i);
    const __m256d m = _mm256_fmadd_pd(vr, vr, _mm256_mul_pd(vi, vi));
    __m256d f = _mm256_loadu_pd(w + i);
    for (int q = 0; q < p; ++q) f = _mm256_mul_pd(f, m);
    _mm256_storeu_pd(out_re + i, _mm256_mul_pd(f, vr));
    _mm256_storeu_pd(out_im + i, _mm256_mul_pd(f, vi));
  }
  for (; i < n; ++i) {
    const double m = re[i] * re[i] + im[i] * im[i];
    double f = w[i];
    for (int q = 0; q < p; ++q) f *= m;
    out_re[i] = f * re[i];
    out_im[i] = f * im[i];
  }
}

QHO_AVX2 void rotate(const double* c, const double* s, double* re, double* im, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vc = _mm256_loadu_pd(c + i);
    const __m256d vs = _mm256_loadu_pd(s + i);
    const __m256d a = _mm256_loadu_pd(re + i);
    const __m256d b = _mm256_loadu_pd(im + i);
    _mm256_storeu_pd(re + i, _mm256_fmsub_pd(vc, a, _mm256_mul_pd(vs, b)));
    _mm256_storeu_pd(im + i, _mm256_fmadd_pd(vc, b, _mm256_mul_pd(vs, a)));
  }
  for (; i < n; ++i) {
    const double a = re[i];
    const double b = im[i];
    re[i] = c[i] * a - s[i] * b;
    im[i] = c[i] * b + s[i] * a;
  }
}

constexpr Table kAvx2{"avx2", dot, dot3, axpy, hermite_block, nls_pointwise, rotate};

}  // namespace

const Table* avx2() {
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok ? &kAvx2 : nullptr;
}

#else

const Table* avx2() { return nullptr; }

#endif

}  // namespace qho::kernels
