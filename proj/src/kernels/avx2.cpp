#include "tapfe/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace tapfe::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares(const double* a, std::size_t n) { return dot(a, a, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void matvec(const double* a, std::size_t n, const double* x, double* y) {
  // Four rows at a time so each load of x feeds four FMAs.
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double* r0 = a + i * n;
    const double* r1 = r0 + n;
    const double* r2 = r1 + n;
    const double* r3 = r2 + n;
    __m256d c0 = _mm256_setzero_pd(), c1 = _mm256_setzero_pd();
    __m256d c2 = _mm256_setzero_pd(), c3 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const __m256d xv = _mm256_loadu_pd(x + j);
      c0 = _mm256_fmadd_pd(_mm256_loadu_pd(r0 + j), xv, c0);
      c1 = _mm256_fmadd_pd(_mm256_loadu_pd(r1 + j), xv, c1);
      c2 = _mm256_fmadd_pd(_mm256_loadu_pd(r2 + j), xv, c2);
      c3 = _mm256_fmadd_pd(_mm256_loadu_pd(r3 + j), xv, c3);
    }
    double s0 = hsum(c0), s1 = hsum(c1), s2 = hsum(c2), s3 = hsum(c3);
    for (; j < n; ++j) {
      s0 += r0[j] * x[j];
      s1 += r1[j] * x[j];
      s2 += r2[j] * x[j];
      s3 += r3[j] * x[j];
    }
    y[i] = s0;
    y[i + 1] = s1;
    y[i + 2] = s2;
    y[i + 3] = s3;
  }
  for (; i < n; ++i) y[i] = dot(a + i * n, x, n);
}

void rank1_update_lower(double alpha, const double* s, double* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) axpy(alpha * s[i], s, a + i * n, i + 1);
}

ResolventSums resolvent_sums(const double* d, const double* weight, std::size_t n,
                             std::complex<double> w) {
  const __m256d wr = _mm256_set1_pd(w.real());
  const __m256d wi = _mm256_set1_pd(w.imag());
  const __m256d wi2 = _mm256_mul_pd(wi, wi);
  const __m256d two = _mm256_set1_pd(2.0);
  __m256d f_re = _mm256_setzero_pd(), f_im = _mm256_setzero_pd();
  __m256d s_re = _mm256_setzero_pd(), s_im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_sub_pd(_mm256_loadu_pd(d + i), wr);
    const __m256d inv = _mm256_div_pd(_mm256_set1_pd(1.0), _mm256_fmadd_pd(a, a, wi2));
    const __m256d re = _mm256_mul_pd(a, inv);
    const __m256d im = _mm256_mul_pd(wi, inv);
    const __m256d wt = _mm256_loadu_pd(weight + i);
    f_re = _mm256_fmadd_pd(wt, re, f_re);
    f_im = _mm256_fmadd_pd(wt, im, f_im);
    s_re = _mm256_fmadd_pd(wt, _mm256_fmsub_pd(re, re, _mm256_mul_pd(im, im)), s_re);
    s_im = _mm256_fmadd_pd(wt, _mm256_mul_pd(two, _mm256_mul_pd(re, im)), s_im);
  }
  ResolventSums out{{hsum(f_re), hsum(f_im)}, {hsum(s_re), hsum(s_im)}};
  if (i < n) {
    const ResolventSums tail = scalar::resolvent_sums(d + i, weight + i, n - i, w);
    out.first += tail.first;
    out.second += tail.second;
  }
  return out;
}

}  // namespace tapfe::kernels::avx2

#else  // no AVX2 in this translation unit: forward to the reference code

namespace tapfe::kernels::avx2 {
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
double sum_squares(const double* a, std::size_t n) { return scalar::sum_squares(a, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
void matvec(const double* a, std::size_t n, const double* x, double* y) {
  scalar::matvec(a, n, x, y);
}
void rank1_update_lower(double alpha, const double* s, double* a, std::size_t n) {
  scalar::rank1_update_lower(alpha, s, a, n);
}
ResolventSums resolvent_sums(const double* d, const double* weight, std::size_t n,
                             std::complex<double> w) {
  return scalar::resolvent_sums(d, weight, n, w);
}
}  // namespace tapfe::kernels::avx2

#endif
