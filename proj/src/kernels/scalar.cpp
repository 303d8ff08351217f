#include "tapfe/kernels.hpp"

namespace tapfe::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares(const double* a, std::size_t n) { return dot(a, a, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void matvec(const double* a, std::size_t n, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = dot(a + i * n, x, n);
}

void rank1_update_lower(double alpha, const double* s, double* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ai = alpha * s[i];
    double* row = a + i * n;
    for (std::size_t j = 0; j <= i; ++j) row[j] += ai * s[j];
  }
}

ResolventSums resolvent_sums(const double* d, const double* weight, std::size_t n,
                             std::complex<double> w) {
  // 1/(d - w) = (d - wr + i wi) / ((d - wr)^2 + wi^2)
  double f_re = 0.0, f_im = 0.0, s_re = 0.0, s_im = 0.0;
  const double wr = w.real(), wi = w.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = d[i] - wr;
    const double den = a * a + wi * wi;
    const double re = a / den;
    const double im = wi / den;
    f_re += weight[i] * re;
    f_im += weight[i] * im;
    s_re += weight[i] * (re * re - im * im);
    s_im += weight[i] * (2.0 * re * im);
  }
  return {{f_re, f_im}, {s_re, s_im}};
}

}  // namespace tapfe::kernels::scalar
