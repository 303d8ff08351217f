#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference implementation
// and an AVX2+FMA variant; the variant is chosen once at startup from cpuid and
// can be pinned with TAPFE_SIMD=scalar|avx2 or set_backend().
//
// Results of the two backends agree to rounding, not bitwise: reductions are
// reassociated across lanes. Within one backend every kernel is deterministic.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace tapfe::kernels {

enum class Backend { Scalar, Avx2 };

/// Backend currently used by the free functions below.
Backend active_backend() noexcept;
std::string_view backend_name(Backend b) noexcept;
/// True when the CPU and the build both support the backend.
bool backend_available(Backend b) noexcept;
/// Switches backends; throws ParameterError when unavailable.
void set_backend(Backend b);

/// Resolvent moments of a diagonal spectrum at complex shift w:
/// first = sum_i weight_i / (d_i - w), second = sum_i weight_i / (d_i - w)^2.
struct ResolventSums {
  std::complex<double> first;
  std::complex<double> second;
};

// Dispatched entry points.
double dot(std::span<const double> a, std::span<const double> b);
double sum_squares(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y = A x for a dense row-major n x n matrix.
void matvec(const double* a, std::size_t n, std::span<const double> x, std::span<double> y);
/// Lower triangle (including diagonal) of A += alpha * s s^T, row-major n x n.
void rank1_update_lower(double alpha, std::span<const double> s, double* a, std::size_t n);
ResolventSums resolvent_sums(std::span<const double> d, std::span<const double> weight,
                             std::complex<double> w);

// Backend-specific implementations, exposed for equivalence tests.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum_squares(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void matvec(const double* a, std::size_t n, const double* x, double* y);
void rank1_update_lower(double alpha, const double* s, double* a, std::size_t n);
ResolventSums resolvent_sums(const double* d, const double* weight, std::size_t n,
                             std::complex<double> w);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum_squares(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void matvec(const double* a, std::size_t n, const double* x, double* y);
void rank1_update_lower(double alpha, const double* s, double* a, std::size_t n);
ResolventSums resolvent_sums(const double* d, const double* weight, std::size_t n,
                             std::complex<double> w);
}  // namespace avx2

}  // namespace tapfe::kernels
