#include <atomic>
#include <cstdlib>
#include <string>

#include "tapfe/error.hpp"
#include "tapfe/kernels.hpp"

namespace tapfe::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(TAPFE_HAVE_AVX2_TU) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("TAPFE_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Backend::Scalar;
    if (v == "avx2" && cpu_has_avx2()) return Backend::Avx2;
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{initial_backend()};
  return b;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw ParameterError("kernel operands have mismatched lengths");
}

}  // namespace

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

std::string_view backend_name(Backend b) noexcept {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

bool backend_available(Backend b) noexcept { return b == Backend::Scalar || cpu_has_avx2(); }

void set_backend(Backend b) {
  if (!backend_available(b)) throw ParameterError("SIMD backend not available on this CPU");
  current().store(b, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  return active_backend() == Backend::Avx2 ? avx2::dot(a.data(), b.data(), a.size())
                                           : scalar::dot(a.data(), b.data(), a.size());
}

double sum_squares(std::span<const double> a) {
  return active_backend() == Backend::Avx2 ? avx2::sum_squares(a.data(), a.size())
                                           : scalar::sum_squares(a.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size());
  if (active_backend() == Backend::Avx2)
    avx2::axpy(alpha, x.data(), y.data(), x.size());
  else
    scalar::axpy(alpha, x.data(), y.data(), x.size());
}

void matvec(const double* a, std::size_t n, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), n);
  check_sizes(y.size(), n);
  if (active_backend() == Backend::Avx2)
    avx2::matvec(a, n, x.data(), y.data());
  else
    scalar::matvec(a, n, x.data(), y.data());
}

void rank1_update_lower(double alpha, std::span<const double> s, double* a, std::size_t n) {
  check_sizes(s.size(), n);
  if (active_backend() == Backend::Avx2)
    avx2::rank1_update_lower(alpha, s.data(), a, n);
  else
    scalar::rank1_update_lower(alpha, s.data(), a, n);
}

ResolventSums resolvent_sums(std::span<const double> d, std::span<const double> weight,
                             std::complex<double> w) {
  check_sizes(d.size(), weight.size());
  return active_backend() == Backend::Avx2
             ? avx2::resolvent_sums(d.data(), weight.data(), d.size(), w)
             : scalar::resolvent_sums(d.data(), weight.data(), d.size(), w);
}

}  // namespace tapfe::kernels
