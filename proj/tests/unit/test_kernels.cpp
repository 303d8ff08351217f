#include <cmath>
#include <vector>

#include "doctest.h"
#include "tapfe/kernels.hpp"
#include "tapfe/numerics.hpp"

using namespace tapfe;
namespace k = tapfe::kernels;

namespace {

std::vector<double> draw(std::size_t n, numerics::RngStream& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

bool close(double a, double b, double scale) { return std::abs(a - b) <= 1e-12 * (1.0 + scale); }

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar and avx2 agree on every kernel") {
    if (!k::backend_available(k::Backend::Avx2)) {
      MESSAGE("AVX2 not available; equivalence not exercised");
      return;
    }
    numerics::RngStream rng(11, 0);
    for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 33, 100, 1001}) {
      CAPTURE(n);
      const auto a = draw(n, rng), b = draw(n, rng);
      double scale = 0.0;
      for (std::size_t i = 0; i < n; ++i) scale += std::abs(a[i] * b[i]);
      CHECK(close(k::scalar::dot(a.data(), b.data(), n), k::avx2::dot(a.data(), b.data(), n), scale));
      CHECK(close(k::scalar::sum_squares(a.data(), n), k::avx2::sum_squares(a.data(), n),
                  k::scalar::sum_squares(a.data(), n)));

      auto y1 = b, y2 = b;
      k::scalar::axpy(0.37, a.data(), y1.data(), n);
      k::avx2::axpy(0.37, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(close(y1[i], y2[i], std::abs(y1[i])));

      const auto mat = draw(n * n, rng);
      std::vector<double> r1(n), r2(n);
      k::scalar::matvec(mat.data(), n, a.data(), r1.data());
      k::avx2::matvec(mat.data(), n, a.data(), r2.data());
      for (std::size_t i = 0; i < n; ++i) CHECK(close(r1[i], r2[i], std::sqrt(double(n)) * 10.0));

      auto l1 = mat, l2 = mat;
      k::scalar::rank1_update_lower(-0.8, a.data(), l1.data(), n);
      k::avx2::rank1_update_lower(-0.8, a.data(), l2.data(), n);
      for (std::size_t i = 0; i < n * n; ++i) CHECK(close(l1[i], l2[i], std::abs(l1[i])));

      std::vector<double> d(n), w(n, n ? 1.0 / double(n) : 0.0);
      for (double& x : d) x = 1.0 + std::abs(rng.normal());
      const std::complex<double> z(0.3, 0.2);
      const auto s1 = k::scalar::resolvent_sums(d.data(), w.data(), n, z);
      const auto s2 = k::avx2::resolvent_sums(d.data(), w.data(), n, z);
      CHECK(std::abs(s1.first - s2.first) <= 1e-12 * (1.0 + std::abs(s1.first)));
      CHECK(std::abs(s1.second - s2.second) <= 1e-12 * (1.0 + std::abs(s1.second)));
    }
  }

  TEST_CASE("backend switch round trip") {
    const auto before = k::active_backend();
    k::set_backend(k::Backend::Scalar);
    CHECK(k::active_backend() == k::Backend::Scalar);
    const std::vector<double> a{1, 2, 3, 4, 5};
    CHECK(k::dot(a, a) == doctest::Approx(55.0));
    k::set_backend(before);
    CHECK(k::active_backend() == before);
    CHECK(k::backend_name(k::Backend::Scalar) == "scalar");
  }
}
