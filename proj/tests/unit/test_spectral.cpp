#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "tapfe/model.hpp"
#include "tapfe/solvers.hpp"
#include "tapfe/spectral.hpp"

using namespace tapfe;
constexpr double kPi = std::numbers::pi;

namespace {

// int log x dsc(x) for the semicircle of radius 2 beta centred at c.
double semicircle_log_moment(double c, double beta) {
  const int n = 20000;
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = kPi * (k + 0.5) / n;
    s += std::log(c + 2.0 * beta * std::cos(t)) * std::sin(t) * std::sin(t);
  }
  return 2.0 / kPi * s * kPi / n;
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("constant d gives a shifted semicircle") {
    const Vector d(50, 0.0);
    const StieltjesSolver s(d, 1.0);
    CHECK(s.density(0.0) == doctest::Approx(1.0 / kPi).epsilon(1e-6));
    CHECK(s.density(1.0) == doctest::Approx(std::sqrt(3.0) / (2 * kPi)).epsilon(1e-6));
    CHECK(s.density(2.05) <= 1e-8);
    CHECK(s.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(s.cdf(-3.0) == doctest::Approx(0.0).scale(1.0));
    CHECK(s.cdf(3.0) == doctest::Approx(1.0));
    // g(z) = (-z + sqrt(z^2 - 4)) / 2 off the axis.
    const Complex z(0.7, 0.9);
    Complex ref = (-z + std::sqrt(z * z - 4.0)) / 2.0;
    if (ref.imag() < 0) ref = (-z - std::sqrt(z * z - 4.0)) / 2.0;
    CHECK(std::abs(s(z) - ref) <= 1e-10);
  }

  TEST_CASE("measure support, mass and edge exponent of the semicircle") {
    const Vector d(10, 3.0);
    const SpectralMeasure nu = spectral_measure(d, 1.0);
    CHECK(nu.components.size() == 1);
    CHECK(nu.support_lo == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(nu.support_hi == doctest::Approx(5.0).epsilon(1e-3));
    CHECK(nu.mass == doctest::Approx(1.0).epsilon(1e-4));
    const StieltjesSolver s(d, 1.0);
    const double offs[4] = {1e-4, 3e-4, 1e-3, 3e-3};
    const EdgeProfile e = edge_profile(s, 1.0, +1, offs);
    CHECK(e.slope == doctest::Approx(0.5).epsilon(0.02));
    for (std::size_t i = 0; i < e.density.size(); ++i) CHECK(e.density[i] <= e.envelope[i]);
  }

  TEST_CASE("log potential of the shifted semicircle") {
    const Vector d(20, 3.0);
    const LogPotential lp = log_potential(d, 1.0, 0.5);
    CHECK(lp.g0 == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-12));
    CHECK(lp.log_integral == doctest::Approx(semicircle_log_moment(3.0, 1.0)).epsilon(1e-8));
    CHECK(lp.log_integral == doctest::Approx(1.0353).epsilon(1e-4));
    CHECK(lp.log_integral <= lp.L + 1e-12);
    // Support reaching below zero: no admissible real g(0).
    CHECK_THROWS_AS(log_potential(Vector(5, 1.0), 1.0, 0.5), DomainError);
  }

  TEST_CASE("Herglotz bounds for a spread spectrum") {
    numerics::RngStream rng(21, 0);
    Vector d(300);
    for (double& v : d) v = 1.0 + std::exp(3.0 * rng.uniform());
    const StieltjesSolver s(d, 0.8);
    for (int k = 0; k < 50; ++k) {
      const Complex z(-5.0 + 40.0 * rng.uniform(), std::pow(10.0, -4.0 + 5.0 * rng.uniform()));
      const Complex g = s(z);
      CHECK(g.imag() > 0.0);
      CHECK(std::abs(g) <= 1.0 / z.imag() + 1e-12);
      CHECK(s.residual(z, g) <= 1e-10);
    }
  }

  TEST_CASE("cdf_sorted agrees with pointwise cdf") {
    Vector d{1.0, 1.5, 4.0, 9.0};
    const StieltjesSolver s(d, 0.7);
    Vector xs;
    for (int k = 0; k <= 40; ++k) xs.push_back(-1.0 + 0.3 * k);
    const Vector c = s.cdf_sorted(xs);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(c[i] == doctest::Approx(s.cdf(xs[i])).epsilon(1e-7));
    for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i] >= c[i - 1] - 1e-12);
  }

  TEST_CASE("conditional Hessian sample has the prescribed structure") {
    numerics::RngStream rng(22, 0);
    const std::size_t n = 60;
    const Instance inst = generate(n, 1.5, rng);
    const TapContext ctx(1.5, 1.5, inst.Y);
    Vector mv(n);
    for (double& v : mv) v = -0.7 + 1.4 * rng.uniform();
    const Magnetization m = Magnetization::from_m(mv);
    const ConditionalHessianSample s = sample_conditional_hessian(ctx, inst.x, m, rng);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) CHECK(s.Z(i, j) == doctest::Approx(s.Z(j, i)).epsilon(1e-12));
    // The correction Z - D + beta W has rank at most 8.
    const Matrix delta = conditional_correction(s, 1.5, hessian_diagonal(1.5, m));
    const Vector ev = numerics::symmetric_eigenvalues(delta);
    int big = 0;
    for (double v : ev) big += std::abs(v) > 1e-9 * (1.0 + std::abs(ev.front()) + std::abs(ev.back()));
    CHECK(big <= 8);
  }

  TEST_CASE("KS distance") {
    const Vector xs{0.1, 0.2, 0.3, 0.4};
    const Vector exact{0.125, 0.375, 0.625, 0.875};
    CHECK(ks_distance(xs, exact) == doctest::Approx(0.125));
    CHECK_THROWS_AS(ks_distance(xs, Vector{0.1}), ParameterError);
  }
}
