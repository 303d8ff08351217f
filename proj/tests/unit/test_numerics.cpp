#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "tapfe/numerics.hpp"

using namespace tapfe;
using namespace tapfe::numerics;

TEST_SUITE("numerics") {
  TEST_CASE("random streams are reproducible and separated") {
    RngStream a(5, 1), b(5, 1), c(5, 2);
    for (int i = 0; i < 100; ++i) {
      const auto x = a.next_u64();
      CHECK(x == b.next_u64());
      CHECK(x != c.next_u64());
    }
    RngStream s(5, 1);
    auto t1 = s.substream(3), t2 = s.substream(3), t3 = s.substream(4);
    CHECK(t1.next_u64() == t2.next_u64());
    CHECK(t1.next_u64() != t3.next_u64());
  }

  TEST_CASE("uniform and normal moments") {
    RngStream r(9, 0);
    const int n = 200000;
    double su = 0, sn = 0, sn2 = 0;
    for (int i = 0; i < n; ++i) {
      const double u = r.uniform();
      REQUIRE(u > 0.0);
      REQUIRE(u < 1.0);
      su += u;
      const double g = r.normal();
      sn += g;
      sn2 += g * g;
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(sn / n) < 0.01);
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("GOE entry variances") {
    RngStream r(3, 0);
    const std::size_t n = 400;
    const Matrix w = sample_goe(n, r);
    double off = 0, diag = 0;
    for (std::size_t i = 0; i < n; ++i) {
      diag += w(i, i) * w(i, i);
      for (std::size_t j = 0; j < i; ++j) {
        off += w(i, j) * w(i, j);
        REQUIRE(w(i, j) == w(j, i));
      }
    }
    CHECK(off / (n * (n - 1) / 2.0) * n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(diag / n * n == doctest::Approx(2.0).epsilon(0.2));
    // Semicircle edge.
    CHECK(operator_norm(w) == doctest::Approx(2.0).epsilon(0.05));
  }

  TEST_CASE("Gauss-Hermite reproduces Gaussian moments") {
    for (int order : {8, 32, 128, 512}) {
      const Quadrature q = gauss_hermite(order);
      double m2 = 0, m4 = 0, m6 = 0, s = 0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        const double x = q.nodes[i];
        s += q.weights[i];
        m2 += q.weights[i] * x * x;
        m4 += q.weights[i] * x * x * x * x;
        m6 += q.weights[i] * std::pow(x, 6);
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
      CHECK(m6 == doctest::Approx(15.0).epsilon(1e-11));
    }
    CHECK_THROWS_AS(gauss_hermite(0), ParameterError);
    CHECK_THROWS_AS(gauss_hermite(513), ParameterError);
  }

  TEST_CASE("default rule handles sharp tanh integrands") {
    // Nishimori identity: E tanh(v + sqrt(v) G) = E tanh^2(v + sqrt(v) G).
    for (double v : {0.5, 4.0, 40.0, 400.0}) {
      const auto& q = default_quadrature();
      const double t1 = expect_gaussian([](double x) { return std::tanh(x); }, v, v, q);
      const double t2 = expect_gaussian([](double x) { return std::tanh(x) * std::tanh(x); }, v, v, q);
      CHECK(std::abs(t1 - t2) < 1e-12);
    }
    // E exp(tG) = exp(t^2/2).
    const double e = expect_gaussian([](double x) { return std::exp(x); }, 0.0, 1.0, default_quadrature());
    CHECK(e == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
  }

  TEST_CASE("log_abs_det matches an LU oracle") {
    RngStream r(4, 0);
    for (std::size_t n : {1, 5, 40}) {
      Matrix a = sample_goe(n, r);
      for (std::size_t i = 0; i < n; ++i) a(i, i) += 0.3;
      const Eigen::MatrixXd e = a.eigen();
      const auto lu = e.partialPivLu();
      double ref = 0.0;
      for (Eigen::Index i = 0; i < Eigen::Index(n); ++i) ref += std::log(std::abs(lu.matrixLU()(i, i)));
      CHECK(log_abs_det(a) == doctest::Approx(ref).epsilon(1e-10));
    }
    CHECK(std::isinf(log_abs_det(Matrix::square(3))));
  }

  TEST_CASE("top eigenpair from power iteration and Lanczos") {
    RngStream r(8, 0);
    const Matrix w = sample_goe(200, r);
    const Vector ev = symmetric_eigenvalues(w);
    RngStream r1(1, 1), r2(1, 2);
    const EigenPair p = power_iteration(w, 1e-6, 200000, r1);
    const EigenPair l = lanczos_top(w, 1e-10, 20000, r2);
    CHECK(l.value == doctest::Approx(ev.back()).epsilon(1e-10));
    CHECK(p.value == doctest::Approx(ev.back()).epsilon(1e-6));
    CHECK(l.residual <= 1e-10);
  }

  TEST_CASE("Brent root") {
    const double x = find_root([](double t) { return std::cos(t) - t; }, 0.0, 1.0, 1e-14);
    CHECK(x == doctest::Approx(0.7390851332151607).epsilon(1e-13));
    CHECK_THROWS_AS(find_root([](double t) { return t * t + 1.0; }, -1.0, 1.0, 1e-10), BracketError);
  }

  TEST_CASE("convex minimisation") {
    // f(x) = log(e^{x0} + e^{-x0} + e^{x1}) + x1^2 - 0.3 x0, unique minimiser.
    ConvexProblem p;
    p.objective = [](std::span<const double> x) {
      return std::log(std::exp(x[0]) + std::exp(-x[0]) + std::exp(x[1])) + x[1] * x[1] - 0.3 * x[0];
    };
    p.gradient = [](std::span<const double> x, std::span<double> g) {
      const double s = std::exp(x[0]) + std::exp(-x[0]) + std::exp(x[1]);
      g[0] = (std::exp(x[0]) - std::exp(-x[0])) / s - 0.3;
      g[1] = std::exp(x[1]) / s + 2.0 * x[1];
    };
    const double init[2] = {3.0, -2.0};
    const MinimizeResult r = minimize_convex(p, init, 1e-12);
    CHECK(r.converged);
    CHECK(r.grad_norm <= 1e-12);

    // Linear objective: unbounded below, reported as diverged.
    ConvexProblem lin;
    lin.objective = [](std::span<const double> x) { return x[0]; };
    lin.gradient = [](std::span<const double>, std::span<double> g) { g[0] = 1.0; };
    lin.hessian = [](std::span<const double>, std::span<double> h) { h[0] = 0.0; };
    const double z[1] = {0.0};
    const MinimizeResult d = minimize_convex(lin, z, 1e-10);
    CHECK(!d.converged);
  }

  TEST_CASE("Nelder-Mead and golden section") {
    auto rosen = [](std::span<const double> x) {
      return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    const double init[2] = {-1.2, 1.0}, step[2] = {0.5, 0.5};
    const auto r = nelder_mead(rosen, init, step, 1e-16, 5000);
    CHECK(r.argmin[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(r.argmin[1] == doctest::Approx(1.0).epsilon(1e-3));
    const auto [x, v] = golden_maximize([](double t) { return -(t - 0.7) * (t - 0.7); }, 0.0, 2.0, 1e-10);
    CHECK(x == doctest::Approx(0.7).epsilon(1e-8));
    CHECK(v == doctest::Approx(0.0));
  }

  TEST_CASE("log_2cosh and log_sum_exp are stable") {
    CHECK(log_2cosh(0.0) == doctest::Approx(std::log(2.0)));
    CHECK(log_2cosh(800.0) == doctest::Approx(800.0));
    CHECK(log_2cosh(-800.0) == doctest::Approx(800.0));
    const double v[3] = {1000.0, 1000.0, -1e300};
    CHECK(log_sum_exp(v) == doctest::Approx(1000.0 + std::log(2.0)));
  }
}
