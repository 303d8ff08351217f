#include <cmath>

#include "doctest.h"
#include "tapfe/free_energy.hpp"
#include "tapfe/model.hpp"
#include "tapfe/solvers.hpp"

using namespace tapfe;

namespace {

Vector random_m(std::size_t n, numerics::RngStream& rng, double r = 0.9) {
  Vector m(n);
  for (double& v : m) v = -r + 2.0 * r * rng.uniform();
  return m;
}

double inf_norm(const Vector& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

TEST_SUITE("free_energy") {
  TEST_CASE("value at m = 0 is -log 2 - beta^2 / 4") {
    numerics::RngStream rng(1, 0);
    const Instance inst = generate(20, 1.0, rng);
    const TapContext ctx(1.7, 1.0, inst.Y);
    const Magnetization m0 = Magnetization::from_m(Vector(20, 0.0));
    CHECK(tap_value(ctx, m0) == doctest::Approx(-std::log(2.0) - 1.7 * 1.7 / 4.0));
    CHECK(inf_norm(tap_gradient(ctx, m0)) == 0.0);
  }

  TEST_CASE("value matches the definition term by term") {
    numerics::RngStream rng(2, 0);
    const std::size_t n = 15;
    const Instance inst = generate(n, 2.0, rng);
    const double beta = 1.4;
    const TapContext ctx(beta, 2.0, inst.Y);
    const Vector mv = random_m(n, rng);
    double ent = 0.0, quad = 0.0, q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = (1 + mv[i]) / 2, r = (1 - mv[i]) / 2;
      ent += -p * std::log(p) - r * std::log(r);
      q += mv[i] * mv[i] / n;
      for (std::size_t j = 0; j < n; ++j) quad += mv[i] * inst.Y(i, j) * mv[j];
    }
    const double ref = -ent / n - beta * quad / (2.0 * n) - beta * beta / 4.0 * (1 - q) * (1 - q);
    CHECK(tap_value(ctx, Magnetization::from_m(mv)) == doctest::Approx(ref).epsilon(1e-13));
  }

  TEST_CASE("z coordinates stay accurate near the boundary") {
    const Vector z{30.0, -25.0, 0.5};
    const Magnetization m = Magnetization::from_z(z);
    CHECK(m.sech2(0) == doctest::Approx(4.0 * std::exp(-60.0)).epsilon(1e-10));
    CHECK(m.one_minus_q() > 0.0);
    CHECK(entropy_of_z(40.0) >= 0.0);
    CHECK(entropy_of_z(0.0) == doctest::Approx(std::log(2.0)));
    const Magnetization c = Magnetization::from_m(Vector{1.0, -1.0, 0.2});
    CHECK(c.clamped());
  }

  TEST_CASE("gradient and Hessian against central differences") {
    numerics::RngStream rng(3, 0);
    const std::size_t n = 12;
    const Instance inst = generate(n, 1.5, rng);
    const TapContext ctx(1.1, 1.5, inst.Y);
    const Vector m0 = random_m(n, rng);
    const Vector g = tap_gradient(ctx, Magnetization::from_m(m0));
    const Matrix H = tap_hessian(ctx, Magnetization::from_m(m0));
    const double h = 1e-5;
    for (std::size_t j = 0; j < n; ++j) {
      Vector p = m0, q = m0;
      p[j] += h;
      q[j] -= h;
      const double fd = (tap_value_scaled(ctx, Magnetization::from_m(p)) -
                         tap_value_scaled(ctx, Magnetization::from_m(q))) / (2 * h);
      CHECK(g[j] == doctest::Approx(fd).epsilon(1e-7));
      const Vector gp = tap_gradient(ctx, Magnetization::from_m(p));
      const Vector gq = tap_gradient(ctx, Magnetization::from_m(q));
      for (std::size_t i = 0; i < n; ++i)
        CHECK(H(i, j) == doctest::Approx((gp[i] - gq[i]) / (2 * h)).epsilon(1e-6).scale(1.0));
    }
  }

  TEST_CASE("onsager_L definition") {
    const Vector mv{0.5, -0.2, 0.9};
    const Magnetization m = Magnetization::from_m(mv);
    double s = 0.0, q = 0.0;
    for (double v : mv) {
      s += -std::log(1 - v * v) / 3.0;
      q += v * v / 3.0;
    }
    CHECK(onsager_L(1.3, m) == doctest::Approx(1.69 * (1 - q) * (1 - q) / 2.0 + s).epsilon(1e-13));
  }
}

TEST_SUITE("solvers") {
  TEST_CASE("Newton reaches a critical point where F equals E") {
    numerics::RngStream rng(4, 0);
    const Instance inst = generate(150, 2.0, rng);
    const TapContext ctx(2.0, 2.0, inst.Y);
    const AmpResult amp = amp_solve(inst, 30, rng);
    const NewtonResult nr = newton_critical_point(ctx, amp.m, 1e-11);
    REQUIRE(nr.converged);
    CHECK(nr.grad_norm <= 1e-11);
    const SpinStatistics st = spin_statistics(nr.m, inst.x, 2.0);
    CHECK(tap_value(ctx, nr.m) == doctest::Approx(st.e).epsilon(1e-10));
    CHECK(inf_norm(tap_equations_residual(ctx, nr.m)) <= 1e-10);
  }

  TEST_CASE("AMP is deterministic and tracks the overlap") {
    numerics::RngStream r1(5, 0), r2(5, 0);
    const Instance inst = generate(800, 2.0, r1);
    generate(800, 2.0, r2);
    const AmpResult a = amp_solve(inst, 40, r1), b = amp_solve(inst, 40, r2);
    CHECK(a.m.m() == b.m.m());
    CHECK(a.trace.size() >= 2);
    CHECK(std::abs(a.trace.overlap.back()) > 0.85);
  }

  TEST_CASE("spectral initialisation modes") {
    numerics::RngStream rng(6, 0);
    const Instance inst = generate(100, 3.0, rng);
    const Magnetization s = spectral_init(inst, InitMode::Sign, rng);
    for (double v : s.m()) CHECK(std::abs(v) == doctest::Approx(1.0 - 1e-6));
    CHECK(default_c0(0.9) == 0.0);
    CHECK(default_c0(2.0) == doctest::Approx(2.0 * std::sqrt(0.75)));
  }

  TEST_CASE("TAP descent never increases F before the Newton polish") {
    numerics::RngStream rng(7, 0);
    const Instance inst = generate(200, 1.8, rng);
    const TapContext ctx(1.8, 1.8, inst.Y);
    const Magnetization init = Magnetization::from_m(random_m(200, rng, 0.3));
    const TapMinimizeResult res = tap_minimize(ctx, inst.x, init);
    CHECK(res.converged);
    const int stop = res.trace.newton_start < 0 ? int(res.trace.size()) : res.trace.newton_start;
    for (int i = 1; i < stop; ++i) CHECK(res.trace.free_energy[i] <= res.trace.free_energy[i - 1] + 1e-12);
    CHECK(res.point.grad_norm <= 1e-10);
  }

  TEST_CASE("mean-field iteration solves its own fixed-point equation") {
    numerics::RngStream rng(8, 0);
    const Instance inst = generate(100, 2.0, rng);
    const AmpResult amp = amp_solve(inst, 30, rng);
    const MfResult mf = mf_solve(inst, amp.m);
    CHECK(mf.converged);
    const TapContext ctx(2.0, 2.0, inst.Y);
    CHECK(inf_norm(mf_fixed_point_residual(ctx, mf.m)) <= 1e-8);
  }

  TEST_CASE("high temperature SK has the single critical point m = 0") {
    numerics::RngStream rng(9, 0);
    const Instance inst = generate(40, 0.0, rng);
    const TapContext ctx(0.5, 0.0, inst.Y);
    EnumerateOptions eo;
    eo.restarts = 40;
    const auto pts = enumerate_critical_points(ctx, inst.x, eo, rng);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].stats.q <= 1e-20);
  }

  TEST_CASE("low temperature SK critical points come in sign pairs") {
    numerics::RngStream rng(12, 0);
    const Instance inst = generate(30, 0.0, rng);
    const TapContext ctx(2.0, 0.0, inst.Y);
    EnumerateOptions eo;
    eo.restarts = 30;
    const auto pts = enumerate_critical_points(ctx, inst.x, eo, rng);
    REQUIRE(pts.size() >= 2);
    for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].value >= pts[i - 1].value);
    for (const auto& p : pts)
      if (p.stats.q > 1e-12) CHECK(p.pair);
  }
}
