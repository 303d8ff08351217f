#include <cmath>

#include "doctest.h"
#include "tapfe/complexity.hpp"
#include "tapfe/model.hpp"

using namespace tapfe;

TEST_SUITE("complexity") {
  TEST_CASE("q_star examples") {
    CHECK(solve_q_star(0.8).q_star == 0.0);
    CHECK(solve_q_star(1.0).q_star == 0.0);
    const StarredQuantities hi = solve_q_star(20.0);
    CHECK(hi.q_star >= 0.999);
    const StarredQuantities st = solve_q_star(2.0);
    CHECK(st.q_star == doctest::Approx(0.916511011038).epsilon(1e-9));
    CHECK(st.residual <= 1e-10);
    CHECK(q_star_map(2.0, st.q_star) == doctest::Approx(st.q_star).epsilon(1e-12));
    // Starred quantities on the Nishimori line.
    CHECK(st.phi_star == doctest::Approx(st.q_star));
    CHECK(st.a_star == doctest::Approx(4.0 * st.q_star));
  }

  TEST_CASE("Gauss-Hermite and the composite rule agree") {
    const Multipliers mult{0.2, -0.1, 0.05, 0.3};
    ComplexityConfig a, b;
    a.beta = b.beta = 1.5;
    a.lambda = b.lambda = 1.2;
    b.quad_order = 200;
    CHECK(log_integral_I(0.6, 0.4, mult, a) ==
          doctest::Approx(log_integral_I(0.6, 0.4, mult, b)).epsilon(1e-10));
    CHECK(log_integral_I(0.6, 0.4, Multipliers{}, a) == doctest::Approx(0.0).scale(1.0));
    CHECK(log_integral_I0(0.6, Multipliers0{}, 1.5) == doctest::Approx(0.0).scale(1.0));
  }

  TEST_CASE("S reduces to S0 at lambda = 0, phi = 0, nu = 0") {
    ComplexityConfig cfg;
    cfg.beta = 1.7;
    cfg.lambda = 0.0;
    for (auto [q, delta, e] : {std::tuple{0.4, 0.3, -0.9}, std::tuple{0.8, -0.2, -1.3}}) {
      const double a = a_of_delta(q, delta, cfg.beta);
      const Multipliers0 m0{0.3, -0.2, 0.1};
      const Multipliers m{m0[0], 0.0, m0[1], m0[2]};
      CHECK(s_value(q, 0.0, a, e, m, cfg) ==
            doctest::Approx(s0_value(q, delta, e, m0, cfg.beta)).epsilon(1e-12));
    }
    CHECK(s_quadratic(0.5, 0.0, a_of_delta(0.5, 0.7, 2.0), 2.0, 0.0) ==
          doctest::Approx(0.49 / 4.0).epsilon(1e-14));
  }

  TEST_CASE("gradient of S in the multipliers") {
    ComplexityConfig cfg;
    cfg.beta = 1.3;
    cfg.lambda = 1.1;
    const Multipliers m{0.1, -0.2, 0.15, -0.05};
    const double q = 0.55, phi = 0.3, a = 0.9, e = -0.8, h = 1e-6;
    const Multipliers g = s_gradient(q, phi, a, e, m, cfg);
    for (int k = 0; k < 4; ++k) {
      Multipliers p = m, r = m;
      p[k] += h;
      r[k] -= h;
      CHECK(g[k] == doctest::Approx((s_value(q, phi, a, e, p, cfg) - s_value(q, phi, a, e, r, cfg)) / (2 * h))
                        .epsilon(1e-6));
    }
  }

  TEST_CASE("starred point gives zero complexity") {
    for (double lambda : {1.5, 2.0, 4.0}) {
      const StarredQuantities st = solve_q_star(lambda);
      ComplexityConfig cfg;
      cfg.beta = cfg.lambda = lambda;
      const ComplexityPoint p = s_star(st.q_star, st.phi_star, st.a_star, st.e_star, cfg);
      CHECK(std::abs(p.s_star) <= 1e-9);
    }
  }

  TEST_CASE("reduced complexity against an independent quadrature oracle") {
    // Value computed separately with adaptive quadrature and Nelder-Mead.
    const ReducedPoint p = s0_star(0.603769, -3.76636, -5.0, 5.0);
    REQUIRE(p.converged);
    CHECK(p.s_star == doctest::Approx(0.28131).epsilon(2e-4));
  }

  TEST_CASE("inner problem is convex: random starts agree") {
    numerics::RngStream rng(12, 0);
    const ReducedPoint ref = s0_star(0.603769, -3.76636, -5.0, 5.0);
    REQUIRE(ref.converged);
    for (int k = 0; k < 5; ++k) {
      const Multipliers0 init{0.1 * rng.normal(), 0.1 * rng.normal(), 0.3 * rng.normal()};
      const ReducedPoint p = s0_star(0.603769, -3.76636, -5.0, 5.0, 1e-10, 0, init);
      CHECK(p.converged);
      CHECK(p.s_star == doctest::Approx(ref.s_star).epsilon(1e-8).scale(1.0));
    }
  }

  TEST_CASE("CLPR parametrisation maps to the multipliers") {
    const double q = 0.6, delta = 0.25, beta = 1.5, lc = 0.4, uc = -0.3;
    const Multipliers0 m = clpr_to_multipliers(q, delta, lc, uc, beta);
    CHECK(m[0] == doctest::Approx(lc - delta * delta / (2 * beta * beta * q)));
    CHECK(m[1] == doctest::Approx(uc / 2 + delta / (beta * beta * q)));
    CHECK(m[2] == doctest::Approx(-uc));
  }

  TEST_CASE("gradient density matches the exact Gaussian law of W m") {
    // W m ~ N(0, (|m|^2 I + m m^T) / n), so g = u - beta W m is Gaussian with
    // an explicit rank-one covariance.
    numerics::RngStream rng(13, 0);
    for (std::size_t n : {6, 25}) {
      for (bool constant : {true, false}) {
        const double beta = 1.2, lambda = 1.2;
        Vector x(n), mv(n);
        for (double& v : x) v = rng.rademacher();
        for (double& v : mv) v = constant ? 0.4 : -0.8 + 1.6 * rng.uniform();
        const Magnetization m = Magnetization::from_m(mv);
        const Vector u = gradient_offset(beta, lambda, x, m);
        double mm = 0.0, um = 0.0, uu = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          mm += mv[i] * mv[i];
          um += u[i] * mv[i];
          uu += u[i] * u[i];
        }
        const double s = beta * beta * mm / double(n);
        const double quad = (uu - um * um / (2.0 * mm)) / s;
        const double ref = -0.5 * double(n) * std::log(2.0 * M_PI * s) - 0.5 * std::log(2.0) - 0.5 * quad;
        CHECK(log_gradient_density(beta, lambda, x, m) == doctest::Approx(ref).epsilon(1e-9));
      }
    }
  }
}

TEST_SUITE("ground_state") {
  TEST_CASE("annealing energies are bounded and improve with effort") {
    numerics::RngStream rng(14, 0);
    const Matrix W = numerics::sample_goe(60, rng);
    AnnealConfig quick;
    quick.sweeps = 20;
    quick.restarts = 1;
    const AnnealResult a = simulated_annealing(W, quick, rng);
    const AnnealResult b = simulated_annealing(W, AnnealConfig{}, rng);
    CHECK(sk_energy(W, b.sigma) == doctest::Approx(b.energy));
    CHECK(b.energy <= a.energy + 1e-12);
    CHECK(b.energy > -1.0);
    CHECK(b.energy < -0.6);
  }
}
