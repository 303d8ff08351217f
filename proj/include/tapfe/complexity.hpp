#pragma once

// Annealed complexity of TAP critical points: the tilted Gaussian integral I,
// the functional S and its infimum over multipliers, the lambda = 0 reduction
// S0, the starred quantities, the ground-state bound and the Kac-Rice density
// of the gradient.

#include <array>
#include <optional>
#include <span>

#include "tapfe/free_energy.hpp"
#include "tapfe/matrix.hpp"
#include "tapfe/numerics.hpp"

namespace tapfe {

/// quad_order = 0 selects a composite Gauss-Legendre rule whose panel count
/// grows with the standard deviation of the integration variable; any other
/// value selects Gauss-Hermite of that order.
struct ComplexityConfig {
  double beta = 1.0;
  double lambda = 0.0;
  int quad_order = 0;
  double tol = 1e-10;
  int max_iter = 200;
  double divergence_bound = 1e6;
};

/// Quadrature for E f(mean + sd G). Cached; safe to call concurrently.
const numerics::Quadrature& rule_for_scale(double sd, int quad_order);

/// Order of the multipliers everywhere: (mu, nu, tau, gamma).
using Multipliers = std::array<double, 4>;

struct ComplexityPoint {
  double q = 0.0, phi = 0.0, a = 0.0, e = 0.0;
  Multipliers multipliers{};
  /// -infinity when the minimisation diverged (moments not realisable).
  double s_star = 0.0;
  bool converged = false;
  bool diverged = false;
  double grad_norm = 0.0;
  int iterations = 0;
};

/// log I(q, phi; mu, nu, tau, gamma), x ~ N(beta lambda phi, beta^2 q).
double log_integral_I(double q, double phi, const Multipliers& mult, const ComplexityConfig& cfg);
double integral_I(double q, double phi, const Multipliers& mult, const ComplexityConfig& cfg);

/// u(q, a) = -beta^2 (1 - q^2) / 4 + a / 2.
double u_of(double q, double a, double beta) noexcept;

/// The quadratic term (1/4 beta^2) [a/q - beta lambda phi^2/q - beta^2 (1 - q)]^2.
double s_quadratic(double q, double phi, double a, double beta, double lambda) noexcept;

double s_value(double q, double phi, double a, double e, const Multipliers& mult,
               const ComplexityConfig& cfg);
/// Gradient in the multipliers: tilted moments of (tanh^2, tanh, x tanh,
/// log 2cosh) minus (q, phi, a, u - e).
Multipliers s_gradient(double q, double phi, double a, double e, const Multipliers& mult,
                       const ComplexityConfig& cfg);

/// S_star = inf over multipliers of S, by damped Newton from `init` (zero by default).
ComplexityPoint s_star(double q, double phi, double a, double e, const ComplexityConfig& cfg,
                       const Multipliers& init = {});

// ---------------------------------------------------------------------------
// lambda = 0 reduction in the variables (q, Delta, e), a = beta^2 q (1-q) + 2 q Delta.

using Multipliers0 = std::array<double, 3>;  // (mu, tau, gamma)

struct ReducedPoint {
  double q = 0.0, delta = 0.0, e = 0.0;
  Multipliers0 multipliers{};
  double s_star = 0.0;
  bool converged = false;
  bool diverged = false;
  double grad_norm = 0.0;
};

double a_of_delta(double q, double delta, double beta) noexcept;
double log_integral_I0(double q, const Multipliers0& mult, double beta, int quad_order = 0);
double s0_value(double q, double delta, double e, const Multipliers0& mult, double beta,
                int quad_order = 0);
ReducedPoint s0_star(double q, double delta, double e, double beta, double tol = 1e-10,
                     int quad_order = 0, const Multipliers0& init = {});

/// Multipliers of the physics parametrisation (lambda_C, u_C) mapped to
/// (mu, tau, gamma): mu = lambda_C - Delta^2/(2 beta^2 q), gamma = -u_C,
/// tau = u_C/2 + Delta/(beta^2 q).
Multipliers0 clpr_to_multipliers(double q, double delta, double lambda_c, double u_c,
                                 double beta) noexcept;

// ---------------------------------------------------------------------------
// Starred quantities on the Nishimori line (beta = lambda).

struct StarredQuantities {
  double lambda = 0.0;
  double q_star = 0.0, phi_star = 0.0, a_star = 0.0, e_star = 0.0;
  /// |q_star - E tanh^2(lambda^2 q_star + lambda sqrt(q_star) G)|.
  double residual = 0.0;
  int iterations = 0;
};

/// E tanh^2(lambda^2 q + lambda sqrt(q) G).
double q_star_map(double lambda, double q, int quad_order = 0);
/// Largest root of q = q_star_map(lambda, q): damped iteration from q = 1
/// (damping 1/2), polished by Brent to residual <= tol. Returns q_star = 0 for
/// lambda <= 1.
StarredQuantities solve_q_star(double lambda, double tol = 1e-12, int quad_order = 0);

// ---------------------------------------------------------------------------
// Outer maximisation of S_star over (a, e) at fixed (q, phi).

struct OuterMaximum {
  double a = 0.0, e = 0.0;
  double value = 0.0;
  /// Full four-multiplier S_star re-evaluated at (q, phi, a, e).
  ComplexityPoint check;
};

/// sup over e of S_star equals the three-multiplier problem with gamma = 0;
/// the remaining sup over a is a grid scan on [a_lo, a_hi] refined by golden
/// section. e is recovered as u(q, a) minus the tilted mean of log 2cosh.
OuterMaximum maximize_over_ae(double q, double phi, const ComplexityConfig& cfg, double a_lo,
                              double a_hi, int grid = 41);

// ---------------------------------------------------------------------------
// 1RSB ground-state bound for the SK model (lambda = 0).

struct GroundStateConfig {
  double q_min = 0.05;
  double q_max = 1.0;
  /// Zero selects beta^2 / 2 + 3 beta.
  double delta_max = 0.0;
  int grid_q = 16;
  int grid_delta = 24;
  double e_tol = 1e-6;
  double inner_tol = 1e-10;
  int quad_order = 0;
};

struct ReducedSup {
  double value = -std::numeric_limits<double>::infinity();
  double q = 0.0, delta = 0.0;
};

/// sup over (q, Delta) of S0_star(q, Delta, e): grid, then Nelder-Mead.
ReducedSup sup_s0_star(double beta, double e, const GroundStateConfig& cfg);

struct GroundStateBound {
  double beta = 0.0;
  double e_threshold = 0.0;  // inf{e : sup S0_star >= 0}
  double f1rsb = 0.0;        // e_threshold / beta
  ReducedSup at_threshold;
  int sup_evaluations = 0;
};

/// Scans e upward from a level where the sup is negative, then bisects.
/// Throws BracketError when no sign change is found.
GroundStateBound ground_state_bound(double beta, const GroundStateConfig& cfg = {});

/// SK energy per spin -<sigma, W sigma> / (2n), diagonal included.
double sk_energy(const Matrix& W, std::span<const double> sigma);

struct AnnealConfig {
  double beta_start = 0.1;
  double beta_end = 5.0;
  int sweeps = 2000;
  int restarts = 4;
};

struct AnnealResult {
  Vector sigma;
  double energy = 0.0;  // per spin
};

/// Metropolis single-spin annealing on a geometric beta schedule followed by a
/// greedy zero-temperature quench; best of `restarts` runs.
AnnealResult simulated_annealing(const Matrix& W, const AnnealConfig& cfg,
                                 numerics::RngStream& rng);

// ---------------------------------------------------------------------------
// Kac-Rice density of g_n(m) at zero.

/// u(m) = atanh(m) - (beta lambda/n) <x, m> x + beta^2 (1 - Q) m.
Vector gradient_offset(double beta, double lambda, std::span<const double> x,
                       const Magnetization& m);

/// log p_m(0) for the Gaussian vector g_n(m) = u(m) - beta W m, evaluated as
/// the one-dimensional mixture over y by Gauss-Hermite around the integrand's
/// maximiser (default order 64).
double log_gradient_density(double beta, double lambda, std::span<const double> x,
                            const Magnetization& m, int quad_order = 64);

}  // namespace tapfe
