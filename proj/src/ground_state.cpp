#include <algorithm>
#include <cmath>
#include <limits>

#include "tapfe/complexity.hpp"
#include "tapfe/kernels.hpp"

namespace tapfe {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

ReducedSup sup_s0_star(double beta, double e, const GroundStateConfig& cfg) {
  if (!(beta > 0.0)) throw ParameterError("beta must be positive");
  if (!(cfg.q_min > 0.0) || !(cfg.q_min < cfg.q_max) || cfg.q_max > 1.0)
    throw ParameterError("ground state: need 0 < q_min < q_max <= 1");
  if (cfg.grid_q < 2 || cfg.grid_delta < 2) throw ParameterError("ground state: grid too small");
  const double dmax = cfg.delta_max > 0.0 ? cfg.delta_max : 0.5 * beta * beta + 3.0 * beta;

  auto value = [&](double q, double delta) {
    if (q < cfg.q_min || q > cfg.q_max || std::abs(delta) > dmax) return kNegInf;
    if (a_of_delta(q, delta, beta) < 0.0) return kNegInf;
    const ReducedPoint p = s0_star(q, delta, e, beta, cfg.inner_tol, cfg.quad_order);
    // Only converged inner solves count.
    return p.converged ? p.s_star : kNegInf;
  };

  ReducedSup best;
  for (int i = 0; i < cfg.grid_q; ++i) {
    const double q = cfg.q_min + (cfg.q_max - cfg.q_min) * i / (cfg.grid_q - 1);
    for (int j = 0; j < cfg.grid_delta; ++j) {
      // a >= 0 is necessary for realisability, i.e. Delta >= -beta^2 (1 - q) / 2.
      const double d_lo = std::max(-dmax, -0.5 * beta * beta * (1.0 - q));
      const double delta = d_lo + (dmax - d_lo) * j / (cfg.grid_delta - 1);
      const double v = value(q, delta);
      if (v > best.value) best = {v, q, delta};
    }
  }
  if (!std::isfinite(best.value)) return best;

  const double init[2] = {best.q, best.delta};
  const double step[2] = {0.5 * (cfg.q_max - cfg.q_min) / (cfg.grid_q - 1),
                          0.5 * dmax / (cfg.grid_delta - 1)};
  const auto nm = numerics::nelder_mead(
      [&](std::span<const double> p) { return -value(p[0], p[1]); }, init, step, 1e-12, 400);
  if (-nm.value > best.value) best = {-nm.value, nm.argmin[0], nm.argmin[1]};
  return best;
}

GroundStateBound ground_state_bound(double beta, const GroundStateConfig& cfg) {
  GroundStateBound out;
  out.beta = beta;
  auto sup = [&](double e) {
    ++out.sup_evaluations;
    return sup_s0_star(beta, e, cfg);
  };

  // Lowest candidate: every TAP value satisfies F >= -log 2 - beta^2/4 - beta ||W||/2
  // roughly; start well below and make sure the sup is negative there.
  const double step = 0.05 * beta;
  double lo = -std::log(2.0) - 0.25 * beta * beta - 1.5 * beta;
  ReducedSup s_lo = sup(lo);
  for (int k = 0; k < 40 && s_lo.value >= 0.0; ++k) {
    lo -= 10.0 * step;
    s_lo = sup(lo);
  }
  if (s_lo.value >= 0.0) throw BracketError("ground_state_bound: sup S0_star nonnegative everywhere scanned");

  double hi = lo;
  ReducedSup s_hi = s_lo;
  const double e_cap = beta * beta + 10.0 * beta;
  while (s_hi.value < 0.0) {
    lo = hi;
    hi += step;
    if (hi > e_cap)
      throw BracketError("ground_state_bound: sup S0_star stays negative up to e = " +
                         std::to_string(e_cap));
    s_hi = sup(hi);
  }
  while (hi - lo > cfg.e_tol) {
    const double mid = 0.5 * (lo + hi);
    const ReducedSup s = sup(mid);
    if (s.value >= 0.0) {
      hi = mid;
      s_hi = s;
    } else {
      lo = mid;
    }
  }
  out.e_threshold = hi;
  out.f1rsb = hi / beta;
  out.at_threshold = s_hi;
  return out;
}

double sk_energy(const Matrix& W, std::span<const double> sigma) {
  const Vector ws = numerics::multiply(W, sigma);
  return -0.5 * kernels::dot(sigma, ws) / double(sigma.size());
}

AnnealResult simulated_annealing(const Matrix& W, const AnnealConfig& cfg,
                                 numerics::RngStream& rng) {
  const std::size_t n = W.rows();
  if (!W.is_square() || n == 0) throw ParameterError("simulated_annealing: W must be square");
  if (!(cfg.beta_start > 0.0) || !(cfg.beta_end >= cfg.beta_start) || cfg.sweeps < 1 ||
      cfg.restarts < 1)
    throw ParameterError("simulated_annealing: bad schedule");

  AnnealResult best;
  best.energy = std::numeric_limits<double>::infinity();
  Vector sigma(n), field(n);
  for (int r = 0; r < cfg.restarts; ++r) {
    for (double& s : sigma) s = rng.rademacher();
    for (std::size_t i = 0; i < n; ++i) field[i] = kernels::dot(W.row(i), sigma);
    auto flip = [&](std::size_t i) {
      const double s = sigma[i];
      for (std::size_t j = 0; j < n; ++j) field[j] -= 2.0 * s * W(j, i);
      sigma[i] = -s;
    };
    // dH for flipping i, H = -<sigma, W sigma>/2.
    auto delta = [&](std::size_t i) { return 2.0 * sigma[i] * (field[i] - W(i, i) * sigma[i]); };

    const double ratio = std::pow(cfg.beta_end / cfg.beta_start, 1.0 / std::max(1, cfg.sweeps - 1));
    double b = cfg.beta_start;
    for (int sweep = 0; sweep < cfg.sweeps; ++sweep, b *= ratio)
      for (std::size_t i = 0; i < n; ++i) {
        const double d = delta(i);
        if (d <= 0.0 || rng.uniform() < std::exp(-b * d)) flip(i);
      }
    for (bool improved = true; improved;) {
      improved = false;
      for (std::size_t i = 0; i < n; ++i)
        if (delta(i) < 0.0) {
          flip(i);
          improved = true;
        }
    }
    const double e = sk_energy(W, sigma);
    if (e < best.energy) {
      best.energy = e;
      best.sigma = sigma;
    }
  }
  return best;
}

}  // namespace tapfe
