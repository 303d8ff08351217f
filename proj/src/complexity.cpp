#include "tapfe/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "tapfe/kernels.hpp"

namespace tapfe {
namespace {

using numerics::Quadrature;

enum class Feature { Tanh2, Tanh, XTanh, LogCosh };

constexpr std::array<Feature, 4> kFull = {Feature::Tanh2, Feature::Tanh, Feature::XTanh,
                                          Feature::LogCosh};
constexpr std::array<Feature, 3> kReduced = {Feature::Tanh2, Feature::XTanh, Feature::LogCosh};

double feature_value(Feature f, double x) noexcept {
  switch (f) {
    case Feature::Tanh2: {
      const double t = std::tanh(x);
      return t * t;
    }
    case Feature::Tanh: return std::tanh(x);
    case Feature::XTanh: return x * std::tanh(x);
    case Feature::LogCosh: return numerics::log_2cosh(x);
  }
  return 0.0;
}

// Gaussian N(mean, var) discretised on a quadrature rule and tilted by
// exp(theta . T(x)). Features are evaluated once at construction.
class TiltedGaussian {
 public:
  TiltedGaussian(double mean, double var, const Quadrature& quad, std::span<const Feature> feats)
      : k_(feats.size()), n_(quad.size()) {
    if (!(var > 0.0)) throw ParameterError("tilted integral needs a positive variance");
    const double sd = std::sqrt(var);
    logw_.resize(n_);
    feat_.resize(k_ * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const double x = mean + sd * quad.nodes[i];
      logw_[i] = std::log(quad.weights[i]);
      for (std::size_t j = 0; j < k_; ++j) feat_[j * n_ + i] = feature_value(feats[j], x);
    }
  }

  std::size_t dim() const noexcept { return k_; }

  double log_partition(std::span<const double> theta) const {
    Vector s(n_);
    exponents(theta, s);
    return numerics::log_sum_exp(s);
  }

  // Tilted mean and covariance of the features; returns log Z.
  double moments(std::span<const double> theta, std::span<double> mean,
                 std::span<double> cov) const {
    Vector p(n_);
    exponents(theta, p);
    const double lz = numerics::log_sum_exp(p);
    for (double& v : p) v = std::exp(v - lz);
    for (std::size_t j = 0; j < k_; ++j)
      mean[j] = kernels::dot(p, std::span<const double>(feat_.data() + j * n_, n_));
    if (!cov.empty()) {
      Vector c(n_);
      for (std::size_t j = 0; j < k_; ++j)
        for (std::size_t l = j; l < k_; ++l) {
          const double* fj = feat_.data() + j * n_;
          const double* fl = feat_.data() + l * n_;
          double s = 0.0;
          for (std::size_t i = 0; i < n_; ++i) s += p[i] * (fj[i] - mean[j]) * (fl[i] - mean[l]);
          cov[j * k_ + l] = cov[l * k_ + j] = s;
        }
    }
    return lz;
  }

 private:
  void exponents(std::span<const double> theta, std::span<double> s) const {
    std::copy(logw_.begin(), logw_.end(), s.begin());
    for (std::size_t j = 0; j < k_; ++j)
      if (theta[j] != 0.0)
        kernels::axpy(theta[j], std::span<const double>(feat_.data() + j * n_, n_), s);
  }

  std::size_t k_, n_;
  Vector logw_;
  Vector feat_;
};

// Minimises c - b . theta + log Z(theta).
numerics::MinimizeResult minimize_dual(const TiltedGaussian& fam, std::span<const double> b,
                                       double c, std::span<const double> init, double tol,
                                       int max_iter, double bound) {
  const std::size_t k = fam.dim();
  numerics::ConvexProblem p;
  p.objective = [&](std::span<const double> th) {
    double v = c + fam.log_partition(th);
    for (std::size_t j = 0; j < k; ++j) v -= b[j] * th[j];
    return v;
  };
  p.gradient = [&](std::span<const double> th, std::span<double> g) {
    Vector mean(k);
    fam.moments(th, mean, {});
    for (std::size_t j = 0; j < k; ++j) g[j] = mean[j] - b[j];
  };
  p.hessian = [&](std::span<const double> th, std::span<double> h) {
    Vector mean(k);
    fam.moments(th, mean, h);
  };
  numerics::MinimizeOptions opt;
  opt.max_iter = max_iter;
  opt.divergence_bound = bound;
  return numerics::minimize_convex(p, init, tol, opt);
}

std::array<double, 4> full_targets(double q, double phi, double a, double e, double beta) {
  return {q, phi, a, u_of(q, a, beta) - e};
}

std::array<double, 3> reduced_targets(double q, double delta, double e, double beta) {
  const double a = a_of_delta(q, delta, beta);
  return {q, a, a / 2.0 - 0.25 * beta * beta * (1.0 - q * q) - e};
}

void check_q(double q) {
  if (!(q > 0.0) || q > 1.0) throw ParameterError("q must lie in (0, 1]");
}

}  // namespace

const Quadrature& rule_for_scale(double sd, int quad_order) {
  static std::mutex mu;
  static std::map<int, Quadrature> cache;
  if (quad_order < 0) throw ParameterError("quadrature order must be nonnegative");
  int key;
  if (quad_order > 0) {
    key = -quad_order;
  } else {
    // Panels of width about 0.5 in x over +-16 standard deviations.
    key = std::max(64, int(std::ceil(64.0 * std::min(sd, 64.0))));
  }
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) {
    Quadrature q = key < 0 ? numerics::gauss_hermite(-key)
                           : numerics::composite_gaussian(key, 10, 16.0);
    it = cache.emplace(key, std::move(q)).first;
  }
  return it->second;
}

double u_of(double q, double a, double beta) noexcept {
  return -0.25 * beta * beta * (1.0 - q * q) + 0.5 * a;
}

double s_quadratic(double q, double phi, double a, double beta, double lambda) noexcept {
  const double t = a / q - beta * lambda * phi * phi / q - beta * beta * (1.0 - q);
  return t * t / (4.0 * beta * beta);
}

double log_integral_I(double q, double phi, const Multipliers& mult, const ComplexityConfig& cfg) {
  check_q(q);
  const double var = cfg.beta * cfg.beta * q;
  const TiltedGaussian fam(cfg.beta * cfg.lambda * phi, var,
                           rule_for_scale(std::sqrt(var), cfg.quad_order), kFull);
  return fam.log_partition(mult);
}

double integral_I(double q, double phi, const Multipliers& mult, const ComplexityConfig& cfg) {
  return std::exp(log_integral_I(q, phi, mult, cfg));
}

double s_value(double q, double phi, double a, double e, const Multipliers& mult,
               const ComplexityConfig& cfg) {
  const auto b = full_targets(q, phi, a, e, cfg.beta);
  double v = s_quadratic(q, phi, a, cfg.beta, cfg.lambda) + log_integral_I(q, phi, mult, cfg);
  for (std::size_t j = 0; j < 4; ++j) v -= b[j] * mult[j];
  return v;
}

Multipliers s_gradient(double q, double phi, double a, double e, const Multipliers& mult,
                       const ComplexityConfig& cfg) {
  check_q(q);
  const double var = cfg.beta * cfg.beta * q;
  const TiltedGaussian fam(cfg.beta * cfg.lambda * phi, var,
                           rule_for_scale(std::sqrt(var), cfg.quad_order), kFull);
  const auto b = full_targets(q, phi, a, e, cfg.beta);
  Multipliers g{};
  fam.moments(mult, g, {});
  for (std::size_t j = 0; j < 4; ++j) g[j] -= b[j];
  return g;
}

ComplexityPoint s_star(double q, double phi, double a, double e, const ComplexityConfig& cfg,
                       const Multipliers& init) {
  check_q(q);
  const double var = cfg.beta * cfg.beta * q;
  const TiltedGaussian fam(cfg.beta * cfg.lambda * phi, var,
                           rule_for_scale(std::sqrt(var), cfg.quad_order), kFull);
  const auto b = full_targets(q, phi, a, e, cfg.beta);
  const auto r = minimize_dual(fam, b, s_quadratic(q, phi, a, cfg.beta, cfg.lambda), init,
                               cfg.tol, cfg.max_iter, cfg.divergence_bound);
  ComplexityPoint out;
  out.q = q;
  out.phi = phi;
  out.a = a;
  out.e = e;
  std::copy(r.argmin.begin(), r.argmin.end(), out.multipliers.begin());
  out.s_star = r.value;
  out.converged = r.converged;
  out.diverged = r.diverged;
  out.grad_norm = r.grad_norm;
  out.iterations = r.iterations;
  return out;
}

double a_of_delta(double q, double delta, double beta) noexcept {
  return beta * beta * q * (1.0 - q) + 2.0 * q * delta;
}

double log_integral_I0(double q, const Multipliers0& mult, double beta, int quad_order) {
  check_q(q);
  const double var = beta * beta * q;
  const TiltedGaussian fam(0.0, var, rule_for_scale(std::sqrt(var), quad_order), kReduced);
  return fam.log_partition(mult);
}

double s0_value(double q, double delta, double e, const Multipliers0& mult, double beta,
                int quad_order) {
  const auto b = reduced_targets(q, delta, e, beta);
  double v = delta * delta / (beta * beta) + log_integral_I0(q, mult, beta, quad_order);
  for (std::size_t j = 0; j < 3; ++j) v -= b[j] * mult[j];
  return v;
}

ReducedPoint s0_star(double q, double delta, double e, double beta, double tol, int quad_order,
                     const Multipliers0& init) {
  check_q(q);
  if (!(beta > 0.0)) throw ParameterError("beta must be positive");
  const double var = beta * beta * q;
  const TiltedGaussian fam(0.0, var, rule_for_scale(std::sqrt(var), quad_order), kReduced);
  const auto b = reduced_targets(q, delta, e, beta);
  const auto r = minimize_dual(fam, b, delta * delta / (beta * beta), init, tol, 200, 1e6);
  ReducedPoint out;
  out.q = q;
  out.delta = delta;
  out.e = e;
  std::copy(r.argmin.begin(), r.argmin.end(), out.multipliers.begin());
  out.s_star = r.value;
  out.converged = r.converged;
  out.diverged = r.diverged;
  out.grad_norm = r.grad_norm;
  return out;
}

Multipliers0 clpr_to_multipliers(double q, double delta, double lambda_c, double u_c,
                                 double beta) noexcept {
  const double b2q = beta * beta * q;
  return {lambda_c - delta * delta / (2.0 * b2q), u_c / 2.0 + delta / b2q, -u_c};
}

double q_star_map(double lambda, double q, int quad_order) {
  if (q <= 0.0) return 0.0;
  const double v = lambda * lambda * q;
  return numerics::expect_gaussian(
      [](double x) {
        const double t = std::tanh(x);
        return t * t;
      },
      v, v, rule_for_scale(lambda, quad_order));
}

StarredQuantities solve_q_star(double lambda, double tol, int quad_order) {
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be nonnegative");
  StarredQuantities s;
  s.lambda = lambda;
  const double l2 = lambda * lambda;
  if (lambda <= 1.0) {
    s.e_star = -0.25 * l2 - std::numbers::ln2;
    return s;
  }
  auto h = [&](double q) { return q_star_map(lambda, q, quad_order) - q; };

  double q = 1.0;
  for (int it = 0; it < 200000; ++it) {
    const double next = 0.5 * q + 0.5 * q_star_map(lambda, q, quad_order);
    s.iterations = it + 1;
    const double step = std::abs(next - q);
    q = next;
    if (step <= 1e-13) break;
  }
  if (std::abs(h(q)) > tol) {
    // Bracket the largest root: h < 0 above it, h > 0 just below.
    double width = 1e-6;
    double lo = q, hi = q;
    for (int k = 0; k < 60; ++k) {
      lo = std::max(q - width, 0.5 * q);
      hi = std::min(q + width, 1.0);
      if (h(lo) > 0.0 && h(hi) < 0.0) break;
      width *= 4.0;
    }
    q = numerics::find_root(h, lo, hi, tol);
  }
  s.q_star = q;
  s.residual = std::abs(h(q));
  s.phi_star = q;
  s.a_star = l2 * q;
  const double v = l2 * q;
  const double elog = numerics::expect_gaussian([](double x) { return numerics::log_2cosh(x); },
                                                v, v, rule_for_scale(lambda, quad_order));
  s.e_star = -0.25 * l2 * (1.0 - 2.0 * q - q * q) - elog;
  return s;
}

OuterMaximum maximize_over_ae(double q, double phi, const ComplexityConfig& cfg, double a_lo,
                              double a_hi, int grid) {
  check_q(q);
  if (!(a_lo < a_hi) || grid < 3) throw ParameterError("maximize_over_ae: bad search range");
  const double var = cfg.beta * cfg.beta * q;
  const TiltedGaussian fam(cfg.beta * cfg.lambda * phi, var,
                           rule_for_scale(std::sqrt(var), cfg.quad_order),
                           std::span<const Feature>(kFull.data(), 3));
  Vector warm(3, 0.0);
  auto profile = [&](double a) {
    const std::array<double, 3> b = {q, phi, a};
    const auto r = minimize_dual(fam, b, s_quadratic(q, phi, a, cfg.beta, cfg.lambda), warm,
                                 cfg.tol, cfg.max_iter, cfg.divergence_bound);
    if (r.diverged) return std::pair{-std::numeric_limits<double>::infinity(), r.argmin};
    return std::pair{r.value, r.argmin};
  };

  double best_a = a_lo, best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double a = a_lo + (a_hi - a_lo) * i / (grid - 1);
    auto [v, th] = profile(a);
    if (std::isfinite(v)) warm = th;
    if (v > best_v) {
      best_v = v;
      best_a = a;
    }
  }
  OuterMaximum out;
  if (!std::isfinite(best_v)) {
    out.value = best_v;
    return out;
  }
  const double h = (a_hi - a_lo) / (grid - 1);
  const double lo = std::max(a_lo, best_a - h), hi = std::min(a_hi, best_a + h);
  {
    auto [a, v] = numerics::golden_maximize([&](double a) { return profile(a).first; }, lo, hi,
                                            1e-7 * std::max(1.0, std::abs(best_a)));
    if (v > best_v) {
      best_v = v;
      best_a = a;
    }
  }
  auto [v, th] = profile(best_a);
  Multipliers full = {th[0], th[1], th[2], 0.0};
  const TiltedGaussian fam4(cfg.beta * cfg.lambda * phi, var,
                            rule_for_scale(std::sqrt(var), cfg.quad_order), kFull);
  Multipliers mean{};
  fam4.moments(full, mean, {});
  out.a = best_a;
  out.value = v;
  out.e = u_of(q, best_a, cfg.beta) - mean[3];
  out.check = s_star(q, phi, out.a, out.e, cfg, full);
  return out;
}

// ---------------------------------------------------------------------------

Vector gradient_offset(double beta, double lambda, std::span<const double> x,
                       const Magnetization& m) {
  const std::size_t n = m.size();
  if (x.size() != n || n == 0) throw ParameterError("gradient_offset: length mismatch");
  const double bias = beta * lambda * kernels::dot(x, m.m()) / double(n);
  const double c = beta * beta * m.one_minus_q();
  Vector u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = m.z()[i] - bias * x[i] + c * m.m()[i];
  return u;
}

double log_gradient_density(double beta, double lambda, std::span<const double> x,
                            const Magnetization& m, int quad_order) {
  if (!(beta > 0.0)) throw ParameterError("beta must be positive");
  const std::size_t n = m.size();
  const double nn = double(n);
  const double Q = m.q();
  if (!(Q > 0.0)) throw ParameterError("log_gradient_density: Q(m) must be positive");
  const Vector u = gradient_offset(beta, lambda, x, m);
  const double b2 = beta * beta;

  auto ell = [&](double y) {
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = u[i] - y * m.m()[i];
      r += d * d;
    }
    return -0.5 * nn * std::log(2.0 * std::numbers::pi * b2 * Q) - r / (2.0 * b2 * Q) +
           0.5 * std::log(nn / (2.0 * std::numbers::pi * b2)) - nn * y * y / (2.0 * b2);
  };
  // The log-integrand is quadratic in y; one Newton step from 0 finds its maximiser.
  const double mm = kernels::sum_squares(m.m());
  const double um = kernels::dot(u, m.m());
  const double curv = mm / (b2 * Q) + nn / b2;
  const double y0 = um / (b2 * Q) / curv;
  const double s = 1.0 / std::sqrt(curv);

  const Quadrature rule = numerics::gauss_hermite(quad_order);
  Vector terms(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double t = rule.nodes[i];
    terms[i] = std::log(rule.weights[i]) + ell(y0 + s * t) + 0.5 * t * t;
  }
  return std::log(s) + 0.5 * std::log(2.0 * std::numbers::pi) + numerics::log_sum_exp(terms);
}

}  // namespace tapfe
