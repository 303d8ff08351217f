#include "tapfe/model.hpp"

#include <algorithm>
#include <cmath>

#include "tapfe/complexity.hpp"
#include "tapfe/kernels.hpp"

namespace tapfe {

Instance generate(std::size_t n, double lambda, numerics::RngStream& rng) {
  if (n == 0) throw ParameterError("generate: n must be positive");
  if (!(lambda >= 0.0)) throw ParameterError("generate: lambda must be nonnegative");
  Vector x(n);
  for (double& xi : x) xi = rng.rademacher();
  Matrix W = numerics::sample_goe(n, rng);
  Instance inst = assemble(lambda, std::move(x), std::move(W));
  inst.seed = rng.seed();
  inst.stream = rng.stream_id();
  return inst;
}

Instance assemble(double lambda, Vector x, Matrix W) {
  const std::size_t n = x.size();
  if (W.rows() != n || W.cols() != n) throw ParameterError("assemble: W must be n x n");
  Instance inst;
  inst.n = n;
  inst.lambda = lambda;
  inst.Y = W;
  const double s = lambda / double(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inst.Y(i, j) += s * x[i] * x[j];
  inst.x = std::move(x);
  inst.W = std::move(W);
  return inst;
}

PosteriorSummary exact_gibbs(const Matrix& Y, double beta) {
  const std::size_t n = Y.rows();
  if (!Y.is_square() || n == 0) throw ParameterError("exact_gibbs: Y must be square and nonempty");
  if (n > kMaxEnumeration) throw CapacityError("exact_gibbs: n exceeds the enumeration cap of 22");

  PosteriorSummary out;
  out.X_bayes = Matrix::square(n);
  if (n == 1) {
    out.X_bayes(0, 0) = 1.0;
    out.log_partition = 0.5 * beta * Y(0, 0) + std::log(2.0);
    return out;
  }

  // sigma_{n-1} = +1 fixed; the remaining n-1 spins walk a Gray code, so each
  // step flips one spin and updates the local fields in O(n).
  const std::size_t states = std::size_t(1) << (n - 1);
  Vector sigma(n, 1.0), field(n);
  auto reset = [&] {
    std::fill(sigma.begin(), sigma.end(), 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (double y : Y.row(i)) s += y;
      field[i] = s;
    }
  };
  auto flip = [&](std::size_t k, double& energy) {
    const double sk = sigma[k];
    energy -= 4.0 * sk * (field[k] - Y(k, k) * sk);
    for (std::size_t j = 0; j < n; ++j) field[j] -= 2.0 * sk * Y(j, k);
    sigma[k] = -sk;
  };

  reset();
  double energy = 0.0;
  for (double f : field) energy += f;
  const double energy0 = energy;
  std::vector<double> logw(states);
  logw[0] = 0.5 * beta * energy;
  for (std::size_t t = 1; t < states; ++t) {
    flip(std::size_t(__builtin_ctzll(t)), energy);
    logw[t] = 0.5 * beta * energy;
  }
  const double mx = *std::max_element(logw.begin(), logw.end());

  reset();
  energy = energy0;
  double total = 0.0;
  for (std::size_t t = 0; t < states; ++t) {
    if (t > 0) flip(std::size_t(__builtin_ctzll(t)), energy);
    const double w = std::exp(logw[t] - mx);
    total += w;
    kernels::rank1_update_lower(w, sigma, out.X_bayes.data(), n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.X_bayes(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double v = std::clamp(out.X_bayes(i, j) / total, -1.0, 1.0);
      out.X_bayes(i, j) = v;
      out.X_bayes(j, i) = v;
    }
  }
  out.log_partition = mx + std::log(total) + std::log(2.0);
  return out;
}

PosteriorSummary exact_posterior(const Instance& inst) { return exact_gibbs(inst.Y, inst.lambda); }

double matrix_mse(const Matrix& estimate, const Instance& inst) {
  const std::size_t n = inst.n;
  if (estimate.rows() != n || estimate.cols() != n)
    throw ParameterError("matrix_mse: estimate must be n x n");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double d = estimate(i, j) - inst.x[i] * inst.x[j];
      s += d * d;
    }
  return s / (double(n) * double(n));
}

double matrix_mse_rank1(std::span<const double> m, const Instance& inst) {
  const std::size_t n = inst.n;
  if (m.size() != n) throw ParameterError("matrix_mse_rank1: length mismatch");
  const double mm = kernels::sum_squares(m);
  const double mx = kernels::dot(m, inst.x);
  const double nn = double(n);
  return std::max(0.0, (mm * mm - 2.0 * mx * mx + nn * nn) / (nn * nn));
}

double rank1_distance(std::span<const double> m, const Matrix& X) {
  const std::size_t n = m.size();
  if (X.rows() != n || X.cols() != n) throw ParameterError("rank1_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double d = m[i] * m[j] - X(i, j);
      s += d * d;
    }
  return s / (double(n) * double(n));
}

double conditional_mmse(const PosteriorSummary& post) {
  const double n = double(post.X_bayes.rows());
  return 1.0 - kernels::sum_squares(post.X_bayes.values()) / (n * n);
}

double mmse_asymptote(double lambda) {
  const double q = solve_q_star(lambda).q_star;
  return 1.0 - q * q;
}

MonteCarloEstimate mmse_monte_carlo(std::size_t n, double lambda, std::size_t instances,
                                    const numerics::RngStream& rng) {
  if (instances < 2) throw ParameterError("mmse_monte_carlo: need at least two instances");
  double s = 0.0, s2 = 0.0;
  for (std::size_t k = 0; k < instances; ++k) {
    numerics::RngStream r = rng.substream(k);
    const Instance inst = generate(n, lambda, r);
    const double v = conditional_mmse(exact_posterior(inst));
    s += v;
    s2 += v * v;
  }
  MonteCarloEstimate out;
  out.samples = instances;
  out.mean = s / double(instances);
  const double var = std::max(0.0, (s2 - double(instances) * out.mean * out.mean) /
                                       double(instances - 1));
  out.std_error = std::sqrt(var / double(instances));
  return out;
}

}  // namespace tapfe
