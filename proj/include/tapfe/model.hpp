#pragma once

// Z2 synchronisation instances Y = (lambda/n) x x^T + W and the exact posterior
// oracle for small n.

#include <cstdint>
#include <span>

#include "tapfe/matrix.hpp"
#include "tapfe/numerics.hpp"

namespace tapfe {

struct Instance {
  std::size_t n = 0;
  double lambda = 0.0;
  Vector x;   // entries +1 / -1
  Matrix W;   // GOE noise
  Matrix Y;   // observation
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// x uniform on {-1,+1}^n (drawn first), then W ~ GOE(n) from the same stream.
Instance generate(std::size_t n, double lambda, numerics::RngStream& rng);

/// Builds Y from a given signal and noise matrix.
Instance assemble(double lambda, Vector x, Matrix W);

struct PosteriorSummary {
  Matrix X_bayes;             // E[x x^T | Y]
  double log_partition = 0;   // log sum_sigma exp(beta <sigma, Y sigma> / 2)
};

inline constexpr std::size_t kMaxEnumeration = 22;

/// Exact Gibbs average of sigma sigma^T under exp(beta <sigma, Y sigma>/2);
/// beta = lambda gives the Bayes posterior. Throws CapacityError for n > 22.
PosteriorSummary exact_gibbs(const Matrix& Y, double beta);
PosteriorSummary exact_posterior(const Instance& inst);

/// (1/n^2) ||estimate - x x^T||_F^2.
double matrix_mse(const Matrix& estimate, const Instance& inst);
/// Same for the rank-one estimate m m^T, computed in O(n).
double matrix_mse_rank1(std::span<const double> m, const Instance& inst);
/// (1/n^2) ||m m^T - X||_F^2.
double rank1_distance(std::span<const double> m, const Matrix& X);
/// E[(1/n^2)||X_bayes - x x^T||^2 | Y] = 1 - ||X_bayes||_F^2 / n^2.
double conditional_mmse(const PosteriorSummary& post);

/// Limit of the matrix MMSE, 1 - q_star(lambda)^2.
double mmse_asymptote(double lambda);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Finite-n matrix MMSE averaged over fresh instances, each evaluated exactly
/// by enumeration. Seeds are substreams of rng, one per instance.
MonteCarloEstimate mmse_monte_carlo(std::size_t n, double lambda, std::size_t instances,
                                    const numerics::RngStream& rng);

}  // namespace tapfe
