#pragma once

// Shared numerical primitives: counter-based random streams, Gaussian
// quadrature, symmetric-matrix routines, root finding and small convex solvers.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tapfe/error.hpp"
#include "tapfe/matrix.hpp"

namespace tapfe::numerics {

// ---------------------------------------------------------------------------
// Random streams

/// Philox4x32-10 stream. The 64-bit seed is the key and the stream id occupies
/// the upper half of the 128-bit counter, so streams with different ids never
/// share a counter block.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : seed_(seed), stream_id_(stream_id) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Independent child stream, deterministic in (seed, stream_id, tag).
  RngStream substream(std::uint64_t tag) const noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal (Box-Muller; the second variate is cached).
  double normal() noexcept;
  /// Fair coin as +1/-1.
  double rademacher() noexcept { return (next_u64() >> 63) ? 1.0 : -1.0; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// ---------------------------------------------------------------------------
// Quadrature

/// Probabilists' rule: sum_i w_i f(x_i) approximates E f(G), G ~ N(0,1).
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss-Hermite rule for the standard Gaussian weight, 1 <= order <= 512.
Quadrature gauss_hermite(int order);

/// Composite Gauss-Legendre rule against the Gaussian density: `panels` equal
/// panels on [-half_width, half_width] with `points` nodes each, renormalised.
/// Converges geometrically for integrands with poles near the real axis (tanh
/// at large variance), where Gauss-Hermite only converges like exp(-c sqrt(order)).
Quadrature composite_gaussian(int panels, int points, double half_width);

/// Default rule for Gaussian expectations: composite_gaussian(64, 10, 12), cached.
const Quadrature& default_quadrature();

/// Gauss-Hermite of the given order, or the default rule when order is 0.
Quadrature quadrature_for_order(int order);

/// sum_i w_i f(mean + sqrt(variance) x_i). Throws NumericError naming the node
/// when f is not finite there.
template <class F>
double expect_gaussian(F&& f, double mean, double variance, const Quadrature& quad) {
  if (!(variance > 0.0)) throw ParameterError("expect_gaussian: variance must be positive");
  const double sd = std::sqrt(variance);
  double acc = 0.0;
  for (std::size_t i = 0; i < quad.size(); ++i) {
    const double x = mean + sd * quad.nodes[i];
    const double v = f(x);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "expect_gaussian: non-finite integrand at node " << x;
      throw NumericError(os.str());
    }
    acc += quad.weights[i] * v;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Symmetric matrices

/// GOE(n): off-diagonal variance 1/n, diagonal variance 2/n. Entries are drawn
/// row by row over the upper triangle.
Matrix sample_goe(std::size_t n, RngStream& rng);

/// y = A x (dispatched kernel).
Vector multiply(const Matrix& a, std::span<const double> x);

struct EigenPair {
  double value = 0.0;
  Vector vector;
  double residual = 0.0;
  int iterations = 0;
};

/// Top algebraic eigenpair by power iteration on A + c I, c = 1 + max row
/// absolute sum, so the shifted matrix is positive definite. Stops when
/// ||A v - theta v||_2 <= tol; throws ConvergenceError otherwise.
EigenPair power_iteration(const Matrix& a, double tol, int max_iter, RngStream& rng);

/// Same contract as power_iteration, computed with restarted Lanczos and full
/// reorthogonalisation. Much faster when the spectral gap is small.
EigenPair lanczos_top(const Matrix& a, double tol, int max_iter, RngStream& rng);

/// sum_i log|lambda_i(A)| from a Bunch-Kaufman factorisation. Returns
/// -infinity for an exactly singular matrix.
double log_abs_det(const Matrix& a);

/// All eigenvalues in ascending order (dense solver).
Vector symmetric_eigenvalues(const Matrix& a);
double operator_norm(const Matrix& a);

// ---------------------------------------------------------------------------
// Roots and minimisation

/// Brent's method on a sign-changing bracket; returns x with |f(x)| <= tol
/// (or a bracket narrower than machine precision around a sign change).
double find_root(const std::function<double(double)>& f, double lo, double hi, double tol,
                 int max_iter = 500);

struct ConvexProblem {
  std::function<double(std::span<const double>)> objective;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  /// Optional analytic Hessian, row-major k x k. Finite differences of the
  /// gradient are used when absent.
  std::function<void(std::span<const double>, std::span<double>)> hessian;
};

struct MinimizeOptions {
  int max_iter = 200;
  /// Iterate norm beyond which the infimum is reported as -infinity.
  double divergence_bound = 1e6;
};

struct MinimizeResult {
  Vector argmin;
  double value = 0.0;
  double grad_norm = 0.0;
  bool converged = false;
  /// The iterates escaped the divergence bound: the infimum is -infinity.
  bool diverged = false;
  int iterations = 0;
};

/// Damped Newton for smooth convex objectives on R^k (k <= 8).
/// Converged when ||grad|| <= tol, or when the Newton decrement drops below the
/// rounding of the objective and no step decreases it.
MinimizeResult minimize_convex(const ConvexProblem& problem, std::span<const double> init,
                               double tol, const MinimizeOptions& options = {});

struct NelderMeadResult {
  Vector argmin;
  double value = 0.0;
  int evaluations = 0;
};

/// Derivative-free local minimisation. Non-finite values count as +infinity.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> init, std::span<const double> step,
                             double ftol, int max_evals);

/// Golden-section maximisation of a unimodal function on [lo, hi].
std::pair<double, double> golden_maximize(const std::function<double(double)>& f, double lo,
                                          double hi, double xtol);

// ---------------------------------------------------------------------------
// Small scalar helpers used across modules

/// log(2 cosh x) without overflow.
inline double log_2cosh(double x) noexcept {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a));
}

/// log(sum_i exp(v_i)).
double log_sum_exp(std::span<const double> v);

}  // namespace tapfe::numerics
