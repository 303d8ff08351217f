#pragma once

// The free convolution nu = mu_D [+] semicircle(beta) that approximates the bulk
// spectrum of the conditional TAP Hessian, and a sampler for that Hessian.
//
// Everything is driven by the subordination equation
//   g(z) = (1/n) sum_i 1 / (d_i - z - beta^2 g(z)),
// solved by Newton in g. For Im z > 0 the equation has exactly one root with
// Im g > 0, so enforcing that sign is enough to select the right branch.

#include <complex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tapfe/free_energy.hpp"
#include "tapfe/matrix.hpp"
#include "tapfe/numerics.hpp"

namespace tapfe {

using Complex = std::complex<double>;

class StieltjesSolver {
 public:
  /// Imaginary offset used for real-axis evaluation (with Richardson
  /// extrapolation between eps and 2 eps).
  static constexpr double kRealAxisEps = 1e-6;

  StieltjesSolver(std::span<const double> d, double beta, double tol = 1e-12);

  const Vector& d() const noexcept { return d_; }
  double beta() const noexcept { return beta_; }
  double d_min() const noexcept { return d_min_; }
  double d_max() const noexcept { return d_max_; }

  /// g(z) for Im z > 0; for real z, the continuous extension from above.
  Complex operator()(Complex z) const;
  /// Same, starting Newton from `guess` and falling back to continuation.
  Complex solve(Complex z, Complex guess) const;
  /// Real-axis value with a warm start.
  Complex on_axis(double x, Complex guess) const;
  /// Newton along z + i eta with eta decreasing geometrically to Im z > 0.
  Complex continuation(Complex z) const;

  /// |g - (1/n) sum 1/(d_i - z - beta^2 g)|.
  double residual(Complex z, Complex g) const;

  /// Density (1/pi) Im g(x).
  double density(double x) const;
  /// nu((-inf, x]) from the log-potential: -(1/pi) Im[(1/n) sum log(d_i - w) + beta^2 g^2 / 2].
  double cdf(double x) const;
  double cdf_from(double x, Complex g) const;
  /// cdf at increasing abscissas, warm-starting each point from its neighbour.
  Vector cdf_sorted(std::span<const double> xs) const;

  /// Smallest real root of g = (1/n) sum 1/(d_i - z - beta^2 g) for real z below
  /// every d_i, when it lies on the physical branch (beta^2 (1/n) sum 1/(d_i - w)^2 <= 1).
  std::optional<double> real_root(double z) const;

 private:
  bool newton(Complex z, Complex& g, int max_iter) const;

  Vector d_, weight_;
  double beta_, tol_;
  double d_min_, d_max_;
};

/// g(z) for the spectrum d at inverse temperature beta.
Complex stieltjes(std::span<const double> d, double beta, Complex z, double tol = 1e-12);

/// d_i = 1 / (1 - m_i^2) + beta^2 (1 - Q(m)), computed from z = atanh m.
Vector hessian_diagonal(double beta, const Magnetization& m);

struct DensityOptions {
  /// Initial nodes per unit length on each covered interval (at least 32 per interval).
  double nodes_per_unit = 40.0;
  /// A cell is split while |trapezoid mass - cdf increment| exceeds this.
  double refine_tol = 1e-7;
  int max_nodes = 400000;
  double threshold = 1e-9;
};

struct SpectralMeasure {
  Vector d;
  double beta = 0.0;
  Vector grid;
  Vector density;
  /// Smallest and largest points where the density exceeds the threshold.
  double support_lo = 0.0, support_hi = 0.0;
  /// Maximal intervals on which the density exceeds the threshold.
  std::vector<std::pair<double, double>> components;
  /// Stieltjes transform at 0 when 0 lies below the support.
  std::optional<double> g0;
  /// Trapezoid integral of the density over the grid.
  double mass = 0.0;
};

/// Density on an adaptive grid covering [d_i - 2 beta - 1, d_i + 2 beta + 1] for every i.
SpectralMeasure spectral_measure(std::span<const double> d, double beta,
                                 const DensityOptions& opt = {});

struct EdgeProfile {
  double edge = 0.0;
  Vector offsets;
  Vector density;
  /// Cube-root envelope (3 |z - z0| / (4 pi^3 beta))^(1/3) at the offsets.
  Vector envelope;
  /// Least-squares slope of log f against log offset.
  double slope = 0.0;
};

/// Density just inside an edge (direction +1 for a left edge, -1 for a right edge).
EdgeProfile edge_profile(const StieltjesSolver& solver, double edge, int direction,
                         std::span<const double> offsets);

struct LogPotential {
  double g0 = 0.0;
  /// int log x nu(dx) = R(g0), R(g) = beta^2 g^2 / 2 + (1/n) sum log(d_i - beta^2 g).
  double log_integral = 0.0;
  /// R(1 - q), which equals L(m) when d comes from m.
  double L = 0.0;
  double gap = 0.0;
};

/// Throws DomainError when 0 is not below the support (no admissible real g(0)).
LogPotential log_potential(std::span<const double> d, double beta, double q);

struct ConditionalHessianSample {
  Matrix Z;
  /// The GOE draw used to build Z.
  Matrix W;
};

/// Z = D - beta W + Delta with a fresh W ~ GOE(n), i.e. the Hessian H_n(m)
/// conditioned on g_n(m) = 0. The bias term uses (beta lambda / n) x x^T.
ConditionalHessianSample sample_conditional_hessian(const TapContext& ctx,
                                                    std::span<const double> x,
                                                    const Magnetization& m,
                                                    numerics::RngStream& rng);

/// Delta = Z - D + beta W.
Matrix conditional_correction(const ConditionalHessianSample& s, double beta,
                              std::span<const double> d);

/// sup_x |F_emp(x) - F(x)| for sorted samples against a continuous cdf.
double ks_distance(std::span<const double> sorted_samples, std::span<const double> cdf_values);

}  // namespace tapfe
