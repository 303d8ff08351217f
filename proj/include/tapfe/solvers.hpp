#pragma once

// AMP with spectral initialisation, TAP minimisation, naive mean-field
// iteration and Newton refinement of TAP critical points.

#include <optional>
#include <span>
#include <vector>

#include "tapfe/free_energy.hpp"
#include "tapfe/model.hpp"
#include "tapfe/numerics.hpp"

namespace tapfe {

struct SolverTrace {
  std::vector<int> iteration;
  Vector overlap;      // <m, x> / n
  Vector q;            // Q(m)
  Vector free_energy;  // objective value (TAP or MF)
  Vector residual;     // fixed-point or gradient sup-norm
  /// First record produced by the Newton polish, or -1 when no polish ran.
  int newton_start = -1;

  void record(int it, double overlap_, double q_, double f, double r);
  std::size_t size() const noexcept { return iteration.size(); }
};

struct CriticalPoint {
  Magnetization m;
  SpinStatistics stats;
  double value = 0.0;  // F(m)
  double grad_norm = 0.0;  // ||g_n||_inf
  /// Smallest eigenvalue of H_n, NaN when not computed.
  double hessian_min_eig = std::numeric_limits<double>::quiet_NaN();
  int multiplicity_hint = 1;
  /// -m was verified to be a critical point too.
  bool pair = false;
  bool converged = false;
};

/// Assembles a CriticalPoint record at m.
CriticalPoint describe_point(const TapContext& ctx, std::span<const double> x,
                             const Magnetization& m, bool with_hessian);

/// Largest |z_i| any critical point can have: beta max_i sum_j |Y_ij| + beta^2 + 1.
double critical_z_bound(const TapContext& ctx);

// ---------------------------------------------------------------------------

enum class InitMode { Sign, Amp };

/// c0(lambda) = lambda sqrt(1 - lambda^-2) (zero for lambda <= 1).
double default_c0(double lambda);

/// Principal eigenvector v1 of Y (restarted Lanczos, residual <= 1e-8).
numerics::EigenPair principal_eigenvector(const Matrix& Y, numerics::RngStream& rng);

/// Sign mode: m0 = (1 - 1e-6) sign(v1). Amp mode: m0 = tanh(c0 sqrt(n) v1).
Magnetization spectral_init(const Instance& inst, InitMode mode, numerics::RngStream& rng,
                            std::optional<double> c0 = std::nullopt);

struct AmpResult {
  Magnetization m;
  SolverTrace trace;
  int iterations = 0;
  bool stopped_early = false;
};

/// m^{k+1} = tanh(lambda Y m^k - lambda^2 (1 - Q(m^k)) m^{k-1}), m^{-1} = 0,
/// stopping early when ||m^{k+1} - m^k||_2 / sqrt(n) <= stop_tol.
AmpResult amp_solve(const Instance& inst, int k_max, numerics::RngStream& rng,
                    std::optional<double> c0 = std::nullopt, double stop_tol = 1e-7);

// ---------------------------------------------------------------------------

struct NewtonResult {
  Magnetization m;
  double grad_norm = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Newton on g_n(tanh z) = 0 in z coordinates with the Jacobian written as
/// I + K diag(sech^2 z), which stays well conditioned when |z| is large.
/// Steps are backtracked on ||g_n||_2 and z is kept inside +-z_max.
NewtonResult newton_critical_point(const TapContext& ctx, const Magnetization& init, double tol,
                                   int max_iter = 100, double z_max = 0.0);

struct TapMinimizeOptions {
  double tol = 1e-10;
  int max_descent = 20000;
  /// Switch from descent to Newton once ||g_n||_inf drops below this.
  double switch_tol = 1e-4;
  int max_newton = 50;
  /// Zero selects critical_z_bound(ctx).
  double z_max = 0.0;
  bool hessian_eig = false;
};

struct TapMinimizeResult {
  CriticalPoint point;
  SolverTrace trace;
  bool converged = false;
};

/// Descent on F in z = atanh(m) along -g_n (a descent direction since
/// dF/dz_i = g_i sech^2(z_i) / n) with Armijo backtracking, then Newton polish.
TapMinimizeResult tap_minimize(const TapContext& ctx, std::span<const double> x,
                               const Magnetization& init, const TapMinimizeOptions& opt = {});
/// Nishimori line: beta = lambda = inst.lambda.
TapMinimizeResult tap_minimize(const Instance& inst, const Magnetization& init, double tol = 1e-10);

struct MfResult {
  Magnetization m;
  SolverTrace trace;
  double residual = 0.0;  // ||m - tanh(beta Y m)||_inf
  bool converged = false;
  bool cycling = false;
};

/// m <- (1 - damping) tanh(beta Y m) + damping m until the residual is <= tol.
/// When the residual stops improving the best iterate is returned, flagged.
MfResult mf_solve(const TapContext& ctx, std::span<const double> x, const Magnetization& init,
                  double damping = 0.5, double tol = 1e-8, int max_iter = 20000);
MfResult mf_solve(const Instance& inst, const Magnetization& init, double damping = 0.5);

struct EnumerateOptions {
  int restarts = 100;
  double tol = 1e-10;
  /// Points closer than dedupe_radius sqrt(n) (up to sign) are merged.
  double dedupe_radius = 1e-5;
  /// Random starts draw z_i uniformly from [-init_range, init_range].
  double init_range = 3.0;
  int max_newton = 100;
  bool include_spectral = true;
};

/// Multistart Newton (zero, spectral and random z starts), deduplicated modulo
/// the global sign flip. Results are sorted by F.
std::vector<CriticalPoint> enumerate_critical_points(const TapContext& ctx,
                                                     std::span<const double> x,
                                                     const EnumerateOptions& opt,
                                                     numerics::RngStream& rng);

}  // namespace tapfe
