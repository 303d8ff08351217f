#pragma once

// TAP and naive mean-field objectives. Values are per spin (F); gradients and
// Hessians are those of the scaled objective f_n = n F.
//
// A Magnetization keeps both m and z = atanh(m). Critical points at moderate
// signal strength have |z_i| in the tens, where m_i rounds to +-1 in double
// precision; every quantity that needs 1 - m_i^2 is computed from z.

#include <span>

#include "tapfe/matrix.hpp"

namespace tapfe {

class Magnetization {
 public:
  Magnetization() = default;

  /// Entries with |m_i| > 1 - 1e-12 are clamped to that bound and flagged.
  static Magnetization from_m(std::span<const double> m);
  /// m = tanh(z); any finite z is accepted.
  static Magnetization from_z(std::span<const double> z);

  std::size_t size() const noexcept { return m_.size(); }
  const Vector& m() const noexcept { return m_; }
  const Vector& z() const noexcept { return z_; }
  bool clamped() const noexcept { return clamped_; }

  /// Q = ||m||^2 / n.
  double q() const noexcept { return q_; }
  /// 1 - Q, computed as the mean of sech^2(z) so it stays accurate near Q = 1.
  double one_minus_q() const noexcept { return one_minus_q_; }
  /// 1 - m_i^2 = sech^2(z_i).
  double sech2(std::size_t i) const noexcept { return sech2_[i]; }

 private:
  void finish();
  Vector m_, z_, sech2_;
  double q_ = 0.0, one_minus_q_ = 1.0;
  bool clamped_ = false;
};

struct SpinStatistics {
  double q = 0.0;    // ||m||^2 / n
  double phi = 0.0;  // <x, m> / n
  double a = 0.0;    // (1/n) sum m_i atanh m_i
  double e = 0.0;    // critical-point energy E(m)
};

/// Inverse temperature beta, signal strength lambda and the coupling matrix Y
/// (which already contains the (lambda/n) x x^T bias). Non-owning.
struct TapContext {
  double beta = 1.0;
  double lambda = 0.0;
  const Matrix* Y = nullptr;

  TapContext(double beta_, double lambda_, const Matrix& y);
  std::size_t n() const noexcept { return Y->rows(); }
};

/// Binary entropy h(tanh z), stable for large |z|.
double entropy_of_z(double z) noexcept;

/// F(m) = -(1/n) sum h(m_i) - (beta/2n) <m, Y m> - (beta^2/4) (1 - Q)^2.
double tap_value(const TapContext& ctx, const Magnetization& m);
/// n F(m).
double tap_value_scaled(const TapContext& ctx, const Magnetization& m);
/// g_n = atanh(m) - beta Y m + beta^2 (1 - Q) m.
Vector tap_gradient(const TapContext& ctx, const Magnetization& m);
/// H_n = diag(1/(1 - m^2)) - beta Y + beta^2 (1 - Q) I - (2 beta^2/n) m m^T.
Matrix tap_hessian(const TapContext& ctx, const Magnetization& m);
/// m - tanh(beta Y m - beta^2 (1 - Q) m).
Vector tap_equations_residual(const TapContext& ctx, const Magnetization& m);

/// (Q, M, A, E) with M measured against x (pass all ones for the gauge x = 1).
SpinStatistics spin_statistics(const Magnetization& m, std::span<const double> x, double beta);

/// Naive mean-field objective at inverse temperature ctx.beta (beta = lambda on
/// the Nishimori line): -(1/n) sum h(m_i) - (beta/2n) <m, Y m>.
double mf_value(const TapContext& ctx, const Magnetization& m);
/// m - tanh(beta Y m).
Vector mf_fixed_point_residual(const TapContext& ctx, const Magnetization& m);

/// L(m) = beta^2 (1 - Q)^2 / 2 + (1/n) sum log(1 / (1 - m_i^2)).
double onsager_L(double beta, const Magnetization& m);

}  // namespace tapfe
