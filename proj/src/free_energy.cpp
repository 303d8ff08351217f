#include "tapfe/free_energy.hpp"

#include <cmath>
#include <numbers>

#include "tapfe/error.hpp"
#include "tapfe/kernels.hpp"
#include "tapfe/numerics.hpp"

namespace tapfe {
namespace {

constexpr double kClamp = 1.0 - 1e-12;

double sech2_of(double z) noexcept {
  const double e = std::exp(-2.0 * std::abs(z));
  return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

// log(1 / (1 - tanh(z)^2)) = 2 log cosh z
double log_cosh2(double z) noexcept {
  return 2.0 * (numerics::log_2cosh(z) - std::numbers::ln2);
}

void check_size(const TapContext& ctx, const Magnetization& m) {
  if (m.size() != ctx.n() || m.size() == 0)
    throw ParameterError("magnetization length does not match the coupling matrix");
}

}  // namespace

Magnetization Magnetization::from_m(std::span<const double> m) {
  Magnetization out;
  out.m_.assign(m.begin(), m.end());
  out.z_.resize(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    double v = m[i];
    if (!std::isfinite(v)) throw ParameterError("magnetization entry is not finite");
    if (std::abs(v) > kClamp) {
      v = std::copysign(kClamp, v);
      out.clamped_ = true;
    }
    out.m_[i] = v;
    out.z_[i] = std::atanh(v);
  }
  out.finish();
  return out;
}

Magnetization Magnetization::from_z(std::span<const double> z) {
  Magnetization out;
  out.z_.assign(z.begin(), z.end());
  out.m_.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z[i])) throw ParameterError("z entry is not finite");
    out.m_[i] = std::tanh(z[i]);
  }
  out.finish();
  return out;
}

void Magnetization::finish() {
  const std::size_t n = m_.size();
  sech2_.resize(n);
  double s = 0.0, q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sech2_[i] = sech2_of(z_[i]);
    s += sech2_[i];
    q += m_[i] * m_[i];
  }
  q_ = n ? q / double(n) : 0.0;
  one_minus_q_ = n ? s / double(n) : 1.0;
}

TapContext::TapContext(double beta_, double lambda_, const Matrix& y)
    : beta(beta_), lambda(lambda_), Y(&y) {
  if (!(beta > 0.0)) throw ParameterError("beta must be positive");
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be nonnegative");
  if (!y.is_square()) throw ParameterError("coupling matrix must be square");
}

double entropy_of_z(double z) noexcept {
  const double a = std::abs(z);
  const double e = std::exp(-2.0 * a);
  return std::log1p(e) + a * 2.0 * e / (1.0 + e);
}

double tap_value(const TapContext& ctx, const Magnetization& m) {
  check_size(ctx, m);
  const double n = double(m.size());
  const Vector ym = numerics::multiply(*ctx.Y, m.m());
  double ent = 0.0;
  for (double z : m.z()) ent += entropy_of_z(z);
  const double omq = m.one_minus_q();
  return -ent / n - 0.5 * ctx.beta * kernels::dot(m.m(), ym) / n -
         0.25 * ctx.beta * ctx.beta * omq * omq;
}

double tap_value_scaled(const TapContext& ctx, const Magnetization& m) {
  return double(m.size()) * tap_value(ctx, m);
}

Vector tap_gradient(const TapContext& ctx, const Magnetization& m) {
  check_size(ctx, m);
  Vector g = numerics::multiply(*ctx.Y, m.m());
  const double c = ctx.beta * ctx.beta * m.one_minus_q();
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = m.z()[i] - ctx.beta * g[i] + c * m.m()[i];
  return g;
}

Matrix tap_hessian(const TapContext& ctx, const Magnetization& m) {
  check_size(ctx, m);
  const std::size_t n = m.size();
  const double b2 = ctx.beta * ctx.beta;
  const double shift = b2 * m.one_minus_q();
  const double rank1 = 2.0 * b2 / double(n);
  Matrix h = Matrix::square(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mi = m.m()[i];
    for (std::size_t j = 0; j < n; ++j)
      h(i, j) = -ctx.beta * (*ctx.Y)(i, j) - rank1 * mi * m.m()[j];
    h(i, i) += 1.0 / m.sech2(i) + shift;
  }
  return h;
}

Vector tap_equations_residual(const TapContext& ctx, const Magnetization& m) {
  check_size(ctx, m);
  Vector r = numerics::multiply(*ctx.Y, m.m());
  const double c = ctx.beta * ctx.beta * m.one_minus_q();
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = m.m()[i] - std::tanh(ctx.beta * r[i] - c * m.m()[i]);
  return r;
}

SpinStatistics spin_statistics(const Magnetization& m, std::span<const double> x, double beta) {
  if (x.size() != m.size() || m.size() == 0)
    throw ParameterError("spin_statistics: length mismatch");
  const double n = double(m.size());
  SpinStatistics s;
  s.q = m.q();
  s.phi = kernels::dot(m.m(), x) / n;
  double a = 0.0, ent = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double za = m.z()[i] * m.m()[i];
    a += za;
    ent += entropy_of_z(m.z()[i]) + 0.5 * za;
  }
  s.a = a / n;
  const double omq = m.one_minus_q();
  // 1 - Q^2 = (1 - Q)(1 + Q)
  s.e = -ent / n - 0.25 * beta * beta * omq * (2.0 - omq);
  return s;
}

double mf_value(const TapContext& ctx, const Magnetization& m) {
  check_size(ctx, m);
  const double n = double(m.size());
  const Vector ym = numerics::multiply(*ctx.Y, m.m());
  double ent = 0.0;
  for (double z : m.z()) ent += entropy_of_z(z);
  return -ent / n - 0.5 * ctx.beta * kernels::dot(m.m(), ym) / n;
}

Vector mf_fixed_point_residual(const TapContext& ctx, const Magnetization& m) {
  check_size(ctx, m);
  Vector r = numerics::multiply(*ctx.Y, m.m());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = m.m()[i] - std::tanh(ctx.beta * r[i]);
  return r;
}

double onsager_L(double beta, const Magnetization& m) {
  if (m.size() == 0) throw ParameterError("onsager_L: empty magnetization");
  double s = 0.0;
  for (double z : m.z()) s += log_cosh2(z);
  const double omq = m.one_minus_q();
  return 0.5 * beta * beta * omq * omq + s / double(m.size());
}

}  // namespace tapfe
