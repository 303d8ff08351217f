#include "tapfe/solvers.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>

#include "tapfe/error.hpp"
#include "tapfe/kernels.hpp"

namespace tapfe {
namespace {

double sup_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

double overlap_of(const Magnetization& m, std::span<const double> x) {
  return kernels::dot(m.m(), x) / double(m.size());
}

// Objective pieces that only need the field Y m.
double value_from_field(double beta, const Magnetization& m, std::span<const double> ym,
                        bool onsager) {
  const double n = double(m.size());
  double ent = 0.0;
  for (double z : m.z()) ent += entropy_of_z(z);
  double v = -ent / n - 0.5 * beta * kernels::dot(m.m(), ym) / n;
  if (onsager) v -= 0.25 * beta * beta * m.one_minus_q() * m.one_minus_q();
  return v;
}

struct TapState {
  Magnetization mag;
  Vector ym;
  Vector g;
  double value = 0.0;
};

TapState tap_state(const TapContext& ctx, Magnetization mag) {
  TapState s;
  s.ym = numerics::multiply(*ctx.Y, mag.m());
  const double c = ctx.beta * ctx.beta * mag.one_minus_q();
  s.g.resize(mag.size());
  for (std::size_t i = 0; i < mag.size(); ++i)
    s.g[i] = mag.z()[i] - ctx.beta * s.ym[i] + c * mag.m()[i];
  s.value = value_from_field(ctx.beta, mag, s.ym, true);
  s.mag = std::move(mag);
  return s;
}

Magnetization clamp_z(const Vector& z, double z_max) {
  Vector c(z);
  for (double& v : c) v = std::clamp(v, -z_max, z_max);
  return Magnetization::from_z(c);
}

double smallest_eigenvalue(const Matrix& h) {
  for (double v : h.values())
    if (!std::isfinite(v)) return std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd a = h.eigen();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()[0];
}

}  // namespace

void SolverTrace::record(int it, double overlap_, double q_, double f, double r) {
  iteration.push_back(it);
  overlap.push_back(overlap_);
  q.push_back(q_);
  free_energy.push_back(f);
  residual.push_back(r);
}

CriticalPoint describe_point(const TapContext& ctx, std::span<const double> x,
                             const Magnetization& m, bool with_hessian) {
  CriticalPoint p;
  p.m = m;
  p.stats = spin_statistics(m, x, ctx.beta);
  const TapState s = tap_state(ctx, m);
  p.value = s.value;
  p.grad_norm = sup_norm(s.g);
  if (with_hessian) p.hessian_min_eig = smallest_eigenvalue(tap_hessian(ctx, m));
  return p;
}

double critical_z_bound(const TapContext& ctx) {
  double row = 0.0;
  for (std::size_t i = 0; i < ctx.n(); ++i) {
    double s = 0.0;
    for (double v : ctx.Y->row(i)) s += std::abs(v);
    row = std::max(row, s);
  }
  return ctx.beta * row + ctx.beta * ctx.beta + 1.0;
}

// ---------------------------------------------------------------------------

double default_c0(double lambda) {
  if (lambda <= 1.0) return 0.0;
  return lambda * std::sqrt(1.0 - 1.0 / (lambda * lambda));
}

numerics::EigenPair principal_eigenvector(const Matrix& Y, numerics::RngStream& rng) {
  return numerics::lanczos_top(Y, 1e-8, 20000, rng);
}

Magnetization spectral_init(const Instance& inst, InitMode mode, numerics::RngStream& rng,
                            std::optional<double> c0) {
  const numerics::EigenPair top = principal_eigenvector(inst.Y, rng);
  const std::size_t n = inst.n;
  if (mode == InitMode::Sign) {
    Vector m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = top.vector[i] < 0.0 ? -(1.0 - 1e-6) : 1.0 - 1e-6;
    return Magnetization::from_m(m);
  }
  const double c = c0.value_or(default_c0(inst.lambda));
  if (!(c >= 0.0)) throw ParameterError("spectral_init: c0 must be nonnegative");
  Vector z(n);
  const double scale = c * std::sqrt(double(n));
  for (std::size_t i = 0; i < n; ++i) z[i] = scale * top.vector[i];
  return Magnetization::from_z(z);
}

AmpResult amp_solve(const Instance& inst, int k_max, numerics::RngStream& rng,
                    std::optional<double> c0, double stop_tol) {
  if (k_max < 1) throw ParameterError("amp_solve: k_max must be positive");
  const std::size_t n = inst.n;
  const double lambda = inst.lambda;
  const double sqrt_n = std::sqrt(double(n));

  AmpResult out;
  Magnetization cur = spectral_init(inst, InitMode::Amp, rng, c0);
  Vector prev(n, 0.0);
  Vector ym(n), z(n);
  double step = 0.0;
  for (int k = 0; k < k_max; ++k) {
    kernels::matvec(inst.Y.data(), n, cur.m(), ym);
    out.trace.record(k, overlap_of(cur, inst.x), cur.q(),
                     value_from_field(lambda, cur, ym, true), step);
    const double onsager = lambda * lambda * cur.one_minus_q();
    for (std::size_t i = 0; i < n; ++i) z[i] = lambda * ym[i] - onsager * prev[i];
    Magnetization next = Magnetization::from_z(z);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = next.m()[i] - cur.m()[i];
      d2 += d * d;
    }
    step = std::sqrt(d2) / sqrt_n;
    prev = cur.m();
    cur = std::move(next);
    out.iterations = k + 1;
    if (step <= stop_tol) {
      out.stopped_early = true;
      break;
    }
  }
  kernels::matvec(inst.Y.data(), n, cur.m(), ym);
  out.trace.record(out.iterations, overlap_of(cur, inst.x), cur.q(),
                   value_from_field(lambda, cur, ym, true), step);
  out.m = std::move(cur);
  return out;
}

// ---------------------------------------------------------------------------

NewtonResult newton_critical_point(const TapContext& ctx, const Magnetization& init, double tol,
                                   int max_iter, double z_max) {
  if (init.size() != ctx.n()) throw ParameterError("newton: initial point has wrong length");
  const std::size_t n = ctx.n();
  const double zb = z_max > 0.0 ? z_max : critical_z_bound(ctx);
  const double b2 = ctx.beta * ctx.beta;

  NewtonResult out;
  TapState s = tap_state(ctx, clamp_z(init.z(), zb));
  double gnorm2 = kernels::sum_squares(s.g);
  Eigen::MatrixXd J(n, n);
  Eigen::VectorXd rhs(n);

  for (int it = 0; it < max_iter; ++it) {
    out.grad_norm = sup_norm(s.g);
    if (out.grad_norm <= tol) {
      out.converged = true;
      break;
    }
    out.iterations = it + 1;
    const Magnetization& mg = s.mag;
    const double shift = b2 * mg.one_minus_q();
    const double rank1 = 2.0 * b2 / double(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double k = -ctx.beta * (*ctx.Y)(i, j) - rank1 * mg.m()[i] * mg.m()[j] +
                         (i == j ? shift : 0.0);
        J(Eigen::Index(i), Eigen::Index(j)) = k * mg.sech2(j) + (i == j ? 1.0 : 0.0);
      }
      rhs[Eigen::Index(i)] = -s.g[i];
    }
    const Eigen::VectorXd dz = J.partialPivLu().solve(rhs);
    if (!dz.allFinite()) break;

    bool accepted = false;
    double t = 1.0;
    for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
      Vector z(n);
      for (std::size_t i = 0; i < n; ++i) z[i] = mg.z()[i] + t * dz[Eigen::Index(i)];
      TapState trial = tap_state(ctx, clamp_z(z, zb));
      const double trial2 = kernels::sum_squares(trial.g);
      if (std::isfinite(trial2) && trial2 < gnorm2) {
        s = std::move(trial);
        gnorm2 = trial2;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  out.grad_norm = sup_norm(s.g);
  out.converged = out.grad_norm <= tol;
  out.m = std::move(s.mag);
  return out;
}

TapMinimizeResult tap_minimize(const TapContext& ctx, std::span<const double> x,
                               const Magnetization& init, const TapMinimizeOptions& opt) {
  if (init.size() != ctx.n() || x.size() != ctx.n())
    throw ParameterError("tap_minimize: length mismatch");
  const std::size_t n = ctx.n();
  const double zb = opt.z_max > 0.0 ? opt.z_max : critical_z_bound(ctx);

  TapMinimizeResult out;
  TapState s = tap_state(ctx, clamp_z(init.z(), zb));
  auto record = [&](int it, const TapState& st) {
    out.trace.record(it, overlap_of(st.mag, x), st.mag.q(), st.value, sup_norm(st.g));
  };
  record(0, s);

  double switch_tol = opt.switch_tol;
  double t = 1.0;
  int it = 0;
  bool polished = false;
  while (true) {
    // Descent phase.
    while (it < opt.max_descent && sup_norm(s.g) > switch_tol) {
      double slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) slope += s.g[i] * s.g[i] * s.mag.sech2(i);
      slope /= double(n);
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        Vector z(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = s.mag.z()[i] - t * s.g[i];
        TapState trial = tap_state(ctx, clamp_z(z, zb));
        if (trial.value <= s.value - 1e-4 * t * slope) {
          s = std::move(trial);
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      ++it;
      if (!accepted) break;
      record(it, s);
      t = std::min(2.0 * t, 4.0);
    }

    const int descent_records = int(out.trace.size());
    NewtonResult nr = newton_critical_point(ctx, s.mag, opt.tol, opt.max_newton, zb);
    TapState polished_state = tap_state(ctx, nr.m);
    // Accept the polish only if it stayed in the basin (F did not go up).
    if (nr.converged && polished_state.value <= s.value + 1e-9 * (1.0 + std::abs(s.value))) {
      out.trace.newton_start = descent_records;
      s = std::move(polished_state);
      record(it + nr.iterations, s);
      polished = true;
      break;
    }
    if (it >= opt.max_descent || switch_tol <= opt.tol) break;
    switch_tol = std::max(switch_tol * 1e-2, opt.tol);
  }

  out.point = describe_point(ctx, x, s.mag, opt.hessian_eig);
  out.point.converged = polished && out.point.grad_norm <= opt.tol;
  out.converged = out.point.converged;
  return out;
}

TapMinimizeResult tap_minimize(const Instance& inst, const Magnetization& init, double tol) {
  const TapContext ctx(inst.lambda > 0.0 ? inst.lambda : 1.0, inst.lambda, inst.Y);
  TapMinimizeOptions opt;
  opt.tol = tol;
  return tap_minimize(ctx, inst.x, init, opt);
}

MfResult mf_solve(const TapContext& ctx, std::span<const double> x, const Magnetization& init,
                  double damping, double tol, int max_iter) {
  if (!(damping >= 0.0 && damping < 1.0)) throw ParameterError("mf_solve: damping must be in [0, 1)");
  if (init.size() != ctx.n() || x.size() != ctx.n())
    throw ParameterError("mf_solve: length mismatch");
  const std::size_t n = ctx.n();
  constexpr int kStall = 500;

  MfResult out;
  Magnetization cur = init;
  Magnetization best = init;
  double best_res = std::numeric_limits<double>::infinity();
  int since_best = 0;
  Vector ym(n), next(n);
  for (int it = 0; it <= max_iter; ++it) {
    kernels::matvec(ctx.Y->data(), n, cur.m(), ym);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double target = std::tanh(ctx.beta * ym[i]);
      res = std::max(res, std::abs(cur.m()[i] - target));
      next[i] = (1.0 - damping) * target + damping * cur.m()[i];
    }
    out.trace.record(it, overlap_of(cur, x), cur.q(), value_from_field(ctx.beta, cur, ym, false),
                     res);
    if (res < best_res) {
      best_res = res;
      best = cur;
      since_best = 0;
    } else if (++since_best >= kStall) {
      out.cycling = true;
      break;
    }
    if (res <= tol) break;
    if (it == max_iter) break;
    cur = Magnetization::from_m(next);
  }
  out.m = std::move(best);
  out.residual = best_res;
  out.converged = best_res <= tol;
  return out;
}

MfResult mf_solve(const Instance& inst, const Magnetization& init, double damping) {
  const TapContext ctx(inst.lambda > 0.0 ? inst.lambda : 1.0, inst.lambda, inst.Y);
  return mf_solve(ctx, inst.x, init, damping);
}

// ---------------------------------------------------------------------------

std::vector<CriticalPoint> enumerate_critical_points(const TapContext& ctx,
                                                     std::span<const double> x,
                                                     const EnumerateOptions& opt,
                                                     numerics::RngStream& rng) {
  if (x.size() != ctx.n()) throw ParameterError("enumerate: length mismatch");
  if (opt.restarts < 0 || !(opt.dedupe_radius > 0.0))
    throw ParameterError("enumerate: bad options");
  const std::size_t n = ctx.n();
  const double zb = critical_z_bound(ctx);
  const double radius = opt.dedupe_radius * std::sqrt(double(n));

  std::vector<Vector> starts;
  starts.emplace_back(n, 0.0);
  if (opt.include_spectral) {
    numerics::RngStream eig_rng = rng.substream(0x5eed);
    const numerics::EigenPair top = principal_eigenvector(*ctx.Y, eig_rng);
    for (double c : {1.0, 3.0}) {
      Vector z(n);
      for (std::size_t i = 0; i < n; ++i) z[i] = c * std::sqrt(double(n)) * top.vector[i];
      starts.push_back(z);
    }
    Vector sgn(n);
    for (std::size_t i = 0; i < n; ++i) sgn[i] = top.vector[i] < 0.0 ? -zb : zb;
    starts.push_back(sgn);
  }
  for (int r = 0; r < opt.restarts; ++r) {
    Vector z(n);
    for (double& v : z) v = opt.init_range * (2.0 * rng.uniform() - 1.0);
    starts.push_back(std::move(z));
  }

  std::vector<CriticalPoint> found;
  auto distance = [](const Vector& a, const Vector& b, double sign) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - sign * b[i];
      s += d * d;
    }
    return std::sqrt(s);
  };

  for (const Vector& z0 : starts) {
    const NewtonResult nr =
        newton_critical_point(ctx, Magnetization::from_z(z0), opt.tol, opt.max_newton, zb);
    if (!nr.converged) continue;
    bool merged = false;
    for (CriticalPoint& p : found) {
      if (distance(p.m.m(), nr.m.m(), 1.0) <= radius ||
          distance(p.m.m(), nr.m.m(), -1.0) <= radius) {
        ++p.multiplicity_hint;
        merged = true;
        break;
      }
    }
    if (merged) continue;
    CriticalPoint p = describe_point(ctx, x, nr.m, n <= 256);
    p.converged = true;
    Vector neg(nr.m.z());
    for (double& v : neg) v = -v;
    p.pair = sup_norm(tap_state(ctx, Magnetization::from_z(neg)).g) <= opt.tol;
    found.push_back(std::move(p));
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const CriticalPoint& a, const CriticalPoint& b) { return a.value < b.value; });
  return found;
}

}  // namespace tapfe
