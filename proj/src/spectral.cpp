#include "tapfe/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tapfe/complexity.hpp"
#include "tapfe/error.hpp"
#include "tapfe/kernels.hpp"

namespace tapfe {
namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

StieltjesSolver::StieltjesSolver(std::span<const double> d, double beta, double tol)
    : d_(d.begin(), d.end()), weight_(d.size()), beta_(beta), tol_(tol) {
  if (d_.empty()) throw ParameterError("stieltjes: empty spectrum");
  if (!(beta > 0.0)) throw ParameterError("stieltjes: beta must be positive");
  if (!(tol > 0.0)) throw ParameterError("stieltjes: tol must be positive");
  for (double v : d_)
    if (!std::isfinite(v)) throw ParameterError("stieltjes: non-finite d_i");
  std::fill(weight_.begin(), weight_.end(), 1.0 / double(d_.size()));
  const auto [lo, hi] = std::minmax_element(d_.begin(), d_.end());
  d_min_ = *lo;
  d_max_ = *hi;
}

double StieltjesSolver::residual(Complex z, Complex g) const {
  const auto rs = kernels::resolvent_sums(d_, weight_, z + beta_ * beta_ * g);
  return std::abs(g - rs.first);
}

bool StieltjesSolver::newton(Complex z, Complex& g, int max_iter) const {
  const double b2 = beta_ * beta_;
  const bool upper = z.imag() > 0.0;
  auto defect = [&](Complex gg, Complex* second) {
    const auto rs = kernels::resolvent_sums(d_, weight_, z + b2 * gg);
    if (second) *second = rs.second;
    return gg - rs.first;
  };
  Complex second;
  Complex f = defect(g, &second);
  for (int it = 0; it < max_iter; ++it) {
    if (!std::isfinite(std::abs(f))) return false;
    if (std::abs(f) <= tol_ * (1.0 + std::abs(g)) && (!upper || g.imag() > 0.0)) return true;
    const Complex step = -f / (1.0 - b2 * second);
    double t = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
      const Complex trial = g + t * step;
      if (upper && !(trial.imag() > 0.0)) continue;
      Complex s2;
      const Complex ft = defect(trial, &s2);
      if (std::abs(ft) < std::abs(f)) {
        g = trial;
        f = ft;
        second = s2;
        moved = true;
        break;
      }
    }
    if (!moved) {
      // Rounding floor of the resolvent sum: each d_i - w carries an absolute
      // error of about eps max(|d_i|, |w|).
      const Complex w = z + b2 * g;
      double floor = 0.0;
      for (double di : d_) floor += std::max(std::abs(di), std::abs(w)) / std::norm(di - w);
      floor *= 16.0 * std::numeric_limits<double>::epsilon() / double(d_.size());
      return std::abs(f) <= tol_ * (1.0 + std::abs(g)) + floor && (!upper || g.imag() > 0.0);
    }
  }
  return std::abs(f) <= tol_ * (1.0 + std::abs(g));
}

Complex StieltjesSolver::continuation(Complex z) const {
  const double target = z.imag();
  if (!(target > 0.0)) throw ParameterError("stieltjes: continuation needs Im z > 0");
  double prev = std::max(target, 10.0 * (1.0 + beta_ + (d_max_ - d_min_) + std::abs(z.real())));
  Complex g = kernels::resolvent_sums(d_, weight_, Complex(z.real(), prev)).first;
  if (!newton(Complex(z.real(), prev), g, 100))
    throw ConvergenceError("stieltjes: no solution far from the axis",
                           residual(Complex(z.real(), prev), g));
  double ratio = 4.0;
  while (prev > target) {
    const double eta = std::max(prev / ratio, target);
    Complex trial = g;
    if (newton(Complex(z.real(), eta), trial, 100)) {
      g = trial;
      prev = eta;
      ratio = std::min(ratio * ratio, 4.0);
    } else {
      ratio = std::sqrt(ratio);
      if (ratio < 1.0 + 1e-6)
        throw ConvergenceError("stieltjes: continuation stalled at x = " + std::to_string(z.real()),
                               residual(Complex(z.real(), eta), g));
    }
  }
  return g;
}

Complex StieltjesSolver::solve(Complex z, Complex guess) const {
  if (!(z.imag() > 0.0)) throw ParameterError("stieltjes: solve needs Im z > 0");
  Complex g = guess;
  if (!(g.imag() > 0.0)) g.imag(std::max(1e-3, z.imag()));
  if (newton(z, g, 60)) return g;
  return continuation(z);
}

Complex StieltjesSolver::on_axis(double x, Complex guess) const {
  const double eps = kRealAxisEps;
  const Complex g2 = solve(Complex(x, 2.0 * eps), guess);
  const Complex g1 = solve(Complex(x, eps), g2);
  Complex r = 2.0 * g1 - g2;
  if (r.imag() < 0.0) r.imag(0.0);
  return r;
}

Complex StieltjesSolver::operator()(Complex z) const {
  if (z.imag() > 0.0) return continuation(z);
  if (z.imag() < 0.0) return std::conj((*this)(std::conj(z)));
  const double x = z.real();
  if (x < d_min_)
    if (auto r = real_root(x)) return {*r, 0.0};
  return on_axis(x, continuation(Complex(x, 2.0 * kRealAxisEps)));
}

double StieltjesSolver::density(double x) const { return (*this)(Complex(x, 0.0)).imag() / kPi; }

double StieltjesSolver::cdf_from(double x, Complex g) const {
  const double b2 = beta_ * beta_;
  const Complex w = Complex(x, 0.0) + b2 * g;
  const double im = w.imag() > 0.0 ? w.imag() : 0.0;
  double args = 0.0;
  for (double di : d_) args += std::atan2(-im, di - w.real());
  const double v = -(args / double(d_.size()) + 0.5 * b2 * (g * g).imag()) / kPi;
  return std::clamp(v, 0.0, 1.0);
}

double StieltjesSolver::cdf(double x) const { return cdf_from(x, (*this)(Complex(x, 0.0))); }

Vector StieltjesSolver::cdf_sorted(std::span<const double> xs) const {
  Vector out(xs.size());
  Complex g;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0 && xs[i] < xs[i - 1]) throw ParameterError("cdf_sorted: abscissas must increase");
    g = i == 0 ? on_axis(xs[0], continuation(Complex(xs[0], 2.0 * kRealAxisEps)))
               : on_axis(xs[i], g);
    out[i] = cdf_from(xs[i], g);
  }
  return out;
}

std::optional<double> StieltjesSolver::real_root(double z) const {
  if (!(z < d_min_)) return std::nullopt;
  const double b2 = beta_ * beta_;
  const double pole = (d_min_ - z) / b2;
  double g = std::min(-10.0, pole - 10.0);
  for (int it = 0; it < 500; ++it) {
    double first = 0.0, second = 0.0;
    const double w = z + b2 * g;
    for (double di : d_) {
      const double r = 1.0 / (di - w);
      first += r;
      second += r * r;
    }
    first /= double(d_.size());
    second /= double(d_.size());
    const double phi = first - g;
    const double dphi = b2 * second - 1.0;
    if (std::abs(phi) <= tol_ * (1.0 + std::abs(g))) {
      if (b2 * second > 1.0 + 1e-9) return std::nullopt;
      return g;
    }
    // Convex and decreasing to the left of the smallest root; no root once the slope turns.
    if (!(dphi < 0.0)) return std::nullopt;
    const double next = g - phi / dphi;
    if (!(next < pole) || next == g) return std::nullopt;
    g = next;
  }
  return std::nullopt;
}

Complex stieltjes(std::span<const double> d, double beta, Complex z, double tol) {
  return StieltjesSolver(d, beta, tol)(z);
}

Vector hessian_diagonal(double beta, const Magnetization& m) {
  Vector d(m.size());
  const double shift = beta * beta * m.one_minus_q();
  for (std::size_t i = 0; i < m.size(); ++i) d[i] = 1.0 / m.sech2(i) + shift;
  return d;
}

// ---------------------------------------------------------------------------

SpectralMeasure spectral_measure(std::span<const double> d, double beta, const DensityOptions& opt) {
  const StieltjesSolver solver(d, beta);
  SpectralMeasure out;
  out.d.assign(d.begin(), d.end());
  out.beta = beta;

  Vector sorted(d.begin(), d.end());
  std::sort(sorted.begin(), sorted.end());
  const double pad = 2.0 * beta + 1.0;
  std::vector<std::pair<double, double>> cover;
  for (double v : sorted) {
    if (!cover.empty() && v - pad <= cover.back().second)
      cover.back().second = v + pad;
    else
      cover.emplace_back(v - pad, v + pad);
  }

  struct Node {
    double x;
    Complex g;
    double f, F;
  };
  auto make = [&](double x, Complex guess) {
    const Complex g = solver.on_axis(x, guess);
    return Node{x, g, g.imag() / std::numbers::pi, solver.cdf_from(x, g)};
  };

  std::size_t budget = std::size_t(std::max(opt.max_nodes, 64));
  for (const auto& [a, b] : cover) {
    const int n0 = std::max(32, int(std::ceil((b - a) * opt.nodes_per_unit)));
    std::vector<Node> nodes;
    nodes.reserve(std::size_t(n0) + 1);
    Complex g = solver.continuation(Complex(a, 2.0 * StieltjesSolver::kRealAxisEps));
    for (int k = 0; k <= n0; ++k) {
      nodes.push_back(make(a + (b - a) * double(k) / n0, g));
      g = nodes.back().g;
    }
    for (int pass = 0; pass < 40; ++pass) {
      std::vector<Node> next;
      next.reserve(nodes.size() * 2);
      bool split = false;
      for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        next.push_back(nodes[i]);
        const Node& l = nodes[i];
        const Node& r = nodes[i + 1];
        const double trap = 0.5 * (l.f + r.f) * (r.x - l.x);
        if (std::abs(trap - (r.F - l.F)) > opt.refine_tol &&
            next.size() + nodes.size() < budget) {
          next.push_back(make(0.5 * (l.x + r.x), l.g));
          split = true;
        }
      }
      next.push_back(nodes.back());
      nodes = std::move(next);
      if (!split) break;
    }
    budget -= std::min(budget, nodes.size());
    for (const Node& nd : nodes) {
      out.grid.push_back(nd.x);
      out.density.push_back(nd.f);
    }
  }

  for (std::size_t i = 0; i + 1 < out.grid.size(); ++i)
    if (out.grid[i + 1] > out.grid[i])
      out.mass += 0.5 * (out.density[i] + out.density[i + 1]) * (out.grid[i + 1] - out.grid[i]);

  // Components above the threshold, with edges refined by bisection.
  auto above = [&](double x) { return solver.density(x) > opt.threshold; };
  auto refine = [&](double lo, double hi) {
    // lo below threshold, hi above (or the reverse); returns the crossing.
    const bool lo_above = above(lo);
    for (int it = 0; it < 50 && hi - lo > 1e-12 * (1.0 + std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (above(mid) == lo_above ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  bool inside = false;
  double start = 0.0;
  for (std::size_t i = 0; i < out.grid.size(); ++i) {
    const bool up = out.density[i] > opt.threshold;
    if (up && !inside) {
      start = i > 0 ? refine(out.grid[i - 1], out.grid[i]) : out.grid[i];
      inside = true;
    } else if (!up && inside) {
      out.components.emplace_back(start, refine(out.grid[i - 1], out.grid[i]));
      inside = false;
    }
  }
  if (inside) out.components.emplace_back(start, out.grid.back());
  if (!out.components.empty()) {
    out.support_lo = out.components.front().first;
    out.support_hi = out.components.back().second;
  }
  out.g0 = solver.real_root(0.0);
  return out;
}

EdgeProfile edge_profile(const StieltjesSolver& solver, double edge, int direction,
                         std::span<const double> offsets) {
  if (direction != 1 && direction != -1) throw ParameterError("edge_profile: direction is +-1");
  EdgeProfile p;
  p.edge = edge;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int k = 0;
  for (double off : offsets) {
    if (!(off > 0.0)) throw ParameterError("edge_profile: offsets must be positive");
    const double f = solver.density(edge + direction * off);
    p.offsets.push_back(off);
    p.density.push_back(f);
    p.envelope.push_back(std::cbrt(3.0 * off / (4.0 * kPi * kPi * kPi * solver.beta())));
    if (f > 0.0) {
      const double lx = std::log(off), ly = std::log(f);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++k;
    }
  }
  const double den = k * sxx - sx * sx;
  p.slope = k >= 2 && den != 0.0 ? (k * sxy - sx * sy) / den
                                 : std::numeric_limits<double>::quiet_NaN();
  return p;
}

LogPotential log_potential(std::span<const double> d, double beta, double q) {
  const StieltjesSolver solver(d, beta);
  const auto g0 = solver.real_root(0.0);
  if (!g0)
    throw DomainError(
        "log_potential: g(0) is not real, so the support of the free convolution is not "
        "contained in [0, inf)");
  const double b2 = beta * beta;
  auto R = [&](double g) {
    double s = 0.0;
    for (double di : d) s += std::log(di - b2 * g);
    return 0.5 * b2 * g * g + s / double(d.size());
  };
  LogPotential out;
  out.g0 = *g0;
  out.log_integral = R(*g0);
  const double omq = 1.0 - q;
  bool defined = true;
  for (double di : d) defined = defined && di - b2 * omq > 0.0;
  out.L = defined ? R(omq) : std::numeric_limits<double>::quiet_NaN();
  out.gap = out.L - out.log_integral;
  return out;
}

// ---------------------------------------------------------------------------

ConditionalHessianSample sample_conditional_hessian(const TapContext& ctx,
                                                    std::span<const double> x,
                                                    const Magnetization& m,
                                                    numerics::RngStream& rng) {
  const std::size_t n = ctx.n();
  if (m.size() != n || x.size() != n) throw ParameterError("conditional hessian: length mismatch");
  const double mm = kernels::sum_squares(m.m());
  if (!(mm > 0.0)) throw ParameterError("conditional hessian: Q(m) must be positive");

  ConditionalHessianSample s;
  s.W = numerics::sample_goe(n, rng);
  const Vector d = hessian_diagonal(ctx.beta, m);
  const Vector u = gradient_offset(ctx.beta, ctx.lambda, x, m);
  const double norm = std::sqrt(mm);
  Vector mh(n);
  for (std::size_t i = 0; i < n; ++i) mh[i] = m.m()[i] / norm;
  const Vector wm = numerics::multiply(s.W, mh);
  const double c = kernels::dot(mh, wm);
  const double mu = kernels::dot(m.m(), u);
  const double b = ctx.beta;
  const double bias = b * ctx.lambda / double(n);
  const double r1 = 2.0 * b * b / double(n);

  s.Z = Matrix::square(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mi = m.m()[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double mj = m.m()[j];
      const double proj = s.W(i, j) - wm[i] * mh[j] - mh[i] * wm[j] + c * mh[i] * mh[j];
      s.Z(i, j) = -b * proj - bias * x[i] * x[j] - r1 * mi * mj - (mi * u[j] + u[i] * mj) / mm +
                  mi * mj * mu / (mm * mm);
    }
    s.Z(i, i) += d[i];
  }
  return s;
}

Matrix conditional_correction(const ConditionalHessianSample& s, double beta,
                              std::span<const double> d) {
  const std::size_t n = s.Z.rows();
  if (d.size() != n) throw ParameterError("conditional_correction: length mismatch");
  Matrix delta = Matrix::square(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      delta(i, j) = s.Z(i, j) + beta * s.W(i, j) - (i == j ? d[i] : 0.0);
  return delta;
}

double ks_distance(std::span<const double> sorted_samples, std::span<const double> cdf_values) {
  if (sorted_samples.size() != cdf_values.size() || sorted_samples.empty())
    throw ParameterError("ks_distance: length mismatch");
  const double n = double(sorted_samples.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < cdf_values.size(); ++i) {
    ks = std::max(ks, std::abs(cdf_values[i] - double(i) / n));
    ks = std::max(ks, std::abs(double(i + 1) / n - cdf_values[i]));
  }
  return ks;
}

}  // namespace tapfe
