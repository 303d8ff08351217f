#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tapfe/numerics.hpp"

namespace tapfe::numerics {
namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void fd_hessian(const ConvexProblem& p, std::span<const double> x, std::span<double> h) {
  const std::size_t k = x.size();
  Vector xp(x.begin(), x.end()), gp(k), gm(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double step = 1e-5 * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + step;
    p.gradient(xp, gp);
    xp[j] = x[j] - step;
    p.gradient(xp, gm);
    xp[j] = x[j];
    for (std::size_t i = 0; i < k; ++i) h[i * k + j] = (gp[i] - gm[i]) / (2.0 * step);
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double s = 0.5 * (h[i * k + j] + h[j * k + i]);
      h[i * k + j] = h[j * k + i] = s;
    }
}

}  // namespace

MinimizeResult minimize_convex(const ConvexProblem& problem, std::span<const double> init,
                               double tol, const MinimizeOptions& options) {
  const std::size_t k = init.size();
  if (k == 0 || k > 8) throw ParameterError("minimize_convex: dimension must be in [1, 8]");
  if (!(tol > 0.0)) throw ParameterError("minimize_convex: tol must be positive");

  MinimizeResult out;
  out.argmin.assign(init.begin(), init.end());
  Vector grad(k), hess(k * k), trial(k);
  double f = problem.objective(out.argmin);
  if (!std::isfinite(f)) throw NumericError("minimize_convex: non-finite objective at start");

  for (int it = 0; it < options.max_iter; ++it) {
    out.iterations = it;
    problem.gradient(out.argmin, grad);
    out.grad_norm = norm2(grad);
    if (!std::isfinite(out.grad_norm)) throw NumericError("minimize_convex: non-finite gradient");
    if (out.grad_norm <= tol) {
      out.converged = true;
      break;
    }
    if (problem.hessian)
      problem.hessian(out.argmin, hess);
    else
      fd_hessian(problem, out.argmin, hess);

    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> H(
        hess.data(), Eigen::Index(k), Eigen::Index(k));
    Eigen::Map<const Eigen::VectorXd> g(grad.data(), Eigen::Index(k));
    Eigen::VectorXd dir;
    double shift = 0.0;
    const double scale = std::max(1e-300, H.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::MatrixXd Hs = H;
      Hs.diagonal().array() += shift;
      Eigen::LLT<Eigen::MatrixXd> llt(Hs);
      if (llt.info() == Eigen::Success) {
        dir = -llt.solve(g);
        if (dir.allFinite() && dir.dot(g) < 0.0) break;
      }
      dir.resize(0);
      shift = shift == 0.0 ? 1e-10 * scale : shift * 10.0;
    }
    if (dir.size() == 0) dir = -g;

    // Armijo backtracking; non-finite trial values count as +infinity.
    const double slope = dir.dot(g);
    double t = 1.0;
    double ft = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < k; ++i) trial[i] = out.argmin[i] + t * dir[Eigen::Index(i)];
      ft = problem.objective(trial);
      if (std::isfinite(ft) && ft <= f + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    // Newton decrement below the rounding of f and no decrease: the gradient
    // is at its evaluation floor.
    const bool floor = -0.5 * slope <= 1e-16 * (1.0 + std::abs(f));
    if (!accepted || (floor && ft >= f)) {
      out.converged = floor;
      break;
    }
    out.argmin = trial;
    f = ft;
    if (norm2(out.argmin) > options.divergence_bound) {
      out.diverged = true;
      out.value = -std::numeric_limits<double>::infinity();
      out.iterations = it + 1;
      return out;
    }
  }
  if (!out.converged) {
    problem.gradient(out.argmin, grad);
    out.grad_norm = norm2(grad);
    out.converged = out.grad_norm <= tol;
  }
  out.value = f;
  return out;
}

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> init, std::span<const double> step,
                             double ftol, int max_evals) {
  const std::size_t k = init.size();
  if (k == 0 || step.size() != k) throw ParameterError("nelder_mead: bad dimensions");
  NelderMeadResult out;
  auto eval = [&](const Vector& x) {
    ++out.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Vector> simplex(k + 1, Vector(init.begin(), init.end()));
  for (std::size_t i = 0; i < k; ++i) simplex[i + 1][i] += step[i];
  Vector fv(k + 1);
  for (std::size_t i = 0; i <= k; ++i) fv[i] = eval(simplex[i]);

  std::vector<std::size_t> order(k + 1);
  Vector centroid(k), xr(k), xe(k), xc(k);
  while (out.evaluations < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[k - 1];
    if (std::abs(fv[worst] - fv[best]) <= ftol * (std::abs(fv[best]) + ftol)) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= k; ++i)
      if (i != worst)
        for (std::size_t j = 0; j < k; ++j) centroid[j] += simplex[i][j] / double(k);

    for (std::size_t j = 0; j < k; ++j) xr[j] = 2.0 * centroid[j] - simplex[worst][j];
    const double fr = eval(xr);
    if (fr < fv[best]) {
      for (std::size_t j = 0; j < k; ++j) xe[j] = 3.0 * centroid[j] - 2.0 * simplex[worst][j];
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    for (std::size_t j = 0; j < k; ++j)
      xc[j] = outside ? 0.5 * (centroid[j] + xr[j]) : 0.5 * (centroid[j] + simplex[worst][j]);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[worst])) {
      simplex[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= k; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < k; ++j)
        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      fv[i] = eval(simplex[i]);
    }
  }
  const std::size_t best = std::size_t(std::min_element(fv.begin(), fv.end()) - fv.begin());
  out.argmin = simplex[best];
  out.value = fv[best];
  return out;
}

std::pair<double, double> golden_maximize(const std::function<double(double)>& f, double lo,
                                          double hi, double xtol) {
  if (!(lo < hi)) throw BracketError("golden_maximize: empty interval");
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace tapfe::numerics
