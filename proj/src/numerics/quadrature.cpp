#include <Eigen/Eigenvalues>
#include <cmath>

#include "tapfe/numerics.hpp"

namespace tapfe::numerics {
namespace {

struct HermiteEval {
  double p_nm1;        // scaled p_{n-1}(x)
  double p_n;          // scaled p_n(x), same scale
  double log_sum_sq;   // log sum_{k<n} p_k(x)^2, unscaled
};

// Orthonormal probabilists' Hermite recurrence with periodic rescaling so that
// orders up to 512 stay finite at the outer nodes (|x| ~ 45).
HermiteEval hermite_eval(double x, int n) {
  constexpr double kBig = 1e100;
  double pkm1 = 0.0;
  double pk = 1.0;
  double sum_sq = 0.0;
  double log_scale_sq = 0.0;
  for (int k = 0; k < n; ++k) {
    sum_sq += pk * pk;
    const double next = (x * pk - std::sqrt(double(k)) * pkm1) / std::sqrt(double(k + 1));
    pkm1 = pk;
    pk = next;
    if (std::abs(pk) > kBig) {
      pk /= kBig;
      pkm1 /= kBig;
      sum_sq /= kBig * kBig;
      log_scale_sq += 2.0 * std::log(kBig);
    }
  }
  return {pkm1, pk, std::log(sum_sq) + log_scale_sq};
}

}  // namespace

Quadrature gauss_hermite(int order) {
  if (order < 1 || order > 512) throw ParameterError("gauss_hermite: order must be in [1, 512]");
  const int n = order;
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  if (n == 1) {
    q.nodes[0] = 0.0;
    q.weights[0] = 1.0;
    return q;
  }

  // Golub-Welsch eigenvalues as starting points, refined by Newton on p_n.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(double(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& guess = solver.eigenvalues();

  for (int i = 0; i < n; ++i) {
    double x = guess[i];
    for (int it = 0; it < 6; ++it) {
      const HermiteEval e = hermite_eval(x, n);
      const double dx = e.p_n / (std::sqrt(double(n)) * e.p_nm1);
      x -= dx;
      if (std::abs(dx) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    q.nodes[i] = x;
    q.weights[i] = std::exp(-hermite_eval(x, n).log_sum_sq);
  }

  // Enforce exact symmetry and normalisation.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (q.nodes[j] - q.nodes[i]);
    const double w = 0.5 * (q.weights[i] + q.weights[j]);
    q.nodes[i] = -x;
    q.nodes[j] = x;
    q.weights[i] = q.weights[j] = w;
  }
  if (n % 2 == 1) q.nodes[n / 2] = 0.0;
  double total = 0.0;
  for (double w : q.weights) total += w;
  for (double& w : q.weights) w /= total;
  return q;
}

Quadrature composite_gaussian(int panels, int points, double half_width) {
  if (panels < 1 || points < 1 || points > 64 || !(half_width > 0.0))
    throw ParameterError("composite_gaussian: bad rule parameters");
  // Gauss-Legendre on [-1, 1] by Golub-Welsch; weights from first eigenvector components.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(points);
  Eigen::VectorXd off(std::max(points - 1, 0));
  for (int k = 1; k < points; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);

  Quadrature q;
  q.nodes.reserve(std::size_t(panels) * std::size_t(points));
  q.weights.reserve(q.nodes.capacity());
  const double h = 2.0 * half_width / panels;
  for (int p = 0; p < panels; ++p) {
    const double centre = -half_width + h * (p + 0.5);
    for (int i = 0; i < points; ++i) {
      const double v = solver.eigenvectors()(0, i);
      const double t = centre + 0.5 * h * solver.eigenvalues()[i];
      q.nodes.push_back(t);
      q.weights.push_back(v * v * h * std::exp(-0.5 * t * t));
    }
  }
  const std::size_t n = q.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const std::size_t j = n - 1 - i;
    const double x = 0.5 * (q.nodes[j] - q.nodes[i]);
    const double w = 0.5 * (q.weights[i] + q.weights[j]);
    q.nodes[i] = -x;
    q.nodes[j] = x;
    q.weights[i] = q.weights[j] = w;
  }
  if (n % 2 == 1) q.nodes[n / 2] = 0.0;
  double total = 0.0;
  for (double w : q.weights) total += w;
  for (double& w : q.weights) w /= total;
  return q;
}

const Quadrature& default_quadrature() {
  static const Quadrature q = composite_gaussian(64, 10, 12.0);
  return q;
}

Quadrature quadrature_for_order(int order) {
  return order == 0 ? default_quadrature() : gauss_hermite(order);
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace tapfe::numerics
