#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "tapfe/kernels.hpp"
#include "tapfe/numerics.hpp"

extern "C" void dsytrf_(const char* uplo, const int* n, double* a, const int* lda, int* ipiv,
                        double* work, const int* lwork, int* info);

namespace tapfe::numerics {
namespace {

void require_square(const Matrix& a, const char* who) {
  if (!a.is_square()) throw ParameterError(std::string(who) + ": matrix must be square");
}

Vector random_unit(std::size_t n, RngStream& rng) {
  Vector v(n);
  for (double& x : v) x = rng.normal();
  const double nrm = std::sqrt(kernels::sum_squares(v));
  for (double& x : v) x /= nrm;
  return v;
}

double residual_norm(std::span<const double> av, std::span<const double> v, double theta) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = av[i] - theta * v[i];
    s += r * r;
  }
  return std::sqrt(s);
}

// Fix the sign so the entry of largest magnitude is positive.
void canonical_sign(Vector& v) {
  std::size_t imax = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  if (!v.empty() && v[imax] < 0.0)
    for (double& x : v) x = -x;
}

}  // namespace

Matrix sample_goe(std::size_t n, RngStream& rng) {
  if (n == 0) throw ParameterError("sample_goe: n must be positive");
  Matrix w = Matrix::square(n);
  const double off = 1.0 / std::sqrt(double(n));
  const double diag = std::sqrt(2.0 / double(n));
  for (std::size_t i = 0; i < n; ++i) {
    w(i, i) = diag * rng.normal();
    for (std::size_t j = i + 1; j < n; ++j) {
      const double g = off * rng.normal();
      w(i, j) = g;
      w(j, i) = g;
    }
  }
  return w;
}

Vector multiply(const Matrix& a, std::span<const double> x) {
  require_square(a, "multiply");
  Vector y(a.rows());
  kernels::matvec(a.data(), a.rows(), x, y);
  return y;
}

EigenPair power_iteration(const Matrix& a, double tol, int max_iter, RngStream& rng) {
  require_square(a, "power_iteration");
  const std::size_t n = a.rows();
  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double x : a.row(i)) s += std::abs(x);
    shift = std::max(shift, s);
  }
  shift += 1.0;

  EigenPair out;
  out.vector = random_unit(n, rng);
  Vector av(n);
  for (int it = 1; it <= max_iter; ++it) {
    kernels::matvec(a.data(), n, out.vector, av);
    out.value = kernels::dot(out.vector, av);
    out.residual = residual_norm(av, out.vector, out.value);
    out.iterations = it;
    if (out.residual <= tol) {
      canonical_sign(out.vector);
      return out;
    }
    for (std::size_t i = 0; i < n; ++i) av[i] += shift * out.vector[i];
    const double nrm = std::sqrt(kernels::sum_squares(av));
    for (std::size_t i = 0; i < n; ++i) out.vector[i] = av[i] / nrm;
  }
  throw ConvergenceError("power_iteration did not converge", out.residual);
}

EigenPair lanczos_top(const Matrix& a, double tol, int max_iter, RngStream& rng) {
  require_square(a, "lanczos_top");
  const std::size_t n = a.rows();
  const std::size_t krylov = std::min<std::size_t>(n, 64);

  Vector start = random_unit(n, rng);
  std::vector<Vector> basis;
  Vector w(n), av(n);
  EigenPair out;
  int matvecs = 0;

  while (matvecs < max_iter) {
    basis.assign(1, start);
    std::vector<double> alpha, beta;
    for (std::size_t j = 0; j < krylov && matvecs < max_iter; ++j) {
      kernels::matvec(a.data(), n, basis[j], w);
      ++matvecs;
      alpha.push_back(kernels::dot(basis[j], w));
      // Full reorthogonalisation, applied twice.
      for (int pass = 0; pass < 2; ++pass)
        for (const Vector& v : basis) kernels::axpy(-kernels::dot(v, w), v, w);
      const double b = std::sqrt(kernels::sum_squares(w));
      if (j + 1 == krylov || b <= 1e-14 * std::max(1.0, std::abs(alpha.back()))) {
        beta.push_back(b);
        break;
      }
      beta.push_back(b);
      Vector next(n);
      for (std::size_t i = 0; i < n; ++i) next[i] = w[i] / b;
      basis.push_back(std::move(next));
    }

    const std::size_t m = alpha.size();
    Eigen::VectorXd diag(m), off(m > 1 ? m - 1 : 0);
    for (std::size_t i = 0; i < m; ++i) diag[Eigen::Index(i)] = alpha[i];
    for (std::size_t i = 0; i + 1 < m; ++i) off[Eigen::Index(i)] = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    const Eigen::Index top = Eigen::Index(m) - 1;
    const double theta = tri.eigenvalues()[top];

    Vector ritz(n, 0.0);
    for (std::size_t j = 0; j < m; ++j)
      kernels::axpy(tri.eigenvectors()(Eigen::Index(j), top), basis[j], ritz);
    const double nrm = std::sqrt(kernels::sum_squares(ritz));
    for (double& x : ritz) x /= nrm;

    kernels::matvec(a.data(), n, ritz, av);
    ++matvecs;
    out.value = kernels::dot(ritz, av);
    out.residual = residual_norm(av, ritz, out.value);
    out.vector = std::move(ritz);
    out.iterations = matvecs;
    (void)theta;
    if (out.residual <= tol) {
      canonical_sign(out.vector);
      return out;
    }
    start = out.vector;
  }
  throw ConvergenceError("lanczos_top did not converge", out.residual);
}

double log_abs_det(const Matrix& a) {
  require_square(a, "log_abs_det");
  const int n = int(a.rows());
  if (n == 0) return 0.0;
  // Symmetric, so the row-major buffer is also the column-major matrix.
  std::vector<double> buf(a.values().begin(), a.values().end());
  std::vector<int> ipiv(std::size_t(n), 0);
  int info = 0;
  int lwork = -1;
  double query = 0.0;
  const char uplo = 'L';
  dsytrf_(&uplo, &n, buf.data(), &n, ipiv.data(), &query, &lwork, &info);
  lwork = std::max(1, int(query));
  std::vector<double> work(static_cast<std::size_t>(lwork));
  dsytrf_(&uplo, &n, buf.data(), &n, ipiv.data(), work.data(), &lwork, &info);
  if (info < 0) throw NumericError("log_abs_det: dsytrf rejected its arguments");
  if (info > 0) return -std::numeric_limits<double>::infinity();

  auto at = [&](int r, int c) { return buf[std::size_t(c) * std::size_t(n) + std::size_t(r)]; };
  double acc = 0.0;
  for (int k = 0; k < n;) {
    if (ipiv[std::size_t(k)] > 0) {
      const double d = at(k, k);
      if (d == 0.0) return -std::numeric_limits<double>::infinity();
      acc += std::log(std::abs(d));
      k += 1;
    } else {
      const double p = at(k, k), q = at(k + 1, k + 1), r = at(k + 1, k);
      const double det = p * q - r * r;
      if (det == 0.0) return -std::numeric_limits<double>::infinity();
      acc += std::log(std::abs(det));
      k += 2;
    }
  }
  return acc;
}

Vector symmetric_eigenvalues(const Matrix& a) {
  require_square(a, "symmetric_eigenvalues");
  Eigen::MatrixXd m = a.eigen();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  return Vector(ev.data(), ev.data() + ev.size());
}

double operator_norm(const Matrix& a) {
  const Vector ev = symmetric_eigenvalues(a);
  if (ev.empty()) return 0.0;
  return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

}  // namespace tapfe::numerics
