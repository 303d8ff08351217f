#include <cmath>
#include <limits>
#include <utility>

#include "tapfe/numerics.hpp"

namespace tapfe::numerics {

double find_root(const std::function<double(double)>& f, double lo, double hi, double tol,
                 int max_iter) {
  if (!(lo < hi)) throw BracketError("find_root: empty bracket");
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (!std::isfinite(fa) || !std::isfinite(fb))
    throw NumericError("find_root: non-finite value at a bracket end");
  if (std::abs(fa) <= tol) return a;
  if (std::abs(fb) <= tol) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw BracketError("find_root: no sign change on the bracket");

  // Brent's method: keep b as the best estimate and [b, c] as a sign-changing bracket.
  double c = a, fc = fa;
  double d = b - a, e = d;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it < max_iter; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double xtol = 2.0 * eps * std::abs(b);
    const double m = 0.5 * (c - b);
    if (std::abs(fb) <= tol || std::abs(m) <= xtol) return b;

    if (std::abs(e) >= xtol && std::abs(fa) > std::abs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc, r = fb / fc;
        p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0)
        q = -q;
      else
        p = -p;
      if (2.0 * p < std::min(3.0 * m * q - std::abs(xtol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > xtol ? d : (m > 0.0 ? xtol : -xtol);
    fb = f(b);
    if (!std::isfinite(fb)) throw NumericError("find_root: non-finite value inside the bracket");
  }
  throw ConvergenceError("find_root: iteration limit reached", std::abs(fb));
}

}  // namespace tapfe::numerics
