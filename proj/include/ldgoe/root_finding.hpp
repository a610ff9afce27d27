#pragma once

#include <cmath>
#include <stdexcept>

namespace ldgoe {

// Bisection on a bracket with a sign change, run down to floating-point
// resolution of the bracket. Monotonicity is not required, only f(lo) and
// f(hi) of opposite sign (either may be zero).
template <typename F>
double bisect(F&& f, double lo, double hi, int max_iter = 200) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  double fhi = f(hi);
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw std::invalid_argument("bisect: no sign change on bracket");
  for (int i = 0; i < max_iter; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at ulp resolution
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Newton refinement constrained to [lo, hi]; falls back to the input when a
// step leaves the bracket or the derivative degenerates.
template <typename F, typename DF>
double newton_polish(F&& f, DF&& df, double x, double lo, double hi,
                     int iters = 4) {
  for (int i = 0; i < iters; ++i) {
    double d = df(x);
    if (d == 0.0 || !std::isfinite(d)) break;
    double step = f(x) / d;
    double xn = x - step;
    if (!(xn > lo && xn < hi)) break;
    x = xn;
    if (std::abs(step) <= 4e-16 * (1.0 + std::abs(x))) break;
  }
  return x;
}

}  // namespace ldgoe
