// Test-side oracles, kept independent of the library code paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

// Adaptive Simpson, written separately from the library's integrator.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, double tol = 1e-12, int depth = 50) {
  std::function<double(double, double, double, double, double, double, double,
                       int)>
      rec = [&](double lo, double flo, double hi, double fhi, double mid,
                double fmid, double whole, int d) -> double {
    double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    double flm = f(lm), frm = f(rm);
    double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    double err = left + right - whole;
    if (d <= 0 || std::abs(err) < 15.0 * tol) return left + right + err / 15.0;
    return rec(lo, flo, mid, fmid, lm, flm, left, d - 1) +
           rec(mid, fmid, hi, fhi, rm, frm, right, d - 1);
  };
  double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return rec(a, fa, b, fb, m, fm, whole, depth);
}

// Rate of the pure ensemble of variance t: (1/2t) int_x^{-2 sqrt t}
// sqrt(z^2 - 4t) dz.
inline double goe_rate(double t, double x) {
  auto f = [t](double z) { return std::sqrt(std::max(0.0, z * z - 4.0 * t)); };
  return simpson(f, x, -2.0 * std::sqrt(t)) / (2.0 * t);
}

// Antiderivative of sqrt(z^2 - c) for |z| >= sqrt(c), evaluated at u > 0.
inline double sqrt_quad_antideriv(double u, double c) {
  double r = std::sqrt(std::max(0.0, u * u - c));
  return 0.5 * u * r - 0.5 * c * std::log(u + r);
}

// int_a^b sqrt(z^2 - c) dz for b >= a >= sqrt(c) via the antiderivative.
inline double sqrt_quad_integral(double a, double b, double c) {
  return sqrt_quad_antideriv(b, c) - sqrt_quad_antideriv(a, c);
}

inline double central_diff(const std::function<double(double)>& f, double x,
                           double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double second_diff(const std::function<double(double)>& f, double x,
                          double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// Roots of a real symmetric 3x3 matrix's characteristic polynomial by the
// trigonometric closed form; returns ascending eigenvalues.
inline std::vector<double> symmetric3_eigen_closed_form(double a11, double a12,
                                                        double a13, double a22,
                                                        double a23, double a33) {
  double q = (a11 + a22 + a33) / 3.0;
  double b11 = a11 - q, b22 = a22 - q, b33 = a33 - q;
  double p2 = b11 * b11 + b22 * b22 + b33 * b33 +
              2.0 * (a12 * a12 + a13 * a13 + a23 * a23);
  double p = std::sqrt(p2 / 6.0);
  if (p == 0.0) return {q, q, q};
  // det(B / p) / 2
  double c11 = b11 / p, c22 = b22 / p, c33 = b33 / p;
  double c12 = a12 / p, c13 = a13 / p, c23 = a23 / p;
  double det = c11 * (c22 * c33 - c23 * c23) - c12 * (c12 * c33 - c23 * c13) +
               c13 * (c12 * c23 - c22 * c13);
  double r = det / 2.0;
  r = std::max(-1.0, std::min(1.0, r));
  double phi = std::acos(r) / 3.0;
  double e1 = q + 2.0 * p * std::cos(phi);
  double e3 = q + 2.0 * p * std::cos(phi + 2.0 * 3.14159265358979323846 / 3.0);
  double e2 = 3.0 * q - e1 - e3;
  std::vector<double> out{e1, e2, e3};
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oracles
