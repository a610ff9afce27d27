#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "ldgoe/atomic_measure.hpp"
#include "ldgoe/errors.hpp"
#include "ldgoe/ext_real.hpp"
#include "ldgoe/free_convolution.hpp"
#include "ldgoe/quadrature.hpp"
#include "ldgoe/root_finding.hpp"

namespace ldgoe {

// Rate function of the undeformed ensemble of variance t by direct
// quadrature, (1/2t) int_x^{-2 sqrt t} sqrt(z^2 - 4t) dz.
inline double goe_reference_rate(double t, double x) {
  double edge = -2.0 * std::sqrt(t);
  if (x > edge + 1e-12) throw AboveEdge("goe_reference_rate: x above -2 sqrt(t)");
  x = std::min(x, edge);
  auto f = [&](double z) { return std::sqrt(std::max(0.0, z * z - 4.0 * t)); };
  return integrate(f, x, edge, 1e-12) / (2.0 * t);
}

// ---- rank-one deformation at t = 1/2 ----------------------------------------

// Piecewise rate function for the variance-1/2 ensemble with a single
// negative spike. The quadrature term's sign and the (x^2 - rho^2)/4 term
// are fixed so the function vanishes at its minimum and matches the
// derivative -sqrt(x^2-2)/2 + x/2 - Lambda on the spiked branch; the
// additive constant of the subcritical branch is fixed by continuity at rho.
inline ExtReal maida_rate(double lambda0, double x) {
  if (!(lambda0 < 0.0)) throw Error("maida_rate: Lambda must be negative");
  const double edge = -std::sqrt(2.0);
  const double crit = -1.0 / std::sqrt(2.0);
  if (x > edge) return ExtReal::infinity();
  double rho = lambda0 + 0.5 / lambda0;
  auto f = [](double z) { return std::sqrt(std::max(0.0, z * z - 2.0)); };
  auto spiked_increment = [&](double a) {
    // value relative to rho along the gamma = Lambda branch
    return 0.5 * integrate(f, a, rho, 1e-12) - lambda0 * (a - rho) +
           0.25 * (a * a - rho * rho);
  };
  if (lambda0 <= crit) return ExtReal::finite(spiked_increment(x));
  // subcritical: minimum sits at the bulk edge
  if (x >= rho) return ExtReal::finite(integrate(f, x, edge, 1e-12));
  return ExtReal::finite(integrate(f, rho, edge, 1e-12) + spiked_increment(x));
}

// ---- variational rate of the no-outlier ensemble at t = 1 -------------------

namespace detail {

// Inverse of the Stieltjes transform on the branch left of the support,
// by monotone bisection. s must be negative.
inline double k_inverse(const AtomicMeasure& nu, double s) {
  if (!(s < 0.0)) throw ThetaOutOfRange("k_inverse: s must be negative");
  double lnu = support_edge(nu);
  double delta = 1e-3 * (1.0 + std::abs(lnu));
  double hi = lnu - delta;
  while (stieltjes(nu, hi) > s) {
    delta *= 0.25;
    hi = lnu - delta;
    if (delta < 1e-300) throw ThetaOutOfRange("k_inverse: s out of range");
  }
  double lo = lnu - 1.0 - 1.0 / std::abs(s);
  while (stieltjes(nu, lo) < s) lo = lnu + 2.0 * (lo - lnu);
  return bisect([&](double z) { return stieltjes(nu, z) - s; }, lo, hi);
}

inline double k_inverse_conv(const FreeConvContext& ctx, double s) {
  double gmin = stieltjes(ctx.nu(), ctx.shock());
  if (!(s < 0.0) || s <= gmin)
    throw ThetaOutOfRange("k_inverse_conv: s outside the range of G");
  double edge = ctx.edge();
  double delta = 1e-3 * (1.0 + std::abs(edge));
  double hi = edge - delta;
  while (ctx.stieltjes_conv(hi) > s) {
    delta *= 0.25;
    hi = edge - delta;
    if (delta < 1e-300) throw ThetaOutOfRange("k_inverse_conv: s out of range");
  }
  double lo = edge - 1.0 - 1.0 / std::abs(s);
  while (ctx.stieltjes_conv(lo) < s) lo = edge + 2.0 * (lo - edge);
  return bisect([&](double z) { return ctx.stieltjes_conv(z) - s; }, lo, hi);
}

// 1/2 int_0^{2 theta} R(s) ds on the branch below the support, in the
// closed form 1/2 (-2 theta g - 1 - log(2 theta) + S(g)) with g = K(-2 theta).
inline double r_integral(double theta, double g, double s_of_g) {
  if (theta == 0.0) return 0.0;
  double u = 2.0 * theta;
  return 0.5 * (-u * g - 1.0 - std::log(u) + s_of_g);
}

inline double r_integral_atomic(const AtomicMeasure& nu, double theta) {
  if (theta == 0.0) return 0.0;
  double g = k_inverse(nu, -2.0 * theta);
  return r_integral(theta, g, log_potential(nu, g));
}

inline double r_integral_conv(const FreeConvContext& ctx, double theta) {
  if (theta == 0.0) return 0.0;
  double g = k_inverse_conv(ctx, -2.0 * theta);
  return r_integral(theta, g, -ctx.log_potential_conv(g));
}

}  // namespace detail

// Spherical-integral term J(theta, mu, x) of the variational formula, as a
// two-case expression split at 2 theta = |G_mu(x)|.
inline double mckenna_theta_terms(double theta, const AtomicMeasure& nu,
                                  double x) {
  if (theta < 0.0) throw ThetaOutOfRange("mckenna_theta_terms: theta >= 0");
  if (theta == 0.0) return 0.0;
  if (x >= support_edge(nu))
    throw Error("mckenna_theta_terms: x must lie below the support");
  double g_abs = std::abs(stieltjes(nu, x));
  if (2.0 * theta <= g_abs) return detail::r_integral_atomic(nu, theta);
  return theta * x - 0.5 * (1.0 + std::log(2.0 * theta)) +
         0.5 * log_potential(nu, x);
}

inline double mckenna_theta_terms(double theta, const FreeConvContext& ctx,
                                  double x) {
  if (theta < 0.0) throw ThetaOutOfRange("mckenna_theta_terms: theta >= 0");
  if (theta == 0.0) return 0.0;
  if (x >= ctx.edge())
    throw Error("mckenna_theta_terms: x must lie below the edge");
  double g_abs = std::abs(ctx.stieltjes_conv(x));
  if (2.0 * theta <= g_abs) return detail::r_integral_conv(ctx, theta);
  return theta * x - 0.5 * (1.0 + std::log(2.0 * theta)) -
         0.5 * ctx.log_potential_conv(x);
}

struct McKennaResult {
  double value = 0.0;
  double theta = 0.0;  // optimal tilt strength
};

// Variational rate of the no-outlier ensemble at t = 1:
//   sup_{theta >= 0} [ Jc(theta) - Jn(theta) - theta^2 ],
// Jc the tilt term of the free convolution at x, Jn the tilt term of nu at
// its own edge (pure R-integral). On the searched bracket Jc is in its
// localized branch and the objective is concave.
inline McKennaResult mckenna_rate_details(const AtomicMeasure& nu, double x,
                                          const FreeConvContext* shared_ctx = nullptr) {
  std::optional<FreeConvContext> local;
  if (!shared_ctx) local.emplace(nu, 1.0);
  const FreeConvContext& ctx = shared_ctx ? *shared_ctx : *local;
  if (ctx.t() != 1.0) throw Error("mckenna_rate: requires t = 1");
  if (x > ctx.edge() + 1e-12) throw AboveEdge("mckenna_rate: x above the edge");
  x = std::min(x, ctx.edge());
  double lnu = support_edge(nu);
  double lpc = ctx.log_potential_conv(x);

  auto objective = [&](double theta) {
    double jc = -theta * x - 0.5 * (1.0 + std::log(2.0 * theta)) - 0.5 * lpc;
    return jc - detail::r_integral_atomic(nu, theta) - theta * theta;
  };
  // d/dtheta of the objective: -x + K_nu(-2 theta) - 2 theta
  auto slope = [&](double theta) {
    return -x + detail::k_inverse(nu, -2.0 * theta) - 2.0 * theta;
  };

  double theta_lo = 0.5 * std::abs(stieltjes(nu, ctx.shock()));
  double theta_hi = 5.0 * std::max(1.0, std::abs(x - lnu));
  while (slope(theta_hi) > 0.0) theta_hi *= 2.0;
  if (slope(theta_lo) <= 0.0) return {0.0, theta_lo};

  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = theta_lo, b = theta_hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = objective(c), fd = objective(d);
  while (b - a > 1e-10 * (1.0 + b)) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = objective(d);
    }
  }
  double theta = 0.5 * (a + b);
  // one Newton step on the slope
  double h = 1e-6 * (1.0 + theta);
  double curv = (slope(theta + h) - slope(theta - h)) / (2.0 * h);
  if (std::isfinite(curv) && curv < 0.0) {
    double polished = theta - slope(theta) / curv;
    if (polished > theta_lo && polished < theta_hi) theta = polished;
  }
  return {objective(theta), theta};
}

inline double mckenna_rate(const AtomicMeasure& nu, double x) {
  return mckenna_rate_details(nu, x).value;
}

}  // namespace ldgoe
