#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ldgoe/atomic_measure.hpp"
#include "ldgoe/errors.hpp"
#include "ldgoe/quadrature.hpp"
#include "ldgoe/root_finding.hpp"

namespace ldgoe {

// Free convolution of an atomic measure with the semicircle law of variance
// t, through H(z) = z + t G(z): shock point, left edge, both inverse
// branches, Biane's density reconstruction and the Hopf-Lax log-potential.
class FreeConvContext {
public:
  FreeConvContext(AtomicMeasure nu, double t) : nu_(std::move(nu)), t_(t) {
    if (!(t > 0.0)) throw Error("FreeConvContext: t must be positive");
    shock_ = solve_shock_below();
    edge_ = h_transform(shock_);
    right_shock_ = solve_shock_above();
    right_edge_ = right_shock_ + t_ * stieltjes(nu_, right_shock_);
  }

  const AtomicMeasure& nu() const { return nu_; }
  double t() const { return t_; }

  // omega-bar, the merge point of the characteristics.
  double shock() const { return shock_; }
  // Left edge of nu ⊞ sigma_t.
  double edge() const { return edge_; }
  double right_shock() const { return right_shock_; }
  double right_edge() const { return right_edge_; }

  // H(x) = x + t G(x) on (-inf, l_nu).
  double h_transform(double x) const {
    if (x >= support_edge(nu_))
      throw DomainAboveSupport("h_transform: x >= left edge of support");
    return x + t_ * stieltjes(nu_, x);
  }

  double h_derivative(double x) const {
    return 1.0 + t_ * stieltjes_derivative(nu_, x);
  }

  // Increasing-branch inverse of H: the unique omega <= shock with
  // H(omega) = x, for x <= edge.
  double subordination_lower(double x) const {
    if (x > edge_ + 1e-12)
      throw AboveEdge("subordination_lower: x above the left edge");
    x = std::min(x, edge_);
    double hi = shock_;
    double lo = std::min(shock_ - 1.0, x);
    while (h_transform(lo) > x) lo = shock_ + 2.0 * (lo - shock_);
    double w = bisect([&](double z) { return h_transform(z) - x; }, lo, hi);
    return newton_polish([&](double z) { return h_transform(z) - x; },
                         [&](double z) { return h_derivative(z); }, w, lo, hi);
  }

  // Decreasing-branch inverse: the unique omega in [shock, l_nu) with
  // H(omega) = x.
  double subordination_upper(double x) const {
    if (x > edge_ + 1e-12)
      throw AboveEdge("subordination_upper: x above the left edge");
    x = std::min(x, edge_);
    double lnu = support_edge(nu_);
    double lo = shock_;
    double delta = 0.25 * (lnu - shock_);
    double hi = lnu - delta;
    for (int i = 0; i < 2000 && h_transform(hi) > x; ++i) {
      delta *= 0.25;
      hi = lnu - delta;
      if (delta < 1e-300)
        throw BelowBranch("subordination_upper: branch does not attain x");
    }
    double w = bisect([&](double z) { return h_transform(z) - x; }, lo, hi);
    return newton_polish([&](double z) { return h_transform(z) - x; },
                         [&](double z) { return h_derivative(z); }, w, lo, hi);
  }

  // Biane's v_t(u): zero where sum w_i/(eta_i-u)^2 <= 1/t, else the root of
  // sum w_i/((eta_i-u)^2 + v^2) = 1/t.
  double biane_v(double u) const {
    double inv_t = 1.0 / t_;
    if (sq_integral(u, 0.0) <= inv_t) return 0.0;
    double hi = std::sqrt(t_);
    return bisect([&](double v) { return sq_integral(u, v) - inv_t; }, 0.0, hi);
  }

  struct DensityPoint {
    double x;
    double density;
  };

  // Sweeps u over [shock, right_shock], emitting (x(u), v(u)/(pi t)) with
  // x(u) = u + t Re G(u + i v(u)) nondecreasing. Starts from a uniform base
  // grid of n_points and subdivides cells until linear interpolation of the
  // emitted points meets a trapezoid error budget well below 1e-6, so the
  // square-root edges do not pollute downstream quadrature.
  std::vector<DensityPoint> density_curve(std::size_t n_points) const {
    if (n_points < 2) throw Error("density_curve: n_points >= 2 required");
    const double pi = 3.14159265358979323846;
    auto eval = [&](double u) -> DensityPoint {
      double v = biane_v(u);
      return {u + t_ * re_stieltjes(u, v), v / (pi * t_)};
    };
    double range_x = right_edge_ - edge_;
    std::vector<DensityPoint> out;
    out.reserve(n_points + 256);
    std::function<void(double, const DensityPoint&, double, const DensityPoint&,
                       int)>
        refine = [&](double u0, const DensityPoint& p0, double u1,
                     const DensityPoint& p1, int depth) {
          double um = 0.5 * (u0 + u1);
          DensityPoint pm = eval(um);
          double lin = p1.x > p0.x
                           ? p0.density + (p1.density - p0.density) *
                                              (pm.x - p0.x) / (p1.x - p0.x)
                           : 0.5 * (p0.density + p1.density);
          // proportional budget sums to 2e-8 overall; the absolute floor
          // keeps cube-root cusps from forcing unbounded subdivision
          double cell_budget =
              std::max(2e-8 * (p1.x - p0.x + 1e-300) / range_x, 1e-13);
          double err = 0.5 * std::abs(pm.density - lin) * (p1.x - p0.x);
          if (depth > 0 && err > cell_budget) {
            refine(u0, p0, um, pm, depth - 1);
            out.push_back(pm);
            refine(um, pm, u1, p1, depth - 1);
          } else {
            out.push_back(pm);
          }
        };
    double h = (right_shock_ - shock_) / static_cast<double>(n_points - 1);
    DensityPoint prev = eval(shock_);
    out.push_back(prev);
    for (std::size_t i = 1; i < n_points; ++i) {
      double u = shock_ + h * static_cast<double>(i);
      DensityPoint next = eval(u);
      refine(u - h, prev, u, next, 44);
      out.push_back(next);
      prev = next;
    }
    return out;
  }

  // G of the free convolution, x strictly below the edge.
  double stieltjes_conv(double x) const {
    if (x >= edge_) throw AboveEdge("stieltjes_conv: x not below the edge");
    return stieltjes(nu_, subordination_lower(x));
  }

  // integral of log|lambda - x| d(nu ⊞ sigma_t)(lambda) for x <= edge,
  // through the Hopf-Lax identity (note the sign: this is -S of the
  // convolution).
  double log_potential_conv(double x) const {
    if (x > edge_ + 1e-12)
      throw AboveEdge("log_potential_conv: x above the left edge");
    x = std::min(x, edge_);
    double w = subordination_lower(x);
    double d = w - x;
    return -log_potential(nu_, w) + d * d / (2.0 * t_);
  }

private:
  double sq_integral(double u, double v) const {
    double s = 0.0;
    for (const auto& a : nu_.atoms()) {
      double d = a.location - u;
      s += a.weight / (d * d + v * v);
    }
    return s;
  }

  double re_stieltjes(double u, double v) const {
    double s = 0.0;
    for (const auto& a : nu_.atoms()) {
      double d = u - a.location;
      s += a.weight * d / (d * d + v * v);
    }
    return s;
  }

  // Root of sum w_i/(eta_i - w)^2 = 1/t below the support; for atomic nu the
  // integral blows up at the edge, so the root always exists.
  double solve_shock_below() const {
    double lnu = support_edge(nu_);
    double inv_t = 1.0 / t_;
    double lo = lnu - std::sqrt(t_) - 1.0;
    double delta = 1e-3 * (1.0 + std::abs(lnu));
    double hi = lnu - delta;
    while (sq_integral(hi, 0.0) < inv_t) {
      delta *= 0.25;
      hi = lnu - delta;
    }
    return bisect([&](double w) { return sq_integral(w, 0.0) - inv_t; }, lo, hi);
  }

  double solve_shock_above() const {
    double redge = nu_.max_location();
    double inv_t = 1.0 / t_;
    double hi = redge + std::sqrt(t_) + 1.0;
    double delta = 1e-3 * (1.0 + std::abs(redge));
    double lo = redge + delta;
    while (sq_integral(lo, 0.0) < inv_t) {
      delta *= 0.25;
      lo = redge + delta;
    }
    return bisect([&](double w) { return sq_integral(w, 0.0) - inv_t; }, lo, hi);
  }

  AtomicMeasure nu_;
  double t_;
  double shock_;
  double edge_;
  double right_shock_;
  double right_edge_;
};

// Tabulated CDF of the free convolution, a Monte Carlo diagnostic.
class CdfTable {
public:
  explicit CdfTable(const FreeConvContext& ctx, std::size_t n_points = 4001) {
    auto curve = ctx.density_curve(n_points);
    xs_.reserve(curve.size());
    cums_.reserve(curve.size());
    double acc = 0.0;
    xs_.push_back(curve.front().x);
    cums_.push_back(0.0);
    for (std::size_t i = 1; i < curve.size(); ++i) {
      acc += 0.5 * (curve[i].density + curve[i - 1].density) *
             (curve[i].x - curve[i - 1].x);
      xs_.push_back(curve[i].x);
      cums_.push_back(acc);
    }
    total_ = acc;
  }

  double operator()(double x) const {
    if (x <= xs_.front()) return 0.0;
    if (x >= xs_.back()) return 1.0;
    auto it = std::lower_bound(xs_.begin(), xs_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - xs_.begin());
    double x0 = xs_[i - 1], x1 = xs_[i];
    double c0 = cums_[i - 1], c1 = cums_[i];
    double c = x1 > x0 ? c0 + (c1 - c0) * (x - x0) / (x1 - x0) : c0;
    return std::min(1.0, std::max(0.0, c / total_));
  }

private:
  std::vector<double> xs_;
  std::vector<double> cums_;
  double total_ = 1.0;
};

inline double cdf(const FreeConvContext& ctx, double x) {
  return CdfTable(ctx)(x);
}

}  // namespace ldgoe
