#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ldgoe/errors.hpp"
#include "ldgoe/ext_real.hpp"
#include "ldgoe/rate_function.hpp"
#include "ldgoe/rng.hpp"
#include "ldgoe/root_finding.hpp"

namespace ldgoe {

// Point of the simplex: (y_0, ..., y_p), entries in [0,1] summing to one.
class SimplexVector {
public:
  explicit SimplexVector(std::vector<double> y) : y_(std::move(y)) {
    double sum = 0.0;
    for (double& v : y_) {
      if (v < 0.0) {
        if (v < -1e-9) throw Error("SimplexVector: negative entry");
        v = 0.0;
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw Error("SimplexVector: entries sum to " + std::to_string(sum));
    for (double& v : y_) v /= sum;
  }

  std::size_t dim() const { return y_.size(); }
  double operator[](std::size_t i) const { return y_[i]; }
  const std::vector<double>& values() const { return y_; }

private:
  std::vector<double> y_;
};

inline double c_t(double t) {
  if (!(t > 0.0)) throw Error("c_t: t must be positive");
  return 0.5 - 0.5 * std::log(t);
}

// log Z_N^t for the GOE of variance t,
// Z = N! (2t/N)^{N(N+1)/4} (2 pi)^N prod_{j=0}^{N-1} Gamma((j+1)/2)/Gamma(1/2).
inline double selberg_log_partition(std::int64_t n, double t) {
  if (n < 1) throw Error("selberg_log_partition: N >= 1 required");
  const double log_gamma_half = std::lgamma(0.5);
  double nn = static_cast<double>(n);
  double s = std::lgamma(nn + 1.0) +
             0.25 * nn * (nn + 1.0) * std::log(2.0 * t / nn) +
             nn * std::log(2.0 * 3.14159265358979323846);
  for (std::int64_t j = 0; j < n; ++j)
    s += std::lgamma(0.5 * static_cast<double>(j + 1)) - log_gamma_half;
  return s;
}

// (1/N) log(Z_{N-1}^{t(N-1)/N} / Z_N^t); converges to c_t.
inline double selberg_partition_ratio(std::int64_t n, double t) {
  if (n < 2) throw Error("selberg_partition_ratio: N >= 2 required");
  double nn = static_cast<double>(n);
  return (selberg_log_partition(n - 1, t * (nn - 1.0) / nn) -
          selberg_log_partition(n, t)) /
         nn;
}

// Quadratic part of the projected density:
// L = -(lambda/2t) M + (1/2t) M2 - (1/4t) M^2 with M, M2 the first two
// moments of the mass profile against the deformed spectrum.
inline double big_L(const DeformedModel& model, double lambda,
                    const SimplexVector& y) {
  const auto& nu = model.nu();
  if (y.dim() != nu.size() + 1)
    throw Error("big_L: simplex dimension must be p+1");
  double lam0 = model.outlier();
  double m = lam0 * y[0];
  double m2 = lam0 * lam0 * y[0];
  for (std::size_t k = 0; k < nu.size(); ++k) {
    double eta = nu.location(k);
    m += eta * y[k + 1];
    m2 += eta * eta * y[k + 1];
  }
  double t = model.t();
  return -lambda / (2.0 * t) * m + m2 / (2.0 * t) - m * m / (4.0 * t);
}

namespace detail {

// Dirichlet LDP rate as a plain double; +inf when some y_k vanishes while
// alpha_k > 0.
inline double dirichlet_rate_raw(const AtomicMeasure& nu,
                                 const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t k = 0; k < nu.size(); ++k) {
    double a = nu.weight(k);
    double v = y[k + 1];
    if (v <= 0.0) return std::numeric_limits<double>::infinity();
    s -= 0.5 * a * std::log(v / a);
  }
  return s;
}

}  // namespace detail

// Entropy cost of an eigenvector mass profile, -1/2 sum alpha_k log(y_k/alpha_k).
inline ExtReal dirichlet_rate(const AtomicMeasure& nu, const SimplexVector& y) {
  if (y.dim() != nu.size() + 1)
    throw Error("dirichlet_rate: simplex dimension must be p+1");
  double v = detail::dirichlet_rate_raw(nu, y.values());
  return std::isfinite(v) ? ExtReal::finite(v) : ExtReal::infinity();
}

// Root of the secular equation: the new outlier of the diagonal matrix
// compressed to the orthocomplement of a direction with mass profile Y.
// Conventions: Lambda when y_0 = 0, eta_1 when y_1 = 0.
inline double phi(const DeformedModel& model, const SimplexVector& y) {
  const auto& nu = model.nu();
  if (y.dim() != nu.size() + 1)
    throw Error("phi: simplex dimension must be p+1");
  double lam0 = model.outlier();
  double eta1 = nu.location(0);
  if (y[0] <= 0.0) return lam0;
  if (y[1] <= 0.0) return eta1;
  // f(z) = sum_k y_k (eta_k - Lambda)/(eta_k - z) = 1, increasing on
  // [Lambda, eta_1).
  auto f = [&](double z) {
    double s = 0.0;
    for (std::size_t k = 0; k < nu.size(); ++k) {
      double eta = nu.location(k);
      s += y[k + 1] * (eta - lam0) / (eta - z);
    }
    return s - 1.0;
  };
  if (lam0 >= eta1) return eta1;  // degenerate no-outlier profile
  double delta = 0.5 * (eta1 - lam0);
  double hi = eta1 - delta;
  while (f(hi) < 0.0) {
    delta *= 0.25;
    hi = eta1 - delta;
    if (delta < 1e-300) return eta1;
  }
  if (f(lam0) >= 0.0) return lam0;
  return bisect(f, lam0, hi);
}

// Closed-form critical profile y_k = t alpha_k / ((eta_k - omega)(eta_k - g)),
// y_0 = 1 - sum. Infeasible when y_0 < -1e-12.
struct YOfGamma {
  bool feasible = false;
  std::vector<double> y;  // size p+1 when feasible
  double y0_direct = 0.0;
  double y0_branch = 0.0;  // (lambda - rho)/(omega - Lambda), or 1 + t G'(Lambda)
};

inline YOfGamma y_of_gamma(const DeformedModel& model, double lambda, double g) {
  const auto& nu = model.nu();
  const auto& ctx = model.ctx();
  double t = model.t();
  YOfGamma out;
  if (g >= support_edge(nu) - 1e-13 * (1.0 + std::abs(support_edge(nu)))) {
    out.feasible = false;  // g at the support edge (no-outlier convention)
    return out;
  }
  double w = ctx.subordination_lower(std::min(lambda, ctx.edge()));
  std::vector<double> y(nu.size() + 1, 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < nu.size(); ++k) {
    double eta = nu.location(k);
    y[k + 1] = t * nu.weight(k) / ((eta - w) * (eta - g));
    sum += y[k + 1];
  }
  double y0 = 1.0 - sum;
  out.y0_direct = y0;
  if (std::abs(g - model.outlier()) <= 1e-12 * (1.0 + std::abs(g))) {
    double r = model.rho_or_ninf();
    if (std::abs(lambda - r) <= 1e-9 * (1.0 + std::abs(lambda)))
      out.y0_branch = 1.0 + t * stieltjes_derivative(nu, model.outlier());
    else
      out.y0_branch = (lambda - r) / (w - model.outlier());
  } else {
    out.y0_branch = 0.0;  // gamma = omega*: the mean constraint telescopes
  }
  if (y0 < -1e-12) {
    out.feasible = false;
    return out;
  }
  y[0] = std::abs(y0) <= 1e-12 ? 0.0 : y0;
  // absorb the clamp so the entries sum to one exactly
  if (y[0] == 0.0 && sum != 1.0) {
    for (std::size_t k = 1; k < y.size(); ++k) y[k] /= sum;
  }
  out.y = std::move(y);
  out.feasible = true;
  return out;
}

// All functionals at one (model, lambda, Y).
struct FunctionalEval {
  double L = 0.0;
  double I_nu = 0.0;  // +inf when the profile kills a populated eigenspace
  double J = 0.0;
  double K = 0.0;
  double phi = 0.0;
  bool indicator_active = false;  // omega(lambda) >= phi
};

inline FunctionalEval functional_K(const DeformedModel& model, double lambda,
                                   const SimplexVector& y) {
  const auto& ctx = model.ctx();
  if (lambda > ctx.edge() + 1e-12)
    throw AboveEdge("functional_K: lambda above the left edge");
  lambda = std::min(lambda, ctx.edge());
  FunctionalEval out;
  out.L = big_L(model, lambda, y);
  out.I_nu = detail::dirichlet_rate_raw(model.nu(), y.values());
  out.J = out.L + out.I_nu;
  out.K = out.J - c_t(model.t()) - ctx.log_potential_conv(lambda) +
          lambda * lambda / (4.0 * model.t());
  out.phi = phi(model, y);
  out.indicator_active = ctx.subordination_lower(lambda) >= out.phi;
  return out;
}

// ---- simplex optimization harness -----------------------------------------

// Euclidean projection onto the probability simplex.
inline std::vector<double> project_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  int rho = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    double cand = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - cand > 0.0) {
      rho = static_cast<int>(j + 1);
      tau = cand;
    }
  }
  (void)rho;
  for (double& x : v) x = std::max(0.0, x - tau);
  return v;
}

struct DescentResult {
  std::vector<double> y;
  double value = std::numeric_limits<double>::infinity();
};

// Projected-gradient descent with numerical gradients and backtracking; the
// objective may return +inf outside its effective domain.
inline DescentResult projected_gradient_min(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> y0, int max_iters = 300) {
  auto fp = [&](std::vector<double> v) { return f(project_simplex(std::move(v))); };
  std::vector<double> y = project_simplex(std::move(y0));
  double fy = f(y);
  double step = 0.25;
  const double h = 1e-7;
  std::vector<double> grad(y.size());
  for (int it = 0; it < max_iters; ++it) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      std::vector<double> yp = y, ym = y;
      yp[i] += h;
      ym[i] -= h;
      double fpv = fp(yp), fmv = fp(ym);
      if (std::isfinite(fpv) && std::isfinite(fmv))
        grad[i] = (fpv - fmv) / (2.0 * h);
      else if (std::isfinite(fpv))
        grad[i] = (fpv - fy) / h;
      else if (std::isfinite(fmv))
        grad[i] = (fy - fmv) / h;
      else
        grad[i] = 0.0;
    }
    double gnorm = 0.0;
    for (double g : grad) gnorm += g * g;
    if (gnorm < 1e-26) break;
    bool moved = false;
    double s = step;
    for (int bt = 0; bt < 60; ++bt) {
      std::vector<double> trial = y;
      for (std::size_t i = 0; i < y.size(); ++i) trial[i] -= s * grad[i];
      trial = project_simplex(std::move(trial));
      double ft = f(trial);
      if (ft < fy - 1e-15) {
        y = std::move(trial);
        fy = ft;
        step = std::min(0.5, s * 1.5);
        moved = true;
        break;
      }
      s *= 0.5;
    }
    if (!moved) break;
  }
  return {std::move(y), fy};
}

inline std::vector<double> random_simplex_point(std::uint64_t seed,
                                                std::uint64_t index,
                                                std::size_t dim) {
  std::vector<double> y(dim);
  double sum = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    y[i] = -std::log(rng::u01(seed, index, i));
    sum += y[i];
  }
  for (double& v : y) v /= sum;
  return y;
}

// ---- minimizers ------------------------------------------------------------

struct MinimizeResult {
  SimplexVector y;
  double value;
};

// Minimizer of J(lambda, .) = L + I_nu over the closed-form candidate pair
// {Y(Lambda), Y(omega*)} (the smaller feasible one).
inline MinimizeResult minimize_J(const DeformedModel& model, double lambda) {
  const auto& ctx = model.ctx();
  if (lambda > ctx.edge() + 1e-12)
    throw AboveEdge("minimize_J: lambda above the left edge");
  lambda = std::min(lambda, ctx.edge());
  auto j_value = [&](const std::vector<double>& y) {
    return big_L(model, lambda, SimplexVector(y)) +
           detail::dirichlet_rate_raw(model.nu(), y);
  };
  std::optional<MinimizeResult> best;
  auto consider = [&](const YOfGamma& cand) {
    if (!cand.feasible) return;
    double v = j_value(cand.y);
    if (!best || v < best->value) best = MinimizeResult{SimplexVector(cand.y), v};
  };
  consider(y_of_gamma(model, lambda, model.outlier()));
  consider(y_of_gamma(model, lambda, ctx.subordination_upper(lambda)));
  if (!best) throw Error("minimize_J: no feasible closed-form candidate");
  return *best;
}

struct VerifiedMinimum {
  SimplexVector y;
  double value;
  double best_restart_value;
  bool confirmed;  // no restart ended more than 1e-6 below the candidate value
};

// Random-restart falsification of minimize_J.
inline VerifiedMinimum minimize_J_verified(const DeformedModel& model,
                                           double lambda, int restarts = 20,
                                           std::uint64_t seed = 20240u) {
  MinimizeResult closed = minimize_J(model, lambda);
  auto obj = [&](const std::vector<double>& y) {
    double s = 0.0;
    for (double v : y) s += v;
    if (std::abs(s - 1.0) > 1e-6) return std::numeric_limits<double>::infinity();
    return big_L(model, lambda, SimplexVector(y)) +
           detail::dirichlet_rate_raw(model.nu(), y);
  };
  double best_restart = std::numeric_limits<double>::infinity();
  std::size_t dim = model.nu().size() + 1;
  for (int r = 0; r < restarts; ++r) {
    auto res = projected_gradient_min(
        obj, random_simplex_point(seed, static_cast<std::uint64_t>(r), dim));
    best_restart = std::min(best_restart, res.value);
  }
  return {closed.y, closed.value, best_restart,
          best_restart >= closed.value - 1e-6};
}

// ---- fixed-point equation --------------------------------------------------

struct FixedPointReport {
  double lambda = 0.0;
  double rate = 0.0;
  double best = 0.0;      // infimum of K + indicator * inner rate
  double residual = 0.0;  // |rate - best|
  std::vector<double> argmin_y;
  double phi_at_argmin = 0.0;
};

namespace detail {

// Rate of the model with outlier replaced by g, reusing per-lambda data.
struct InnerRate {
  const DeformedModel* model;
  double lambda, omega, omega_star, s_omega, lnu;

  InnerRate(const DeformedModel& m, double lam)
      : model(&m),
        lambda(lam),
        omega(m.ctx().subordination_lower(lam)),
        omega_star(m.ctx().subordination_upper(lam)),
        s_omega(log_potential(m.nu(), omega)),
        lnu(support_edge(m.nu())) {}

  double at_outlier(double out) const {
    const auto& ctx = model->ctx();
    double g;
    if (out <= ctx.shock()) {
      g = out;
    } else if (out >= lnu - 1e-13 * (1.0 + std::abs(lnu))) {
      g = omega_star;  // no-outlier convention
    } else {
      g = lambda <= ctx.h_transform(out) ? out : omega_star;
    }
    double sg = log_potential(model->nu(), g);
    double dg = lambda - g, dw = lambda - omega;
    return 0.5 * (s_omega - sg) + (dg * dg - dw * dw) / (4.0 * model->t());
  }
};

}  // namespace detail

// Checks that the rate function solves the functional equation
// I(lambda) = inf_Y { K(Lambda, lambda, Y) + I^{Phi(Lambda,Y)}(lambda)
//                     1[omega(lambda) >= Phi(Lambda,Y)] }.
// The infimum runs over the closed-form candidates plus projected-gradient
// refinements from random simplex starts.
inline FixedPointReport fixed_point_residual(const DeformedModel& model,
                                             double lambda, int restarts = 50,
                                             std::uint64_t seed = 50123u) {
  const auto& ctx = model.ctx();
  if (lambda >= ctx.edge())
    throw AboveEdge("fixed_point_residual: lambda must be below the edge");

  detail::InnerRate inner(model, lambda);
  double lpc = ctx.log_potential_conv(lambda);
  double ct = c_t(model.t());
  double quarter = lambda * lambda / (4.0 * model.t());

  auto objective = [&](const std::vector<double>& y) {
    double s = 0.0;
    for (double v : y) {
      if (v < 0.0) return std::numeric_limits<double>::infinity();
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-6)
      return std::numeric_limits<double>::infinity();
    SimplexVector sv(y);
    double k = big_L(model, lambda, sv) +
               detail::dirichlet_rate_raw(model.nu(), y) - ct - lpc + quarter;
    if (!std::isfinite(k)) return k;
    double ph = phi(model, sv);
    if (inner.omega >= ph) k += inner.at_outlier(ph);
    return k;
  };

  FixedPointReport rep;
  rep.lambda = lambda;
  rep.rate = rate(model, lambda).value();

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_y;
  auto consider = [&](const std::vector<double>& y) {
    double v = objective(y);
    if (v < best) {
      best = v;
      best_y = y;
    }
  };
  auto cand_out = y_of_gamma(model, lambda, model.outlier());
  if (cand_out.feasible) consider(cand_out.y);
  auto cand_star = y_of_gamma(model, lambda, inner.omega_star);
  if (cand_star.feasible) consider(cand_star.y);
  std::size_t dim = model.nu().size() + 1;
  for (int r = 0; r < restarts; ++r) {
    auto res = projected_gradient_min(
        objective, random_simplex_point(seed, static_cast<std::uint64_t>(r), dim));
    if (res.value < best) {
      best = res.value;
      best_y = res.y;
    }
  }
  rep.best = best;
  rep.residual = std::abs(rep.rate - best);
  rep.argmin_y = best_y;
  rep.phi_at_argmin = phi(model, SimplexVector(best_y));
  return rep;
}

}  // namespace ldgoe
