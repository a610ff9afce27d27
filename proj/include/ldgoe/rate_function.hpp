#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ldgoe/atomic_measure.hpp"
#include "ldgoe/errors.hpp"
#include "ldgoe/ext_real.hpp"
#include "ldgoe/free_convolution.hpp"

namespace ldgoe {

enum class Branch { bbp, pulled };

// Deformed ensemble (nu, t, outlier). The free-convolution context is shared
// so that replacing the outlier is cheap.
class DeformedModel {
public:
  DeformedModel(AtomicMeasure nu, double t, double outlier)
      : ctx_(std::make_shared<FreeConvContext>(std::move(nu), t)),
        outlier_(outlier) {
    validate();
  }

  DeformedModel(std::shared_ptr<const FreeConvContext> ctx, double outlier)
      : ctx_(std::move(ctx)), outlier_(outlier) {
    validate();
  }

  DeformedModel with_outlier(double outlier) const {
    return DeformedModel(ctx_, outlier);
  }

  const AtomicMeasure& nu() const { return ctx_->nu(); }
  double t() const { return ctx_->t(); }
  double outlier() const { return outlier_; }
  const FreeConvContext& ctx() const { return *ctx_; }
  std::shared_ptr<const FreeConvContext> ctx_ptr() const { return ctx_; }

  bool outlier_at_support_edge() const {
    return outlier_ >= support_edge(nu()) -
                           1e-13 * (1.0 + std::abs(support_edge(nu())));
  }

  // rho = H(outlier); -inf in the no-outlier convention (outlier = l_nu).
  double rho_or_ninf() const {
    if (outlier_at_support_edge())
      return -std::numeric_limits<double>::infinity();
    return ctx_->h_transform(outlier_);
  }

private:
  void validate() const {
    double lnu = support_edge(ctx_->nu());
    if (outlier_ > lnu + 1e-12 * (1.0 + std::abs(lnu)))
      throw Error("DeformedModel: outlier must satisfy Lambda <= l_nu");
  }

  std::shared_ptr<const FreeConvContext> ctx_;
  double outlier_;
};

// rho = H(Lambda). Requires Lambda strictly below l_nu.
inline double rho(const DeformedModel& model) {
  if (model.outlier_at_support_edge())
    throw OutlierAtEdge("rho: outlier at the support edge, H diverges");
  return model.ctx().h_transform(model.outlier());
}

// Almost-sure limit of the smallest eigenvalue: rho in the BBP regime
// (Lambda <= shock), the bulk edge otherwise.
inline double limit_smallest(const DeformedModel& model) {
  if (model.outlier() <= model.ctx().shock()) return rho(model);
  return model.ctx().edge();
}

namespace detail {

inline bool gamma_is_outlier(const DeformedModel& model, double lambda) {
  double shock = model.ctx().shock();
  if (model.outlier() <= shock) return true;
  return lambda <= model.rho_or_ninf();
}

}  // namespace detail

// Branch selector: Lambda in the BBP regime (or below rho), else the
// decreasing-branch preimage of lambda.
inline double gamma_branch(const DeformedModel& model, double lambda) {
  if (lambda > model.ctx().edge() + 1e-12)
    throw AboveEdge("gamma: lambda above the left edge");
  lambda = std::min(lambda, model.ctx().edge());
  if (detail::gamma_is_outlier(model, lambda)) return model.outlier();
  return model.ctx().subordination_upper(lambda);
}

// Two-argument rate I(lambda, g); rate(lambda) = I(lambda, gamma(lambda)).
inline double rate_two_arg(const DeformedModel& model, double lambda,
                           double g) {
  const auto& ctx = model.ctx();
  if (lambda > ctx.edge() + 1e-12)
    throw AboveEdge("rate_two_arg: lambda above the left edge");
  lambda = std::min(lambda, ctx.edge());
  double w = ctx.subordination_lower(lambda);
  double sw = log_potential(ctx.nu(), w);
  double sg = log_potential(ctx.nu(), g);
  double dg = lambda - g, dw = lambda - w;
  return 0.5 * (sw - sg) + (dg * dg - dw * dw) / (4.0 * ctx.t());
}

// The large-deviation rate function; +infinity above the left edge, the
// left-limit value exactly at it.
inline ExtReal rate(const DeformedModel& model, double lambda) {
  if (lambda > model.ctx().edge()) return ExtReal::infinity();
  return ExtReal::finite(
      rate_two_arg(model, lambda, gamma_branch(model, lambda)));
}

// dI/dlambda = (omega(lambda) - gamma(lambda)) / (2t), lambda strictly below
// the edge and away from the branch point in the pulled regime.
inline double rate_derivative(const DeformedModel& model, double lambda) {
  const auto& ctx = model.ctx();
  if (lambda >= ctx.edge())
    throw AboveEdge("rate_derivative: lambda not strictly below the edge");
  if (model.outlier() > ctx.shock() && !model.outlier_at_support_edge()) {
    double r = model.rho_or_ninf();
    if (std::abs(lambda - r) < 1e-10)
      throw AtBranchPoint("rate_derivative: lambda at the branch point rho");
  }
  double w = ctx.subordination_lower(lambda);
  double g = gamma_branch(model, lambda);
  return (w - g) / (2.0 * ctx.t());
}

struct RateCurve {
  std::vector<double> grid;
  std::vector<ExtReal> values;
  std::vector<Branch> branch;
};

inline RateCurve rate_curve(const DeformedModel& model, double lambda_min,
                            double lambda_max, std::size_t n) {
  if (n < 2) throw Error("rate_curve: n >= 2 required");
  RateCurve curve;
  curve.grid.reserve(n);
  curve.values.reserve(n);
  curve.branch.reserve(n);
  double h = (lambda_max - lambda_min) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    double lam = lambda_min + h * static_cast<double>(i);
    curve.grid.push_back(lam);
    curve.values.push_back(rate(model, lam));
    curve.branch.push_back(detail::gamma_is_outlier(model, lam) ? Branch::bbp
                                                                : Branch::pulled);
  }
  return curve;
}

inline const char* branch_name(Branch b) {
  return b == Branch::bbp ? "bbp" : "pulled";
}

}  // namespace ldgoe
