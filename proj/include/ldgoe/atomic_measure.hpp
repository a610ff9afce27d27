#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ldgoe/errors.hpp"

namespace ldgoe {

// Finitely supported probability measure: atoms (location, weight) with
// strictly increasing locations and positive weights summing to one.
class AtomicMeasure {
public:
  struct Atom {
    double location;
    double weight;
  };

  explicit AtomicMeasure(std::vector<Atom> atoms) {
    if (atoms.empty()) throw Error("AtomicMeasure: needs at least one atom");
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    double sum = 0.0;
    for (const auto& a : atoms) {
      if (!std::isfinite(a.location) || !std::isfinite(a.weight))
        throw Error("AtomicMeasure: non-finite atom");
      if (a.weight <= 0.0)
        throw Error("AtomicMeasure: weights must be positive");
      sum += a.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw Error("AtomicMeasure: weights sum to " + std::to_string(sum) +
                  ", expected 1 within 1e-9");
    // Merge locations closer than 1e-12 into a canonical atom.
    for (const auto& a : atoms) {
      if (!atoms_.empty() &&
          a.location - atoms_.back().location <= 1e-12 * (1.0 + std::abs(a.location))) {
        atoms_.back().weight += a.weight;
      } else {
        atoms_.push_back(a);
      }
    }
    for (auto& a : atoms_) a.weight /= sum;
  }

  static AtomicMeasure dirac(double location) {
    return AtomicMeasure({{location, 1.0}});
  }

  static AtomicMeasure from_pairs(
      const std::vector<std::pair<double, double>>& pairs) {
    std::vector<Atom> atoms;
    atoms.reserve(pairs.size());
    for (const auto& [loc, w] : pairs) atoms.push_back({loc, w});
    return AtomicMeasure(std::move(atoms));
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double location(std::size_t k) const { return atoms_[k].location; }
  double weight(std::size_t k) const { return atoms_[k].weight; }
  double max_location() const { return atoms_.back().location; }

  double mean() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.weight * a.location;
    return m;
  }
  double second_moment() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.weight * a.location * a.location;
    return m;
  }

  // Quantile function eta(u) = inf{ x : F(x) >= u }, evaluated in [0,1].
  double quantile(double u) const {
    double cum = 0.0;
    for (const auto& a : atoms_) {
      cum += a.weight;
      if (u <= cum + 1e-15) return a.location;
    }
    return atoms_.back().location;
  }

private:
  std::vector<Atom> atoms_;
};

inline void check_not_atom(const AtomicMeasure& m, double x) {
  for (const auto& a : m.atoms())
    if (std::abs(x - a.location) < 1e-13 * (1.0 + std::abs(a.location)))
      throw AtomCollision("evaluation point collides with atom at " +
                          std::to_string(a.location));
}

// Smallest atom location, the left edge of the support.
inline double support_edge(const AtomicMeasure& m) {
  return m.atoms().front().location;
}

// G(x) = sum w_i / (x - eta_i), for x off the atoms.
inline double stieltjes(const AtomicMeasure& m, double x) {
  check_not_atom(m, x);
  double s = 0.0;
  for (const auto& a : m.atoms()) s += a.weight / (x - a.location);
  return s;
}

// G'(x) = -sum w_i / (x - eta_i)^2, always negative.
inline double stieltjes_derivative(const AtomicMeasure& m, double x) {
  check_not_atom(m, x);
  double s = 0.0;
  for (const auto& a : m.atoms()) {
    double d = x - a.location;
    s -= a.weight / (d * d);
  }
  return s;
}

// S(x) = -sum w_i log|x - eta_i|.
inline double log_potential(const AtomicMeasure& m, double x) {
  check_not_atom(m, x);
  double s = 0.0;
  for (const auto& a : m.atoms()) s -= a.weight * std::log(std::abs(x - a.location));
  return s;
}

// Nondecreasing map [0,1] -> R given either as an affine interval map or a
// piecewise-linear table (duplicate u-breakpoints encode jumps).
class QuantileSpec {
public:
  static QuantileSpec uniform(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b))
      throw UnboundedQuantile("uniform quantile with non-finite endpoint");
    if (b < a) throw Error("QuantileSpec: uniform(a,b) needs a <= b");
    QuantileSpec q;
    q.knots_ = {{0.0, a}, {1.0, b}};
    return q;
  }

  // Breakpoints (u, value): u nondecreasing in [0,1], values nondecreasing.
  static QuantileSpec table(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2) throw Error("QuantileSpec: table needs >= 2 rows");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (!std::isfinite(knots[i].second))
        throw UnboundedQuantile("quantile table with non-finite value");
      if (knots[i].first < -1e-12 || knots[i].first > 1.0 + 1e-12)
        throw Error("QuantileSpec: u outside [0,1]");
      if (i > 0 && (knots[i].first < knots[i - 1].first ||
                    knots[i].second < knots[i - 1].second - 1e-12))
        throw Error("QuantileSpec: table must be nondecreasing");
    }
    if (std::abs(knots.front().first) > 1e-12 ||
        std::abs(knots.back().first - 1.0) > 1e-12)
      throw Error("QuantileSpec: table must span u in [0,1]");
    QuantileSpec q;
    q.knots_ = std::move(knots);
    return q;
  }

  // Step-function table of an atomic measure (its own quantile function).
  static QuantileSpec of_measure(const AtomicMeasure& m) {
    std::vector<std::pair<double, double>> knots;
    double cum = 0.0;
    for (const auto& a : m.atoms()) {
      knots.emplace_back(cum, a.location);
      cum += a.weight;
      knots.emplace_back(std::min(cum, 1.0), a.location);
    }
    knots.back().first = 1.0;
    return table(std::move(knots));
  }

  double min_value() const { return knots_.front().second; }
  double max_value() const { return knots_.back().second; }

  double operator()(double u) const {
    u = std::min(1.0, std::max(0.0, u));
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      const auto& [u0, v0] = knots_[i - 1];
      const auto& [u1, v1] = knots_[i];
      if (u <= u1 || i == knots_.size() - 1) {
        if (u1 == u0) continue;  // jump; value taken from the next segment
        double tt = (u - u0) / (u1 - u0);
        return v0 + tt * (v1 - v0);
      }
    }
    return knots_.back().second;
  }

  // Lebesgue measure of { u : eta(u) < c } (strict) or { eta(u) <= c }.
  double mass_below(double c, bool strict) const {
    double total = 0.0;
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      const auto& [u0, v0] = knots_[i - 1];
      const auto& [u1, v1] = knots_[i];
      double len = u1 - u0;
      if (len <= 0.0) continue;
      if (v1 == v0) {
        if (v0 < c || (!strict && v0 == c)) total += len;
      } else {
        double frac = (c - v0) / (v1 - v0);
        total += len * std::min(1.0, std::max(0.0, frac));
      }
    }
    return total;
  }

private:
  QuantileSpec() = default;
  std::vector<std::pair<double, double>> knots_;
};

enum class GridSide { lower, upper };

// Pushforward of the quantile map under the floor (lower) or ceiling (upper)
// grid map with origin `edge` and mesh `eps`. Zero-mass cells are dropped.
inline AtomicMeasure discretize(const QuantileSpec& q, double edge, double eps,
                                GridSide side) {
  if (!(eps > 0.0)) throw Error("discretize: eps must be positive");
  if (!std::isfinite(q.min_value()) || !std::isfinite(q.max_value()))
    throw UnboundedQuantile("discretize: quantile not bounded");
  if (q.min_value() < edge - 1e-9 * (1.0 + std::abs(edge)))
    throw Error("discretize: quantile takes values below the grid origin");

  long q_max = static_cast<long>(std::ceil((q.max_value() - edge) / eps)) + 1;
  std::vector<AtomicMeasure::Atom> atoms;
  double prev = 0.0;
  for (long k = 0; k <= q_max; ++k) {
    double mass, loc;
    if (side == GridSide::lower) {
      // cell [edge + k eps, edge + (k+1) eps) maps to edge + k eps
      loc = edge + static_cast<double>(k) * eps;
      double below_hi = q.mass_below(edge + static_cast<double>(k + 1) * eps, true);
      mass = below_hi - prev;
      prev = below_hi;
    } else {
      // cell (edge + (k-1) eps, edge + k eps] maps to edge + k eps
      loc = edge + static_cast<double>(k) * eps;
      double below_hi = q.mass_below(loc, false);
      mass = below_hi - prev;
      prev = below_hi;
    }
    if (mass > 1e-15) atoms.push_back({loc, mass});
  }
  // Absorb rounding slack into the last cell so weights sum to one.
  double sum = 0.0;
  for (const auto& a : atoms) sum += a.weight;
  if (!atoms.empty()) atoms.back().weight += 1.0 - sum;
  return AtomicMeasure(std::move(atoms));
}

}  // namespace ldgoe
