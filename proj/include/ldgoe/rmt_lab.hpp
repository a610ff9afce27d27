#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <utility>
#include <vector>

#include "ldgoe/errors.hpp"
#include "ldgoe/rate_function.hpp"
#include "ldgoe/rng.hpp"
#include "ldgoe/special_functions.hpp"
#include "ldgoe/variational.hpp"

namespace ldgoe {

struct GoeSpec {
  int N = 2;
  double t = 1.0;
  std::uint64_t seed = 0;
};

struct DeformedSample {
  Eigen::MatrixXd matrix;          // X = G + B
  std::vector<double> b_diag;      // outlier first, then eta blocks ascending
  std::vector<int> multiplicities; // N_1, ..., N_p (outlier excluded)
  double outlier = 0.0;
};

// Monte Carlo experiment summary.
struct McReport {
  std::int64_t n_samples = 0;
  std::int64_t n_hits = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  double empirical_rate = 0.0;
  bool zero_hits = false;
  std::uint64_t seed = 0;
  int N = 0;
  double window = 0.0;
  std::vector<double> component_estimates;
  std::vector<double> component_targets;
  std::vector<double> component_std_errors;
  double diagnostic = 0.0;
};

namespace detail {

template <typename F>
void parallel_for(std::int64_t n, int workers, F&& body) {
  workers = std::max(1, workers);
  if (workers == 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::int64_t i = next.fetch_add(1);
        if (i >= n) return;
        body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

// GOE of variance t: off-diagonal variance t/N, diagonal 2t/N, entries a
// pure function of (seed, sample_index, entry_index).
inline Eigen::MatrixXd sample_goe(const GoeSpec& spec,
                                  std::uint64_t sample_index = 0) {
  if (spec.N < 2) throw Error("sample_goe: N >= 2 required");
  int n = spec.N;
  double off = std::sqrt(spec.t / n);
  double diag = off * std::sqrt(2.0);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      std::uint64_t entry = static_cast<std::uint64_t>(i) *
                                static_cast<std::uint64_t>(n) +
                            static_cast<std::uint64_t>(j);
      double z = rng::normal(spec.seed, sample_index, entry);
      double v = (i == j ? diag : off) * z;
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

// Largest-remainder rounding of the weights to integer multiplicities
// summing to `total`.
inline std::vector<int> multiplicities_from_weights(const AtomicMeasure& nu,
                                                    int total) {
  std::vector<int> mult(nu.size());
  std::vector<std::pair<double, std::size_t>> rem(nu.size());
  int assigned = 0;
  for (std::size_t k = 0; k < nu.size(); ++k) {
    double raw = nu.weight(k) * static_cast<double>(total);
    mult[k] = static_cast<int>(std::floor(raw));
    rem[k] = {raw - std::floor(raw), k};
    assigned += mult[k];
  }
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int i = 0; i < total - assigned; ++i) mult[rem[i % rem.size()].second] += 1;
  return mult;
}

// X = G + B with B = diag(Lambda, eta_1 x N_1, ...), multiplicities summing
// to N - 1.
inline DeformedSample build_deformed(const GoeSpec& spec,
                                     const DeformedModel& model,
                                     std::uint64_t sample_index = 0) {
  DeformedSample out;
  out.outlier = model.outlier();
  out.multiplicities = multiplicities_from_weights(model.nu(), spec.N - 1);
  out.b_diag.reserve(spec.N);
  out.b_diag.push_back(model.outlier());
  for (std::size_t k = 0; k < model.nu().size(); ++k)
    for (int c = 0; c < out.multiplicities[k]; ++c)
      out.b_diag.push_back(model.nu().location(k));
  out.matrix = sample_goe(spec, sample_index);
  for (int i = 0; i < spec.N; ++i) out.matrix(i, i) += out.b_diag[i];
  return out;
}

namespace detail {

// Number of eigenvalues of the symmetric tridiagonal (d, e) at or below x,
// by counting nonpositive Sturm pivots (zero pivots count as below).
inline int sturm_count(const Eigen::VectorXd& d, const Eigen::VectorXd& e,
                       double x) {
  int n = static_cast<int>(d.size());
  int count = 0;
  double q = d(0) - x;
  for (int i = 0;;) {
    if (q <= 0.0) ++count;
    if (++i >= n) break;
    double denom = q;
    if (std::abs(denom) < 1e-300) denom = q <= 0.0 ? -1e-300 : 1e-300;
    q = d(i) - x - e(i - 1) * e(i - 1) / denom;
  }
  return count;
}

}  // namespace detail

// Householder tridiagonalization, then bisection on the Sturm sequence for
// the bottom eigenvalue only.
inline double smallest_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::Tridiagonalization<Eigen::MatrixXd> tri(m);
  Eigen::VectorXd d = tri.diagonal();
  Eigen::VectorXd e = tri.subDiagonal();
  int n = static_cast<int>(d.size());
  if (n == 1) return d(0);
  double lo = d(0), hi = d(0);
  for (int i = 0; i < n; ++i) {
    double r = (i > 0 ? std::abs(e(i - 1)) : 0.0) +
               (i + 1 < n ? std::abs(e(i)) : 0.0);
    lo = std::min(lo, d(i) - r);
    hi = std::max(hi, d(i) + r);
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (detail::sturm_count(d, e, mid) >= 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Smallest eigenvalue and a unit eigenvector.
inline std::pair<double, Eigen::VectorXd> smallest_eigenpair(
    const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  return {solver.eigenvalues()(0), solver.eigenvectors().col(0)};
}

// Squared projections of a unit vector onto B's eigenspaces.
inline SimplexVector eigenvector_masses(const DeformedSample& sample,
                                        const Eigen::VectorXd& v1) {
  double norm = v1.norm();
  if (std::abs(norm - 1.0) > 1e-12)
    throw Error("eigenvector_masses: v1 must have unit norm");
  std::vector<double> y(sample.multiplicities.size() + 1, 0.0);
  y[0] = v1(0) * v1(0);
  int idx = 1;
  for (std::size_t k = 0; k < sample.multiplicities.size(); ++k) {
    for (int c = 0; c < sample.multiplicities[k]; ++c, ++idx)
      y[k + 1] += v1(idx) * v1(idx);
  }
  return SimplexVector(std::move(y));
}

// Smallest eigenvalue of B compressed to the orthocomplement of v1, paired
// with the secular-equation root Phi(Lambda, Y(v1)). An exact finite-N
// identity; interlacing Lambda <= Lambda_1 <= eta_1 is checked.
inline std::pair<double, double> projected_outlier_check(
    const DeformedSample& sample, const DeformedModel& model,
    const Eigen::VectorXd& v1) {
  SimplexVector masses = eigenvector_masses(sample, v1);
  for (std::size_t i = 0; i < masses.dim(); ++i)
    if (masses[i] < 1e-10 || masses[i] > 1.0 - 1e-10)
      throw DegenerateDirection(
          "projected_outlier_check: v1 inside an eigenspace of B");
  int n = static_cast<int>(sample.b_diag.size());
  // Householder reflection mapping e_1 to v1; columns 2..N span v1-perp.
  Eigen::VectorXd w = v1;
  w(0) -= 1.0;
  double wn2 = w.squaredNorm();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) b(i, i) = sample.b_diag[i];
  Eigen::MatrixXd hbh = b;
  if (wn2 > 1e-300) {
    Eigen::MatrixXd h =
        Eigen::MatrixXd::Identity(n, n) - (2.0 / wn2) * (w * w.transpose());
    hbh = h.transpose() * b * h;
  }
  double lam1 = smallest_eigenvalue(hbh.bottomRightCorner(n - 1, n - 1));
  double ph = phi(model, masses);
  double eta1 = model.nu().location(0);
  if (lam1 < model.outlier() - 1e-8 || lam1 > eta1 + 1e-8)
    throw Error("projected_outlier_check: interlacing violated");
  return {lam1, ph};
}

// Eigenvector masses of pure GOE samples against the model's block
// structure follow the Dirichlet law of the uniform sphere; compares the
// per-coordinate means to (1/N, N_k/N). The diagnostic field reports the
// Kolmogorov distance of the first eta-block marginal to its Beta law.
inline McReport dirichlet_law_check(const GoeSpec& spec,
                                    const DeformedModel& model,
                                    std::int64_t n_samples, std::uint64_t seed,
                                    int workers = 1) {
  auto mult = multiplicities_from_weights(model.nu(), spec.N - 1);
  std::size_t dim = mult.size() + 1;
  std::vector<std::vector<double>> masses(
      static_cast<std::size_t>(n_samples));
  GoeSpec local = spec;
  local.seed = seed;
  detail::parallel_for(n_samples, workers, [&](std::int64_t i) {
    Eigen::MatrixXd g = sample_goe(local, static_cast<std::uint64_t>(i));
    auto [val, vec] = smallest_eigenpair(g);
    (void)val;
    std::vector<double> y(dim, 0.0);
    y[0] = vec(0) * vec(0);
    int idx = 1;
    for (std::size_t k = 0; k < mult.size(); ++k)
      for (int c = 0; c < mult[k]; ++c, ++idx) y[k + 1] += vec(idx) * vec(idx);
    masses[static_cast<std::size_t>(i)] = std::move(y);
  });

  McReport rep;
  rep.n_samples = n_samples;
  rep.n_hits = n_samples;
  rep.seed = seed;
  rep.N = spec.N;
  std::vector<double> mean(dim, 0.0), var(dim, 0.0);
  for (const auto& y : masses)
    for (std::size_t k = 0; k < dim; ++k) mean[k] += y[k];
  for (auto& m : mean) m /= static_cast<double>(n_samples);
  for (const auto& y : masses)
    for (std::size_t k = 0; k < dim; ++k) {
      double d = y[k] - mean[k];
      var[k] += d * d;
    }
  double max_z = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    var[k] /= static_cast<double>(n_samples - 1);
    double se = std::sqrt(var[k] / static_cast<double>(n_samples));
    double target = k == 0 ? 1.0 / spec.N
                           : static_cast<double>(mult[k - 1]) / spec.N;
    rep.component_estimates.push_back(mean[k]);
    rep.component_targets.push_back(target);
    rep.component_std_errors.push_back(se);
    if (se > 0.0) max_z = std::max(max_z, std::abs(mean[k] - target) / se);
  }
  rep.estimate = max_z;

  // Kolmogorov distance of the Y_1 marginal to Beta(N_1/2, (N - N_1)/2).
  std::vector<double> y1(static_cast<std::size_t>(n_samples));
  for (std::size_t i = 0; i < y1.size(); ++i) y1[i] = masses[i][1];
  std::sort(y1.begin(), y1.end());
  double a = 0.5 * mult[0], b = 0.5 * (spec.N - mult[0]);
  double ks = 0.0;
  for (std::size_t i = 0; i < y1.size(); ++i) {
    double f = beta_cdf(a, b, y1[i]);
    double lo = static_cast<double>(i) / static_cast<double>(n_samples);
    double hi = static_cast<double>(i + 1) / static_cast<double>(n_samples);
    ks = std::max({ks, std::abs(f - lo), std::abs(f - hi)});
  }
  rep.diagnostic = ks;
  return rep;
}

// Mean smallest eigenvalue per N, against the predicted limit.
inline std::vector<McReport> convergence_check(const DeformedModel& model,
                                               const std::vector<int>& n_list,
                                               std::int64_t n_samples,
                                               std::uint64_t seed,
                                               int workers = 1) {
  std::vector<McReport> reports;
  double target = limit_smallest(model);
  for (int n_dim : n_list) {
    GoeSpec spec{n_dim, model.t(), seed};
    std::vector<double> vals(static_cast<std::size_t>(n_samples));
    detail::parallel_for(n_samples, workers, [&](std::int64_t i) {
      DeformedSample s = build_deformed(spec, model, static_cast<std::uint64_t>(i));
      vals[static_cast<std::size_t>(i)] = smallest_eigenvalue(s.matrix);
    });
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(n_samples);
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n_samples - 1);
    McReport rep;
    rep.n_samples = n_samples;
    rep.n_hits = n_samples;
    rep.estimate = mean;
    rep.std_error = std::sqrt(var / static_cast<double>(n_samples));
    rep.seed = seed;
    rep.N = n_dim;
    rep.component_estimates = {mean};
    rep.component_targets = {target};
    rep.component_std_errors = {rep.std_error};
    reports.push_back(std::move(rep));
  }
  return reports;
}

inline double default_window(const DeformedModel& model) {
  return 0.05 * (model.ctx().edge() - limit_smallest(model) + 1.0);
}

// P(|lambda_1 - x| <= window) by plain Monte Carlo, with the empirical rate
// -log(max(hits,1)/n)/N. Deterministic for fixed (seed, n) and any worker
// count: each sample is generated from its own index and the reduction runs
// in sample order.
inline McReport ldp_tail_estimate(const DeformedModel& model, int n_dim,
                                  double x, double window,
                                  std::int64_t n_samples, std::uint64_t seed,
                                  int workers = 1) {
  if (!(window > 0.0)) throw Error("ldp_tail_estimate: window must be positive");
  GoeSpec spec{n_dim, model.t(), seed};
  std::vector<double> vals(static_cast<std::size_t>(n_samples));
  detail::parallel_for(n_samples, workers, [&](std::int64_t i) {
    DeformedSample s = build_deformed(spec, model, static_cast<std::uint64_t>(i));
    vals[static_cast<std::size_t>(i)] = smallest_eigenvalue(s.matrix);
  });
  std::int64_t hits = 0;
  for (double v : vals)
    if (std::abs(v - x) <= window) ++hits;
  McReport rep;
  rep.n_samples = n_samples;
  rep.n_hits = hits;
  rep.seed = seed;
  rep.N = n_dim;
  rep.window = window;
  double p = static_cast<double>(hits) / static_cast<double>(n_samples);
  rep.estimate = p;
  rep.std_error = std::sqrt(std::max(0.0, p * (1.0 - p) /
                                              static_cast<double>(n_samples)));
  rep.zero_hits = hits == 0;
  double p_floor = static_cast<double>(std::max<std::int64_t>(hits, 1)) /
                   static_cast<double>(n_samples);
  rep.empirical_rate = -std::log(p_floor) / static_cast<double>(n_dim);
  return rep;
}

}  // namespace ldgoe
