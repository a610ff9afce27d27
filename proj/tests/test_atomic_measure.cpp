#include <doctest.h>

#include <cmath>
#include <vector>

#include "ldgoe/atomic_measure.hpp"
#include "ldgoe/rng.hpp"
#include "oracles.hpp"

using namespace ldgoe;

namespace {
AtomicMeasure two_atom() { return AtomicMeasure::from_pairs({{-1.0, 0.5}, {1.0, 0.5}}); }
}  // namespace

TEST_CASE("construction validates and canonicalizes") {
  CHECK_THROWS_AS(AtomicMeasure::from_pairs({{0.0, 0.7}, {1.0, 0.2}}), Error);
  CHECK_THROWS_AS(AtomicMeasure::from_pairs({{0.0, -0.5}, {1.0, 1.5}}), Error);
  // near-duplicate locations merge
  AtomicMeasure merged =
      AtomicMeasure::from_pairs({{0.0, 0.5}, {1e-13, 0.25}, {1.0, 0.25}});
  CHECK(merged.size() == 2);
  CHECK(merged.weight(0) == doctest::Approx(0.75).epsilon(1e-12));
  // small weight error is normalized away
  AtomicMeasure renorm = AtomicMeasure::from_pairs({{0.0, 0.5 + 2e-10}, {2.0, 0.5}});
  double sum = renorm.weight(0) + renorm.weight(1);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("support_edge") {
  CHECK(support_edge(AtomicMeasure::dirac(0.0)) == 0.0);
  CHECK(support_edge(two_atom()) == -1.0);
  CHECK(support_edge(AtomicMeasure::dirac(3.0)) == 3.0);
}

TEST_CASE("stieltjes transform values") {
  CHECK(stieltjes(two_atom(), -3.0) == doctest::Approx(-0.375).epsilon(1e-14));
  CHECK(stieltjes(AtomicMeasure::dirac(0.0), -2.0) == doctest::Approx(-0.5));
  double far = stieltjes(AtomicMeasure::dirac(0.0), -1e6);
  CHECK(far == doctest::Approx(-1e-6).epsilon(1e-6));
  CHECK_THROWS_AS(stieltjes(two_atom(), 1.0), AtomCollision);
  CHECK_THROWS_AS(stieltjes(two_atom(), 1.0 + 1e-14), AtomCollision);
}

TEST_CASE("stieltjes derivative") {
  CHECK(stieltjes_derivative(AtomicMeasure::dirac(0.0), -1.0) ==
        doctest::Approx(-1.0).epsilon(1e-14));
  // shock-condition instance: 1/2/(sqrt3-1)^2 + 1/2/(sqrt3+1)^2 = 1
  CHECK(stieltjes_derivative(two_atom(), -std::sqrt(3.0)) ==
        doctest::Approx(-1.0).epsilon(1e-13));
  double fd = oracles::central_diff(
      [&](double z) { return stieltjes(AtomicMeasure::dirac(0.0), z); }, -2.0, 1e-6);
  CHECK(stieltjes_derivative(AtomicMeasure::dirac(0.0), -2.0) ==
        doctest::Approx(fd).epsilon(1e-6));
  CHECK(fd == doctest::Approx(-0.25).epsilon(1e-6));
}

TEST_CASE("derivative matches finite differences on a random grid") {
  AtomicMeasure m = AtomicMeasure::from_pairs({{-0.5, 0.3}, {0.25, 0.45}, {2.0, 0.25}});
  for (int i = 0; i < 40; ++i) {
    double x = -0.6 - 6.0 * rng::u01(7, 0, static_cast<std::uint64_t>(i));
    double fd =
        oracles::central_diff([&](double z) { return stieltjes(m, z); }, x, 1e-6);
    double d = stieltjes_derivative(m, x);
    CHECK(d < 0.0);
    CHECK(stieltjes(m, x) < 0.0);
    CHECK(d == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("log potential") {
  CHECK(log_potential(AtomicMeasure::dirac(0.0), -1.0) == doctest::Approx(0.0));
  CHECK(log_potential(two_atom(), -3.0) ==
        doctest::Approx(-1.5 * std::log(2.0)).epsilon(1e-14));
  CHECK(log_potential(AtomicMeasure::dirac(0.0), -std::exp(1.0)) ==
        doctest::Approx(-1.0).epsilon(1e-14));
  // d/dx log_potential = -stieltjes
  AtomicMeasure m = two_atom();
  for (double x : {-2.5, -4.0, 3.5}) {
    double fd =
        oracles::central_diff([&](double z) { return log_potential(m, z); }, x, 1e-6);
    CHECK(fd == doctest::Approx(-stieltjes(m, x)).epsilon(1e-6));
  }
}

TEST_CASE("discretize uniform interval") {
  auto q = QuantileSpec::uniform(0.0, 1.0);
  AtomicMeasure lower = discretize(q, 0.0, 0.5, GridSide::lower);
  REQUIRE(lower.size() == 2);
  CHECK(lower.location(0) == doctest::Approx(0.0));
  CHECK(lower.location(1) == doctest::Approx(0.5));
  CHECK(lower.weight(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(lower.weight(1) == doctest::Approx(0.5).epsilon(1e-12));

  AtomicMeasure upper = discretize(q, 0.0, 0.5, GridSide::upper);
  REQUIRE(upper.size() == 2);
  CHECK(upper.location(0) == doctest::Approx(0.5));
  CHECK(upper.location(1) == doctest::Approx(1.0));
  CHECK(upper.weight(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(upper.weight(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("discretize round-trips an atomic measure on a fine grid") {
  AtomicMeasure m = AtomicMeasure::from_pairs({{-1.0, 0.25}, {0.0, 0.25}, {1.5, 0.5}});
  auto q = QuantileSpec::of_measure(m);
  for (auto side : {GridSide::lower, GridSide::upper}) {
    AtomicMeasure d = discretize(q, support_edge(m), 0.25, side);
    REQUIRE(d.size() == m.size());
    for (std::size_t k = 0; k < m.size(); ++k) {
      CHECK(d.location(k) == doctest::Approx(m.location(k)).epsilon(1e-12));
      CHECK(d.weight(k) == doctest::Approx(m.weight(k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("discretize bracketing and sup-distance") {
  auto q = QuantileSpec::table({{0.0, -2.0}, {0.4, -1.0}, {0.4, 0.5}, {1.0, 1.7}});
  double eps = 0.3;
  AtomicMeasure lo = discretize(q, -2.0, eps, GridSide::lower);
  AtomicMeasure hi = discretize(q, -2.0, eps, GridSide::upper);
  for (int i = 0; i <= 200; ++i) {
    double u = i / 200.0;
    double qv = q(u);
    double lv = lo.quantile(u);
    double hv = hi.quantile(u);
    CHECK(lv <= hv + 1e-12);
    CHECK(std::abs(lv - qv) <= eps + 1e-12);
    CHECK(std::abs(hv - qv) <= eps + 1e-12);
  }
  // weights still sum to one
  double wsum = 0.0;
  for (const auto& a : lo.atoms()) wsum += a.weight;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("discretize rejects bad input") {
  CHECK_THROWS_AS(discretize(QuantileSpec::uniform(0.0, 1.0), 0.0, -0.1,
                             GridSide::lower),
                  Error);
  CHECK_THROWS_AS(QuantileSpec::uniform(0.0, 1.0 / 0.0), UnboundedQuantile);
}
