#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "semiorank/core.hpp"
#include "semiorank/rng.hpp"

#include "support/oracles.hpp"

using namespace semiorank;

TEST_CASE("CardinalitySpectrum: sorts, caches mean and max, validates") {
  CardinalitySpectrum spec({3.0, 1.0, 2.0});
  REQUIRE(spec.values() == std::vector<double>{1.0, 2.0, 3.0});
  REQUIRE(spec.size() == 3);
  REQUIRE(spec.max_value() == 3.0);
  REQUIRE(spec.mean() == Catch::Approx(2.0).epsilon(1e-15));

  REQUIRE_THROWS_AS(CardinalitySpectrum({}), DataError);
  REQUIRE_THROWS_AS(CardinalitySpectrum({1.0, -2.0}), DataError);
  REQUIRE_THROWS_AS(CardinalitySpectrum({0.0}), DataError);
  REQUIRE_THROWS_AS(CardinalitySpectrum({1.0, std::nan("")}), DataError);
}

TEST_CASE("Composition: cumulative counts are non-decreasing and end at N") {
  Composition comp({1, 0, 3, 2});
  REQUIRE(comp.total() == 6);
  const auto b = comp.cumulative();
  REQUIRE(b == std::vector<std::int64_t>{1, 1, 4, 6});
  for (std::size_t l = 1; l < b.size(); ++l) REQUIRE(b[l] >= b[l - 1]);
  REQUIRE(b.back() == comp.total());

  REQUIRE_THROWS_AS(Composition({0, 0}), DataError);
  REQUIRE_THROWS_AS(Composition({2, -1}), DataError);
}

TEST_CASE("energia_of: worked values and dimension error") {
  CardinalitySpectrum spec({1.0, 2.0, 3.0});
  REQUIRE(energia_of(Composition({0, 0, 4}), spec) == 12.0);
  REQUIRE(energia_of(Composition({1, 1, 2}), spec) == 9.0);
  // cross-checked by integer arithmetic: 0*1 + 3*2 + 1*3 = 9
  REQUIRE(energia_of(Composition({0, 3, 1}), spec) == 9.0);

  REQUIRE_THROWS_AS(energia_of(Composition({1, 1}), spec), DimensionError);
}

TEST_CASE("energia_of: agrees with the naive oracle on random integer instances") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::int64_t s = 2 + static_cast<std::int64_t>(rng.below(8));
    std::vector<double> omegas;
    std::vector<std::int64_t> counts;
    for (std::int64_t i = 0; i < s; ++i) {
      omegas.push_back(0.25 * static_cast<double>(1 + rng.below(40)));
      counts.push_back(static_cast<std::int64_t>(rng.below(20)));
    }
    if (std::accumulate(counts.begin(), counts.end(), std::int64_t{0}) == 0) counts[0] = 1;
    std::vector<double> sorted = omegas;
    std::sort(sorted.begin(), sorted.end());
    CardinalitySpectrum spec(omegas);
    const double expected = oracle::energia(counts, sorted);
    REQUIRE(energia_of(Composition(counts), spec) == Catch::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("energia_of: additive in elementwise-added counts") {
  CardinalitySpectrum spec({0.5, 1.25, 2.0, 4.5});
  const std::vector<std::int64_t> a{1, 2, 0, 3}, b{4, 0, 5, 1};
  std::vector<std::int64_t> sum(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) sum[i] = a[i] + b[i];
  REQUIRE(energia_of(Composition(sum), spec) ==
          Catch::Approx(energia_of(Composition(a), spec) + energia_of(Composition(b), spec))
              .epsilon(1e-14));
}

TEST_CASE("satisfies: direction semantics at the corners") {
  CardinalitySpectrum spec({1.0, 2.0, 3.0});
  const EnergiaConstraint at_least(9.0, Direction::AT_LEAST);
  const EnergiaConstraint at_most(9.0, Direction::AT_MOST);
  REQUIRE_FALSE(satisfies(Composition({2, 0, 2}), spec, at_least)); // energia 8 < 9
  REQUIRE(satisfies(Composition({0, 0, 4}), spec, at_least));       // maximal corner
  REQUIRE(satisfies(Composition({4, 0, 0}), spec, at_most));        // minimal corner
}

TEST_CASE("EnergiaConstraint: admissibility windows") {
  CardinalitySpectrum spec({1.0, 2.0, 3.0});
  // N = 4: uniform mean energy 8, max 12
  REQUIRE(EnergiaConstraint(9.0, Direction::AT_LEAST).admissible_for(spec, 4));
  REQUIRE_FALSE(EnergiaConstraint(7.0, Direction::AT_LEAST).admissible_for(spec, 4));
  REQUIRE_FALSE(EnergiaConstraint(13.0, Direction::AT_LEAST).admissible_for(spec, 4));
  REQUIRE(EnergiaConstraint(7.0, Direction::AT_MOST).admissible_for(spec, 4));
  REQUIRE_FALSE(EnergiaConstraint(8.0, Direction::AT_MOST).admissible_for(spec, 4));
  REQUIRE_THROWS_AS(EnergiaConstraint(-1.0, Direction::AT_MOST), DataError);
}

TEST_CASE("user_cardinality_transform: worked values") {
  REQUIRE(user_cardinality_transform(1.0, 1.0, 1.0) == Catch::Approx(3.0));
  REQUIRE(user_cardinality_transform(2.0, 1.0, 1.0) == Catch::Approx(7.0));
  REQUIRE_THROWS_AS(user_cardinality_transform(0.0, 1.0, 1.0), DomainError);
  REQUIRE_THROWS_AS(user_cardinality_transform(-1.0, 1.0, 1.0), DomainError);
  REQUIRE_THROWS_AS(user_cardinality_transform(1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("user_cardinality_transform: excess factor is minimal at alpha^(-1/gamma)") {
  const double alpha = 4.0, gamma = 2.0;
  const double minimizer = std::pow(alpha, -1.0 / gamma);
  REQUIRE(minimizer == Catch::Approx(0.5));

  auto excess = [&](double w) { return user_cardinality_transform(w, alpha, gamma) / w - 1.0; };

  // dense grid scan: no grid point beats the analytic minimizer
  const double at_min = excess(minimizer);
  REQUIRE(at_min == Catch::Approx(2.0).epsilon(1e-12)); // AM-GM equality
  for (int i = 1; i <= 2000; ++i) {
    const double w = 0.002 * i;
    REQUIRE(excess(w) >= at_min - 1e-12);
  }
}

TEST_CASE("user_cardinality_transform: not monotone, excess grows as omega -> 0+") {
  const double alpha = 1.0, gamma = 1.0;
  double previous = -std::numeric_limits<double>::infinity();
  for (double w = 0.5; w > 1e-4; w *= 0.5) {
    const double ex = user_cardinality_transform(w, alpha, gamma) / w - 1.0;
    REQUIRE(ex > previous);
    previous = ex;
  }
}

TEST_CASE("spectrum keeps ties deterministically (stable sort)") {
  CardinalitySpectrum spec({5.0, 5.0, 1.0});
  REQUIRE(spec.values() == std::vector<double>{1.0, 5.0, 5.0});
}
