#include "sarop/geometry.hpp"

#include <doctest.h>

#include <numeric>
#include <stdexcept>

using namespace sarop;

namespace {

BoundSummary summary(int na, std::vector<int> d) {
  const int ns = std::accumulate(d.begin(), d.end(), 0);
  return bound_summary(ns, na, d);
}

void check_row(int na, std::vector<int> d, std::uint64_t total_c,
               std::uint64_t rel_c, std::uint64_t total_b, std::uint64_t rel_b) {
  const BoundSummary s = summary(na, d);
  CHECK(s.total_components == total_c);
  CHECK(s.relevant_components == rel_c);
  CHECK(s.total_bound == total_b);
  CHECK(s.relevant_bound == rel_b);
}

}  // namespace

TEST_CASE("published bound-table rows reproduce exactly (spot checks)") {
  check_row(2, {3}, 3, 3, 10, 10);
  check_row(2, {2, 1}, 9, 6, 10, 8);
  check_row(2, {1, 1, 1}, 27, 8, 8, 8);
  check_row(3, {4}, 7, 7, 1419, 1419);
  check_row(3, {2, 2}, 49, 36, 1265, 153);
  check_row(3, {2, 2, 1}, 343, 108, 12159, 459);
}

TEST_CASE("component enumeration is complete, ordered, and deterministic") {
  const auto comps = enumerate_components(2, {2, 1});
  REQUIRE(comps.size() == 9);  // (2^2 - 1)^2
  // Largest zero sets first per observation, bitmask ascending within a size,
  // observation 0 most significant.
  CHECK(comps[0].zero_sets == std::vector<std::uint32_t>{1, 1});
  CHECK(comps[1].zero_sets == std::vector<std::uint32_t>{1, 2});
  CHECK(comps[2].zero_sets == std::vector<std::uint32_t>{1, 0});
  CHECK(comps[3].zero_sets == std::vector<std::uint32_t>{2, 1});
  CHECK(comps[8].zero_sets == std::vector<std::uint32_t>{0, 0});
  for (const auto& c : comps)
    for (std::uint32_t z : c.zero_sets) CHECK(z != 3u);  // proper subsets only
}

TEST_CASE("relevance keeps at most fiber-size actions per observation") {
  const auto rel = enumerate_relevant(2, {2, 1});
  CHECK(rel.size() == 6);
  for (const auto& c : rel) CHECK(2 - c.zero_count(1) <= 1);
  // Fully observable: relevant components are exactly the vertex supports.
  const auto vertices = enumerate_relevant(2, {1, 1, 1});
  CHECK(vertices.size() == 8);
  for (const auto& c : vertices) {
    CHECK(c.n == 0);
    CHECK(c.bound == 1);
  }
}

TEST_CASE("relevant component count matches the closed-form product") {
  for (const auto& [na, d] : std::vector<std::pair<int, std::vector<int>>>{
           {2, {3}}, {3, {2, 2}}, {3, {2, 1, 1}}, {3, {1, 1, 1, 1}}}) {
    auto binom = [](int n, int k) {
      double acc = 1;
      for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
      return static_cast<std::uint64_t>(acc + 0.5);
    };
    std::uint64_t expect = 1;
    for (int fiber : d) {
      std::uint64_t per_obs = 0;
      for (int zeroed = std::max(na - fiber, 0); zeroed <= na - 1; ++zeroed)
        per_obs += binom(na, zeroed);
      expect *= per_obs;
    }
    CHECK(enumerate_relevant(na, d).size() == expect);
  }
}

TEST_CASE("degree bound conventions at the edges") {
  // Vertex faces count once even though no quadratic survives.
  const auto comps = enumerate_components(2, {3});
  REQUIRE(comps.size() == 3);
  CHECK(comps[0].n == 0);  // one action zeroed on the whole fiber
  CHECK(comps[0].bound == 1);
  CHECK(comps[2].zero_sets == std::vector<std::uint32_t>{0});
  CHECK(comps[2].n == 3);
  CHECK(comps[2].m == 2);
  CHECK(comps[2].bound == 8);  // 2^2 * binomial(2, 1)
  // Positive-dimensional faces with no quadratic carry no critical points.
  const auto mixed = enumerate_components(2, {2, 1});
  bool saw_zero = false;
  for (const auto& c : mixed)
    if (c.n > 0 && c.m == 0) {
      CHECK(c.bound == 0);
      saw_zero = true;
    }
  CHECK(saw_zero);
}

TEST_CASE("single-action models have one component of bound one") {
  const auto comps = enumerate_components(1, {2});
  REQUIRE(comps.size() == 1);
  CHECK(comps[0].zero_sets == std::vector<std::uint32_t>{0});
  CHECK(comps[0].bound == 1);
  CHECK(comps[0].relevant);
}

TEST_CASE("dimension guards") {
  CHECK_THROWS_AS(enumerate_components(5, {7, 7}), std::invalid_argument);
  CHECK_THROWS_AS(bound_summary(4, 2, {2, 1}), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_components(2, {0, 3}), std::invalid_argument);
}
