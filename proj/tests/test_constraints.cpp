#include "sarop/constraints.hpp"

#include <doctest.h>

#include "sarop/random.hpp"
#include "test_util.hpp"

using namespace sarop;
using sarop_test::three_state_instance;

TEST_CASE("fixture linear constraints match the hand-scaled integer form") {
  const Pomdp m = three_state_instance();
  const auto cons = linear_constraints(m);
  REQUIRE(cons.size() == 3);
  // Scaling by 6 clears the denominators of gamma = 1/2 and mu = 1/3.
  Eigen::MatrixXd expected(3, 6);
  expected << 3, 6, 0, -3, 0, 0,
              0, 0, 6, 6, 0, -3,
              0, -3, -3, 0, 3, 6;
  for (int s = 0; s < 3; ++s) {
    CHECK(cons[s].state == s);
    CHECK((6.0 * cons[s].coeffs.transpose() - expected.row(s)).norm() < 1e-12);
    CHECK(6.0 * cons[s].constant == doctest::Approx(-1.0).epsilon(1e-12));
  }
}

TEST_CASE("fixture has exactly one minor, over the aggregated pair") {
  const auto minors = minor_constraints(three_state_instance());
  REQUIRE(minors.size() == 1);
  CHECK(minors[0].s == 0);
  CHECK(minors[0].s2 == 1);
  CHECK(minors[0].a == 0);
  CHECK(minors[0].a2 == 1);
}

TEST_CASE("minor and reduced-quadratic counts follow the fiber structure") {
  const Pomdp m = random_pomdp(6, 3, {3, 2, 1}, 4);
  // Minors: pairs of states within a fiber times pairs of actions.
  CHECK(minor_constraints(m).size() == (3 + 1 + 0) * 3);
  // Reduced set: (n_actions - 1) * (n_states - n_observations).
  CHECK(reduced_quadratics(m, default_anchors(m)).size() == 2 * 3);
}

TEST_CASE("frequencies of observation policies satisfy every constraint") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Pomdp m = random_pomdp(5, 3, {3, 2}, gen(), 0.3 + 0.6 * uniform01(gen));
    const Policy pi = random_policy(3, 2, gen());
    const Eigen::VectorXd eta = phi(m, pi).eta;
    const FeasibilityResidual res = feasibility_residual(m, eta);
    CHECK(res.max_linear < 1e-10);
    CHECK(res.max_quadratic < 1e-10);
    CHECK(res.min_entry >= -1e-14);
    CHECK(res.sum_gap < 1e-10);
    CHECK(is_feasible(m, eta));
    for (const auto& q : reduced_quadratics(m, default_anchors(m)))
      CHECK(std::abs(q.eval(eta)) < 1e-10);
  }
}

TEST_CASE("perturbed frequencies are flagged infeasible") {
  const Pomdp m = three_state_instance();
  Eigen::VectorXd eta = phi(m, uniform_policy(2, 2)).eta;
  eta[0] += 1e-3;
  CHECK(!is_feasible(m, eta));
}

TEST_CASE("reduced quadratic equals the marginal form identically") {
  const Pomdp m = random_pomdp(5, 4, {3, 2}, 8);
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(m.n_states * m.n_actions);
    for (int i = 0; i < x.size(); ++i) x[i] = sample_normal(gen);
    StateActionFrequency eta{x, m.n_states, m.n_actions};
    const Eigen::VectorXd rho = eta.state_marginal();
    for (const auto& q : reduced_quadratics(m, default_anchors(m))) {
      const double via_marginals =
          x[q.s * 4 + q.a] * rho[q.anchor_state] -
          x[q.anchor_state * 4 + q.a] * rho[q.s];
      CHECK(q.eval(x) == doctest::Approx(via_marginals).epsilon(1e-12));
    }
  }
}

TEST_CASE("on positive vectors the reduced set detects rank violations") {
  const Pomdp m = random_pomdp(4, 2, {2, 2}, 13);
  std::mt19937_64 gen(14);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(8);
    for (int i = 0; i < 8; ++i) x[i] = sample_exponential(gen);
    x /= x.sum();
    double worst_minor = 0.0, worst_reduced = 0.0;
    for (const auto& mc : minor_constraints(m))
      worst_minor = std::max(worst_minor, std::abs(mc.eval(x)));
    for (const auto& q : reduced_quadratics(m, default_anchors(m)))
      worst_reduced = std::max(worst_reduced, std::abs(q.eval(x)));
    if (worst_minor > 1e-6) CHECK(worst_reduced > 1e-12);
  }
}

TEST_CASE("anchor validation") {
  const Pomdp m = three_state_instance();
  const Anchors def = default_anchors(m);
  CHECK(def.action == std::vector<int>{0, 0});
  CHECK(def.state == std::vector<int>{0, 2});
  Anchors bad = def;
  bad.state = {2, 2};  // state 2 is not in fiber 0
  CHECK_THROWS_AS(validate_anchors(m, bad), std::invalid_argument);
  bad = def;
  bad.action = {0, 5};
  CHECK_THROWS_AS(validate_anchors(m, bad), std::invalid_argument);
}
