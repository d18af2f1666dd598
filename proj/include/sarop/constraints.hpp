#pragma once

// Polynomial description of the feasible set of state-action frequencies:
// one affine constraint per state (discounted flow balance), the 2x2 minors
// that cut out the per-fiber rank-one condition, and a reduced square-free
// generating set of quadratics anchored at a reference state and action per
// observation.  Everything is expressed over the flattened sa_index layout.

#include <vector>

#include <Eigen/Dense>

#include "sarop/pomdp.hpp"

namespace sarop {

// Affine constraint coeffs . eta + constant = 0 associated with one state.
struct LinearConstraint {
  int state = 0;
  VectorXd coeffs;  // length n_states * n_actions
  double constant = 0.0;

  double eval(const Eigen::Ref<const VectorXd>& eta) const {
    return coeffs.dot(eta) + constant;
  }
};

// 2x2 minor eta(s,a) eta(s2,a2) - eta(s,a2) eta(s2,a) for two states of one
// fiber and an action pair; vanishes exactly on frequencies of memoryless
// observation policies.
struct MinorConstraint {
  int obs = 0;
  int s = 0, s2 = 0;  // s < s2, same fiber
  int a = 0, a2 = 0;  // a < a2
  int n_actions = 0;

  double eval(const Eigen::Ref<const VectorXd>& eta) const {
    auto at = [&](int st, int ac) { return eta[st * n_actions + ac]; };
    return at(s, a) * at(s2, a2) - at(s, a2) * at(s2, a);
  }
};

// Anchored quadratic p(eta) = eta(s,a) rho(anchor_state) -
// eta(anchor_state,a) rho(s) with the diagonal terms cancelled:
// sum over a' != a of eta(s,a) eta(anchor,a') - eta(anchor,a) eta(s,a').
// For fixed anchors these (n_actions - 1)(n_states - n_observations) many
// quadratics generate the same variety as the full minor set wherever state
// marginals are positive.
struct ReducedQuadratic {
  int obs = 0;
  int anchor_state = 0;
  int s = 0;  // non-anchor state in the same fiber
  int a = 0;  // non-anchor action
  int anchor_action = 0;
  int n_actions = 0;

  double eval(const Eigen::Ref<const VectorXd>& eta) const {
    auto at = [&](int st, int ac) { return eta[st * n_actions + ac]; };
    double acc = 0.0;
    for (int a2 = 0; a2 < n_actions; ++a2) {
      if (a2 == a) continue;
      acc += at(s, a) * at(anchor_state, a2) - at(anchor_state, a) * at(s, a2);
    }
    return acc;
  }
};

// Reference action and state per observation used to reduce the quadratic
// generating set.
struct Anchors {
  std::vector<int> action;  // per observation
  std::vector<int> state;   // per observation, member of the fiber
};

// Lowest action index and lowest state of each fiber.
Anchors default_anchors(const Pomdp& model);

// Throws std::invalid_argument unless each anchor state lies in its fiber
// and each anchor action is a valid action index.
void validate_anchors(const Pomdp& model, const Anchors& anchors);

// The n_states affine constraints l_s(eta) = 0 with
//   coeffs(s', a') = [s' == s] - gamma * alpha(s | s', a'),
//   constant       = -(1 - gamma) * mu(s).
std::vector<LinearConstraint> linear_constraints(const Pomdp& model);

// All minors over fiber state pairs and action pairs.
std::vector<MinorConstraint> minor_constraints(const Pomdp& model);

// Reduced generating set against the given anchors, enumerated by
// (observation, non-anchor state ascending, non-anchor action ascending).
std::vector<ReducedQuadratic> reduced_quadratics(const Pomdp& model,
                                                 const Anchors& anchors);

struct FeasibilityResidual {
  double max_linear = 0.0;     // worst |l_s(eta)|
  double max_quadratic = 0.0;  // worst |minor(eta)| over all minors
  double min_entry = 0.0;      // most negative eta entry (>= 0 when feasible)
  double sum_gap = 0.0;        // |1^T eta - 1|
};

FeasibilityResidual feasibility_residual(const Pomdp& model,
                                         const Eigen::Ref<const VectorXd>& eta);

// All residual components within tol and entries >= -tol.
bool is_feasible(const Pomdp& model, const Eigen::Ref<const VectorXd>& eta,
                 double tol = 1e-7);

}  // namespace sarop
