#pragma once

// Assembly of the square polynomial systems whose roots are the critical
// points of the linear reward over the quadratically constrained frequency
// polytope: one global KKT system with complementary slackness, and one
// Lagrange system per boundary component with the zeroed coordinates
// substituted out.
//
// Shared variable layout (fixed so runs are reproducible): the free eta
// entries in row-major (state, action) order, then one lambda per state,
// then one nu per reduced quadratic in enumeration order, then (KKT only)
// one kappa per (anchor state, action) pair.

#include <utility>
#include <vector>

#include "sarop/constraints.hpp"
#include "sarop/geometry.hpp"
#include "sarop/polynomial.hpp"
#include "sarop/pomdp.hpp"

namespace sarop {

// Default anchors compatible with a component: per observation the smallest
// surviving action and the smallest state of the fiber.
Anchors component_anchors(const Pomdp& model, const BoundaryComponent& component);

// The free (state, action) pairs of a component in row-major order; these
// are the eta variables of its Lagrange system.
std::vector<std::pair<int, int>> free_coordinates(const Pomdp& model,
                                                  const BoundaryComponent& component);

// Square system for the critical points on one boundary component:
// restricted flow constraints, restricted reduced quadratics, and
// stationarity of the restricted Lagrangian.  Dimension
// 2 n_S n_A - (n_A - 1) n_O - sum_o (2 d_o - 1) |A_o|.
// Throws std::invalid_argument if an anchor action is zeroed by the
// component or an anchor state is outside its fiber.
PolySystem build_lagrange_system(const Pomdp& model,
                                 const BoundaryComponent& component,
                                 const Anchors& anchors);

// Square KKT system of dimension 2 n_S n_A + n_O over all of eta: flow
// constraints, reduced quadratics, complementary slackness
// kappa_{s_o a} * eta_{s_o a} = 0 at the anchor states, and stationarity
// where each kappa_{s_o a} is replicated to every state of its fiber.
PolySystem build_kkt_system(const Pomdp& model, const Anchors& anchors);

// Lifts the eta prefix of a solution point back to the full coordinate
// vector, writing zeros on the coordinates the component removes.  Real
// parts are taken; meaningful for (near-)real solutions.
VectorXd embed_eta(const Pomdp& model, const BoundaryComponent& component,
                   const CVector& point);

}  // namespace sarop
