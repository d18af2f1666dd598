#pragma once

// Boundary components of the feasible set and per-component degree bounds.
// A component fixes, per observation, a proper subset of actions forced to
// probability zero across the whole fiber.  "Relevant" components are the
// ones that can carry maximizers: the surviving action set needs at most as
// many actions as the fiber has states.

#include <cstdint>
#include <vector>

namespace sarop {

struct BoundaryComponent {
  // Per observation, bitmask over actions forced to zero; always a proper
  // subset of the action set.
  std::vector<std::uint32_t> zero_sets;
  int n = 0;               // dimension of the ambient polytope face
  int m = 0;               // number of reduced quadratics on the face
  std::uint64_t bound = 0; // critical-point bound for a generic instance
  bool relevant = false;

  bool zeroed(int obs, int action) const {
    return (zero_sets[obs] >> action) & 1u;
  }
  int zero_count(int obs) const;
};

// Component with nothing zeroed (the interior chart used by the KKT route).
BoundaryComponent full_component(int n_actions,
                                 const std::vector<int>& fiber_sizes,
                                 int n_states);

// All (2^{n_actions} - 1)^{n_obs} components in deterministic order: per
// observation the proper subsets sorted by size descending then bitmask
// ascending, combined lexicographically with observation 0 most significant.
// Throws std::invalid_argument when n_states * n_actions > 64 (the overflow
// cap for the bound arithmetic) or dimensions are non-positive.
std::vector<BoundaryComponent> enumerate_components(
    int n_actions, const std::vector<int>& fiber_sizes);

// The relevant subsequence: every observation keeps at most fiber-size many
// actions, i.e. |zero set| >= n_actions - d_o.
std::vector<BoundaryComponent> enumerate_relevant(
    int n_actions, const std::vector<int>& fiber_sizes);

// Number of critical points of a generic linear objective on the component,
// counted with the face dimension n and quadratic count m:
//   n = 0           -> 1 (a vertex),
//   m = 0 and n > 0 -> 0 (no interior critical point of a linear function),
//   otherwise       -> 2^m * binomial(n - 1, m - 1).
// 128-bit intermediate arithmetic; throws std::overflow_error if the value
// exceeds the 64-bit range.
std::uint64_t degree_bound(const BoundaryComponent& component, int n_states,
                           int n_actions, const std::vector<int>& fiber_sizes);

struct BoundSummary {
  std::uint64_t total_components = 0;
  std::uint64_t relevant_components = 0;
  std::uint64_t total_bound = 0;
  std::uint64_t relevant_bound = 0;
};

// Aggregates over the full enumeration (component counts computed in closed
// form, bounds by summation).
BoundSummary bound_summary(int n_states, int n_actions,
                           const std::vector<int>& fiber_sizes);

}  // namespace sarop
