#include "sarop/geometry.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace sarop {

namespace {

using u128 = unsigned __int128;

std::uint64_t narrow(u128 v, const char* what) {
  if (v > static_cast<u128>(UINT64_MAX))
    throw std::overflow_error(std::string(what) + " exceeds 64-bit range");
  return static_cast<std::uint64_t>(v);
}

u128 binomial128(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  u128 acc = 1;
  for (int i = 1; i <= k; ++i) acc = acc * static_cast<u128>(n - k + i) / i;
  return acc;
}

void check_dims(int n_actions, const std::vector<int>& fiber_sizes,
                int n_states = -1) {
  if (n_actions <= 0 || fiber_sizes.empty())
    throw std::invalid_argument("geometry: dimensions must be positive");
  long total = 0;
  for (int d : fiber_sizes) {
    if (d <= 0) throw std::invalid_argument("geometry: fiber sizes must be positive");
    total += d;
  }
  if (n_states >= 0 && total != n_states)
    throw std::invalid_argument("geometry: fiber sizes must sum to n_states");
  if (total * n_actions > 64)
    throw std::invalid_argument(
        "geometry: n_states * n_actions capped at 64 for exact bound arithmetic");
}

// Proper subsets of the action set, size descending then bitmask ascending.
std::vector<std::uint32_t> proper_subsets(int n_actions) {
  std::vector<std::uint32_t> masks;
  const std::uint32_t all = (n_actions >= 32) ? 0 : ((1u << n_actions) - 1u);
  for (std::uint32_t mask = 0; mask < all; ++mask) masks.push_back(mask);
  std::sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
    const int ca = __builtin_popcount(a), cb = __builtin_popcount(b);
    return ca != cb ? ca > cb : a < b;
  });
  return masks;
}

}  // namespace

int BoundaryComponent::zero_count(int obs) const {
  return __builtin_popcount(zero_sets[obs]);
}

BoundaryComponent full_component(int n_actions,
                                 const std::vector<int>& fiber_sizes,
                                 int n_states) {
  BoundaryComponent c;
  c.zero_sets.assign(fiber_sizes.size(), 0u);
  c.n = n_states * n_actions - n_states;
  int m = 0;
  for (int d : fiber_sizes) m += (d - 1) * (n_actions - 1);
  c.m = m;
  c.bound = degree_bound(c, n_states, n_actions, fiber_sizes);
  c.relevant = true;
  for (int d : fiber_sizes) c.relevant = c.relevant && n_actions <= d;
  return c;
}

std::uint64_t degree_bound(const BoundaryComponent& component, int n_states,
                           int n_actions,
                           const std::vector<int>& fiber_sizes) {
  check_dims(n_actions, fiber_sizes, n_states);
  int n = n_states * n_actions - n_states;
  int m = 0;
  for (std::size_t o = 0; o < fiber_sizes.size(); ++o) {
    const int zeroed = __builtin_popcount(component.zero_sets[o]);
    n -= fiber_sizes[o] * zeroed;
    m += (fiber_sizes[o] - 1) * (n_actions - zeroed - 1);
  }
  if (n == 0) return 1;
  if (m == 0) return 0;
  u128 acc = binomial128(n - 1, m - 1);
  for (int i = 0; i < m; ++i) acc *= 2;
  return narrow(acc, "degree bound");
}

std::vector<BoundaryComponent> enumerate_components(
    int n_actions, const std::vector<int>& fiber_sizes) {
  check_dims(n_actions, fiber_sizes);
  const int n_obs = static_cast<int>(fiber_sizes.size());
  const int n_states = std::accumulate(fiber_sizes.begin(), fiber_sizes.end(), 0);
  const auto masks = proper_subsets(n_actions);

  std::vector<BoundaryComponent> out;
  std::vector<std::size_t> pick(n_obs, 0);
  while (true) {
    BoundaryComponent c;
    c.zero_sets.resize(n_obs);
    c.relevant = true;
    for (int o = 0; o < n_obs; ++o) {
      c.zero_sets[o] = masks[pick[o]];
      const int kept = n_actions - __builtin_popcount(masks[pick[o]]);
      c.relevant = c.relevant && kept <= fiber_sizes[o];
    }
    c.n = n_states * n_actions - n_states;
    c.m = 0;
    for (int o = 0; o < n_obs; ++o) {
      c.n -= fiber_sizes[o] * c.zero_count(o);
      c.m += (fiber_sizes[o] - 1) * (n_actions - c.zero_count(o) - 1);
    }
    c.bound = degree_bound(c, n_states, n_actions, fiber_sizes);
    out.push_back(std::move(c));

    // Mixed-radix increment, last observation fastest.
    int o = n_obs - 1;
    while (o >= 0 && ++pick[o] == masks.size()) pick[o--] = 0;
    if (o < 0) break;
  }
  return out;
}

std::vector<BoundaryComponent> enumerate_relevant(
    int n_actions, const std::vector<int>& fiber_sizes) {
  std::vector<BoundaryComponent> out = enumerate_components(n_actions, fiber_sizes);
  std::erase_if(out, [](const BoundaryComponent& c) { return !c.relevant; });
  return out;
}

BoundSummary bound_summary(int n_states, int n_actions,
                           const std::vector<int>& fiber_sizes) {
  check_dims(n_actions, fiber_sizes, n_states);
  BoundSummary sum;
  u128 total_components = 1, relevant_components = 1;
  for (int d : fiber_sizes) {
    const u128 proper = (u128(1) << n_actions) - 1;
    total_components *= proper;
    u128 rel = 0;
    for (int zeroed = std::max(n_actions - d, 0); zeroed <= n_actions - 1; ++zeroed)
      rel += binomial128(n_actions, zeroed);
    relevant_components *= rel;
  }
  sum.total_components = narrow(total_components, "component count");
  sum.relevant_components = narrow(relevant_components, "component count");

  u128 total_bound = 0, relevant_bound = 0;
  for (const auto& c : enumerate_components(n_actions, fiber_sizes)) {
    const std::uint64_t b = degree_bound(c, n_states, n_actions, fiber_sizes);
    total_bound += b;
    if (c.relevant) relevant_bound += b;
  }
  sum.total_bound = narrow(total_bound, "bound sum");
  sum.relevant_bound = narrow(relevant_bound, "bound sum");
  return sum;
}

}  // namespace sarop
