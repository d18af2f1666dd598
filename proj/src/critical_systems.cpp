#include "sarop/critical_systems.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace sarop {

namespace {

void check_component(const Pomdp& model, const BoundaryComponent& component) {
  if (static_cast<int>(component.zero_sets.size()) != model.n_observations)
    throw std::invalid_argument("component: one zero set per observation required");
  const std::uint32_t all =
      model.n_actions >= 32 ? ~0u : ((1u << model.n_actions) - 1u);
  for (std::uint32_t z : component.zero_sets)
    if ((z & ~all) != 0u || z == all)
      throw std::invalid_argument("component: zero sets must be proper action subsets");
}

void check_anchors_for_component(const Pomdp& model,
                                 const BoundaryComponent& component,
                                 const Anchors& anchors) {
  validate_anchors(model, anchors);
  for (int o = 0; o < model.n_observations; ++o)
    if (component.zeroed(o, anchors.action[o]))
      throw std::invalid_argument(
          "anchors: anchor action is zeroed on observation " + std::to_string(o));
}

struct SystemLayout {
  // Variable index of each (s, a); -1 when the component zeroes it.
  std::vector<int> eta_var;
  std::vector<std::pair<int, int>> free_coords;
  int lambda_base = 0;  // variable index of lam_{state 0}
  int nu_base = 0;
  int kappa_base = -1;  // -1 when the system carries no kappa block
  // The restricted quadratics, one polynomial per nu variable.
  std::vector<Polynomial> quadratics;

  int eta_of(int s, int a, int n_actions) const {
    return eta_var[s * n_actions + a];
  }
};

// Restricted reduced quadratic for (obs, s, a) against the anchors, in the
// free-variable chart: sum over surviving a' != a of
// eta(s,a) eta(s_o,a') - eta(s_o,a) eta(s,a').
Polynomial restricted_quadratic(const Pomdp& model, const SystemLayout& layout,
                                int n_vars, int o, int s, int a,
                                const Anchors& anchors,
                                const BoundaryComponent& component) {
  const int na = model.n_actions;
  const int s_o = anchors.state[o];
  Polynomial p(n_vars);
  for (int a2 = 0; a2 < na; ++a2) {
    if (a2 == a || component.zeroed(o, a2)) continue;
    Exponents left(n_vars, 0);
    left[layout.eta_of(s, a, na)] += 1;
    left[layout.eta_of(s_o, a2, na)] += 1;
    p.add_term(left, Complex(1.0));
    Exponents right(n_vars, 0);
    right[layout.eta_of(s_o, a, na)] += 1;
    right[layout.eta_of(s, a2, na)] += 1;
    p.add_term(right, Complex(-1.0));
  }
  return p;
}

// Shared assembly for both routes; with_kappa selects the KKT shape (only
// valid together with the all-free component).
PolySystem build_critical_system(const Pomdp& model,
                                 const BoundaryComponent& component,
                                 const Anchors& anchors, bool with_kappa) {
  check_component(model, component);
  check_anchors_for_component(model, component, anchors);
  const int ns = model.n_states, na = model.n_actions, no = model.n_observations;
  const auto fibers = model.fibers();

  PolySystem sys;
  SystemLayout layout;
  layout.eta_var.assign(ns * na, -1);

  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < na; ++a) {
      if (component.zeroed(model.g_beta[s], a)) continue;
      layout.eta_var[sa_index(s, a, na)] =
          sys.registry.add("eta_s" + std::to_string(s) + "_a" + std::to_string(a));
      layout.free_coords.emplace_back(s, a);
    }
  layout.lambda_base = sys.registry.size();
  for (int s = 0; s < ns; ++s) sys.registry.add("lam_s" + std::to_string(s));

  // One nu per restricted quadratic: non-anchor state of the fiber, then
  // non-anchor surviving action, both ascending.
  layout.nu_base = sys.registry.size();
  std::vector<std::array<int, 3>> quad_index;  // (o, s, a)
  for (int o = 0; o < no; ++o)
    for (int s : fibers[o]) {
      if (s == anchors.state[o]) continue;
      for (int a = 0; a < na; ++a) {
        if (a == anchors.action[o] || component.zeroed(o, a)) continue;
        sys.registry.add("nu_o" + std::to_string(o) + "_s" + std::to_string(s) +
                         "_a" + std::to_string(a));
        quad_index.push_back({o, s, a});
      }
    }
  if (with_kappa) {
    layout.kappa_base = sys.registry.size();
    for (int o = 0; o < no; ++o)
      for (int a = 0; a < na; ++a)
        sys.registry.add("kap_s" + std::to_string(anchors.state[o]) + "_a" +
                         std::to_string(a));
  }
  const int n_vars = sys.registry.size();

  // Flow constraints, restricted to the surviving coordinates.
  const auto linear = linear_constraints(model);
  for (int s = 0; s < ns; ++s) {
    Polynomial eq(n_vars);
    for (const auto& [s2, a2] : layout.free_coords) {
      const double c = linear[s].coeffs[sa_index(s2, a2, na)];
      if (c == 0.0) continue;
      Exponents e(n_vars, 0);
      e[layout.eta_of(s2, a2, na)] = 1;
      eq.add_term(e, Complex(c));
    }
    eq.add_term(Exponents(n_vars, 0), Complex(linear[s].constant));
    sys.equations.push_back(std::move(eq));
  }

  // Restricted reduced quadratics.
  layout.quadratics.reserve(quad_index.size());
  for (const auto& [o, s, a] : quad_index) {
    Polynomial p =
        restricted_quadratic(model, layout, n_vars, o, s, a, anchors, component);
    sys.equations.push_back(p);
    layout.quadratics.push_back(std::move(p));
  }

  // Complementary slackness at the anchor states (KKT only).
  if (with_kappa)
    for (int o = 0; o < no; ++o)
      for (int a = 0; a < na; ++a) {
        Polynomial eq(n_vars);
        Exponents e(n_vars, 0);
        e[layout.kappa_base + o * na + a] += 1;
        e[layout.eta_of(anchors.state[o], a, na)] += 1;
        eq.add_term(e, Complex(1.0));
        sys.equations.push_back(std::move(eq));
      }

  // Stationarity of the Lagrangian in each surviving coordinate:
  // r_{sa} + sum_s' lam_s' dl_s'/deta_{sa} + sum_q nu_q dp_q/deta_{sa}
  // (+ kappa_{g(s) a} replicated across the fiber).
  for (const auto& [s, a] : layout.free_coords) {
    const int col = sa_index(s, a, na);
    Polynomial eq(n_vars);
    eq.add_term(Exponents(n_vars, 0), Complex(model.reward(s, a)));
    for (int s2 = 0; s2 < ns; ++s2) {
      const double c = linear[s2].coeffs[col];
      if (c == 0.0) continue;
      Exponents e(n_vars, 0);
      e[layout.lambda_base + s2] = 1;
      eq.add_term(e, Complex(c));
    }
    const int var = layout.eta_of(s, a, na);
    for (std::size_t q = 0; q < layout.quadratics.size(); ++q) {
      const Polynomial grad = layout.quadratics[q].derivative(var);
      for (const auto& [exps, coeff] : grad.terms()) {
        Exponents e = exps;
        e[layout.nu_base + static_cast<int>(q)] += 1;
        eq.add_term(e, coeff);
      }
    }
    if (with_kappa) {
      Exponents e(n_vars, 0);
      e[layout.kappa_base + model.g_beta[s] * na + a] = 1;
      eq.add_term(e, Complex(1.0));
    }
    sys.equations.push_back(std::move(eq));
  }

  if (!sys.is_square())
    throw std::runtime_error("critical system assembly lost squareness");
  return sys;
}

}  // namespace

Anchors component_anchors(const Pomdp& model, const BoundaryComponent& component) {
  check_component(model, component);
  Anchors anchors = default_anchors(model);
  for (int o = 0; o < model.n_observations; ++o) {
    int a = 0;
    while (a < model.n_actions && component.zeroed(o, a)) ++a;
    anchors.action[o] = a;
  }
  return anchors;
}

std::vector<std::pair<int, int>> free_coordinates(
    const Pomdp& model, const BoundaryComponent& component) {
  check_component(model, component);
  std::vector<std::pair<int, int>> out;
  for (int s = 0; s < model.n_states; ++s)
    for (int a = 0; a < model.n_actions; ++a)
      if (!component.zeroed(model.g_beta[s], a)) out.emplace_back(s, a);
  return out;
}

PolySystem build_lagrange_system(const Pomdp& model,
                                 const BoundaryComponent& component,
                                 const Anchors& anchors) {
  return build_critical_system(model, component, anchors, false);
}

PolySystem build_kkt_system(const Pomdp& model, const Anchors& anchors) {
  const BoundaryComponent full = full_component(
      model.n_actions, model.fiber_sizes(), model.n_states);
  return build_critical_system(model, full, anchors, true);
}

VectorXd embed_eta(const Pomdp& model, const BoundaryComponent& component,
                   const CVector& point) {
  const auto coords = free_coordinates(model, component);
  if (point.size() < static_cast<int>(coords.size()))
    throw std::invalid_argument("embed_eta: point shorter than the eta block");
  VectorXd eta = VectorXd::Zero(model.n_states * model.n_actions);
  for (std::size_t i = 0; i < coords.size(); ++i)
    eta[sa_index(coords[i].first, coords[i].second, model.n_actions)] =
        point[static_cast<int>(i)].real();
  return eta;
}

}  // namespace sarop
