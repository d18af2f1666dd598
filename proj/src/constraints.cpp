#include "sarop/constraints.hpp"

#include <cmath>
#include <stdexcept>

namespace sarop {

Anchors default_anchors(const Pomdp& model) {
  Anchors anchors;
  anchors.action.assign(model.n_observations, 0);
  anchors.state.assign(model.n_observations, -1);
  for (int s = 0; s < model.n_states; ++s) {
    int& slot = anchors.state[model.g_beta[s]];
    if (slot < 0) slot = s;
  }
  return anchors;
}

void validate_anchors(const Pomdp& model, const Anchors& anchors) {
  if (static_cast<int>(anchors.action.size()) != model.n_observations ||
      static_cast<int>(anchors.state.size()) != model.n_observations)
    throw std::invalid_argument("anchors: one action and state per observation required");
  for (int o = 0; o < model.n_observations; ++o) {
    const int a = anchors.action[o], s = anchors.state[o];
    if (a < 0 || a >= model.n_actions)
      throw std::invalid_argument("anchors: action index out of range");
    if (s < 0 || s >= model.n_states || model.g_beta[s] != o)
      throw std::invalid_argument("anchors: state not in its fiber");
  }
}

std::vector<LinearConstraint> linear_constraints(const Pomdp& model) {
  const int ns = model.n_states, na = model.n_actions;
  std::vector<LinearConstraint> out;
  out.reserve(ns);
  for (int s = 0; s < ns; ++s) {
    LinearConstraint c;
    c.state = s;
    c.coeffs = VectorXd::Zero(ns * na);
    for (int s2 = 0; s2 < ns; ++s2)
      for (int a2 = 0; a2 < na; ++a2) {
        const int col = sa_index(s2, a2, na);
        c.coeffs[col] = (s2 == s ? 1.0 : 0.0) - model.gamma * model.alpha(s, col);
      }
    c.constant = -(1.0 - model.gamma) * model.mu[s];
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<MinorConstraint> minor_constraints(const Pomdp& model) {
  std::vector<MinorConstraint> out;
  for (const auto& fiber : model.fibers())
    for (std::size_t i = 0; i < fiber.size(); ++i)
      for (std::size_t j = i + 1; j < fiber.size(); ++j)
        for (int a = 0; a < model.n_actions; ++a)
          for (int a2 = a + 1; a2 < model.n_actions; ++a2) {
            MinorConstraint mc;
            mc.obs = model.g_beta[fiber[i]];
            mc.s = fiber[i];
            mc.s2 = fiber[j];
            mc.a = a;
            mc.a2 = a2;
            mc.n_actions = model.n_actions;
            out.push_back(mc);
          }
  return out;
}

std::vector<ReducedQuadratic> reduced_quadratics(const Pomdp& model,
                                                 const Anchors& anchors) {
  validate_anchors(model, anchors);
  std::vector<ReducedQuadratic> out;
  const auto fibers = model.fibers();
  for (int o = 0; o < model.n_observations; ++o)
    for (int s : fibers[o]) {
      if (s == anchors.state[o]) continue;
      for (int a = 0; a < model.n_actions; ++a) {
        if (a == anchors.action[o]) continue;
        ReducedQuadratic q;
        q.obs = o;
        q.anchor_state = anchors.state[o];
        q.s = s;
        q.a = a;
        q.anchor_action = anchors.action[o];
        q.n_actions = model.n_actions;
        out.push_back(q);
      }
    }
  return out;
}

FeasibilityResidual feasibility_residual(const Pomdp& model,
                                         const Eigen::Ref<const VectorXd>& eta) {
  FeasibilityResidual res;
  for (const auto& c : linear_constraints(model))
    res.max_linear = std::max(res.max_linear, std::abs(c.eval(eta)));
  for (const auto& mc : minor_constraints(model))
    res.max_quadratic = std::max(res.max_quadratic, std::abs(mc.eval(eta)));
  res.min_entry = eta.minCoeff();
  res.sum_gap = std::abs(eta.sum() - 1.0);
  return res;
}

bool is_feasible(const Pomdp& model, const Eigen::Ref<const VectorXd>& eta,
                 double tol) {
  const FeasibilityResidual res = feasibility_residual(model, eta);
  return res.max_linear <= tol && res.max_quadratic <= tol &&
         res.min_entry >= -tol && res.sum_gap <= tol;
}

}  // namespace sarop
