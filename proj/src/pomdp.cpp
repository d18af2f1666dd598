#include "sarop/pomdp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/LU>

#include "sarop/random.hpp"

namespace sarop {

std::vector<std::vector<int>> Pomdp::fibers() const {
  std::vector<std::vector<int>> out(n_observations);
  for (int s = 0; s < n_states; ++s) out[g_beta[s]].push_back(s);
  return out;
}

std::vector<int> Pomdp::fiber_sizes() const {
  std::vector<int> out(n_observations, 0);
  for (int s = 0; s < n_states; ++s) ++out[g_beta[s]];
  return out;
}

VectorXd Pomdp::reward_vector() const {
  VectorXd r(n_states * n_actions);
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) r[sa_index(s, a, n_actions)] = reward(s, a);
  return r;
}

VectorXd StateActionFrequency::state_marginal() const {
  VectorXd rho = VectorXd::Zero(n_states);
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) rho[s] += eta[s * n_actions + a];
  return rho;
}

std::vector<std::string> validate(const Pomdp& model) {
  std::vector<std::string> bad;
  std::ostringstream os;
  auto flag = [&](const std::ostringstream& msg) { bad.push_back(msg.str()); };

  const int ns = model.n_states, na = model.n_actions, no = model.n_observations;
  if (ns <= 0 || na <= 0 || no <= 0) {
    std::ostringstream m;
    m << "dimensions must be positive, got (" << ns << ", " << na << ", " << no << ")";
    flag(m);
    return bad;
  }
  if (model.alpha.rows() != ns || model.alpha.cols() != ns * na) {
    std::ostringstream m;
    m << "alpha has shape " << model.alpha.rows() << "x" << model.alpha.cols()
      << ", expected " << ns << "x" << ns * na;
    flag(m);
  } else {
    for (int c = 0; c < ns * na; ++c) {
      const double colsum = model.alpha.col(c).sum();
      const double least = model.alpha.col(c).minCoeff();
      if (least < -1e-12) {
        std::ostringstream m;
        m << "alpha column (s=" << c / na << ", a=" << c % na
          << ") has negative entry " << least;
        flag(m);
      }
      if (std::abs(colsum - 1.0) > 1e-9) {
        std::ostringstream m;
        m << "alpha column (s=" << c / na << ", a=" << c % na << ") sums to "
          << colsum;
        flag(m);
      }
    }
  }
  if (static_cast<int>(model.g_beta.size()) != ns) {
    std::ostringstream m;
    m << "g_beta has " << model.g_beta.size() << " entries, expected " << ns;
    flag(m);
  } else {
    std::vector<bool> seen(no, false);
    for (int s = 0; s < ns; ++s) {
      const int o = model.g_beta[s];
      if (o < 0 || o >= no) {
        std::ostringstream m;
        m << "g_beta[" << s << "] = " << o << " outside [0, " << no << ")";
        flag(m);
      } else {
        seen[o] = true;
      }
    }
    for (int o = 0; o < no; ++o)
      if (!seen[o]) {
        std::ostringstream m;
        m << "observation " << o << " has an empty fiber";
        flag(m);
      }
  }
  if (model.reward.rows() != ns || model.reward.cols() != na) {
    std::ostringstream m;
    m << "reward has shape " << model.reward.rows() << "x" << model.reward.cols()
      << ", expected " << ns << "x" << na;
    flag(m);
  }
  if (!(model.gamma >= 0.0 && model.gamma < 1.0)) {
    std::ostringstream m;
    m << "gamma = " << model.gamma << " outside [0, 1)";
    flag(m);
  }
  if (model.mu.size() != ns) {
    std::ostringstream m;
    m << "mu has " << model.mu.size() << " entries, expected " << ns;
    flag(m);
  } else {
    if (model.mu.minCoeff() < -1e-12) {
      std::ostringstream m;
      m << "mu has negative entry " << model.mu.minCoeff();
      flag(m);
    }
    if (std::abs(model.mu.sum() - 1.0) > 1e-9) {
      std::ostringstream m;
      m << "mu sums to " << model.mu.sum();
      flag(m);
    }
  }
  (void)os;
  return bad;
}

Pomdp random_pomdp(int n_states, int n_actions,
                   const std::vector<int>& fiber_sizes, std::uint64_t seed,
                   double gamma) {
  int total = 0;
  for (int d : fiber_sizes) {
    if (d <= 0) throw std::invalid_argument("fiber sizes must be positive");
    total += d;
  }
  if (total != n_states)
    throw std::invalid_argument("fiber sizes must sum to n_states");
  if (n_states <= 0 || n_actions <= 0)
    throw std::invalid_argument("dimensions must be positive");

  Pomdp model;
  model.n_states = n_states;
  model.n_actions = n_actions;
  model.n_observations = static_cast<int>(fiber_sizes.size());
  model.gamma = gamma;
  model.g_beta.resize(n_states);
  int s = 0;
  for (int o = 0; o < model.n_observations; ++o)
    for (int k = 0; k < fiber_sizes[o]; ++k) model.g_beta[s++] = o;

  std::mt19937_64 gen(seed);
  model.alpha.resize(n_states, n_states * n_actions);
  for (int c = 0; c < n_states * n_actions; ++c)
    model.alpha.col(c) = sample_simplex(n_states, gen);
  model.mu = sample_simplex(n_states, gen);
  model.reward.resize(n_states, n_actions);
  for (int i = 0; i < n_states; ++i)
    for (int a = 0; a < n_actions; ++a) model.reward(i, a) = sample_normal(gen);
  return model;
}

Policy uniform_policy(int n_actions, int n_observations) {
  Policy pi;
  pi.prob = MatrixXd::Constant(n_actions, n_observations, 1.0 / n_actions);
  return pi;
}

Policy random_policy(int n_actions, int n_observations, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Policy pi;
  pi.prob.resize(n_actions, n_observations);
  for (int o = 0; o < n_observations; ++o)
    pi.prob.col(o) = sample_simplex(n_actions, gen);
  return pi;
}

StatePolicy state_policy(const Pomdp& model, const Policy& pi) {
  StatePolicy tau;
  tau.prob.resize(model.n_actions, model.n_states);
  for (int s = 0; s < model.n_states; ++s)
    tau.prob.col(s) = pi.prob.col(model.g_beta[s]);
  return tau;
}

MatrixXd state_action_kernel(const Pomdp& model, const StatePolicy& tau) {
  const int ns = model.n_states, na = model.n_actions;
  MatrixXd kernel(ns * na, ns * na);
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < na; ++a) {
      const int col = sa_index(s, a, na);
      for (int s2 = 0; s2 < ns; ++s2) {
        const double move = model.alpha(s2, col);
        for (int a2 = 0; a2 < na; ++a2)
          kernel(sa_index(s2, a2, na), col) = move * tau.prob(a2, s2);
      }
    }
  return kernel;
}

StateActionFrequency occupancy(const Pomdp& model, const StatePolicy& tau) {
  const int ns = model.n_states, na = model.n_actions;
  const MatrixXd kernel = state_action_kernel(model, tau);
  const MatrixXd system =
      MatrixXd::Identity(ns * na, ns * na) - model.gamma * kernel;
  VectorXd start(ns * na);
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < na; ++a)
      start[sa_index(s, a, na)] = model.mu[s] * tau.prob(a, s);
  start *= 1.0 - model.gamma;

  Eigen::PartialPivLU<MatrixXd> lu(system);
  VectorXd eta = lu.solve(start);
  const double residual = (system * eta - start).lpNorm<Eigen::Infinity>();
  if (!eta.allFinite() || residual > 1e-8)
    throw std::runtime_error("occupancy: linear solve failed (residual " +
                             std::to_string(residual) + ")");
  return StateActionFrequency{eta, ns, na};
}

StateActionFrequency phi(const Pomdp& model, const Policy& pi) {
  return occupancy(model, state_policy(model, pi));
}

double reward_value(const Pomdp& model, const Policy& pi) {
  return model.reward_vector().dot(phi(model, pi).eta);
}

MatrixXd reward_gradient(const Pomdp& model, const Policy& pi) {
  const int ns = model.n_states, na = model.n_actions, no = model.n_observations;
  const StatePolicy tau = state_policy(model, pi);
  const MatrixXd kernel = state_action_kernel(model, tau);
  const MatrixXd system =
      MatrixXd::Identity(ns * na, ns * na) - model.gamma * kernel;
  Eigen::PartialPivLU<MatrixXd> lu(system);

  VectorXd start(ns * na);
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < na; ++a)
      start[sa_index(s, a, na)] = model.mu[s] * tau.prob(a, s);
  start *= 1.0 - model.gamma;
  const VectorXd eta = lu.solve(start);

  // Perturbing pi(a|o) perturbs both the kernel and the start vector through
  // tau; the combined forcing concentrates on rows (s, a) with g_beta(s) = o,
  // with weight b(s) = (1 - gamma) mu(s) + gamma (alpha eta)(s).  A single
  // adjoint solve then yields every partial derivative.
  const VectorXd weight =
      (1.0 - model.gamma) * model.mu + model.gamma * (model.alpha * eta);
  const VectorXd adjoint = system.transpose().partialPivLu().solve(
      model.reward_vector());

  MatrixXd grad = MatrixXd::Zero(na, no);
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < na; ++a)
      grad(a, model.g_beta[s]) += adjoint[sa_index(s, a, na)] * weight[s];
  return grad;
}

StatePolicy condition(const StateActionFrequency& eta, double tol) {
  const VectorXd rho = eta.state_marginal();
  std::vector<int> bad;
  for (int s = 0; s < eta.n_states; ++s)
    if (rho[s] <= tol) bad.push_back(s);
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "conditioning undefined: zero state marginal at state";
    if (bad.size() > 1) msg << "s";
    for (int s : bad) msg << " " << s;
    throw std::domain_error(msg.str());
  }
  StatePolicy tau;
  tau.prob.resize(eta.n_actions, eta.n_states);
  for (int s = 0; s < eta.n_states; ++s)
    for (int a = 0; a < eta.n_actions; ++a)
      tau.prob(a, s) = eta(s, a) / rho[s];
  return tau;
}

Policy recover_policy(const StateActionFrequency& eta,
                      const std::vector<int>& g_beta, double tol,
                      double disagree_tol) {
  const int ns = eta.n_states, na = eta.n_actions;
  if (static_cast<int>(g_beta.size()) != ns)
    throw std::invalid_argument("recover_policy: g_beta size mismatch");
  int no = 0;
  for (int o : g_beta) no = std::max(no, o + 1);
  const VectorXd rho = eta.state_marginal();

  Policy pi;
  pi.prob = MatrixXd::Zero(na, no);
  std::vector<int> anchor(no, -1);
  for (int s = 0; s < ns; ++s) {
    if (rho[s] <= tol) continue;
    const int o = g_beta[s];
    VectorXd cond(na);
    for (int a = 0; a < na; ++a) cond[a] = eta(s, a) / rho[s];
    if (anchor[o] < 0) {
      anchor[o] = s;
      pi.prob.col(o) = cond;
    } else {
      const double tv = 0.5 * (cond - pi.prob.col(o)).lpNorm<1>();
      if (tv > disagree_tol) {
        std::ostringstream msg;
        msg << "recover_policy: states " << anchor[o] << " and " << s
            << " share an observation but condition to different policies "
               "(total variation "
            << tv << ")";
        throw std::domain_error(msg.str());
      }
    }
  }
  for (int o = 0; o < no; ++o)
    if (anchor[o] < 0) {
      std::ostringstream msg;
      msg << "recover_policy: every state of observation " << o
          << " has zero marginal";
      throw std::domain_error(msg.str());
    }
  return pi;
}

bool check_positivity(const Pomdp& model, int n_probe, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  for (int k = 0; k < n_probe; ++k) {
    Policy pi;
    pi.prob.resize(model.n_actions, model.n_observations);
    for (int o = 0; o < model.n_observations; ++o)
      pi.prob.col(o) = sample_simplex(model.n_actions, gen);
    const VectorXd rho = phi(model, pi).state_marginal();
    if (rho.minCoeff() <= 1e-12) return false;
  }
  return true;
}

}  // namespace sarop
