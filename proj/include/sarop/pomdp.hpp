#pragma once

// Discounted POMDPs whose observation channel is a deterministic state
// aggregation, together with the occupancy-measure machinery: memoryless
// observation policies, their induced state policies and state-action
// frequencies, expected discounted reward and its policy gradient, and the
// conditioning map that recovers a policy from a frequency vector.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sarop {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Flattened (state, action) index used by alpha columns, reward vectors and
// frequency vectors: row-major with the action index fastest.
inline int sa_index(int s, int a, int n_actions) { return s * n_actions + a; }

// Tolerance below which a state marginal is considered zero (conditioning
// undefined there).
inline constexpr double kMarginalTol = 1e-9;

struct Pomdp {
  int n_states = 0;
  int n_actions = 0;
  int n_observations = 0;
  // Transition kernel: column sa_index(s, a) holds the distribution of the
  // next state given (s, a); columns sum to one.
  MatrixXd alpha;
  // Deterministic observation map, one observation index per state.
  std::vector<int> g_beta;
  // Instantaneous reward, indexed (state, action).
  MatrixXd reward;
  double gamma = 0.0;  // discount factor in [0, 1)
  VectorXd mu;         // initial state distribution

  // States grouped by observation, ascending within each group.
  std::vector<std::vector<int>> fibers() const;
  std::vector<int> fiber_sizes() const;
  // Reward flattened by sa_index.
  VectorXd reward_vector() const;
};

// Memoryless policy over observations; column o is a distribution over
// actions.
struct Policy {
  MatrixXd prob;  // n_actions x n_observations, column-stochastic
};

// Policy over states (the pullback of a Policy along the observation map, or
// the output of conditioning a frequency vector).
struct StatePolicy {
  MatrixXd prob;  // n_actions x n_states, column-stochastic
};

// Discounted state-action frequency vector; entries are nonnegative and sum
// to one for any policy of a valid model.
struct StateActionFrequency {
  VectorXd eta;  // length n_states * n_actions, sa_index layout
  int n_states = 0;
  int n_actions = 0;

  double operator()(int s, int a) const { return eta[s * n_actions + a]; }
  VectorXd state_marginal() const;
};

// Structural and numerical checks; returns human-readable violations
// (empty means valid).  Checked: shapes, column stochasticity of alpha,
// surjectivity and range of g_beta, mu a distribution, gamma in [0, 1).
std::vector<std::string> validate(const Pomdp& model);

// Seeded random instance with the given observation fiber sizes: alpha
// columns and mu are uniform draws from the simplex, rewards are standard
// normal, gamma = 0.95 unless overridden.  States are ordered so that fiber
// o occupies a contiguous block, in the order given.
Pomdp random_pomdp(int n_states, int n_actions,
                   const std::vector<int>& fiber_sizes, std::uint64_t seed,
                   double gamma = 0.95);

Policy uniform_policy(int n_actions, int n_observations);
Policy random_policy(int n_actions, int n_observations, std::uint64_t seed);

// Pullback of an observation policy to a state policy: column s is column
// g_beta(s) of pi.
StatePolicy state_policy(const Pomdp& model, const Policy& pi);

// Markov kernel on state-action pairs induced by a state policy:
// K((s', a') | (s, a)) = alpha(s' | s, a) * tau(a' | s').
MatrixXd state_action_kernel(const Pomdp& model, const StatePolicy& tau);

// Discounted state-action frequency of a state policy, computed by a dense
// direct solve of (I - gamma K) eta = (1 - gamma) * (mu * tau).
StateActionFrequency occupancy(const Pomdp& model, const StatePolicy& tau);

// Frequency map for observation policies: occupancy of the pullback.
StateActionFrequency phi(const Pomdp& model, const Policy& pi);

// Expected normalized discounted reward <r, phi(pi)>.
double reward_value(const Pomdp& model, const Policy& pi);

// Gradient of reward_value with respect to the policy entries, same shape
// as pi.prob, computed by forward sensitivities of the linear system behind
// phi (one extra solve per entry against a shared factorization).
MatrixXd reward_gradient(const Pomdp& model, const Policy& pi);

// Conditional distribution of actions given states, tau(a|s) =
// eta(s,a) / rho(s).  Throws std::domain_error naming the offending states
// if some marginal rho(s) <= tol.
StatePolicy condition(const StateActionFrequency& eta,
                      double tol = kMarginalTol);

// Reads an observation policy off a frequency vector: conditions, then for
// each observation takes the conditional of any state in the fiber with a
// positive marginal.  Throws std::domain_error if an entire fiber has zero
// marginal, or if two states in one fiber disagree by more than disagree_tol
// in total variation (the frequency then lies outside the feasible set).
Policy recover_policy(const StateActionFrequency& eta,
                      const std::vector<int>& g_beta,
                      double tol = kMarginalTol, double disagree_tol = 1e-6);

// True when every state keeps a positive discounted marginal under n_probe
// seeded random policies (sufficient in practice for mu with full support;
// used as a precondition probe by the solvers).
bool check_positivity(const Pomdp& model, int n_probe, std::uint64_t seed);

}  // namespace sarop
