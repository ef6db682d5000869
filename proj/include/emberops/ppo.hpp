#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "emberops/policy.hpp"
#include "emberops/rng.hpp"

namespace emberops {

struct PpoConfig {
  double clip_epsilon = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double learning_rate = 3e-4;
  int epochs_per_batch = 4;
  int minibatch_size = 32;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  bool normalize_advantages = true;
  int hidden = 64;
  int checkpoint_every = 100;  // episodes

  // Adam moments.
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-5;

  friend bool operator==(const PpoConfig&, const PpoConfig&) = default;
};

// Throws ValidationError naming the offending ppo.* key.
void validate(const PpoConfig& config);

// One episode. values[t] = V(s_t) at collection time; dones[t] marks the
// terminal step.
struct Trajectory {
  std::vector<std::vector<double>> states;
  std::vector<std::vector<int>> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<bool> dones;

  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return rewards.size(); }
  void clear();
  void push(std::vector<double> state, std::vector<int> action, double log_prob, double reward, double value,
            bool done);
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // raw advantages + values, before normalisation
};

// Throws IncompleteTrajectory unless the last step is terminal.
GaeResult compute_gae(const Trajectory& trajectory, double gamma, double lambda, bool normalize = true);

// Fills trajectory.advantages/returns.
void attach_gae(Trajectory& trajectory, const PpoConfig& config);

struct MinibatchLoss {
  double total = 0.0;
  double policy_loss = 0.0;  // -mean clipped surrogate
  double value_loss = 0.0;   // mean (V - R)^2
  double entropy = 0.0;      // mean summed head entropy
  double clip_fraction = 0.0;
  double approx_kl = 0.0;  // mean of (r - 1) - log r
  double max_ratio_deviation = 0.0;
};

// Loss minimised by the update:
//   policy_loss + value_coef * value_loss - entropy_coef * entropy
// averaged over the given sample indices. When grad is non-null its
// gradient is written there.
MinibatchLoss ppo_loss(const PolicyNetwork& net, const Trajectory& trajectory, std::span<const std::size_t> batch,
                       const PpoConfig& config, std::vector<double>* grad);

struct UpdateDiagnostics {
  double clip_fraction = 0.0;  // averaged over minibatches
  double approx_kl = 0.0;      // averaged over minibatches
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double first_minibatch_max_ratio_deviation = 0.0;
  double first_minibatch_clip_fraction = 0.0;
  double post_update_kl = 0.0;  // whole batch, updated policy vs collection policy
  int minibatches = 0;
};

// Owns the network and the Adam state.
class PpoLearner {
 public:
  PpoLearner(PolicyNetwork net, PpoConfig config);

  const PolicyNetwork& network() const { return net_; }
  PolicyNetwork& network() { return net_; }
  const PpoConfig& config() const { return config_; }

  // epochs_per_batch shuffled passes over the trajectory in minibatches.
  // On a non-finite gradient or loss the network and optimiser are restored and
  // NonFiniteGradient is thrown.
  UpdateDiagnostics update(const Trajectory& trajectory, RngStream& rng);

 private:
  void adam_step(const std::vector<double>& grad);

  PolicyNetwork net_;
  PpoConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
};

}  // namespace emberops
