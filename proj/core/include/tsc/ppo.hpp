#ifndef TSC_PPO_HPP_
#define TSC_PPO_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "tsc/env.hpp"
#include "tsc/neural.hpp"

namespace tsc {

class KeyValueConfig;

struct PpoConfig {
  double learning_rate = 3e-6;
  int n_steps = 200;
  int batch_size = 64;
  int n_epochs = 10;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_range = 0.2;
  long long total_timesteps = 100000;  // simulated seconds
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;
  int hidden_units = 64;
  int hidden_layers = 2;

  // Throws ConfigError.
  void validate() const;
};

PpoConfig ppo_from_config(const KeyValueConfig& cfg, PpoConfig base = {});

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// delta_t = r_t + gamma V(s_{t+1}) - V(s_t), A_t = sum_k (gamma lambda)^k
// delta_{t+k}, returns = A + V. `values` holds V(s_0..s_{n-1});
// `next_value` is V(s_n). A nonzero entry in `dones` stops bootstrapping past
// that step.
GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values, double next_value,
                      double gamma, double lambda,
                      std::span<const std::uint8_t> dones = {});

// Shifts and scales to mean 0, standard deviation 1 (population std).
void normalize_advantages(std::vector<double>& advantages);

// min(r A, clip(r, 1 - eps, 1 + eps) A).
double clipped_objective(double ratio, double advantage, double clip);

struct RolloutBuffer {
  std::vector<std::vector<double>> observations;
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return actions.size(); }
  void clear();
};

struct SurrogateResult {
  double loss = 0.0;
  double policy_loss = 0.0;  // -mean clipped objective
  double value_loss = 0.0;   // mean squared error
  double entropy = 0.0;      // mean policy entropy
  double mean_abs_ratio_dev = 0.0;
  double clip_fraction = 0.0;
  std::vector<double> policy_grads;
  std::vector<double> value_grads;
};

// Loss -mean(clipped objective) + value_coef * MSE - entropy_coef * entropy
// over buffer rows `batch`, with analytic gradients for both networks.
// Throws TrainingError on NaN ratios.
SurrogateResult ppo_surrogate(const RolloutBuffer& buffer,
                              std::span<const std::size_t> batch,
                              const Mlp& policy, const Mlp& value,
                              double clip, double value_coef,
                              double entropy_coef);

struct PpoLogRow {
  int rollout_idx = 0;
  long long sim_time_s = 0;
  double mean_reward = 0.0;
  double mean_q_cycle = 0.0;  // NaN when no cycle closed in the rollout
  double policy_entropy = 0.0;
  double value_loss = 0.0;

  bool operator==(const PpoLogRow& o) const;
};

struct PpoResult {
  Mlp policy;
  Mlp value;
  std::vector<PpoLogRow> log;
  long long sim_time_s = 0;
  long long decisions = 0;
};

// Called after every rollout update; return false to stop early.
using PpoProgress = std::function<bool(const PpoLogRow&)>;

// Alternates n_steps-decision rollouts with n_epochs of minibatch updates
// until total_timesteps simulated seconds have elapsed. Throws
// TrainingError on NaN ratios or when mean |ratio - 1| exceeds 10.
PpoResult train_ppo(const EnvFactory& make_env, const PpoConfig& cfg,
                    std::uint64_t seed, const PpoProgress& progress = {});

Mlp make_policy_net(int obs_size, int num_actions, const PpoConfig& cfg,
                    std::uint64_t seed);
Mlp make_value_net(int obs_size, const PpoConfig& cfg, std::uint64_t seed);

void write_training_log_csv(std::ostream& out, std::span<const PpoLogRow> rows);

}  // namespace tsc

#endif  // TSC_PPO_HPP_
