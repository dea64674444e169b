#ifndef TSC_DQN_HPP_
#define TSC_DQN_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "tsc/env.hpp"
#include "tsc/neural.hpp"

namespace tsc {

class KeyValueConfig;

struct DqnConfig {
  double learning_rate = 1e-4;
  int replay_capacity = 50000;
  int batch_size = 64;
  int target_sync_steps = 1000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int epsilon_decay_steps = 20000;
  double gamma = 0.99;
  long long total_timesteps = 100000;  // simulated seconds
  int hidden_units = 64;
  int hidden_layers = 2;
  double huber_delta = 1.0;
  double max_grad_norm = 10.0;
  int log_interval_steps = 1000;

  // Throws ConfigError.
  void validate() const;
};

DqnConfig dqn_from_config(const KeyValueConfig& cfg, DqnConfig base = {});

// Linear decay from epsilon_start to epsilon_end over epsilon_decay_steps.
double epsilon_at(const DqnConfig& cfg, long long step);

// Fixed-capacity ring of transitions, oldest overwritten first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void add(std::vector<double> obs, int action, double reward,
           std::vector<double> next_obs);
  std::size_t size() const { return obs_.size(); }
  std::size_t capacity() const { return capacity_; }

  const std::vector<double>& obs(std::size_t i) const { return obs_[i]; }
  int action(std::size_t i) const { return actions_[i]; }
  double reward(std::size_t i) const { return rewards_[i]; }
  const std::vector<double>& next_obs(std::size_t i) const { return next_[i]; }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<std::vector<double>> obs_;
  std::vector<int> actions_;
  std::vector<double> rewards_;
  std::vector<std::vector<double>> next_;
};

struct DqnLogRow {
  long long step = 0;
  long long sim_time_s = 0;
  double epsilon = 0.0;
  double mean_reward = 0.0;
  double mean_loss = 0.0;     // NaN when no update ran in the interval
  double mean_q_cycle = 0.0;  // NaN when no cycle closed in the interval

  bool operator==(const DqnLogRow& o) const;
};

struct DqnResult {
  Mlp q_network;
  std::vector<DqnLogRow> log;
  std::vector<long long> action_counts;
  long long steps = 0;
  long long updates = 0;
  long long sim_time_s = 0;
};

// Epsilon-greedy Q-learning with replay and a periodically synced target
// network (Huber loss). Updates are skipped while the replay holds fewer
// than batch_size transitions. Throws TrainingError on non-finite losses.
DqnResult train_dqn(const EnvFactory& make_env, const DqnConfig& cfg,
                    std::uint64_t seed);

void write_dqn_log_csv(std::ostream& out, std::span<const DqnLogRow> rows);

}  // namespace tsc

#endif  // TSC_DQN_HPP_
