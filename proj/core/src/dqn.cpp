#include "tsc/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "tsc/config.hpp"
#include "tsc/errors.hpp"

namespace tsc {

namespace {

bool same(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

double mean_or_nan(double sum, long long n) {
  return n > 0 ? sum / static_cast<double>(n)
               : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

void DqnConfig::validate() const {
  if (learning_rate < 0.0) throw ConfigError("dqn.learning_rate must be non-negative");
  if (batch_size <= 0) throw ConfigError("dqn.batch_size must be positive");
  if (replay_capacity < batch_size) {
    throw ConfigError("dqn.capacity must be at least dqn.batch_size");
  }
  if (target_sync_steps <= 0) throw ConfigError("dqn.target_sync must be positive");
  if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_end < 0.0 ||
      epsilon_end > 1.0 || epsilon_decay_steps < 0) {
    throw ConfigError("invalid dqn epsilon schedule");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("dqn.gamma must lie in (0, 1)");
  if (total_timesteps < 0) throw ConfigError("dqn.total_timesteps must be non-negative");
  if (hidden_units <= 0 || hidden_layers < 0 || huber_delta <= 0.0 ||
      max_grad_norm <= 0.0 || log_interval_steps <= 0) {
    throw ConfigError("invalid dqn network settings");
  }
}

DqnConfig dqn_from_config(const KeyValueConfig& cfg, DqnConfig base) {
  base.learning_rate = cfg.get_double("dqn.learning_rate", base.learning_rate);
  base.replay_capacity = static_cast<int>(cfg.get_int("dqn.capacity", base.replay_capacity));
  base.batch_size = static_cast<int>(cfg.get_int("dqn.batch_size", base.batch_size));
  base.target_sync_steps =
      static_cast<int>(cfg.get_int("dqn.target_sync", base.target_sync_steps));
  base.epsilon_start = cfg.get_double("dqn.epsilon_start", base.epsilon_start);
  base.epsilon_end = cfg.get_double("dqn.epsilon_end", base.epsilon_end);
  base.epsilon_decay_steps =
      static_cast<int>(cfg.get_int("dqn.epsilon_decay", base.epsilon_decay_steps));
  base.gamma = cfg.get_double("dqn.gamma", base.gamma);
  base.total_timesteps = cfg.get_int("dqn.total_timesteps", base.total_timesteps);
  base.hidden_units = static_cast<int>(cfg.get_int("dqn.hidden_units", base.hidden_units));
  base.hidden_layers = static_cast<int>(cfg.get_int("dqn.hidden_layers", base.hidden_layers));
  return base;
}

double epsilon_at(const DqnConfig& cfg, long long step) {
  if (cfg.epsilon_decay_steps == 0 || step >= cfg.epsilon_decay_steps) {
    return cfg.epsilon_end;
  }
  const double frac = static_cast<double>(step) / cfg.epsilon_decay_steps;
  return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
}

void ReplayBuffer::add(std::vector<double> obs, int action, double reward,
                       std::vector<double> next_obs) {
  if (obs_.size() < capacity_) {
    obs_.push_back(std::move(obs));
    actions_.push_back(action);
    rewards_.push_back(reward);
    next_.push_back(std::move(next_obs));
    return;
  }
  obs_[head_] = std::move(obs);
  actions_[head_] = action;
  rewards_[head_] = reward;
  next_[head_] = std::move(next_obs);
  head_ = (head_ + 1) % capacity_;
}

bool DqnLogRow::operator==(const DqnLogRow& o) const {
  return step == o.step && sim_time_s == o.sim_time_s && same(epsilon, o.epsilon) &&
         same(mean_reward, o.mean_reward) && same(mean_loss, o.mean_loss) &&
         same(mean_q_cycle, o.mean_q_cycle);
}

DqnResult train_dqn(const EnvFactory& make_env, const DqnConfig& cfg,
                    std::uint64_t seed) {
  cfg.validate();
  auto env = make_env(derive_seed(seed, 0));
  if (!env) throw TrainingError("environment factory returned nothing");
  const int obs_size = env->observation_size();
  const int n_actions = env->num_actions();

  std::vector<int> sizes{obs_size};
  for (int i = 0; i < cfg.hidden_layers; ++i) sizes.push_back(cfg.hidden_units);
  sizes.push_back(n_actions);

  DqnResult res;
  res.q_network = Mlp(sizes, Activation::kRelu, derive_seed(seed, 1));
  res.action_counts.assign(static_cast<std::size_t>(n_actions), 0);
  Mlp target = res.q_network;
  Rng rng(derive_seed(seed, 3));
  ReplayBuffer replay(static_cast<std::size_t>(cfg.replay_capacity));
  AdamMoments moments(res.q_network.num_params());
  const AdamConfig adam{cfg.learning_rate};
  std::vector<double> grads(res.q_network.num_params());
  std::vector<double> upstream(static_cast<std::size_t>(n_actions));
  GradientTape tape;

  double reward_sum = 0.0;
  long long reward_n = 0;
  double loss_sum = 0.0;
  long long loss_n = 0;
  double q_sum = 0.0;
  long long q_n = 0;

  std::vector<double> obs = env->reset();
  while (res.sim_time_s < cfg.total_timesteps) {
    const double eps = epsilon_at(cfg, res.steps);
    int action;
    if (rng.uniform() < eps) {
      action = static_cast<int>(rng.index(static_cast<std::size_t>(n_actions)));
    } else {
      action = argmax(res.q_network.predict(obs));
    }
    StepResult step = env->step(action);
    ++res.action_counts[static_cast<std::size_t>(action)];
    ++res.steps;
    res.sim_time_s += step.elapsed_s;
    reward_sum += step.reward;
    ++reward_n;
    for (double q : env->drain_cycle_metrics()) {
      q_sum += q;
      ++q_n;
    }
    replay.add(obs, action, step.reward, step.observation);
    obs = std::move(step.observation);

    if (replay.size() >= static_cast<std::size_t>(cfg.batch_size)) {
      std::fill(grads.begin(), grads.end(), 0.0);
      const double inv_b = 1.0 / cfg.batch_size;
      double loss = 0.0;
      for (int b = 0; b < cfg.batch_size; ++b) {
        const std::size_t i = rng.index(replay.size());
        const auto next_q = target.predict(replay.next_obs(i));
        const double y = replay.reward(i) +
                         cfg.gamma * *std::max_element(next_q.begin(), next_q.end());
        const auto q = res.q_network.forward(replay.obs(i), tape);
        const double err = q[replay.action(i)] - y;
        const double abs_err = std::abs(err);
        if (abs_err <= cfg.huber_delta) {
          loss += 0.5 * err * err * inv_b;
        } else {
          loss += cfg.huber_delta * (abs_err - 0.5 * cfg.huber_delta) * inv_b;
        }
        std::fill(upstream.begin(), upstream.end(), 0.0);
        upstream[replay.action(i)] =
            std::clamp(err, -cfg.huber_delta, cfg.huber_delta) * inv_b;
        res.q_network.backward(tape, upstream, grads);
      }
      if (!std::isfinite(loss)) {
        throw TrainingError("DQN loss became non-finite at step " +
                            std::to_string(res.steps));
      }
      std::span<double> group(grads);
      clip_grad_norm(std::span<std::span<double>>(&group, 1), cfg.max_grad_norm);
      adam_step(res.q_network.params(), grads, moments, adam);
      loss_sum += loss;
      ++loss_n;
      ++res.updates;
    }
    if (res.steps % cfg.target_sync_steps == 0) target = res.q_network;

    if (res.steps % cfg.log_interval_steps == 0 ||
        res.sim_time_s >= cfg.total_timesteps) {
      DqnLogRow row;
      row.step = res.steps;
      row.sim_time_s = res.sim_time_s;
      row.epsilon = eps;
      row.mean_reward = mean_or_nan(reward_sum, reward_n);
      row.mean_loss = mean_or_nan(loss_sum, loss_n);
      row.mean_q_cycle = mean_or_nan(q_sum, q_n);
      res.log.push_back(row);
      reward_sum = loss_sum = q_sum = 0.0;
      reward_n = loss_n = q_n = 0;
    }
  }
  return res;
}

void write_dqn_log_csv(std::ostream& out, std::span<const DqnLogRow> rows) {
  const auto old = out.precision(17);
  out << "step,sim_time_s,epsilon,mean_reward,mean_loss,mean_Q_cycle\n";
  for (const auto& r : rows) {
    out << r.step << ',' << r.sim_time_s << ',' << r.epsilon << ','
        << r.mean_reward << ',' << r.mean_loss << ',' << r.mean_q_cycle << '\n';
  }
  out.precision(old);
}

}  // namespace tsc
