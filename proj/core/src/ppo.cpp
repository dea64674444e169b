#include "tsc/ppo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "tsc/config.hpp"
#include "tsc/errors.hpp"

namespace tsc {

namespace {
constexpr double kDivergenceThreshold = 10.0;

bool same_double(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}
}  // namespace

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in (0,1)");
  if (!(clip_range > 0.0 && clip_range < 1.0)) {
    throw ConfigError("clip_range must be in (0,1)");
  }
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    throw ConfigError("gae_lambda must be in [0,1]");
  }
  if (n_steps < 1 || batch_size < 1 || n_epochs < 0) {
    throw ConfigError("n_steps, batch_size must be >= 1 and n_epochs >= 0");
  }
  if (batch_size > n_steps) throw ConfigError("batch_size must be <= n_steps");
  if (learning_rate < 0.0) throw ConfigError("learning_rate must be >= 0");
  if (total_timesteps < 0) throw ConfigError("total_timesteps must be >= 0");
  if (hidden_units < 1 || hidden_layers < 0) {
    throw ConfigError("invalid hidden layer configuration");
  }
}

PpoConfig ppo_from_config(const KeyValueConfig& cfg, PpoConfig base) {
  base.learning_rate = cfg.get_double("ppo.learning_rate", base.learning_rate);
  base.n_steps = static_cast<int>(cfg.get_int("ppo.n_steps", base.n_steps));
  base.batch_size = static_cast<int>(cfg.get_int("ppo.batch_size", base.batch_size));
  base.n_epochs = static_cast<int>(cfg.get_int("ppo.n_epochs", base.n_epochs));
  base.gamma = cfg.get_double("ppo.gamma", base.gamma);
  base.gae_lambda = cfg.get_double("ppo.gae_lambda", base.gae_lambda);
  base.clip_range = cfg.get_double("ppo.clip_range", base.clip_range);
  base.total_timesteps = cfg.get_int("ppo.total_timesteps", base.total_timesteps);
  base.value_coef = cfg.get_double("ppo.value_coef", base.value_coef);
  base.entropy_coef = cfg.get_double("ppo.entropy_coef", base.entropy_coef);
  base.max_grad_norm = cfg.get_double("ppo.max_grad_norm", base.max_grad_norm);
  base.hidden_units = static_cast<int>(cfg.get_int("ppo.hidden_units", base.hidden_units));
  base.hidden_layers = static_cast<int>(cfg.get_int("ppo.hidden_layers", base.hidden_layers));
  base.validate();
  return base;
}

GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values, double next_value,
                      double gamma, double lambda,
                      std::span<const std::uint8_t> dones) {
  const std::size_t n = rewards.size();
  if (values.size() != n || (!dones.empty() && dones.size() != n)) {
    throw ContractViolation("compute_gae: sequences must have equal length");
  }
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const bool terminal = !dones.empty() && dones[k] != 0;
    const double v_next = k + 1 < n ? values[k + 1] : next_value;
    const double nonterminal = terminal ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * v_next * nonterminal - values[k];
    running = delta + gamma * lambda * nonterminal * running;
    out.advantages[k] = running;
    out.returns[k] = running + values[k];
  }
  return out;
}

void normalize_advantages(std::vector<double>& advantages) {
  if (advantages.empty()) return;
  const double n = static_cast<double>(advantages.size());
  const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  const double std = std::sqrt(var / n);
  for (double& a : advantages) a = (a - mean) / (std + 1e-8);
}

double clipped_objective(double ratio, double advantage, double clip) {
  const double unclipped = ratio * advantage;
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip) * advantage;
  return std::min(unclipped, clipped);
}

void RolloutBuffer::clear() {
  observations.clear();
  actions.clear();
  log_probs.clear();
  rewards.clear();
  values.clear();
  dones.clear();
  advantages.clear();
  returns.clear();
}

SurrogateResult ppo_surrogate(const RolloutBuffer& buffer,
                              std::span<const std::size_t> batch,
                              const Mlp& policy, const Mlp& value, double clip,
                              double value_coef, double entropy_coef) {
  SurrogateResult res;
  res.policy_grads.assign(policy.num_params(), 0.0);
  res.value_grads.assign(value.num_params(), 0.0);
  if (batch.empty()) return res;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  GradientTape ptape;
  GradientTape vtape;
  int clipped_count = 0;
  for (std::size_t idx : batch) {
    const auto& obs = buffer.observations[idx];
    const int a = buffer.actions[idx];
    const double adv = buffer.advantages[idx];

    const auto logits = policy.forward(obs, ptape);
    const auto logp = log_softmax(logits);
    const auto p = softmax(logits);
    const double ratio = std::exp(logp[a] - buffer.log_probs[idx]);
    if (std::isnan(ratio)) {
      throw TrainingError("NaN probability ratio at buffer row " +
                          std::to_string(idx));
    }
    const double unclipped = ratio * adv;
    const double clipped =
        std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv;
    const double objective = std::min(unclipped, clipped);
    const double dobj_dlogp = unclipped <= clipped ? ratio * adv : 0.0;
    if (std::abs(ratio - 1.0) > clip) ++clipped_count;

    double entropy = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) entropy -= p[k] * logp[k];

    std::vector<double> upstream(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double onehot = static_cast<int>(k) == a ? 1.0 : 0.0;
      upstream[k] = -dobj_dlogp * inv_b * (onehot - p[k]) +
                    entropy_coef * inv_b * p[k] * (logp[k] + entropy);
    }
    policy.backward(ptape, upstream, res.policy_grads);

    const double v = value.forward(obs, vtape)[0];
    const double err = v - buffer.returns[idx];
    const double dv = value_coef * 2.0 * err * inv_b;
    value.backward(vtape, std::span<const double>(&dv, 1), res.value_grads);

    res.policy_loss -= objective * inv_b;
    res.value_loss += err * err * inv_b;
    res.entropy += entropy * inv_b;
    res.mean_abs_ratio_dev += std::abs(ratio - 1.0) * inv_b;
  }
  res.clip_fraction = clipped_count * inv_b;
  res.loss = res.policy_loss + value_coef * res.value_loss -
             entropy_coef * res.entropy;
  return res;
}

bool PpoLogRow::operator==(const PpoLogRow& o) const {
  return rollout_idx == o.rollout_idx && sim_time_s == o.sim_time_s &&
         same_double(mean_reward, o.mean_reward) &&
         same_double(mean_q_cycle, o.mean_q_cycle) &&
         same_double(policy_entropy, o.policy_entropy) &&
         same_double(value_loss, o.value_loss);
}

Mlp make_policy_net(int obs_size, int num_actions, const PpoConfig& cfg,
                    std::uint64_t seed) {
  std::vector<int> sizes{obs_size};
  for (int i = 0; i < cfg.hidden_layers; ++i) sizes.push_back(cfg.hidden_units);
  sizes.push_back(num_actions);
  return Mlp(sizes, Activation::kTanh, seed, 1.0, 0.01);
}

Mlp make_value_net(int obs_size, const PpoConfig& cfg, std::uint64_t seed) {
  std::vector<int> sizes{obs_size};
  for (int i = 0; i < cfg.hidden_layers; ++i) sizes.push_back(cfg.hidden_units);
  sizes.push_back(1);
  return Mlp(sizes, Activation::kTanh, seed, 1.0, 1.0);
}

PpoResult train_ppo(const EnvFactory& make_env, const PpoConfig& cfg,
                    std::uint64_t seed, const PpoProgress& progress) {
  cfg.validate();
  auto env = make_env(derive_seed(seed, 0));
  if (!env) throw TrainingError("environment factory returned null");
  const int obs_size = env->observation_size();

  PpoResult result;
  result.policy =
      make_policy_net(obs_size, env->num_actions(), cfg, derive_seed(seed, 1));
  result.value = make_value_net(obs_size, cfg, derive_seed(seed, 2));
  Rng rng(derive_seed(seed, 3));
  AdamMoments policy_moments(result.policy.num_params());
  AdamMoments value_moments(result.value.num_params());
  const AdamConfig adam{cfg.learning_rate, 0.9, 0.999, 1e-8};

  if (cfg.total_timesteps <= 0) return result;

  std::vector<double> obs = env->reset();
  RolloutBuffer buffer;
  std::vector<std::size_t> indices(cfg.n_steps);
  int rollout = 0;
  while (result.sim_time_s < cfg.total_timesteps) {
    buffer.clear();
    std::vector<double> cycle_q;
    for (int t = 0; t < cfg.n_steps; ++t) {
      const auto logits = result.policy.predict(obs);
      const auto sample = softmax_sample(logits, rng);
      const double v = result.value.predict(obs)[0];
      StepResult step = env->step(sample.action);
      buffer.observations.push_back(std::move(obs));
      buffer.actions.push_back(sample.action);
      buffer.log_probs.push_back(sample.log_prob);
      buffer.rewards.push_back(step.reward);
      buffer.values.push_back(v);
      buffer.dones.push_back(step.done ? 1 : 0);
      result.sim_time_s += step.elapsed_s;
      ++result.decisions;
      for (double q : env->drain_cycle_metrics()) cycle_q.push_back(q);
      obs = step.done ? env->reset() : std::move(step.observation);
    }
    const double next_value = result.value.predict(obs)[0];
    auto gae = compute_gae(buffer.rewards, buffer.values, next_value,
                           cfg.gamma, cfg.gae_lambda, buffer.dones);
    buffer.advantages = std::move(gae.advantages);
    buffer.returns = std::move(gae.returns);
    normalize_advantages(buffer.advantages);

    double epoch_entropy = 0.0;
    double epoch_value_loss = 0.0;
    for (int epoch = 0; epoch < cfg.n_epochs; ++epoch) {
      std::iota(indices.begin(), indices.end(), std::size_t{0});
      rng.shuffle(indices);
      epoch_entropy = 0.0;
      epoch_value_loss = 0.0;
      double ratio_dev = 0.0;
      int batches = 0;
      for (std::size_t start = 0; start < indices.size();
           start += static_cast<std::size_t>(cfg.batch_size)) {
        const std::size_t end =
            std::min(indices.size(), start + static_cast<std::size_t>(cfg.batch_size));
        const std::span<const std::size_t> batch(indices.data() + start, end - start);
        auto s = ppo_surrogate(buffer, batch, result.policy, result.value,
                               cfg.clip_range, cfg.value_coef, cfg.entropy_coef);
        std::array<std::span<double>, 2> groups{std::span<double>(s.policy_grads),
                                                std::span<double>(s.value_grads)};
        clip_grad_norm(groups, cfg.max_grad_norm);
        adam_step(result.policy.params(), s.policy_grads, policy_moments, adam);
        adam_step(result.value.params(), s.value_grads, value_moments, adam);
        epoch_entropy += s.entropy;
        epoch_value_loss += s.value_loss;
        ratio_dev += s.mean_abs_ratio_dev;
        ++batches;
      }
      epoch_entropy /= batches;
      epoch_value_loss /= batches;
      if (ratio_dev / batches > kDivergenceThreshold) {
        throw TrainingError("PPO diverged: mean |ratio - 1| = " +
                            std::to_string(ratio_dev / batches) + " at rollout " +
                            std::to_string(rollout));
      }
    }

    PpoLogRow row;
    row.rollout_idx = rollout++;
    row.sim_time_s = result.sim_time_s;
    row.mean_reward =
        std::accumulate(buffer.rewards.begin(), buffer.rewards.end(), 0.0) /
        static_cast<double>(buffer.size());
    row.mean_q_cycle =
        cycle_q.empty() ? std::numeric_limits<double>::quiet_NaN()
                        : std::accumulate(cycle_q.begin(), cycle_q.end(), 0.0) /
                              static_cast<double>(cycle_q.size());
    row.policy_entropy = epoch_entropy;
    row.value_loss = epoch_value_loss;
    result.log.push_back(row);
    if (progress && !progress(row)) break;
  }
  return result;
}

void write_training_log_csv(std::ostream& out, std::span<const PpoLogRow> rows) {
  out << "rollout_idx,sim_time_s,mean_reward,mean_Q_cycle,policy_entropy,"
         "value_loss\n";
  const auto old = out.precision(17);
  for (const auto& r : rows) {
    out << r.rollout_idx << ',' << r.sim_time_s << ',' << r.mean_reward << ','
        << r.mean_q_cycle << ',' << r.policy_entropy << ',' << r.value_loss
        << '\n';
  }
  out.precision(old);
}

}  // namespace tsc
