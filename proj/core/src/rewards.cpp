#include "tsc/rewards.hpp"

#include <algorithm>
#include <cmath>

#include "tsc/config.hpp"
#include "tsc/errors.hpp"

namespace tsc {

std::string reward_name(RewardKind kind) {
  switch (kind) {
    case RewardKind::kQueue:
      return "queue";
    case RewardKind::kDelay:
      return "delay";
    case RewardKind::kPressure:
      return "pressure";
    case RewardKind::kSpeed:
      return "speed";
    case RewardKind::kRescoWait:
      return "resco";
  }
  return "?";
}

RewardKind reward_from_name(const std::string& name) {
  if (name == "queue") return RewardKind::kQueue;
  if (name == "delay") return RewardKind::kDelay;
  if (name == "pressure") return RewardKind::kPressure;
  if (name == "speed") return RewardKind::kSpeed;
  if (name == "resco") return RewardKind::kRescoWait;
  throw ConfigError("unknown reward '" + name + "'");
}

void RewardSpec::validate() const {
  if (std::abs(alpha_abs + alpha_red - 1.0) > 1e-12) {
    throw ConfigError("alpha_abs + alpha_red must equal 1");
  }
  if (!(queue_norm > 0.0)) throw ConfigError("queue_norm must be > 0");
  if (!(resco_alpha > 0.0)) throw ConfigError("resco alpha must be > 0");
  if (!(r_min < r_max)) throw ConfigError("R_min must be < R_max");
}

RewardSpec reward_from_config(const KeyValueConfig& cfg, RewardSpec base) {
  if (const auto kind = cfg.get("reward.kind")) base.kind = reward_from_name(*kind);
  base.alpha_abs = cfg.get_double("reward.alpha_abs", base.alpha_abs);
  base.alpha_red = cfg.get_double("reward.alpha_red", base.alpha_red);
  base.queue_norm = cfg.get_double("reward.queue_norm", base.queue_norm);
  base.resco_alpha = cfg.get_double("reward.resco_alpha", base.resco_alpha);
  base.r_min = cfg.get_double("reward.r_min", base.r_min);
  base.r_max = cfg.get_double("reward.r_max", base.r_max);
  base.validate();
  return base;
}

double queue_reward(const ApproachArray<int>& q_now,
                    const ApproachArray<int>& q_prev, const RewardSpec& spec) {
  const double denom = kNumApproaches * spec.queue_norm;
  double total = 0.0;
  double reduction = 0.0;
  for (int j = 0; j < kNumApproaches; ++j) {
    total += q_now[j];
    reduction += q_prev[j] - q_now[j];
  }
  return spec.alpha_abs * (-total / denom) + spec.alpha_red * (reduction / denom);
}

double delay_reward(double mean_wait_prev, double mean_wait_now) {
  return mean_wait_prev - mean_wait_now;
}

double pressure_reward(std::span<const int> inflow,
                       std::span<const int> outflow) {
  double pressure = 0.0;
  const std::size_t n = std::min(inflow.size(), outflow.size());
  for (std::size_t i = 0; i < n; ++i) pressure += inflow[i] - outflow[i];
  return -pressure;
}

double speed_reward(double sum_speeds, int vehicle_count) {
  if (vehicle_count <= 0) return 0.0;
  return sum_speeds / vehicle_count;
}

double resco_wait_reward(double total_wait, const RewardSpec& spec) {
  return std::clamp(-total_wait / spec.resco_alpha, spec.r_min, spec.r_max);
}

double score(const RewardSpec& spec, const Transition& t) {
  switch (spec.kind) {
    case RewardKind::kQueue:
      return queue_reward(t.queues_now, t.queues_prev, spec);
    case RewardKind::kDelay:
      return delay_reward(t.mean_wait_prev, t.mean_wait_now);
    case RewardKind::kPressure:
      return pressure_reward(t.inflow, t.outflow);
    case RewardKind::kSpeed:
      return speed_reward(t.sum_speeds_now, t.vehicles_now);
    case RewardKind::kRescoWait:
      return resco_wait_reward(t.total_wait_now, spec);
  }
  return 0.0;
}

}  // namespace tsc
