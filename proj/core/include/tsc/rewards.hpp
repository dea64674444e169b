#ifndef TSC_REWARDS_HPP_
#define TSC_REWARDS_HPP_

#include <span>
#include <string>

#include "tsc/layout.hpp"

namespace tsc {

class KeyValueConfig;

enum class RewardKind { kQueue, kDelay, kPressure, kSpeed, kRescoWait };

std::string reward_name(RewardKind kind);
RewardKind reward_from_name(const std::string& name);

struct RewardSpec {
  RewardKind kind = RewardKind::kQueue;
  double alpha_abs = 0.4;
  double alpha_red = 0.6;
  double queue_norm = 25.0;
  double resco_alpha = 100.0;
  double r_min = -4.0;
  double r_max = 4.0;

  // Throws ConfigError.
  void validate() const;
};

RewardSpec reward_from_config(const KeyValueConfig& cfg, RewardSpec base = {});

// alpha_abs * (-sum Q_t / (N Q_norm)) + alpha_red * (sum(Q_prev - Q_t) / (N Q_norm)).
double queue_reward(const ApproachArray<int>& q_now,
                    const ApproachArray<int>& q_prev, const RewardSpec& spec);

// Change in average accumulated lane delay: W_prev - W_now.
double delay_reward(double mean_wait_prev, double mean_wait_now);

// Negated pressure: -sum(inflow - outflow).
double pressure_reward(std::span<const int> inflow, std::span<const int> outflow);

// Mean vehicle speed; 0 for an empty network.
double speed_reward(double sum_speeds, int vehicle_count);

// clip(-total_wait / alpha, R_min, R_max).
double resco_wait_reward(double total_wait, const RewardSpec& spec);

// Everything a reward needs about one decision interval: snapshots at the
// two decision instants and the lane flows in between.
struct Transition {
  ApproachArray<int> queues_prev{};
  ApproachArray<int> queues_now{};
  double mean_wait_prev = 0.0;
  double mean_wait_now = 0.0;
  double total_wait_now = 0.0;
  LaneArray<int> inflow{};
  LaneArray<int> outflow{};
  double sum_speeds_now = 0.0;
  int vehicles_now = 0;
};

double score(const RewardSpec& spec, const Transition& t);

}  // namespace tsc

#endif  // TSC_REWARDS_HPP_
