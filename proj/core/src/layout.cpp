#include "tsc/layout.hpp"

#include <cmath>

#include "tsc/config.hpp"
#include "tsc/errors.hpp"

namespace tsc {

namespace {
constexpr std::array<char, kNumApproaches> kApproachLetters{'N', 'E', 'S', 'W'};
}  // namespace

std::string lane_name(int lane) {
  return std::string(1, kApproachLetters.at(lane_approach(lane))) +
         std::to_string(lane % kLanesPerApproach);
}

int lane_from_name(std::string_view name) {
  for (int lane = 0; lane < kNumLanes; ++lane) {
    if (lane_name(lane) == name) return lane;
  }
  return -1;
}

std::string_view phase_name(int phase) {
  static constexpr std::array<std::string_view, kNumPhases> kNames{
      "NS-through-left", "NS-right", "EW-through-left", "EW-right"};
  return kNames.at(phase);
}

void IntersectionLayout::validate() const {
  if (lane_storage_capacity < 1) {
    throw ConfigError("lane_storage_capacity must be >= 1");
  }
  if (!(saturation_headway > 0.0)) {
    throw ConfigError("saturation_headway must be > 0");
  }
  if (travel_time_to_stopline < 0) {
    throw ConfigError("travel_time_to_stopline must be >= 0");
  }
  if (startup_lost_time < 0) {
    throw ConfigError("startup_lost_time must be >= 0");
  }
  if (!(free_flow_speed > 0.0)) {
    throw ConfigError("free_flow_speed must be > 0");
  }
}

double yellow_time(double reaction_time, double intersection_width,
                   double vehicle_length, double approach_speed,
                   double deceleration) {
  if (!(approach_speed > 0.0)) {
    throw DomainError("yellow_time: approach speed must be positive");
  }
  if (!(deceleration > 0.0)) {
    throw DomainError("yellow_time: deceleration must be positive");
  }
  return reaction_time +
         (intersection_width + vehicle_length) / approach_speed +
         approach_speed / (2.0 * deceleration);
}

double yellow_time(const DilemmaZone& dz) {
  return yellow_time(dz.reaction_time, dz.intersection_width,
                     dz.vehicle_length, dz.approach_speed, dz.deceleration);
}

void PhasePlan::validate() const {
  if (g_min < 1) throw ConfigError("g_min must be >= 1");
  if (g_min > g_max) throw ConfigError("g_min must not exceed g_max");
  if (yellow < 1) throw ConfigError("yellow must be >= 1 s");
  if (delta_time < 1) throw ConfigError("delta_time must be >= 1 s");
  for (int g : default_green) {
    if (g < g_min || g > g_max) {
      throw ConfigError("default green " + std::to_string(g) +
                        " outside [g_min, g_max]");
    }
  }
}

int PhasePlan::cycle_length() const {
  int total = kNumPhases * yellow;
  for (int g : default_green) total += g;
  return total;
}

PhasePlan plan_with_yellow(PhasePlan plan, const DilemmaZone& dz) {
  plan.yellow = static_cast<int>(std::ceil(yellow_time(dz)));
  return plan;
}

IntersectionLayout layout_from_config(const KeyValueConfig& cfg,
                                      IntersectionLayout base) {
  base.lane_storage_capacity = static_cast<int>(
      cfg.get_int("layout.lane_storage_capacity", base.lane_storage_capacity));
  base.travel_time_to_stopline = static_cast<int>(cfg.get_int(
      "layout.travel_time_to_stopline", base.travel_time_to_stopline));
  base.saturation_headway =
      cfg.get_double("layout.saturation_headway", base.saturation_headway);
  base.startup_lost_time = static_cast<int>(
      cfg.get_int("layout.startup_lost_time", base.startup_lost_time));
  base.free_flow_speed =
      cfg.get_double("layout.free_flow_speed", base.free_flow_speed);
  base.validate();
  return base;
}

PhasePlan plan_from_config(const KeyValueConfig& cfg, PhasePlan base) {
  if (const auto greens = cfg.get_int_list("plan.green", {}); !greens.empty()) {
    if (greens.size() != kNumPhases) {
      throw ConfigError("plan.green needs exactly 4 values");
    }
    for (int i = 0; i < kNumPhases; ++i) {
      base.default_green[i] = static_cast<int>(greens[i]);
    }
  }
  base.yellow = static_cast<int>(cfg.get_int("plan.yellow", base.yellow));
  base.g_min = static_cast<int>(cfg.get_int("plan.g_min", base.g_min));
  base.g_max = static_cast<int>(cfg.get_int("plan.g_max", base.g_max));
  base.delta_time =
      static_cast<int>(cfg.get_int("plan.delta_time", base.delta_time));
  base.validate();
  return base;
}

}  // namespace tsc
