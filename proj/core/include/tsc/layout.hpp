#ifndef TSC_LAYOUT_HPP_
#define TSC_LAYOUT_HPP_

#include <array>
#include <string>
#include <string_view>

namespace tsc {

class KeyValueConfig;

inline constexpr int kNumApproaches = 4;
inline constexpr int kLanesPerApproach = 2;
inline constexpr int kNumLanes = kNumApproaches * kLanesPerApproach;
inline constexpr int kNumPhases = 4;
inline constexpr int kNumActions = 3;

template <typename T>
using LaneArray = std::array<T, kNumLanes>;
template <typename T>
using ApproachArray = std::array<T, kNumApproaches>;
template <typename T>
using PhaseArray = std::array<T, kNumPhases>;

enum class Approach { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };

// Lane index = 2 * approach + k, where k = 0 is the through+left lane and
// k = 1 the right-turn lane. Lanes are named N0, N1, E0, E1, S0, S1, W0, W1.
constexpr int lane_index(Approach a, int k) {
  return 2 * static_cast<int>(a) + k;
}
constexpr int lane_approach(int lane) { return lane / kLanesPerApproach; }
std::string lane_name(int lane);
// Returns -1 for an unknown name.
int lane_from_name(std::string_view name);

// Phase order: 0 = NS through+left, 1 = NS right, 2 = EW through+left,
// 3 = EW right.
constexpr bool phase_serves(int phase, int lane) {
  const int approach = lane_approach(lane);
  const int movement = lane % kLanesPerApproach;
  const bool ns_phase = phase < 2;
  const bool ns_lane = approach == 0 || approach == 2;
  return ns_phase == ns_lane && movement == phase % 2;
}
std::string_view phase_name(int phase);

struct IntersectionLayout {
  int lane_storage_capacity = 25;     // vehicles
  int travel_time_to_stopline = 15;   // s
  double saturation_headway = 2.0;    // s per vehicle
  int startup_lost_time = 2;          // s
  double free_flow_speed = 11.11;     // m/s, speed of approaching vehicles

  // Throws ConfigError.
  void validate() const;
  double saturation_flow_vph() const { return 3600.0 / saturation_headway; }
};

// Dilemma-zone inputs for the minimum yellow interval.
struct DilemmaZone {
  double reaction_time = 1.0;         // t_f, s
  double intersection_width = 12.4;   // W, m
  double vehicle_length = 10.2;       // L, m
  double approach_speed = 11.11;      // u0, m/s
  double deceleration = 3.53;         // a, m/s^2
};

// Minimum yellow time t_f + (W + L) / u0 + u0 / (2a). Throws DomainError
// unless u0 > 0 and a > 0.
double yellow_time(double reaction_time, double intersection_width,
                   double vehicle_length, double approach_speed,
                   double deceleration);
double yellow_time(const DilemmaZone& dz);

struct PhasePlan {
  PhaseArray<int> default_green{20, 20, 20, 20};  // reset value each cycle
  int yellow = 5;
  int g_min = 10;
  int g_max = 40;
  int delta_time = 5;

  // Throws ConfigError.
  void validate() const;
  // Cycle length with the default greens.
  int cycle_length() const;
  // Longest admissible cycle, g_max * N_p + N_p * Z.
  int max_cycle_length() const { return kNumPhases * (g_max + yellow); }
  int min_cycle_length() const { return kNumPhases * (g_min + yellow); }
};

// Plan whose yellow is ceil of the dilemma-zone minimum.
PhasePlan plan_with_yellow(PhasePlan plan, const DilemmaZone& dz);

IntersectionLayout layout_from_config(const KeyValueConfig& cfg,
                                      IntersectionLayout base = {});
PhasePlan plan_from_config(const KeyValueConfig& cfg, PhasePlan base = {});

}  // namespace tsc

#endif  // TSC_LAYOUT_HPP_
