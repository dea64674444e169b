#ifndef TSC_FLOW_HPP_
#define TSC_FLOW_HPP_

#include <string>
#include <vector>

#include "tsc/layout.hpp"

namespace tsc {

class KeyValueConfig;

struct FlowSegment {
  double start_s = 0.0;
  double end_s = 0.0;
  double rate_vph = 0.0;
};

struct RegimeSpan {
  double start_s = 0.0;
  double end_s = 0.0;
  std::string label;
};

// Deterministic batch of arrivals, used for hand-checkable scenarios.
struct ArrivalPulse {
  int lane = 0;
  int tick = 0;
  int count = 0;
};

// Per-lane piecewise-constant arrival rates.
//
// Times not covered by any segment have rate 0. With a positive period the
// schedule repeats: the rate at time t is the rate at fmod(t, period).
class FlowProfile {
 public:
  LaneArray<std::vector<FlowSegment>> segments;
  std::vector<RegimeSpan> regimes;
  std::vector<ArrivalPulse> pulses;
  double period_s = 0.0;

  // Throws ConfigError on negative rates, inverted or overlapping segments.
  void validate() const;

  double rate(int lane, double t) const;
  // Label of the regime span containing t, or "" if none.
  std::string regime_at(double t) const;
  // End of the last segment (one period for cyclic profiles).
  double horizon() const;

  FlowProfile scaled(double factor) const;

  static FlowProfile zero();
  // Constant rate on every lane.
  static FlowProfile uniform(double rate_vph);
  // Default synthetic demand: high, medium, and low regimes of 2400 s each,
  // repeating every 7200 s, with NS through+left the heaviest movement.
  static FlowProfile synthetic();
};

// Reads `flow.<lane> = start end rate; start end rate; ...`,
// `flow.period`, `flow.regimes = start end label; ...` and
// `flow.scale`. Lanes not mentioned keep the base profile's segments.
FlowProfile flow_from_config(const KeyValueConfig& cfg,
                             FlowProfile base = FlowProfile::synthetic());

}  // namespace tsc

#endif  // TSC_FLOW_HPP_
