#ifndef TSC_SIM_HPP_
#define TSC_SIM_HPP_

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <vector>

#include "tsc/flow.hpp"
#include "tsc/layout.hpp"
#include "tsc/random.hpp"

namespace tsc {

enum class VehicleStatus { kApproaching, kQueued, kDischarged };

struct Vehicle {
  std::int64_t id = 0;
  int lane = 0;
  int entry_time = 0;
  int stopline_eta = 0;
  VehicleStatus status = VehicleStatus::kApproaching;
  std::optional<int> queue_join_time;
  std::optional<int> discharge_time;
};

enum class EventKind { kArrive, kQueue, kDischarge };
const char* event_name(EventKind kind);

struct Event {
  int tick = 0;
  int lane = 0;
  EventKind kind = EventKind::kArrive;
  std::int64_t vehicle_id = 0;

  bool operator==(const Event&) const = default;
};

// What happened during one simulated second.
struct TickReport {
  int tick = 0;               // clock value at the start of the tick
  int phase = 0;              // phase active during the tick
  bool in_yellow = false;     // signal state during the tick
  LaneArray<int> arrivals{};  // vehicles entering each lane
  LaneArray<int> discharges{};
  LaneArray<int> queues{};    // queue lengths after the tick
  bool phase_started = false;    // a new green began at the end of the tick
  bool cycle_completed = false;  // that new green is phase 0
};

struct ActionOutcome {
  int action = 1;
  bool clamped = false;    // extension limited by g_max
  int programmed_green = 0;
};

struct LaneObservables {
  int approaching_count = 0;
  int queue_length = 0;
  double total_wait_s = 0.0;
  double sum_speeds_mps = 0.0;
  int inflow_tick = 0;
  int outflow_tick = 0;
};

// One 4-phase signalized intersection stepped in 1 s ticks.
//
// Each lane is a point queue: a vehicle enters the lane, travels at free
// flow for travel_time_to_stopline seconds, then joins a vertical FIFO queue
// at the stop line. A tick runs, in order:
//   1. Poisson arrivals (one uniform draw per lane per tick, lanes in index
//      order) plus any scheduled pulses;
//   2. each lane whose movement is green, not yellow, and past the startup
//      lost time is "open": its discharge credit grows by 1/headway (capped
//      at max(1, 1/headway)); closed lanes have their credit reset to 0;
//      vehicles reaching the stop line pass straight through when the lane
//      is open, its queue is empty and a whole credit is available,
//      otherwise they queue;
//   3. open lanes discharge queue heads while a whole credit remains;
//   4. the phase machine advances: green ends when phase_elapsed reaches the
//      programmed green, yellow ends after `yellow` seconds, and wrapping
//      back to phase 0 counts a cycle and resets programmed greens to the
//      plan defaults.
// Arrivals beyond lane_storage_capacity stay in a virtual upstream buffer
// that counts toward queue length.
class Simulation {
 public:
  // Throws ConfigError when layout, plan, or flows are invalid.
  Simulation(IntersectionLayout layout, PhasePlan plan, FlowProfile flows,
             std::uint64_t seed);

  TickReport step();

  // Throws DomainError for an action outside {0, 1, 2} and
  // ContractViolation when not at a decision point.
  ActionOutcome apply_action(int action);

  // Green, past g_min, on a delta_time boundary, and not yet acted on.
  bool at_decision_point() const;

  // New defaults take effect for the next cycle and for every phase whose
  // green has not started yet in this cycle.
  void install_greens(const PhaseArray<int>& greens);

  // Puts `count` vehicles directly at the back of a lane's queue, as if they
  // had joined at the current clock.
  void seed_queue(int lane, int count);

  // Suppresses all discharge (all-red harness for congestion properties).
  void set_all_red(bool all_red) { all_red_ = all_red; }

  void set_event_logging(bool enabled) { log_events_ = enabled; }
  const std::vector<Event>& events() const { return events_; }

  const IntersectionLayout& layout() const { return layout_; }
  const PhasePlan& plan() const { return plan_; }
  const FlowProfile& flows() const { return flows_; }

  int clock() const { return clock_; }
  int current_phase() const { return phase_; }
  int phase_elapsed() const { return phase_elapsed_; }
  bool in_yellow() const { return in_yellow_; }
  int yellow_elapsed() const { return yellow_elapsed_; }
  int cycles_completed() const { return cycles_completed_; }
  int cycle_start() const { return cycle_start_; }
  int cycle_elapsed() const { return clock_ - cycle_start_; }
  int programmed_green(int phase) const { return programmed_green_[phase]; }
  const PhaseArray<int>& programmed_greens() const { return programmed_green_; }
  // Sum of programmed greens plus yellows.
  int programmed_cycle_length() const;
  // Seconds left in the current green (or yellow).
  int time_remaining_in_phase() const;

  int queue_length(int lane) const;
  // Vehicles beyond the lane's storage capacity.
  int buffered(int lane) const;
  int approaching_count(int lane) const;
  std::int64_t cumulative_arrivals(int lane) const;
  std::int64_t cumulative_discharges(int lane) const;
  const std::deque<Vehicle>& queued_vehicles(int lane) const;
  const std::deque<Vehicle>& approaching_vehicles(int lane) const;
  LaneArray<int> queue_lengths() const;
  const TickReport& last_report() const { return last_report_; }

 private:
  struct Lane {
    std::deque<Vehicle> in_transit;
    std::deque<Vehicle> queue;
    double credit = 0.0;
    std::int64_t arrivals = 0;
    std::int64_t discharges = 0;
  };

  void admit(int lane, int count, TickReport& report);
  void discharge(Lane& lane, Vehicle v, int tick, TickReport& report);
  void log(int tick, int lane, EventKind kind, std::int64_t id);
  void advance_phase_machine(TickReport& report);

  IntersectionLayout layout_;
  PhasePlan plan_;
  FlowProfile flows_;
  Rng rng_;
  std::vector<ArrivalPulse> pulses_;  // sorted by tick

  int clock_ = 0;
  int phase_ = 0;
  int phase_elapsed_ = 0;
  bool in_yellow_ = false;
  int yellow_elapsed_ = 0;
  int cycles_completed_ = 0;
  int cycle_start_ = 0;
  int last_action_clock_ = -1;
  PhaseArray<int> programmed_green_{};
  LaneArray<Lane> lanes_;
  std::int64_t next_vehicle_id_ = 0;
  bool all_red_ = false;
  bool log_events_ = false;
  std::vector<Event> events_;
  TickReport last_report_;
};

// Per approach, the larger of its two lane queues.
ApproachArray<int> approach_queues(const Simulation& sim);

// Approaching vehicles move at free-flow speed, queued vehicles at 0.
LaneArray<LaneObservables> lane_observables(const Simulation& sim);

void write_events_csv(std::ostream& out, const std::vector<Event>& events);

}  // namespace tsc

#endif  // TSC_SIM_HPP_
