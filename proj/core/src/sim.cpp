#include "tsc/sim.hpp"

#include <algorithm>
#include <ostream>

#include "tsc/errors.hpp"

namespace tsc {

const char* event_name(EventKind kind) {
  switch (kind) {
    case EventKind::kArrive:
      return "arrive";
    case EventKind::kQueue:
      return "queue";
    case EventKind::kDischarge:
      return "discharge";
  }
  return "?";
}

Simulation::Simulation(IntersectionLayout layout, PhasePlan plan,
                       FlowProfile flows, std::uint64_t seed)
    : layout_(layout), plan_(plan), flows_(std::move(flows)), rng_(seed) {
  layout_.validate();
  plan_.validate();
  flows_.validate();
  programmed_green_ = plan_.default_green;
  pulses_ = flows_.pulses;
  std::stable_sort(pulses_.begin(), pulses_.end(),
                   [](const ArrivalPulse& a, const ArrivalPulse& b) {
                     return a.tick < b.tick;
                   });
  last_report_.queues.fill(0);
}

void Simulation::log(int tick, int lane, EventKind kind, std::int64_t id) {
  if (log_events_) events_.push_back({tick, lane, kind, id});
}

void Simulation::admit(int lane, int count, TickReport& report) {
  for (int i = 0; i < count; ++i) {
    Vehicle v;
    v.id = next_vehicle_id_++;
    v.lane = lane;
    v.entry_time = clock_;
    v.stopline_eta = clock_ + layout_.travel_time_to_stopline;
    lanes_[lane].in_transit.push_back(v);
    ++lanes_[lane].arrivals;
    ++report.arrivals[lane];
    log(clock_, lane, EventKind::kArrive, v.id);
  }
}

void Simulation::discharge(Lane& lane, Vehicle v, int tick,
                           TickReport& report) {
  v.status = VehicleStatus::kDischarged;
  v.discharge_time = tick;
  lane.credit -= 1.0;
  ++lane.discharges;
  ++report.discharges[v.lane];
  log(tick, v.lane, EventKind::kDischarge, v.id);
}

TickReport Simulation::step() {
  const int t = clock_;
  TickReport report;
  report.tick = t;
  report.phase = phase_;
  report.in_yellow = in_yellow_;

  for (int lane = 0; lane < kNumLanes; ++lane) {
    const double mean = flows_.rate(lane, t) / 3600.0;
    admit(lane, rng_.poisson(mean), report);
  }
  while (!pulses_.empty() && pulses_.front().tick <= t) {
    if (pulses_.front().tick == t) {
      admit(pulses_.front().lane, pulses_.front().count, report);
    }
    pulses_.erase(pulses_.begin());
  }

  const double rate = 1.0 / layout_.saturation_headway;
  const double cap = std::max(1.0, rate);
  for (int index = 0; index < kNumLanes; ++index) {
    Lane& lane = lanes_[index];
    const bool open = !all_red_ && !in_yellow_ &&
                      phase_serves(phase_, index) &&
                      phase_elapsed_ >= layout_.startup_lost_time;
    lane.credit = open ? std::min(lane.credit + rate, cap) : 0.0;

    while (!lane.in_transit.empty() && lane.in_transit.front().stopline_eta <= t) {
      Vehicle v = lane.in_transit.front();
      lane.in_transit.pop_front();
      if (open && lane.queue.empty() && lane.credit >= 1.0) {
        discharge(lane, v, t, report);
      } else {
        v.status = VehicleStatus::kQueued;
        v.queue_join_time = t;
        log(t, index, EventKind::kQueue, v.id);
        lane.queue.push_back(v);
      }
    }

    while (open && lane.credit >= 1.0 && !lane.queue.empty()) {
      Vehicle v = lane.queue.front();
      lane.queue.pop_front();
      discharge(lane, v, t, report);
    }
  }

  advance_phase_machine(report);
  clock_ = t + 1;
  for (int lane = 0; lane < kNumLanes; ++lane) {
    report.queues[lane] = static_cast<int>(lanes_[lane].queue.size());
  }
  last_report_ = report;
  return report;
}

void Simulation::advance_phase_machine(TickReport& report) {
  if (in_yellow_) {
    if (++yellow_elapsed_ >= plan_.yellow) {
      phase_ = (phase_ + 1) % kNumPhases;
      phase_elapsed_ = 0;
      yellow_elapsed_ = 0;
      in_yellow_ = false;
      report.phase_started = true;
      if (phase_ == 0) {
        ++cycles_completed_;
        cycle_start_ = report.tick + 1;
        programmed_green_ = plan_.default_green;
        report.cycle_completed = true;
      }
    }
  } else if (++phase_elapsed_ >= programmed_green_[phase_]) {
    in_yellow_ = true;
    yellow_elapsed_ = 0;
  }
}

bool Simulation::at_decision_point() const {
  return !in_yellow_ && phase_elapsed_ >= plan_.g_min &&
         (phase_elapsed_ - plan_.g_min) % plan_.delta_time == 0 &&
         last_action_clock_ != clock_;
}

ActionOutcome Simulation::apply_action(int action) {
  if (action < 0 || action >= kNumActions) {
    throw DomainError("action must be 0, 1 or 2, got " +
                      std::to_string(action));
  }
  if (!at_decision_point()) {
    throw ContractViolation(
        "apply_action outside a decision point (clock " +
        std::to_string(clock_) + ", phase_elapsed " +
        std::to_string(phase_elapsed_) + ")");
  }
  last_action_clock_ = clock_;
  ActionOutcome out;
  out.action = action;
  int& green = programmed_green_[phase_];
  switch (action) {
    case 0:
      green = phase_elapsed_;
      in_yellow_ = true;
      yellow_elapsed_ = 0;
      break;
    case 1:
      break;
    case 2:
      if (green + plan_.delta_time > plan_.g_max) {
        out.clamped = true;
        green = plan_.g_max;
      } else {
        green += plan_.delta_time;
      }
      break;
  }
  out.programmed_green = green;
  return out;
}

void Simulation::install_greens(const PhaseArray<int>& greens) {
  PhasePlan next = plan_;
  next.default_green = greens;
  next.validate();
  plan_ = next;
  for (int p = 0; p < kNumPhases; ++p) {
    const bool not_started =
        p > phase_ || (p == phase_ && !in_yellow_ && phase_elapsed_ == 0);
    if (not_started) programmed_green_[p] = greens[p];
  }
}

void Simulation::seed_queue(int lane, int count) {
  for (int i = 0; i < count; ++i) {
    Vehicle v;
    v.id = next_vehicle_id_++;
    v.lane = lane;
    v.entry_time = clock_;
    v.stopline_eta = clock_;
    v.status = VehicleStatus::kQueued;
    v.queue_join_time = clock_;
    ++lanes_[lane].arrivals;
    log(clock_, lane, EventKind::kArrive, v.id);
    log(clock_, lane, EventKind::kQueue, v.id);
    lanes_[lane].queue.push_back(v);
  }
  last_report_.queues[lane] = static_cast<int>(lanes_[lane].queue.size());
}

int Simulation::programmed_cycle_length() const {
  int total = kNumPhases * plan_.yellow;
  for (int g : programmed_green_) total += g;
  return total;
}

int Simulation::time_remaining_in_phase() const {
  if (in_yellow_) return plan_.yellow - yellow_elapsed_;
  return programmed_green_[phase_] - phase_elapsed_;
}

int Simulation::queue_length(int lane) const {
  return static_cast<int>(lanes_[lane].queue.size());
}

int Simulation::buffered(int lane) const {
  return std::max(0, queue_length(lane) - layout_.lane_storage_capacity);
}

int Simulation::approaching_count(int lane) const {
  return static_cast<int>(lanes_[lane].in_transit.size());
}

std::int64_t Simulation::cumulative_arrivals(int lane) const {
  return lanes_[lane].arrivals;
}

std::int64_t Simulation::cumulative_discharges(int lane) const {
  return lanes_[lane].discharges;
}

const std::deque<Vehicle>& Simulation::queued_vehicles(int lane) const {
  return lanes_[lane].queue;
}

const std::deque<Vehicle>& Simulation::approaching_vehicles(int lane) const {
  return lanes_[lane].in_transit;
}

LaneArray<int> Simulation::queue_lengths() const {
  LaneArray<int> q{};
  for (int lane = 0; lane < kNumLanes; ++lane) q[lane] = queue_length(lane);
  return q;
}

ApproachArray<int> approach_queues(const Simulation& sim) {
  ApproachArray<int> q{};
  for (int j = 0; j < kNumApproaches; ++j) {
    q[j] = std::max(sim.queue_length(2 * j), sim.queue_length(2 * j + 1));
  }
  return q;
}

LaneArray<LaneObservables> lane_observables(const Simulation& sim) {
  LaneArray<LaneObservables> out{};
  const auto& report = sim.last_report();
  for (int lane = 0; lane < kNumLanes; ++lane) {
    auto& o = out[lane];
    o.approaching_count = sim.approaching_count(lane);
    o.queue_length = sim.queue_length(lane);
    o.sum_speeds_mps = o.approaching_count * sim.layout().free_flow_speed;
    for (const auto& v : sim.queued_vehicles(lane)) {
      o.total_wait_s += sim.clock() - v.queue_join_time.value_or(sim.clock());
    }
    o.inflow_tick = report.arrivals[lane];
    o.outflow_tick = report.discharges[lane];
  }
  return out;
}

void write_events_csv(std::ostream& out, const std::vector<Event>& events) {
  out << "tick,lane,event,vehicle_id\n";
  for (const auto& e : events) {
    out << e.tick << ',' << lane_name(e.lane) << ',' << event_name(e.kind)
        << ',' << e.vehicle_id << '\n';
  }
}

}  // namespace tsc
