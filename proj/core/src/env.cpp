#include "tsc/env.hpp"

namespace tsc {

TrafficEnv::TrafficEnv(TrafficEnvConfig cfg, Representation repr,
                       std::uint64_t seed)
    : cfg_(std::move(cfg)), repr_(std::move(repr)), seed_(seed) {
  cfg_.reward.validate();
}

TrafficEnv::Snapshot TrafficEnv::snapshot() const {
  Snapshot s;
  s.queues = approach_queues(*sim_);
  const auto obs = lane_observables(*sim_);
  for (const auto& o : obs) {
    s.total_wait += o.total_wait_s;
    s.sum_speeds += o.sum_speeds_mps;
    s.vehicles += o.approaching_count + o.queue_length;
  }
  s.mean_wait = s.total_wait / kNumLanes;
  return s;
}

int TrafficEnv::advance(LaneArray<int>& inflow, LaneArray<int>& outflow) {
  int elapsed = 0;
  do {
    const TickReport r = sim_->step();
    tracker_.on_tick(*sim_, r);
    for (int l = 0; l < kNumLanes; ++l) {
      inflow[l] += r.arrivals[l];
      outflow[l] += r.discharges[l];
    }
    ++elapsed;
  } while (!sim_->at_decision_point());
  return elapsed;
}

std::vector<double> TrafficEnv::reset() {
  sim_ = std::make_unique<Simulation>(cfg_.layout, cfg_.plan, cfg_.flows, seed_);
  tracker_ = CycleTracker{};
  LaneArray<int> in{};
  LaneArray<int> out{};
  advance(in, out);
  prev_ = snapshot();
  return repr_.observe(*sim_, ApproachArray<int>{});
}

StepResult TrafficEnv::step(int action) {
  sim_->apply_action(action);
  Transition t;
  const int elapsed = advance(t.inflow, t.outflow);
  const Snapshot now = snapshot();
  t.queues_prev = prev_.queues;
  t.queues_now = now.queues;
  t.mean_wait_prev = prev_.mean_wait;
  t.mean_wait_now = now.mean_wait;
  t.total_wait_now = now.total_wait;
  t.sum_speeds_now = now.sum_speeds;
  t.vehicles_now = now.vehicles;

  StepResult res;
  res.observation = repr_.observe(*sim_, prev_.queues);
  res.reward = score(cfg_.reward, t);
  res.elapsed_s = elapsed;
  last_ = t;
  prev_ = now;
  return res;
}

std::vector<double> TrafficEnv::drain_cycle_metrics() {
  std::vector<double> out;
  for (const auto& r : tracker_.take_new()) out.push_back(r.q_cycle);
  return out;
}

EnvFactory traffic_env_factory(TrafficEnvConfig cfg, Representation repr) {
  return [cfg = std::move(cfg), repr = std::move(repr)](std::uint64_t seed) {
    return std::make_unique<TrafficEnv>(cfg, repr, seed);
  };
}

}  // namespace tsc
