#ifndef TSC_ENV_HPP_
#define TSC_ENV_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "tsc/flow.hpp"
#include "tsc/layout.hpp"
#include "tsc/metrics.hpp"
#include "tsc/rewards.hpp"
#include "tsc/sim.hpp"
#include "tsc/state_repr.hpp"

namespace tsc {

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  int elapsed_s = 0;  // simulated seconds consumed by the step
};

// Decision-level environment with a discrete action space.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::vector<double> reset() = 0;
  virtual StepResult step(int action) = 0;
  virtual int observation_size() const = 0;
  virtual int num_actions() const { return kNumActions; }
  // Q_cycle of every cycle completed since the last call.
  virtual std::vector<double> drain_cycle_metrics() { return {}; }
};

using EnvFactory = std::function<std::unique_ptr<Environment>(std::uint64_t)>;

struct TrafficEnvConfig {
  IntersectionLayout layout;
  PhasePlan plan;
  FlowProfile flows = FlowProfile::synthetic();
  RewardSpec reward;
};

// The intersection seen at decision points. reset() runs the simulation to
// the first decision point; step() applies the action and runs to the next
// one. Continuing task: done is always false.
class TrafficEnv : public Environment {
 public:
  TrafficEnv(TrafficEnvConfig cfg, Representation repr, std::uint64_t seed);

  std::vector<double> reset() override;
  StepResult step(int action) override;
  int observation_size() const override { return repr_.size(); }
  std::vector<double> drain_cycle_metrics() override;

  const Simulation& sim() const { return *sim_; }
  const CycleTracker& tracker() const { return tracker_; }
  const Transition& last_transition() const { return last_; }

 private:
  struct Snapshot {
    ApproachArray<int> queues{};
    double mean_wait = 0.0;
    double total_wait = 0.0;
    double sum_speeds = 0.0;
    int vehicles = 0;
  };
  Snapshot snapshot() const;
  // Steps ticks until a decision point; returns seconds simulated.
  int advance(LaneArray<int>& inflow, LaneArray<int>& outflow);

  TrafficEnvConfig cfg_;
  Representation repr_;
  std::uint64_t seed_;
  std::unique_ptr<Simulation> sim_;
  CycleTracker tracker_;
  Snapshot prev_;
  Transition last_;
};

EnvFactory traffic_env_factory(TrafficEnvConfig cfg, Representation repr);

}  // namespace tsc

#endif  // TSC_ENV_HPP_
