#ifndef TSC_BASELINES_HPP_
#define TSC_BASELINES_HPP_

#include <deque>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tsc/flow.hpp"
#include "tsc/layout.hpp"
#include "tsc/sim.hpp"

namespace tsc {

// Drives a Simulation: sees every tick and answers at decision points.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  virtual void observe_tick(Simulation& sim, const TickReport& report) {
    (void)sim;
    (void)report;
  }
  virtual int decide(const Simulation& sim) = 0;
};

// Never truncates or extends: every phase runs its programmed green.
class FixedTimeController : public Controller {
 public:
  std::string name() const override { return "fixed"; }
  int decide(const Simulation&) override { return 1; }
};

struct WebsterInput {
  double lost_time = 20.0;  // L, s per cycle
  PhaseArray<double> flow_ratios{};  // Y_i = max_j q_ij / S_j
};

struct WebsterTiming {
  double optimum_cycle = 0.0;  // (1.5 L + 5) / (1 - sum Y), unclamped
  double cycle = 0.0;          // optimum_cycle clamped to the plan's range
  PhaseArray<double> greens{};
  bool saturated = false;
};

// Greens split optimum_cycle - L in proportion to Y_i, each clamped to
// [g_min, g_max]. With sum Y >= 1 the plan saturates: every green is g_max.
// Throws DomainError for L <= 0 or negative ratios.
WebsterTiming webster_timings(const WebsterInput& input, int g_min, int g_max,
                              int yellow);

// L = 4 (startup lost time + yellow - 2).
double webster_lost_time(const IntersectionLayout& layout, const PhasePlan& plan);

struct WebsterLogRow {
  int clock = 0;
  PhaseArray<double> flow_ratios{};
  double optimum_cycle = 0.0;
  PhaseArray<int> greens{};
  bool saturated = false;

  bool operator==(const WebsterLogRow&) const = default;
};

// Re-times the plan every recompute_interval seconds from moving-average
// arrival rates over the last flow_window seconds. New greens install at
// the next phase boundary.
class DynamicWebsterController : public Controller {
 public:
  DynamicWebsterController(IntersectionLayout layout, PhasePlan plan,
                           FlowProfile default_flows,
                           int recompute_interval = 145, int flow_window = 900);

  std::string name() const override { return "webster"; }
  void observe_tick(Simulation& sim, const TickReport& report) override;
  int decide(const Simulation&) override { return 1; }

  // Moving-average arrival rate per lane (veh/h); the default profile's
  // rates at t = 0 when nothing has been observed.
  LaneArray<double> estimated_flows() const;
  WebsterInput input_from_flows(const LaneArray<double>& flows_vph) const;
  const std::vector<WebsterLogRow>& log() const { return log_; }

 private:
  IntersectionLayout layout_;
  PhasePlan plan_;
  FlowProfile default_flows_;
  int interval_;
  int window_;
  std::deque<LaneArray<int>> history_;
  LaneArray<long long> window_sum_{};
  std::vector<WebsterLogRow> log_;
};

void write_webster_log_csv(std::ostream& out, std::span<const WebsterLogRow> rows);

}  // namespace tsc

#endif  // TSC_BASELINES_HPP_
