#ifndef TSC_METRICS_HPP_
#define TSC_METRICS_HPP_

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsc/layout.hpp"

namespace tsc {

class Simulation;
struct TickReport;

struct CycleRecord {
  int cycle_index = 0;
  ApproachArray<int> approach_max{};  // max over the cycle, max over lanes
  int q_cycle = 0;                    // sum of approach_max
  int cycle_length_s = 0;
  PhaseArray<int> green_s{};          // realized green per phase
  PhaseArray<int> phase_max_queue{};  // max over the cycle of served lanes
  std::string regime;

  bool operator==(const CycleRecord&) const = default;
};

// Queue part of a CycleRecord from per-tick lane queues covering one cycle.
// Throws ContractViolation on an empty log.
CycleRecord cycle_queue_metric(std::span<const LaneArray<int>> tick_queues);

// Accumulates per-tick queues and closes a CycleRecord on every cycle wrap.
// The partial cycle at the end of a run is never reported.
class CycleTracker {
 public:
  void on_tick(const Simulation& sim, const TickReport& report);

  const std::vector<CycleRecord>& records() const { return records_; }
  // Records completed since the last call.
  std::vector<CycleRecord> take_new();
  // Raw per-tick queue log of every completed cycle, aligned with records().
  const std::vector<std::vector<LaneArray<int>>>& tick_logs() const {
    return logs_;
  }
  void keep_tick_logs(bool keep) { keep_logs_ = keep; }

 private:
  std::vector<LaneArray<int>> current_;
  PhaseArray<int> greens_{};
  int cycle_start_ = 0;
  std::vector<CycleRecord> records_;
  std::vector<std::vector<LaneArray<int>>> logs_;
  std::size_t taken_ = 0;
  bool keep_logs_ = false;
};

// Pearson correlation; nullopt when either series has zero variance or
// fewer than two points.
std::optional<double> pearson(std::span<const double> x,
                              std::span<const double> y);

struct CorrelationReport {
  PhaseArray<std::optional<double>> phase_queue_vs_green{};
  std::optional<double> cycle_length_vs_q_cycle;
};

// Per-phase correlation of max queue against allocated green, plus cycle
// length against Q_cycle. Throws ContractViolation with fewer than 10
// records.
CorrelationReport correlation_report(std::span<const CycleRecord> records);

void write_cycles_csv(std::ostream& out, std::span<const CycleRecord> records);
std::vector<CycleRecord> read_cycles_csv(std::istream& in);

double mean_q_cycle(std::span<const CycleRecord> records);

}  // namespace tsc

#endif  // TSC_METRICS_HPP_
