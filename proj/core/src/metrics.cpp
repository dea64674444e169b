#include "tsc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "tsc/config.hpp"
#include "tsc/errors.hpp"
#include "tsc/sim.hpp"

namespace tsc {

CycleRecord cycle_queue_metric(std::span<const LaneArray<int>> tick_queues) {
  if (tick_queues.empty()) {
    throw ContractViolation("cycle_queue_metric needs at least one tick");
  }
  LaneArray<int> lane_max{};
  for (const auto& q : tick_queues) {
    for (int l = 0; l < kNumLanes; ++l) lane_max[l] = std::max(lane_max[l], q[l]);
  }
  CycleRecord r;
  for (int j = 0; j < kNumApproaches; ++j) {
    r.approach_max[j] = std::max(lane_max[2 * j], lane_max[2 * j + 1]);
    r.q_cycle += r.approach_max[j];
  }
  for (int p = 0; p < kNumPhases; ++p) {
    for (int l = 0; l < kNumLanes; ++l) {
      if (phase_serves(p, l)) {
        r.phase_max_queue[p] = std::max(r.phase_max_queue[p], lane_max[l]);
      }
    }
  }
  r.cycle_length_s = static_cast<int>(tick_queues.size());
  return r;
}

void CycleTracker::on_tick(const Simulation& sim, const TickReport& report) {
  if (current_.empty()) cycle_start_ = report.tick;
  current_.push_back(report.queues);
  if (!report.in_yellow) ++greens_[report.phase];
  if (report.cycle_completed) {
    CycleRecord r = cycle_queue_metric(current_);
    r.cycle_index = static_cast<int>(records_.size());
    r.green_s = greens_;
    r.regime = sim.flows().regime_at(cycle_start_);
    records_.push_back(std::move(r));
    if (keep_logs_) logs_.push_back(current_);
    current_.clear();
    greens_.fill(0);
  }
}

std::vector<CycleRecord> CycleTracker::take_new() {
  std::vector<CycleRecord> out(records_.begin() + static_cast<long>(taken_),
                               records_.end());
  taken_ = records_.size();
  return out;
}

std::optional<double> pearson(std::span<const double> x,
                              std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return std::nullopt;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

CorrelationReport correlation_report(std::span<const CycleRecord> records) {
  if (records.size() < 10) {
    throw ContractViolation("correlation_report needs at least 10 cycles");
  }
  CorrelationReport rep;
  for (int p = 0; p < kNumPhases; ++p) {
    std::vector<double> q;
    std::vector<double> g;
    for (const auto& r : records) {
      q.push_back(r.phase_max_queue[p]);
      g.push_back(r.green_s[p]);
    }
    rep.phase_queue_vs_green[p] = pearson(q, g);
  }
  std::vector<double> len;
  std::vector<double> qc;
  for (const auto& r : records) {
    len.push_back(r.cycle_length_s);
    qc.push_back(r.q_cycle);
  }
  rep.cycle_length_vs_q_cycle = pearson(len, qc);
  return rep;
}

void write_cycles_csv(std::ostream& out, std::span<const CycleRecord> records) {
  out << "cycle_index,Q_cycle,Q_N,Q_E,Q_S,Q_W,cycle_len_s,g1,g2,g3,g4,"
         "pq1,pq2,pq3,pq4,regime\n";
  for (const auto& r : records) {
    out << r.cycle_index << ',' << r.q_cycle;
    for (int v : r.approach_max) out << ',' << v;
    out << ',' << r.cycle_length_s;
    for (int v : r.green_s) out << ',' << v;
    for (int v : r.phase_max_queue) out << ',' << v;
    out << ',' << r.regime << '\n';
  }
}

std::vector<CycleRecord> read_cycles_csv(std::istream& in) {
  std::vector<CycleRecord> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 16) throw IoError("cycles.csv row has wrong field count");
    CycleRecord r;
    int k = 0;
    r.cycle_index = static_cast<int>(parse_int(f[k++], "cycle_index"));
    r.q_cycle = static_cast<int>(parse_int(f[k++], "Q_cycle"));
    for (int& v : r.approach_max) v = static_cast<int>(parse_int(f[k++], "Q_j"));
    r.cycle_length_s = static_cast<int>(parse_int(f[k++], "cycle_len_s"));
    for (int& v : r.green_s) v = static_cast<int>(parse_int(f[k++], "g"));
    for (int& v : r.phase_max_queue) v = static_cast<int>(parse_int(f[k++], "pq"));
    r.regime = f[k];
    out.push_back(std::move(r));
  }
  return out;
}

double mean_q_cycle(std::span<const CycleRecord> records) {
  if (records.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : records) s += r.q_cycle;
  return s / static_cast<double>(records.size());
}

}  // namespace tsc
