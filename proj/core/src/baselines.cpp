#include "tsc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "tsc/errors.hpp"

namespace tsc {

WebsterTiming webster_timings(const WebsterInput& input, int g_min, int g_max,
                              int yellow) {
  if (!(input.lost_time > 0.0)) throw DomainError("lost time must be positive");
  double sum_y = 0.0;
  for (double y : input.flow_ratios) {
    if (!(y >= 0.0)) throw DomainError("flow ratios must be non-negative");
    sum_y += y;
  }
  WebsterTiming t;
  const double lo = kNumPhases * (g_min + yellow);
  const double hi = kNumPhases * (g_max + yellow);
  if (sum_y >= 1.0) {
    t.saturated = true;
    t.optimum_cycle = hi;
    t.cycle = hi;
    t.greens.fill(g_max);
    return t;
  }
  t.optimum_cycle = (1.5 * input.lost_time + 5.0) / (1.0 - sum_y);
  t.cycle = std::clamp(t.optimum_cycle, lo, hi);
  const double effective = t.optimum_cycle - input.lost_time;
  for (int p = 0; p < kNumPhases; ++p) {
    const double share = sum_y > 0.0 ? input.flow_ratios[p] / sum_y * effective : 0.0;
    t.greens[p] = std::clamp(share, static_cast<double>(g_min),
                             static_cast<double>(g_max));
  }
  return t;
}

double webster_lost_time(const IntersectionLayout& layout, const PhasePlan& plan) {
  return kNumPhases * (layout.startup_lost_time + plan.yellow - 2.0);
}

DynamicWebsterController::DynamicWebsterController(IntersectionLayout layout,
                                                   PhasePlan plan,
                                                   FlowProfile default_flows,
                                                   int recompute_interval,
                                                   int flow_window)
    : layout_(layout),
      plan_(plan),
      default_flows_(std::move(default_flows)),
      interval_(recompute_interval),
      window_(flow_window) {
  if (interval_ <= 0 || window_ <= 0) {
    throw ConfigError("Webster intervals must be positive");
  }
}

LaneArray<double> DynamicWebsterController::estimated_flows() const {
  LaneArray<double> q{};
  if (history_.empty()) {
    for (int l = 0; l < kNumLanes; ++l) q[l] = default_flows_.rate(l, 0.0);
    return q;
  }
  const double seconds = static_cast<double>(history_.size());
  for (int l = 0; l < kNumLanes; ++l) q[l] = window_sum_[l] * 3600.0 / seconds;
  return q;
}

WebsterInput DynamicWebsterController::input_from_flows(
    const LaneArray<double>& flows_vph) const {
  WebsterInput in;
  in.lost_time = webster_lost_time(layout_, plan_);
  const double s = layout_.saturation_flow_vph();
  for (int p = 0; p < kNumPhases; ++p) {
    double y = 0.0;
    for (int l = 0; l < kNumLanes; ++l) {
      if (phase_serves(p, l)) y = std::max(y, flows_vph[l] / s);
    }
    in.flow_ratios[p] = y;
  }
  return in;
}

void DynamicWebsterController::observe_tick(Simulation& sim,
                                            const TickReport& report) {
  history_.push_back(report.arrivals);
  for (int l = 0; l < kNumLanes; ++l) window_sum_[l] += report.arrivals[l];
  if (static_cast<int>(history_.size()) > window_) {
    for (int l = 0; l < kNumLanes; ++l) window_sum_[l] -= history_.front()[l];
    history_.pop_front();
  }
  if (sim.clock() % interval_ != 0) return;

  const WebsterInput in = input_from_flows(estimated_flows());
  const WebsterTiming t = webster_timings(in, plan_.g_min, plan_.g_max, plan_.yellow);
  WebsterLogRow row;
  row.clock = sim.clock();
  row.flow_ratios = in.flow_ratios;
  row.optimum_cycle = t.optimum_cycle;
  row.saturated = t.saturated;
  for (int p = 0; p < kNumPhases; ++p) {
    row.greens[p] = std::clamp(static_cast<int>(std::lround(t.greens[p])),
                               plan_.g_min, plan_.g_max);
  }
  sim.install_greens(row.greens);
  log_.push_back(row);
}

void write_webster_log_csv(std::ostream& out, std::span<const WebsterLogRow> rows) {
  out << "clock,Y1,Y2,Y3,Y4,C_o,g1,g2,g3,g4,saturated\n";
  for (const auto& r : rows) {
    out << r.clock;
    for (double y : r.flow_ratios) out << ',' << y;
    out << ',' << r.optimum_cycle;
    for (int g : r.greens) out << ',' << g;
    out << ',' << (r.saturated ? 1 : 0) << '\n';
  }
}

}  // namespace tsc
