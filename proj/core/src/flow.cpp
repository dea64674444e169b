#include "tsc/flow.hpp"

#include <algorithm>
#include <cmath>

#include "tsc/config.hpp"
#include "tsc/errors.hpp"

namespace tsc {

namespace {

// High-regime rates (veh/h) per lane, ordered N0 N1 E0 E1 S0 S1 W0 W1.
constexpr LaneArray<double> kHighRates{540, 160, 360, 110, 460, 140, 340, 90};
constexpr double kMediumScale = 0.7;
constexpr double kLowScale = 0.4;
constexpr double kRegimeLength = 2400.0;

double wrap_time(double t, double period) {
  if (period <= 0.0) return t;
  double w = std::fmod(t, period);
  if (w < 0.0) w += period;
  return w;
}

}  // namespace

void FlowProfile::validate() const {
  for (int lane = 0; lane < kNumLanes; ++lane) {
    auto segs = segments[lane];
    std::sort(segs.begin(), segs.end(),
              [](const FlowSegment& a, const FlowSegment& b) {
                return a.start_s < b.start_s;
              });
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const auto& s = segs[i];
      if (!(s.rate_vph >= 0.0) || !std::isfinite(s.rate_vph)) {
        throw ConfigError("negative or non-finite rate on lane " +
                          lane_name(lane));
      }
      if (!(s.end_s > s.start_s)) {
        throw ConfigError("empty or inverted flow segment on lane " +
                          lane_name(lane));
      }
      if (i > 0 && s.start_s < segs[i - 1].end_s) {
        throw ConfigError("overlapping flow segments on lane " +
                          lane_name(lane));
      }
    }
  }
  if (period_s < 0.0) throw ConfigError("flow period must be >= 0");
  for (const auto& p : pulses) {
    if (p.lane < 0 || p.lane >= kNumLanes || p.tick < 0 || p.count < 0) {
      throw ConfigError("invalid arrival pulse");
    }
  }
}

double FlowProfile::rate(int lane, double t) const {
  const double tw = wrap_time(t, period_s);
  for (const auto& s : segments[lane]) {
    if (tw >= s.start_s && tw < s.end_s) return s.rate_vph;
  }
  return 0.0;
}

std::string FlowProfile::regime_at(double t) const {
  const double tw = wrap_time(t, period_s);
  for (const auto& r : regimes) {
    if (tw >= r.start_s && tw < r.end_s) return r.label;
  }
  return {};
}

double FlowProfile::horizon() const {
  if (period_s > 0.0) return period_s;
  double end = 0.0;
  for (const auto& segs : segments) {
    for (const auto& s : segs) end = std::max(end, s.end_s);
  }
  return end;
}

FlowProfile FlowProfile::scaled(double factor) const {
  FlowProfile out = *this;
  for (auto& segs : out.segments) {
    for (auto& s : segs) s.rate_vph *= factor;
  }
  return out;
}

FlowProfile FlowProfile::zero() { return FlowProfile{}; }

FlowProfile FlowProfile::uniform(double rate_vph) {
  FlowProfile p;
  for (auto& segs : p.segments) {
    segs.push_back({0.0, 1e12, rate_vph});
  }
  return p;
}

FlowProfile FlowProfile::synthetic() {
  FlowProfile p;
  const std::array<std::pair<std::string, double>, 3> regimes{
      {{"high", 1.0}, {"medium", kMediumScale}, {"low", kLowScale}}};
  for (std::size_t r = 0; r < regimes.size(); ++r) {
    const double start = kRegimeLength * static_cast<double>(r);
    const double end = start + kRegimeLength;
    p.regimes.push_back({start, end, regimes[r].first});
    for (int lane = 0; lane < kNumLanes; ++lane) {
      p.segments[lane].push_back(
          {start, end, kHighRates[lane] * regimes[r].second});
    }
  }
  p.period_s = kRegimeLength * static_cast<double>(regimes.size());
  return p;
}

FlowProfile flow_from_config(const KeyValueConfig& cfg, FlowProfile base) {
  if (const auto preset = cfg.get("flow.preset")) {
    if (*preset == "synthetic") {
      base = FlowProfile::synthetic();
    } else if (*preset == "zero") {
      base = FlowProfile::zero();
    } else {
      throw ConfigError("unknown flow.preset '" + *preset + "'");
    }
  }
  for (int lane = 0; lane < kNumLanes; ++lane) {
    const auto spec = cfg.get("flow." + lane_name(lane));
    if (!spec) continue;
    base.segments[lane].clear();
    for (const auto& item : split(*spec, ';')) {
      if (item.empty()) continue;
      auto fields = split(item, ' ');
      fields.erase(std::remove(fields.begin(), fields.end(), std::string{}),
                   fields.end());
      if (fields.size() != 3) {
        throw ConfigError("flow segment needs 'start end rate': '" + item +
                          "'");
      }
      base.segments[lane].push_back({parse_double(fields[0], "flow start"),
                                     parse_double(fields[1], "flow end"),
                                     parse_double(fields[2], "flow rate")});
    }
  }
  if (const auto spec = cfg.get("flow.regimes")) {
    base.regimes.clear();
    for (const auto& item : split(*spec, ';')) {
      if (item.empty()) continue;
      auto fields = split(item, ' ');
      fields.erase(std::remove(fields.begin(), fields.end(), std::string{}),
                   fields.end());
      if (fields.size() != 3) {
        throw ConfigError("regime needs 'start end label': '" + item + "'");
      }
      base.regimes.push_back({parse_double(fields[0], "regime start"),
                              parse_double(fields[1], "regime end"),
                              fields[2]});
    }
  }
  base.period_s = cfg.get_double("flow.period", base.period_s);
  if (cfg.has("flow.scale")) base = base.scaled(cfg.get_double("flow.scale", 1));
  base.validate();
  return base;
}

}  // namespace tsc
