#include "tsc/state_repr.hpp"

#include <algorithm>

#include "tsc/errors.hpp"
#include "tsc/sim.hpp"

namespace tsc {

namespace {
constexpr int kLaneFeatureCount = 5;
constexpr double kWaitScale = 1000.0;
}  // namespace

ExpandedNormalization ExpandedNormalization::for_plan(const PhasePlan& plan,
                                                      double cycle_count_norm,
                                                      double queue_max) {
  ExpandedNormalization n;
  n.queue_max = queue_max;
  n.green_max = plan.g_max;
  n.cycle_max = plan.max_cycle_length();
  n.cycle_count_norm = cycle_count_norm;
  return n;
}

std::array<double, 8> baseline_state(const Simulation& sim) {
  const auto q = approach_queues(sim);
  double total = 0.0;
  for (int v : q) total += v;
  return {static_cast<double>(sim.programmed_cycle_length()),
          static_cast<double>(sim.programmed_green(0)),
          static_cast<double>(sim.programmed_green(1)),
          static_cast<double>(sim.programmed_green(2)),
          static_cast<double>(sim.programmed_green(3)),
          static_cast<double>(sim.current_phase() + 1),
          static_cast<double>(sim.time_remaining_in_phase()),
          total};
}

ExpandedState19 expanded_state(const Simulation& sim,
                               const ApproachArray<int>& prev_queues,
                               const ExpandedNormalization& norm) {
  using S = ExpandedState19;
  ExpandedState19 s;
  s[S::kCycleTime] = std::clamp(sim.cycle_elapsed() / norm.cycle_max, 0.0, 1.0);
  s[S::kPhase + sim.current_phase()] = 1.0;
  s[S::kPhaseTime] =
      std::clamp(sim.phase_elapsed() / norm.green_max, 0.0, 1.0);
  s[S::kCycles] =
      std::clamp(sim.cycles_completed() / norm.cycle_count_norm, 0.0, 1.0);
  const auto q = approach_queues(sim);
  for (int j = 0; j < kNumApproaches; ++j) {
    s[S::kQueue + j] = std::clamp(q[j] / norm.queue_max, 0.0, 1.0);
    s[S::kQueueChange + j] = std::clamp(
        (q[j] - prev_queues[j]) / norm.queue_max, -1.0, 1.0);
  }
  for (int p = 0; p < kNumPhases; ++p) {
    s[S::kGreen + p] =
        std::clamp(sim.programmed_green(p) / norm.green_max, 0.0, 1.0);
  }
  return s;
}

std::vector<double> lane_feature_state(const Simulation& sim) {
  const auto obs = lane_observables(sim);
  const double cap = sim.layout().lane_storage_capacity;
  const double speed_scale = cap * sim.layout().free_flow_speed;
  std::vector<double> out;
  out.reserve(kNumLanes * kLaneFeatureCount);
  for (int lane = 0; lane < kNumLanes; ++lane) {
    const bool served =
        !sim.in_yellow() && phase_serves(sim.current_phase(), lane);
    out.push_back(served ? 1.0 : 0.0);
    out.push_back(obs[lane].approaching_count / cap);
    out.push_back(obs[lane].total_wait_s / kWaitScale);
    out.push_back(obs[lane].queue_length / cap);
    out.push_back(obs[lane].sum_speeds_mps / speed_scale);
  }
  return out;
}

std::vector<double> encode(const Mlp& encoder, const ExpandedState19& s) {
  if (encoder.input_size() != ExpandedState19::kSize) {
    throw ContractViolation("encoder expects " +
                            std::to_string(encoder.input_size()) +
                            " inputs, state has 19");
  }
  return encoder.predict(s.span());
}

Representation Representation::baseline() {
  Representation r;
  r.kind_ = ReprKind::kBaseline;
  return r;
}

Representation Representation::expanded(ExpandedNormalization norm) {
  Representation r;
  r.kind_ = ReprKind::kExpanded;
  r.norm_ = norm;
  return r;
}

Representation Representation::latent(Mlp encoder, ExpandedNormalization norm) {
  if (encoder.input_size() != ExpandedState19::kSize) {
    throw ContractViolation("latent encoder must take 19 inputs");
  }
  Representation r;
  r.kind_ = ReprKind::kLatent;
  r.norm_ = norm;
  r.encoder_ = std::move(encoder);
  return r;
}

Representation Representation::kplanes(KPlanesParams params,
                                       ExpandedNormalization norm) {
  Representation r;
  r.kind_ = ReprKind::kKPlanes;
  r.norm_ = norm;
  r.kplanes_ = std::move(params);
  return r;
}

Representation Representation::lane_features() {
  Representation r;
  r.kind_ = ReprKind::kLaneFeatures;
  return r;
}

std::pair<ReprKind, int> Representation::parse(const std::string& name) {
  if (name == "baseline") return {ReprKind::kBaseline, 0};
  if (name == "expanded") return {ReprKind::kExpanded, 0};
  if (name == "kplanes") return {ReprKind::kKPlanes, 0};
  if (name == "lanes") return {ReprKind::kLaneFeatures, 0};
  if (name.starts_with("ae") && name.size() > 2) {
    const std::string digits = name.substr(2);
    if (std::all_of(digits.begin(), digits.end(),
                    [](char c) { return c >= '0' && c <= '9'; })) {
      const int k = std::stoi(digits);
      if (k > 0) return {ReprKind::kLatent, k};
    }
  }
  throw ConfigError("unknown representation '" + name + "'");
}

std::string Representation::name() const {
  switch (kind_) {
    case ReprKind::kBaseline:
      return "baseline";
    case ReprKind::kExpanded:
      return "expanded";
    case ReprKind::kLatent:
      return "ae" + std::to_string(encoder_->output_size());
    case ReprKind::kKPlanes:
      return "kplanes";
    case ReprKind::kLaneFeatures:
      return "lanes";
  }
  return "?";
}

int Representation::size() const {
  switch (kind_) {
    case ReprKind::kBaseline:
      return 8;
    case ReprKind::kExpanded:
      return ExpandedState19::kSize;
    case ReprKind::kLatent:
      return encoder_->output_size();
    case ReprKind::kKPlanes:
      return kplanes_->output_size();
    case ReprKind::kLaneFeatures:
      return kNumLanes * kLaneFeatureCount;
  }
  return 0;
}

std::vector<double> Representation::observe(
    const Simulation& sim, const ApproachArray<int>& prev_queues) const {
  switch (kind_) {
    case ReprKind::kBaseline: {
      const auto b = baseline_state(sim);
      return {b.begin(), b.end()};
    }
    case ReprKind::kExpanded: {
      const auto s = expanded_state(sim, prev_queues, norm_);
      return {s.values.begin(), s.values.end()};
    }
    case ReprKind::kLatent:
      return encode(*encoder_, expanded_state(sim, prev_queues, norm_));
    case ReprKind::kKPlanes:
      return kplanes_transform(*kplanes_, expanded_state(sim, prev_queues, norm_));
    case ReprKind::kLaneFeatures:
      return lane_feature_state(sim);
  }
  return {};
}

}  // namespace tsc
