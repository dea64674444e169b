#ifndef TSC_STATE_REPR_HPP_
#define TSC_STATE_REPR_HPP_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsc/kplanes.hpp"
#include "tsc/layout.hpp"
#include "tsc/neural.hpp"

namespace tsc {

class Simulation;

// Normalized 19-D state: [T_c, P(4), t_p, N_cycles, Q(4), dQ(4), g(4)].
struct ExpandedState19 {
  static constexpr int kSize = 19;
  static constexpr int kCycleTime = 0;
  static constexpr int kPhase = 1;
  static constexpr int kPhaseTime = 5;
  static constexpr int kCycles = 6;
  static constexpr int kQueue = 7;
  static constexpr int kQueueChange = 11;
  static constexpr int kGreen = 15;

  std::array<double, kSize> values{};

  double operator[](int i) const { return values[i]; }
  double& operator[](int i) { return values[i]; }
  std::span<const double> span() const { return values; }
};

struct ExpandedNormalization {
  double queue_max = 25.0;
  double green_max = 40.0;
  double cycle_max = 180.0;          // g_max * N_p + N_p * Z
  double cycle_count_norm = 1000.0;  // expected cycles over a training run

  static ExpandedNormalization for_plan(const PhasePlan& plan,
                                        double cycle_count_norm = 1000.0,
                                        double queue_max = 25.0);
};

// Raw (T_c, g_1..g_4, P, t_p, Q): programmed cycle length, programmed
// greens, 1-based phase index, seconds remaining in the phase, and the sum
// of approach queues.
std::array<double, 8> baseline_state(const Simulation& sim);

// prev_queues are the approach queues at the previous decision point
// (zeros at episode start).
ExpandedState19 expanded_state(const Simulation& sim,
                               const ApproachArray<int>& prev_queues,
                               const ExpandedNormalization& norm);

// Per lane: (served by the active green, approaching count, total wait,
// queue length, sum of speeds), scaled to O(1).
std::vector<double> lane_feature_state(const Simulation& sim);

// Latent code of a trained encoder. Throws ContractViolation when the
// encoder does not take 19 inputs.
std::vector<double> encode(const Mlp& encoder, const ExpandedState19& s);

enum class ReprKind { kBaseline, kExpanded, kLatent, kKPlanes, kLaneFeatures };

// Observation scheme handed to a controller.
class Representation {
 public:
  static Representation baseline();
  static Representation expanded(ExpandedNormalization norm = {});
  static Representation latent(Mlp encoder, ExpandedNormalization norm = {});
  static Representation kplanes(KPlanesParams params,
                                ExpandedNormalization norm = {});
  static Representation lane_features();

  // Parses baseline|expanded|ae4|ae8|ae16|ae19|ae32|kplanes|lanes and
  // returns the latent size for aeK (0 otherwise). Throws ConfigError.
  static std::pair<ReprKind, int> parse(const std::string& name);

  ReprKind kind() const { return kind_; }
  std::string name() const;
  int size() const;
  const ExpandedNormalization& normalization() const { return norm_; }
  const std::optional<Mlp>& encoder() const { return encoder_; }
  const std::optional<KPlanesParams>& kplanes_params() const { return kplanes_; }

  std::vector<double> observe(const Simulation& sim,
                              const ApproachArray<int>& prev_queues) const;

 private:
  ReprKind kind_ = ReprKind::kExpanded;
  ExpandedNormalization norm_;
  std::optional<Mlp> encoder_;
  std::optional<KPlanesParams> kplanes_;
};

}  // namespace tsc

#endif  // TSC_STATE_REPR_HPP_
