#ifndef TSC_POLICY_BUNDLE_HPP_
#define TSC_POLICY_BUNDLE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "tsc/neural.hpp"
#include "tsc/rewards.hpp"
#include "tsc/state_repr.hpp"
#include "tsc/weights_io.hpp"

namespace tsc {

// A trained controller: its observation scheme, the network that maps
// observations to action scores (PPO logits or DQN Q-values), and an
// optional critic.
struct PolicyBundle {
  std::string algorithm = "ppo";  // "ppo" | "dqn"
  Representation repr = Representation::expanded();
  RewardKind reward = RewardKind::kQueue;
  Mlp policy;
  std::optional<Mlp> value;
  std::uint64_t seed = 0;

  // Greedy action.
  int act(std::span<const double> observation) const;

  // Header tag records algo, repr, reward and normalizers; K-Planes grids
  // are regenerated from their seed, latent encoders travel as tensors.
  WeightFile to_weights() const;
  // Throws IoError on a malformed or foreign file.
  static PolicyBundle from_weights(const WeightFile& file);
};

void save_bundle(const std::filesystem::path& path, const PolicyBundle& b);
// Throws IoError when the file is missing or malformed.
PolicyBundle load_bundle(const std::filesystem::path& path);

}  // namespace tsc

#endif  // TSC_POLICY_BUNDLE_HPP_
