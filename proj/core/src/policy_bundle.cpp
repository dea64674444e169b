#include "tsc/policy_bundle.hpp"

#include <sstream>

#include "tsc/config.hpp"
#include "tsc/errors.hpp"

namespace tsc {

namespace {

double tag_double(const std::string& tag, const std::string& key) {
  const std::string v = tag_value(tag, key);
  if (v.empty()) throw IoError("policy bundle tag lacks '" + key + "'");
  return parse_double(v, key);
}

}  // namespace

int PolicyBundle::act(std::span<const double> observation) const {
  return argmax(policy.predict(observation));
}

WeightFile PolicyBundle::to_weights() const {
  WeightFile file;
  file.kind = WeightKind::kPolicyBundle;
  file.seed = seed;
  const auto& n = repr.normalization();
  std::ostringstream tag;
  tag.precision(17);
  tag << "algo=" << algorithm << ";repr=" << repr.name()
      << ";reward=" << reward_name(reward) << ";queue_max=" << n.queue_max
      << ";green_max=" << n.green_max << ";cycle_max=" << n.cycle_max
      << ";cycle_count_norm=" << n.cycle_count_norm;
  if (const auto& kp = repr.kplanes_params()) {
    tag << ";kplanes_seed=" << kp->seed() << ";kplanes_resolution="
        << kp->resolution() << ";kplanes_features=" << kp->feature_dim();
  }
  file.tag = tag.str();
  append_mlp(file, "policy", policy);
  if (value) append_mlp(file, "value", *value);
  if (const auto& enc = repr.encoder()) append_mlp(file, "encoder", *enc);
  return file;
}

PolicyBundle PolicyBundle::from_weights(const WeightFile& file) {
  if (file.kind != WeightKind::kPolicyBundle) {
    throw IoError("weight file does not hold a policy bundle");
  }
  PolicyBundle b;
  b.seed = file.seed;
  b.algorithm = tag_value(file.tag, "algo");
  if (b.algorithm != "ppo" && b.algorithm != "dqn") {
    throw IoError("policy bundle has unknown algorithm '" + b.algorithm + "'");
  }
  try {
    b.reward = reward_from_name(tag_value(file.tag, "reward"));
  } catch (const ConfigError& e) {
    throw IoError(e.what());
  }
  ExpandedNormalization norm;
  norm.queue_max = tag_double(file.tag, "queue_max");
  norm.green_max = tag_double(file.tag, "green_max");
  norm.cycle_max = tag_double(file.tag, "cycle_max");
  norm.cycle_count_norm = tag_double(file.tag, "cycle_count_norm");

  const std::string repr_name = tag_value(file.tag, "repr");
  std::pair<ReprKind, int> parsed;
  try {
    parsed = Representation::parse(repr_name);
  } catch (const ConfigError& e) {
    throw IoError(e.what());
  }
  switch (parsed.first) {
    case ReprKind::kBaseline:
      b.repr = Representation::baseline();
      break;
    case ReprKind::kExpanded:
      b.repr = Representation::expanded(norm);
      break;
    case ReprKind::kLaneFeatures:
      b.repr = Representation::lane_features();
      break;
    case ReprKind::kLatent: {
      Mlp enc = extract_mlp(file, "encoder");
      if (enc.output_size() != parsed.second) {
        throw IoError("encoder width does not match '" + repr_name + "'");
      }
      b.repr = Representation::latent(std::move(enc), norm);
      break;
    }
    case ReprKind::kKPlanes: {
      const auto seed = static_cast<std::uint64_t>(
          std::stoull(tag_value(file.tag, "kplanes_seed")));
      const int res = static_cast<int>(tag_double(file.tag, "kplanes_resolution"));
      const int feat = static_cast<int>(tag_double(file.tag, "kplanes_features"));
      b.repr = Representation::kplanes(KPlanesParams(seed, res, feat), norm);
      break;
    }
  }
  b.policy = extract_mlp(file, "policy");
  if (file.contains("value.activation")) b.value = extract_mlp(file, "value");
  if (b.policy.input_size() != b.repr.size()) {
    throw IoError("policy input size does not match representation");
  }
  return b;
}

void save_bundle(const std::filesystem::path& path, const PolicyBundle& b) {
  save_weights(path, b.to_weights());
}

PolicyBundle load_bundle(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw IoError("weights file not found: " + path.string());
  }
  return PolicyBundle::from_weights(load_weights(path));
}

}  // namespace tsc
