#ifndef TSC_AUTOENCODER_HPP_
#define TSC_AUTOENCODER_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tsc/flow.hpp"
#include "tsc/layout.hpp"
#include "tsc/neural.hpp"
#include "tsc/state_repr.hpp"
#include "tsc/weights_io.hpp"

namespace tsc {

class KeyValueConfig;

struct StateBufferConfig {
  int num_states = 10000;
  int segment_s = 1800;         // flows and greens are redrawn per segment
  double min_flow_scale = 0.2;
  double max_flow_scale = 1.4;
  IntersectionLayout layout;
  PhasePlan plan;
  FlowProfile flows = FlowProfile::synthetic();
  ExpandedNormalization norm;
};

// Expanded states seen at decision points of fixed-time runs whose default
// greens (uniform integers in [g_min, g_max]) and flow scale are redrawn
// every segment.
std::vector<ExpandedState19> collect_state_buffer(const StateBufferConfig& cfg,
                                                  std::uint64_t seed);

struct AutoencoderConfig {
  int latent = 16;
  int hidden = 32;
  int epochs = 30;
  double learning_rate = 1e-3;
  int batch_size = 64;

  // Throws ConfigError for latent <= 0; widths outside {4, 8, 16, 19, 32}
  // only warn.
  void validate() const;
};

AutoencoderConfig autoencoder_from_config(const KeyValueConfig& cfg,
                                          AutoencoderConfig base = {});

struct AutoencoderResult {
  Mlp encoder;  // 19 -> hidden -> latent, relu
  Mlp decoder;  // latent -> hidden -> 19, relu
  double initial_mse = 0.0;
  double final_mse = 0.0;
  std::vector<double> epoch_mse;  // after each epoch
};

// Mean over states of the squared reconstruction error norm.
double reconstruction_mse(const Mlp& encoder, const Mlp& decoder,
                          std::span<const ExpandedState19> states);

// Minibatch Adam on the reconstruction loss. Throws ContractViolation on an
// empty buffer.
AutoencoderResult train_autoencoder(std::span<const ExpandedState19> states,
                                    const AutoencoderConfig& cfg,
                                    std::uint64_t seed);

WeightFile autoencoder_to_weights(const AutoencoderResult& ae,
                                  std::uint64_t seed);
// Encoder of an autoencoder file. Throws IoError.
Mlp load_encoder(const std::filesystem::path& path);

}  // namespace tsc

#endif  // TSC_AUTOENCODER_HPP_
