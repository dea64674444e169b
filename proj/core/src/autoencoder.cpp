#include "tsc/autoencoder.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>

#include "tsc/config.hpp"
#include "tsc/errors.hpp"
#include "tsc/sim.hpp"

namespace tsc {

std::vector<ExpandedState19> collect_state_buffer(const StateBufferConfig& cfg,
                                                  std::uint64_t seed) {
  if (cfg.num_states < 0 || cfg.segment_s <= 0 ||
      cfg.min_flow_scale < 0.0 || cfg.max_flow_scale < cfg.min_flow_scale) {
    throw ConfigError("invalid state buffer configuration");
  }
  Rng rng(derive_seed(seed, 0));
  std::vector<ExpandedState19> out;
  out.reserve(static_cast<std::size_t>(cfg.num_states));
  for (std::uint64_t segment = 1; static_cast<int>(out.size()) < cfg.num_states;
       ++segment) {
    PhasePlan plan = cfg.plan;
    for (int& g : plan.default_green) {
      g = plan.g_min + static_cast<int>(rng.index(
                           static_cast<std::uint64_t>(plan.g_max - plan.g_min + 1)));
    }
    const double scale = rng.uniform(cfg.min_flow_scale, cfg.max_flow_scale);
    Simulation sim(cfg.layout, plan, cfg.flows.scaled(scale),
                   derive_seed(seed, segment));
    ApproachArray<int> prev{};
    for (int t = 0; t < cfg.segment_s && static_cast<int>(out.size()) < cfg.num_states;
         ++t) {
      sim.step();
      if (sim.at_decision_point()) {
        out.push_back(expanded_state(sim, prev, cfg.norm));
        prev = approach_queues(sim);
        sim.apply_action(1);
      }
    }
  }
  return out;
}

void AutoencoderConfig::validate() const {
  if (latent <= 0) throw ConfigError("latent width must be positive");
  if (hidden <= 0 || epochs < 0 || batch_size <= 0 || learning_rate < 0.0) {
    throw ConfigError("invalid autoencoder configuration");
  }
  if (latent != 4 && latent != 8 && latent != 16 && latent != 19 && latent != 32) {
    std::cerr << "warning: latent width " << latent
              << " is outside the studied set {4, 8, 16, 19, 32}\n";
  }
}

AutoencoderConfig autoencoder_from_config(const KeyValueConfig& cfg,
                                          AutoencoderConfig base) {
  base.latent = static_cast<int>(cfg.get_int("ae.latent", base.latent));
  base.hidden = static_cast<int>(cfg.get_int("ae.hidden", base.hidden));
  base.epochs = static_cast<int>(cfg.get_int("ae.epochs", base.epochs));
  base.learning_rate = cfg.get_double("ae.learning_rate", base.learning_rate);
  base.batch_size = static_cast<int>(cfg.get_int("ae.batch_size", base.batch_size));
  return base;
}

double reconstruction_mse(const Mlp& encoder, const Mlp& decoder,
                          std::span<const ExpandedState19> states) {
  if (states.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : states) {
    const auto rec = decoder.predict(encoder.predict(s.span()));
    for (int i = 0; i < ExpandedState19::kSize; ++i) {
      const double d = rec[i] - s[i];
      total += d * d;
    }
  }
  return total / static_cast<double>(states.size());
}

AutoencoderResult train_autoencoder(std::span<const ExpandedState19> states,
                                    const AutoencoderConfig& cfg,
                                    std::uint64_t seed) {
  cfg.validate();
  if (states.empty()) throw ContractViolation("autoencoder buffer is empty");
  constexpr int kIn = ExpandedState19::kSize;
  AutoencoderResult res;
  res.encoder = Mlp({kIn, cfg.hidden, cfg.latent}, Activation::kRelu,
                    derive_seed(seed, 1));
  res.decoder = Mlp({cfg.latent, cfg.hidden, kIn}, Activation::kRelu,
                    derive_seed(seed, 2));
  res.initial_mse = reconstruction_mse(res.encoder, res.decoder, states);
  res.final_mse = res.initial_mse;

  Rng rng(derive_seed(seed, 3));
  const AdamConfig adam{cfg.learning_rate};
  AdamMoments enc_m(res.encoder.num_params());
  AdamMoments dec_m(res.decoder.num_params());
  std::vector<double> enc_g(res.encoder.num_params());
  std::vector<double> dec_g(res.decoder.num_params());
  std::vector<std::size_t> order(states.size());
  std::iota(order.begin(), order.end(), 0);
  GradientTape enc_tape;
  GradientTape dec_tape;
  std::vector<double> upstream(kIn);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const double inv_b = 1.0 / static_cast<double>(end - start);
      std::fill(enc_g.begin(), enc_g.end(), 0.0);
      std::fill(dec_g.begin(), dec_g.end(), 0.0);
      for (std::size_t i = start; i < end; ++i) {
        const auto& s = states[order[i]];
        const auto z = res.encoder.forward(s.span(), enc_tape);
        const auto rec = res.decoder.forward(z, dec_tape);
        for (int k = 0; k < kIn; ++k) upstream[k] = 2.0 * (rec[k] - s[k]) * inv_b;
        const auto dz = res.decoder.backward(dec_tape, upstream, dec_g);
        res.encoder.backward(enc_tape, dz, enc_g);
      }
      adam_step(res.encoder.params(), enc_g, enc_m, adam);
      adam_step(res.decoder.params(), dec_g, dec_m, adam);
    }
    res.epoch_mse.push_back(reconstruction_mse(res.encoder, res.decoder, states));
  }
  if (!res.epoch_mse.empty()) res.final_mse = res.epoch_mse.back();
  return res;
}

WeightFile autoencoder_to_weights(const AutoencoderResult& ae,
                                  std::uint64_t seed) {
  WeightFile file;
  file.kind = WeightKind::kAutoencoder;
  file.seed = seed;
  file.tag = "latent=" + std::to_string(ae.encoder.output_size()) +
             ";final_mse=" + std::to_string(ae.final_mse);
  append_mlp(file, "encoder", ae.encoder);
  append_mlp(file, "decoder", ae.decoder);
  return file;
}

Mlp load_encoder(const std::filesystem::path& path) {
  const WeightFile file = load_weights(path);
  if (file.kind != WeightKind::kAutoencoder) {
    throw IoError(path.string() + " does not hold an autoencoder");
  }
  return extract_mlp(file, "encoder");
}

}  // namespace tsc
