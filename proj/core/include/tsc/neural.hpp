#ifndef TSC_NEURAL_HPP_
#define TSC_NEURAL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tsc/random.hpp"

namespace tsc {

enum class Activation { kLinear = 0, kTanh = 1, kRelu = 2 };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// Cached intermediates of one forward pass.
struct GradientTape {
  std::vector<std::vector<double>> inputs;  // input of each layer
  std::vector<std::vector<double>> outputs; // post-activation output
  bool valid = false;
};

// Fully connected network: affine layers, one activation shared by every
// hidden layer, linear output.
//
// Parameters live in one contiguous vector; layer l stores its weight
// matrix (out x in, row-major) followed by its bias.
class Mlp {
 public:
  Mlp() = default;
  // Glorot-uniform weights scaled by `gain` (and `output_gain` on the last
  // layer), zero biases.
  Mlp(std::vector<int> sizes, Activation hidden, std::uint64_t seed,
      double gain = 1.0, double output_gain = 1.0);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  const std::vector<int>& sizes() const { return sizes_; }
  Activation hidden_activation() const { return hidden_; }
  std::size_t num_params() const { return params_.size(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::span<double> weights(int layer);
  std::span<double> bias(int layer);
  std::span<const double> weights(int layer) const;
  std::span<const double> bias(int layer) const;
  std::size_t weight_offset(int layer) const { return offsets_[layer]; }

  // Throws ContractViolation on an input of the wrong size.
  std::vector<double> forward(std::span<const double> x,
                              GradientTape& tape) const;
  std::vector<double> predict(std::span<const double> x) const;

  // Reverse pass for the loss sum(output * upstream). Adds parameter
  // gradients into `grads` (size num_params()) and returns dLoss/dInput.
  // Throws ContractViolation if the tape holds no forward pass.
  std::vector<double> backward(const GradientTape& tape,
                               std::span<const double> upstream,
                               std::span<double> grads) const;

  bool operator==(const Mlp&) const = default;

 private:
  std::vector<int> sizes_;
  Activation hidden_ = Activation::kTanh;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;
};

struct CategoricalSample {
  int action = 0;
  double log_prob = 0.0;
  std::vector<double> probs;
};

// Max-subtracted softmax. Throws DomainError on NaN logits.
std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);
CategoricalSample softmax_sample(std::span<const double> logits, Rng& rng);
int argmax(std::span<const double> values);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamMoments {
  std::vector<double> m;
  std::vector<double> v;
  long long t = 0;

  explicit AdamMoments(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update; increments moments.t first.
void adam_step(std::span<double> params, std::span<const double> grads,
               AdamMoments& moments, const AdamConfig& cfg);

double l2_norm(std::span<const double> values);
// Scales grads in place so their joint norm is at most max_norm; returns
// the norm before clipping.
double clip_grad_norm(std::span<std::span<double>> groups, double max_norm);

}  // namespace tsc

#endif  // TSC_NEURAL_HPP_
