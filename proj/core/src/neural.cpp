#include "tsc/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tsc/errors.hpp"

namespace tsc {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kLinear:
      return "linear";
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
  }
  return "?";
}

Activation activation_from_name(const std::string& name) {
  if (name == "linear") return Activation::kLinear;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw ConfigError("unknown activation '" + name + "'");
}

Mlp::Mlp(std::vector<int> sizes, Activation hidden, std::uint64_t seed,
         double gain, double output_gain)
    : sizes_(std::move(sizes)), hidden_(hidden) {
  if (sizes_.size() < 2) throw ConfigError("Mlp needs at least two layer sizes");
  for (int s : sizes_) {
    if (s < 1) throw ConfigError("Mlp layer sizes must be positive");
  }
  std::size_t total = 0;
  for (int l = 0; l + 1 < static_cast<int>(sizes_.size()); ++l) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1] + sizes_[l + 1];
  }
  params_.assign(total, 0.0);
  Rng rng(seed);
  for (int l = 0; l < num_layers(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double g = (l + 1 == num_layers()) ? output_gain : gain;
    const double bound = g * std::sqrt(6.0 / (in + out));
    for (double& w : weights(l)) w = rng.uniform(-bound, bound);
  }
}

std::span<double> Mlp::weights(int layer) {
  return {params_.data() + offsets_[layer],
          static_cast<std::size_t>(sizes_[layer]) * sizes_[layer + 1]};
}

std::span<double> Mlp::bias(int layer) {
  return {params_.data() + offsets_[layer] +
              static_cast<std::size_t>(sizes_[layer]) * sizes_[layer + 1],
          static_cast<std::size_t>(sizes_[layer + 1])};
}

std::span<const double> Mlp::weights(int layer) const {
  return const_cast<Mlp*>(this)->weights(layer);
}

std::span<const double> Mlp::bias(int layer) const {
  return const_cast<Mlp*>(this)->bias(layer);
}

namespace {

void activate(Activation a, std::vector<double>& v) {
  switch (a) {
    case Activation::kLinear:
      break;
    case Activation::kTanh:
      for (double& x : v) x = std::tanh(x);
      break;
    case Activation::kRelu:
      for (double& x : v) x = x > 0.0 ? x : 0.0;
      break;
  }
}

// Derivative expressed through the activation's output.
double activation_grad(Activation a, double y) {
  switch (a) {
    case Activation::kLinear:
      return 1.0;
    case Activation::kTanh:
      return 1.0 - y * y;
    case Activation::kRelu:
      return y > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

}  // namespace

std::vector<double> Mlp::forward(std::span<const double> x,
                                 GradientTape& tape) const {
  if (static_cast<int>(x.size()) != input_size()) {
    throw ContractViolation("Mlp input size " + std::to_string(x.size()) +
                            ", expected " + std::to_string(input_size()));
  }
  tape.inputs.resize(num_layers());
  tape.outputs.resize(num_layers());
  std::vector<double> h(x.begin(), x.end());
  for (int l = 0; l < num_layers(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const auto w = weights(l);
    const auto b = bias(l);
    std::vector<double> y(b.begin(), b.end());
    for (int o = 0; o < out; ++o) {
      const double* row = w.data() + static_cast<std::size_t>(o) * in;
      double acc = y[o];
      for (int i = 0; i < in; ++i) acc += row[i] * h[i];
      y[o] = acc;
    }
    activate(l + 1 == num_layers() ? Activation::kLinear : hidden_, y);
    tape.inputs[l] = std::move(h);
    tape.outputs[l] = y;
    h = std::move(y);
  }
  tape.valid = true;
  return h;
}

std::vector<double> Mlp::predict(std::span<const double> x) const {
  GradientTape tape;
  return forward(x, tape);
}

std::vector<double> Mlp::backward(const GradientTape& tape,
                                  std::span<const double> upstream,
                                  std::span<double> grads) const {
  if (!tape.valid || static_cast<int>(tape.inputs.size()) != num_layers()) {
    throw ContractViolation("Mlp::backward called before forward");
  }
  if (static_cast<int>(upstream.size()) != output_size()) {
    throw ContractViolation("upstream gradient has wrong size");
  }
  if (grads.size() != params_.size()) {
    throw ContractViolation("gradient buffer has wrong size");
  }
  std::vector<double> delta(upstream.begin(), upstream.end());
  for (int l = num_layers() - 1; l >= 0; --l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const Activation act = (l + 1 == num_layers()) ? Activation::kLinear : hidden_;
    const auto& y = tape.outputs[l];
    const auto& x = tape.inputs[l];
    for (int o = 0; o < out; ++o) delta[o] *= activation_grad(act, y[o]);

    double* gw = grads.data() + offsets_[l];
    double* gb = gw + static_cast<std::size_t>(in) * out;
    const auto w = weights(l);
    std::vector<double> next(in, 0.0);
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      gb[o] += d;
      if (d == 0.0) continue;
      double* grow = gw + static_cast<std::size_t>(o) * in;
      const double* wrow = w.data() + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) {
        grow[i] += d * x[i];
        next[i] += d * wrow[i];
      }
    }
    delta = std::move(next);
  }
  return delta;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw ContractViolation("softmax of empty logits");
  for (double z : logits) {
    if (std::isnan(z)) throw DomainError("softmax: NaN logit");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

std::vector<double> log_softmax(std::span<const double> logits) {
  if (logits.empty()) throw ContractViolation("log_softmax of empty logits");
  for (double z : logits) {
    if (std::isnan(z)) throw DomainError("log_softmax: NaN logit");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  const double lse = m + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

CategoricalSample softmax_sample(std::span<const double> logits, Rng& rng) {
  CategoricalSample s;
  s.probs = softmax(logits);
  const auto logp = log_softmax(logits);
  const double u = rng.uniform();
  double cdf = 0.0;
  s.action = static_cast<int>(s.probs.size()) - 1;
  for (std::size_t i = 0; i < s.probs.size(); ++i) {
    cdf += s.probs[i];
    if (u < cdf) {
      s.action = static_cast<int>(i);
      break;
    }
  }
  s.log_prob = logp[s.action];
  return s;
}

int argmax(std::span<const double> values) {
  return static_cast<int>(std::max_element(values.begin(), values.end()) -
                          values.begin());
}

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamMoments& moments, const AdamConfig& cfg) {
  if (grads.size() != params.size() || moments.m.size() != params.size() ||
      moments.v.size() != params.size()) {
    throw ContractViolation("adam_step: shape mismatch");
  }
  ++moments.t;
  const double t = static_cast<double>(moments.t);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    moments.m[i] = cfg.beta1 * moments.m[i] + (1.0 - cfg.beta1) * g;
    moments.v[i] = cfg.beta2 * moments.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = moments.m[i] / c1;
    const double v_hat = moments.v[i] / c2;
    params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

double l2_norm(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

double clip_grad_norm(std::span<std::span<double>> groups, double max_norm) {
  double sq = 0.0;
  for (auto g : groups) {
    for (double v : g) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / (norm + 1e-6);
    for (auto g : groups) {
      for (double& v : g) v *= scale;
    }
  }
  return norm;
}

}  // namespace tsc
