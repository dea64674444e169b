#ifndef TSC_TESTS_BANDIT_ENV_HPP_
#define TSC_TESTS_BANDIT_ENV_HPP_

#include <cstdint>
#include <memory>
#include <vector>

#include "tsc/env.hpp"
#include "tsc/random.hpp"

namespace tsc::testing {

// Two-state contextual bandit: the context is a one-hot of a fair coin,
// `paying_action` earns +1 and every other action 0. Each step is one
// simulated second.
class BanditEnv : public Environment {
 public:
  BanditEnv(std::uint64_t seed, int paying_action = 0, int actions = kNumActions)
      : rng_(seed), paying_(paying_action), actions_(actions) {}

  std::vector<double> reset() override { return draw(); }
  StepResult step(int action) override {
    StepResult r;
    r.reward = action == paying_ ? 1.0 : 0.0;
    r.elapsed_s = 1;
    r.observation = draw();
    return r;
  }
  int observation_size() const override { return 2; }
  int num_actions() const override { return actions_; }

 private:
  std::vector<double> draw() {
    return rng_.uniform() < 0.5 ? std::vector<double>{1.0, 0.0}
                                : std::vector<double>{0.0, 1.0};
  }
  Rng rng_;
  int paying_;
  int actions_;
};

inline EnvFactory bandit_factory(int paying_action = 0) {
  return [paying_action](std::uint64_t seed) {
    return std::make_unique<BanditEnv>(seed, paying_action);
  };
}

}  // namespace tsc::testing

#endif  // TSC_TESTS_BANDIT_ENV_HPP_
