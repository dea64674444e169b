#include <cmath>

#include <benchmark/benchmark.h>

#include "tsc/kplanes.hpp"
#include "tsc/neural.hpp"
#include "tsc/ppo.hpp"
#include "tsc/sim.hpp"
#include "tsc/state_repr.hpp"

namespace tsc {
namespace {

void BM_SimulationTick(benchmark::State& state) {
  Simulation sim(IntersectionLayout{}, PhasePlan{}, FlowProfile::synthetic(), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim.step());
    if (sim.at_decision_point()) sim.apply_action(1);
  }
}
BENCHMARK(BM_SimulationTick);

void BM_ExpandedState(benchmark::State& state) {
  Simulation sim(IntersectionLayout{}, PhasePlan{}, FlowProfile::synthetic(), 1);
  for (int t = 0; t < 500; ++t) {
    sim.step();
    if (sim.at_decision_point()) sim.apply_action(1);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(expanded_state(sim, {}, {}));
  }
}
BENCHMARK(BM_ExpandedState);

void BM_KPlanesTransform(benchmark::State& state) {
  const KPlanesParams params(7);
  ExpandedState19 s;
  for (int i = 0; i < 19; ++i) s[i] = 0.05 * i;
  for (auto _ : state) benchmark::DoNotOptimize(kplanes_transform(params, s));
}
BENCHMARK(BM_KPlanesTransform);

void BM_PolicyForward(benchmark::State& state) {
  const Mlp net = make_policy_net(static_cast<int>(state.range(0)), 3, PpoConfig{}, 1);
  const std::vector<double> x(state.range(0), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(net.predict(x));
}
BENCHMARK(BM_PolicyForward)->Arg(19)->Arg(68);

void BM_PolicyBackward(benchmark::State& state) {
  const Mlp net = make_policy_net(19, 3, PpoConfig{}, 1);
  const std::vector<double> x(19, 0.3);
  const std::vector<double> up{0.1, -0.2, 0.1};
  std::vector<double> grads(net.num_params());
  GradientTape tape;
  for (auto _ : state) {
    net.forward(x, tape);
    benchmark::DoNotOptimize(net.backward(tape, up, grads));
  }
}
BENCHMARK(BM_PolicyBackward);

void BM_PpoSurrogateBatch(benchmark::State& state) {
  const PpoConfig cfg;
  const Mlp policy = make_policy_net(19, 3, cfg, 1);
  const Mlp value = make_value_net(19, cfg, 2);
  RolloutBuffer buf;
  Rng rng(3);
  std::vector<std::size_t> batch;
  for (int i = 0; i < cfg.batch_size; ++i) {
    std::vector<double> obs(19);
    for (double& v : obs) v = rng.uniform();
    buf.observations.push_back(obs);
    buf.actions.push_back(i % 3);
    buf.log_probs.push_back(std::log(1.0 / 3.0));
    buf.rewards.push_back(0.0);
    buf.values.push_back(0.0);
    buf.dones.push_back(0);
    buf.advantages.push_back(rng.uniform(-1, 1));
    buf.returns.push_back(rng.uniform(-1, 1));
    batch.push_back(i);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(ppo_surrogate(buf, batch, policy, value, cfg.clip_range,
                                           cfg.value_coef, cfg.entropy_coef));
  }
}
BENCHMARK(BM_PpoSurrogateBatch);

}  // namespace
}  // namespace tsc

BENCHMARK_MAIN();
