#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "bandit_env.hpp"
#include "tsc/autoencoder.hpp"
#include "tsc/dqn.hpp"
#include "tsc/errors.hpp"
#include "tsc/ppo.hpp"

namespace tsc {
namespace {

// ---- GAE ----

TEST(Gae, SingleStep) {
  const auto g = compute_gae(std::vector<double>{1.0}, std::vector<double>{0.0},
                             0.0, 0.99, 0.95);
  EXPECT_DOUBLE_EQ(g.advantages[0], 1.0);
  EXPECT_DOUBLE_EQ(g.returns[0], 1.0);
}

TEST(Gae, ThreeStepHandRecursion) {
  const std::vector<double> r{1, 0, 1};
  const std::vector<double> v{0.5, 0.5, 0.5};
  const auto g = compute_gae(r, v, 0.0, 0.99, 0.95);
  // delta = (0.995, -0.005, 0.5); A_t = delta_t + 0.9405 A_{t+1}.
  EXPECT_NEAR(g.advantages[2], 0.5, 1e-12);
  EXPECT_NEAR(g.advantages[1], 0.46525, 1e-12);
  EXPECT_NEAR(g.advantages[0], 1.432567625, 1e-12);
  for (int t = 0; t < 3; ++t) EXPECT_NEAR(g.returns[t], g.advantages[t] + 0.5, 1e-12);
}

TEST(Gae, LambdaZeroIsOneStepTd) {
  Rng rng(3);
  std::vector<double> r(20);
  std::vector<double> v(20);
  for (auto& x : r) x = rng.uniform(-1, 1);
  for (auto& x : v) x = rng.uniform(-1, 1);
  const double next = 0.3;
  const auto g = compute_gae(r, v, next, 0.9, 0.0);
  for (int t = 0; t < 20; ++t) {
    const double vn = t + 1 < 20 ? v[t + 1] : next;
    EXPECT_DOUBLE_EQ(g.advantages[t], r[t] + 0.9 * vn - v[t]);
  }
}

TEST(Gae, LambdaOneIsMonteCarlo) {
  Rng rng(4);
  const int n = 50;
  std::vector<double> r(n);
  std::vector<double> v(n);
  for (auto& x : r) x = rng.uniform(-1, 1);
  for (auto& x : v) x = rng.uniform(-1, 1);
  const double next = -0.7;
  const double gamma = 0.97;
  const auto g = compute_gae(r, v, next, gamma, 1.0);
  for (int t = 0; t < n; ++t) {
    double ret = 0.0;
    double disc = 1.0;
    for (int k = t; k < n; ++k) {
      ret += disc * r[k];
      disc *= gamma;
    }
    ret += disc * next;
    EXPECT_NEAR(g.advantages[t], ret - v[t], 1e-10);
  }
}

TEST(Gae, DoneStopsBootstrap) {
  const std::vector<double> r{1, 1};
  const std::vector<double> v{0, 0};
  const std::vector<std::uint8_t> d{1, 0};
  const auto g = compute_gae(r, v, 10.0, 0.5, 1.0, d);
  EXPECT_DOUBLE_EQ(g.advantages[0], 1.0);
  EXPECT_DOUBLE_EQ(g.advantages[1], 6.0);
}

TEST(Advantages, NormalizedMoments) {
  Rng rng(5);
  std::vector<double> a(200);
  for (auto& x : a) x = rng.uniform(-3, 11);
  normalize_advantages(a);
  const double mean = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
  double var = 0.0;
  for (double x : a) var += (x - mean) * (x - mean);
  EXPECT_LT(std::abs(mean), 1e-9);
  EXPECT_NEAR(std::sqrt(var / a.size()), 1.0, 1e-6);
}

// ---- clipped objective and surrogate ----

TEST(ClippedObjective, Examples) {
  EXPECT_EQ(clipped_objective(2.0, -1.0, 0.2), -2.0);
  EXPECT_DOUBLE_EQ(clipped_objective(1.5, 1.0, 0.2), 1.2);
  EXPECT_EQ(clipped_objective(1.0, 0.7, 0.2), 0.7);
}

TEST(ClippedObjective, NeverAboveUnclipped) {
  Rng rng(6);
  for (int k = 0; k < 10000; ++k) {
    const double r = rng.uniform(0, 3);
    const double a = rng.uniform(-5, 5);
    const double e = rng.uniform(0.01, 0.99);
    const double c = std::clamp(r, 1 - e, 1 + e);
    const double got = clipped_objective(r, a, e);
    ASSERT_EQ(got, std::min(r * a, c * a));
    ASSERT_LE(got, r * a);
  }
}

struct SurrogateFixture {
  Mlp policy{{4, 8, 3}, Activation::kTanh, 11};
  Mlp value{{4, 8, 1}, Activation::kTanh, 12};
  RolloutBuffer buffer;
  std::vector<std::size_t> batch;

  // Old log-probs put the ratios at `ratios` so no sample sits on a clip kink.
  explicit SurrogateFixture(std::vector<double> ratios) {
    Rng rng(13);
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      std::vector<double> obs(4);
      for (auto& x : obs) x = rng.uniform(-1, 1);
      const int a = static_cast<int>(rng.index(3));
      const double lp = log_softmax(policy.predict(obs))[a];
      buffer.observations.push_back(obs);
      buffer.actions.push_back(a);
      buffer.log_probs.push_back(lp - std::log(ratios[i]));
      buffer.rewards.push_back(0.0);
      buffer.values.push_back(0.0);
      buffer.dones.push_back(0);
      buffer.advantages.push_back(rng.uniform(-2, 2));
      buffer.returns.push_back(rng.uniform(-1, 1));
      batch.push_back(i);
    }
  }
  SurrogateResult eval() const {
    return ppo_surrogate(buffer, batch, policy, value, 0.2, 0.5, 0.01);
  }
};

TEST(Surrogate, IdentityPolicyGivesMeanAdvantage) {
  SurrogateFixture f(std::vector<double>(16, 1.0));
  const auto res = f.eval();
  const double mean_a =
      std::accumulate(f.buffer.advantages.begin(), f.buffer.advantages.end(), 0.0) / 16;
  EXPECT_NEAR(res.policy_loss, -mean_a, 1e-12);
  EXPECT_NEAR(res.mean_abs_ratio_dev, 0.0, 1e-12);
  EXPECT_EQ(res.clip_fraction, 0.0);
}

TEST(Surrogate, GradientsMatchFiniteDifferences) {
  std::vector<double> ratios;
  for (int i = 0; i < 24; ++i) ratios.push_back(std::array{0.5, 0.9, 1.1, 1.5}[i % 4]);
  SurrogateFixture f(ratios);
  const auto res = f.eval();
  const double h = 1e-6;
  auto check = [&](std::span<double> params, const std::vector<double>& grads) {
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double keep = params[i];
      params[i] = keep + h;
      const double lp = f.eval().loss;
      params[i] = keep - h;
      const double lm = f.eval().loss;
      params[i] = keep;
      const double fd = (lp - lm) / (2 * h);
      const double err = std::abs(fd - grads[i]);
      if (err > 1e-8) worst = std::max(worst, err / (std::abs(fd) + std::abs(grads[i])));
    }
    return worst;
  };
  EXPECT_LT(check(f.policy.params(), res.policy_grads), 1e-4);
  EXPECT_LT(check(f.value.params(), res.value_grads), 1e-4);
}

TEST(Surrogate, NanRatioIsTrainingError) {
  SurrogateFixture f(std::vector<double>(4, 1.0));
  f.buffer.log_probs[2] = std::nan("");
  EXPECT_THROW(f.eval(), TrainingError);
}

// ---- PPO training ----

PpoConfig small_ppo() {
  PpoConfig c;
  c.learning_rate = 3e-4;
  c.total_timesteps = 2000;
  c.hidden_units = 16;
  return c;
}

TEST(Ppo, ZeroTimestepsReturnsInitialNetworks) {
  PpoConfig c = small_ppo();
  c.total_timesteps = 0;
  const auto res = train_ppo(testing::bandit_factory(), c, 9);
  EXPECT_EQ(res.policy, make_policy_net(2, 3, c, derive_seed(9, 1)));
  EXPECT_EQ(res.value, make_value_net(2, c, derive_seed(9, 2)));
  EXPECT_TRUE(res.log.empty());
}

TEST(Ppo, ZeroLearningRateLeavesParametersBitIdentical) {
  PpoConfig c = small_ppo();
  c.learning_rate = 0.0;
  const auto res = train_ppo(testing::bandit_factory(), c, 9);
  EXPECT_EQ(res.log.size(), 10u);
  EXPECT_EQ(res.policy, make_policy_net(2, 3, c, derive_seed(9, 1)));
  EXPECT_EQ(res.value, make_value_net(2, c, derive_seed(9, 2)));
}

TEST(Ppo, BanditLearnsPayingAction) {
  PpoConfig c = small_ppo();
  c.total_timesteps = 20000;
  c.hidden_units = 64;
  const auto res = train_ppo(testing::bandit_factory(0), c, 1);
  for (const auto& ctx : {std::vector<double>{1, 0}, std::vector<double>{0, 1}}) {
    EXPECT_GT(softmax(res.policy.predict(ctx))[0], 0.95);
  }
}

TEST(Ppo, TrafficTrainingIsDeterministic) {
  PpoConfig c = small_ppo();
  c.total_timesteps = 4000;
  const auto factory = traffic_env_factory(TrafficEnvConfig{}, Representation::expanded());
  const auto a = train_ppo(factory, c, 4);
  const auto b = train_ppo(factory, c, 4);
  EXPECT_EQ(a.log, b.log);
  EXPECT_EQ(a.policy, b.policy);
  EXPECT_EQ(a.value, b.value);
  EXPECT_GE(a.sim_time_s, 4000);
  ASSERT_FALSE(a.log.empty());
  std::ostringstream out;
  write_training_log_csv(out, a.log);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "rollout_idx,sim_time_s,mean_reward,mean_Q_cycle,policy_entropy,value_loss");
}

TEST(Ppo, ConfigValidation) {
  PpoConfig c;
  c.batch_size = 300;
  EXPECT_THROW(c.validate(), ConfigError);
  c = PpoConfig{};
  c.gamma = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = PpoConfig{};
  c.clip_range = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(PpoConfig{}.validate());
}

// ---- DQN ----

DqnConfig small_dqn() {
  DqnConfig c;
  c.hidden_units = 16;
  c.total_timesteps = 1000;
  return c;
}

TEST(Dqn, EpsilonSchedule) {
  const DqnConfig c;
  EXPECT_DOUBLE_EQ(epsilon_at(c, 0), 1.0);
  EXPECT_DOUBLE_EQ(epsilon_at(c, 10000), 0.525);
  EXPECT_DOUBLE_EQ(epsilon_at(c, 20000), 0.05);
  EXPECT_DOUBLE_EQ(epsilon_at(c, 90000), 0.05);
}

TEST(Dqn, ReplayRingOverwritesOldest) {
  ReplayBuffer rb(3);
  for (int i = 0; i < 5; ++i) rb.add({double(i)}, i % 3, i, {double(i + 1)});
  EXPECT_EQ(rb.size(), 3u);
  std::vector<double> rewards;
  for (std::size_t i = 0; i < rb.size(); ++i) rewards.push_back(rb.reward(i));
  std::sort(rewards.begin(), rewards.end());
  EXPECT_EQ(rewards, (std::vector<double>{2, 3, 4}));
}

TEST(Dqn, PureExplorationIsUniform) {
  DqnConfig c = small_dqn();
  c.epsilon_start = 1.0;
  c.epsilon_end = 1.0;
  c.total_timesteps = 30000;
  c.learning_rate = 0.0;
  const auto res = train_dqn(testing::bandit_factory(), c, 2);
  ASSERT_EQ(res.steps, 30000);
  for (long long n : res.action_counts) EXPECT_NEAR(n / 30000.0, 1.0 / 3.0, 0.02);
}

TEST(Dqn, WarmUpSkipsUpdates) {
  DqnConfig c = small_dqn();
  c.total_timesteps = 50;
  const auto res = train_dqn(testing::bandit_factory(), c, 2);
  EXPECT_EQ(res.steps, 50);
  EXPECT_EQ(res.updates, 0);
  c.total_timesteps = 100;
  EXPECT_EQ(train_dqn(testing::bandit_factory(), c, 2).updates, 100 - 63);
}

TEST(Dqn, BanditGreedyActionPays) {
  DqnConfig c = small_dqn();
  c.total_timesteps = 20000;
  c.epsilon_decay_steps = 5000;
  const auto res = train_dqn(testing::bandit_factory(2), c, 3);
  for (const auto& ctx : {std::vector<double>{1, 0}, std::vector<double>{0, 1}}) {
    EXPECT_EQ(argmax(res.q_network.predict(ctx)), 2);
  }
}

TEST(Dqn, Deterministic) {
  DqnConfig c = small_dqn();
  c.total_timesteps = 3000;
  c.log_interval_steps = 100;
  const auto f = traffic_env_factory(TrafficEnvConfig{}, Representation::lane_features());
  const auto a = train_dqn(f, c, 5);
  const auto b = train_dqn(f, c, 5);
  EXPECT_EQ(a.log, b.log);
  EXPECT_EQ(a.q_network, b.q_network);
}

TEST(Dqn, ConfigValidation) {
  DqnConfig c;
  c.replay_capacity = 10;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(DqnConfig{}.validate());
}

// ---- autoencoder ----

TEST(Autoencoder, ConvergesOnAPoint) {
  ExpandedState19 s;
  for (int i = 0; i < 19; ++i) s[i] = 0.05 * i;
  const std::vector<ExpandedState19> buf(256, s);
  AutoencoderConfig c;
  c.latent = 4;
  c.epochs = 300;
  c.learning_rate = 3e-3;
  const auto res = train_autoencoder(buf, c, 1);
  EXPECT_LT(res.final_mse, 1e-6);
  const auto rec = res.decoder.predict(res.encoder.predict(s.span()));
  for (int i = 0; i < 19; ++i) EXPECT_NEAR(rec[i], s[i], 1e-3);
}

TEST(Autoencoder, ZeroEpochsReportsUntrainedError) {
  StateBufferConfig bc;
  bc.num_states = 300;
  const auto buf = collect_state_buffer(bc, 3);
  AutoencoderConfig c;
  c.epochs = 0;
  const auto res = train_autoencoder(buf, c, 5);
  EXPECT_EQ(res.initial_mse, res.final_mse);
  EXPECT_TRUE(res.epoch_mse.empty());
  EXPECT_DOUBLE_EQ(res.final_mse, reconstruction_mse(res.encoder, res.decoder, buf));
}

TEST(Autoencoder, WiderLatentReconstructsBetter) {
  StateBufferConfig bc;
  bc.num_states = 3000;
  const auto buf = collect_state_buffer(bc, 8);
  ASSERT_EQ(buf.size(), 3000u);
  AutoencoderConfig c;
  c.epochs = 40;
  c.latent = 4;
  const auto small = train_autoencoder(buf, c, 2);
  c.latent = 19;
  const auto wide = train_autoencoder(buf, c, 2);
  EXPECT_LE(wide.final_mse, small.final_mse);
  EXPECT_LT(wide.final_mse, 0.5 * wide.initial_mse);
}

TEST(Autoencoder, BufferStatesAreValid) {
  StateBufferConfig bc;
  bc.num_states = 500;
  const auto buf = collect_state_buffer(bc, 4);
  for (const auto& s : buf) {
    double p = 0.0;
    for (int j = 0; j < 4; ++j) p += s[ExpandedState19::kPhase + j];
    ASSERT_EQ(p, 1.0);
  }
  EXPECT_EQ(collect_state_buffer(bc, 4).size(), buf.size());
}

TEST(Autoencoder, LatentValidation) {
  AutoencoderConfig c;
  c.latent = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.latent = 5;
  EXPECT_NO_THROW(c.validate());
  EXPECT_THROW(train_autoencoder(std::vector<ExpandedState19>{}, AutoencoderConfig{}, 1),
               ContractViolation);
}

TEST(Autoencoder, EncoderFileRoundTrip) {
  ExpandedState19 s;
  s[4] = 1.0;
  AutoencoderConfig c;
  c.latent = 8;
  c.epochs = 1;
  const auto res = train_autoencoder(std::vector<ExpandedState19>(64, s), c, 1);
  const auto path = std::filesystem::temp_directory_path() / "tsc_agents_ae.tscw";
  save_weights(path, autoencoder_to_weights(res, 1));
  const Mlp enc = load_encoder(path);
  EXPECT_EQ(enc.sizes(), res.encoder.sizes());
  const auto a = enc.predict(s.span());
  const auto b = res.encoder.predict(s.span());
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(a[i], b[i], 1e-5);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace tsc
