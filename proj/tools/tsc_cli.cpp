// tsc: train, evaluate and compare signal controllers on the point-queue
// intersection.
//
// Exit status: 0 success, 1 usage or configuration error, 2 runtime error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tsc/autoencoder.hpp"
#include "tsc/baselines.hpp"
#include "tsc/config.hpp"
#include "tsc/errors.hpp"
#include "tsc/experiment.hpp"
#include "tsc/metrics.hpp"
#include "tsc/policy_bundle.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

// Config file plus flag overrides, applied after parsing.
struct Layered {
  std::string config_path;
  std::vector<std::pair<CLI::Option*, std::string>> bindings;
  std::vector<std::pair<std::string, std::string>> fixed;

  void bind(CLI::Option* opt, std::string key) {
    bindings.emplace_back(opt, std::move(key));
  }

  tsc::KeyValueConfig resolve() const {
    tsc::KeyValueConfig cfg;
    if (!config_path.empty()) cfg = tsc::KeyValueConfig::load(config_path);
    for (const auto& [k, v] : fixed) cfg.set(k, v);
    for (const auto& [opt, key] : bindings) {
      if (opt->count() > 0) cfg.set(key, opt->as<std::string>());
    }
    return cfg;
  }
};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw tsc::IoError("cannot write " + path.string());
  return out;
}

void write_cycles(const fs::path& path, const std::vector<tsc::CycleRecord>& c) {
  auto out = open_out(path);
  tsc::write_cycles_csv(out, c);
}

int cmd_train(const Layered& layers) {
  auto kv = layers.resolve();
  kv.set("experiment.controller", "ppo");
  const auto cfg = tsc::experiment_from_config(kv);
  cfg.validate();
  const std::uint64_t seed = cfg.seeds.front();
  const fs::path out = cfg.output_dir;
  std::cerr << "training ppo repr=" << cfg.repr
            << " reward=" << tsc::reward_name(cfg.env.reward.kind) << " seed=" << seed
            << " timesteps=" << cfg.ppo.total_timesteps << '\n';
  auto result = tsc::train_policy(cfg, seed, [](const tsc::PpoLogRow& row) {
    if (row.rollout_idx % 10 == 0) {
      std::cerr << "  rollout " << row.rollout_idx << " t=" << row.sim_time_s
                << " reward=" << row.mean_reward << " Q_cycle=" << row.mean_q_cycle
                << '\n';
    }
    return true;
  });
  fs::create_directories(out);
  tsc::save_bundle(out / "policy.tscw", result.bundle);
  auto log = open_out(out / "training_log.csv");
  tsc::write_training_log_csv(log, result.ppo_log);
  std::cout << (out / "policy.tscw").string() << '\n';
  return 0;
}

int cmd_dqn(const Layered& layers) {
  auto kv = layers.resolve();
  kv.set("experiment.controller", "dqn");
  const auto cfg = tsc::experiment_from_config(kv);
  cfg.validate();
  const std::uint64_t seed = cfg.seeds.front();
  const fs::path out = cfg.output_dir;
  auto result = tsc::train_policy(cfg, seed);
  fs::create_directories(out);
  tsc::save_bundle(out / "policy.tscw", result.bundle);
  auto log = open_out(out / "training_log.csv");
  tsc::write_dqn_log_csv(log, result.dqn_log);
  std::cout << (out / "policy.tscw").string() << '\n';
  return 0;
}

int cmd_pretrain_ae(const Layered& layers) {
  const auto kv = layers.resolve();
  const auto cfg = tsc::experiment_from_config(kv);
  cfg.ae.validate();
  const std::uint64_t seed = cfg.seeds.front();
  tsc::StateBufferConfig buf;
  buf.num_states = cfg.ae_buffer_states;
  buf.layout = cfg.env.layout;
  buf.plan = cfg.env.plan;
  buf.flows = cfg.env.flows;
  buf.norm = tsc::ExpandedNormalization::for_plan(
      cfg.env.plan, cfg.cycle_count_norm, cfg.env.layout.lane_storage_capacity);
  const auto states = tsc::collect_state_buffer(buf, seed);
  const auto ae = tsc::train_autoencoder(states, cfg.ae, seed);
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  const fs::path file = out / ("ae" + std::to_string(cfg.ae.latent) + ".tscw");
  tsc::save_weights(file, tsc::autoencoder_to_weights(ae, seed));
  auto log = open_out(out / ("ae" + std::to_string(cfg.ae.latent) + "_mse.csv"));
  log.precision(17);
  log << "epoch,mse\n0," << ae.initial_mse << '\n';
  for (std::size_t e = 0; e < ae.epoch_mse.size(); ++e) {
    log << e + 1 << ',' << ae.epoch_mse[e] << '\n';
  }
  std::cout << file.string() << " mse " << ae.initial_mse << " -> " << ae.final_mse
            << '\n';
  return 0;
}

// Runs every seed of one configuration and writes per-seed cycles.csv plus
// summary.csv under the output directory.
int evaluate(const tsc::ExperimentConfig& cfg) {
  const fs::path out = cfg.output_dir;
  std::vector<tsc::GridJob> jobs;
  for (auto s : cfg.seeds) jobs.push_back({cfg, s});
  auto runs = tsc::run_grid(jobs, cfg.workers, [&](const tsc::GridJob& job) {
    auto controller = tsc::make_controller(job.config, job.seed);
    const auto ep = tsc::run_episode(job.config, *controller, job.seed);
    write_cycles(out / cfg.id / ("seed" + std::to_string(job.seed)) / "cycles.csv",
                 ep.cycles);
    if (auto* w = dynamic_cast<tsc::DynamicWebsterController*>(controller.get())) {
      auto f = open_out(out / cfg.id / ("seed" + std::to_string(job.seed)) /
                        "webster.csv");
      tsc::write_webster_log_csv(f, w->log());
    }
    return tsc::summarize_run(job.config.id, job.seed, ep);
  });
  const auto rows = tsc::compare(runs);
  auto f = open_out(out / "summary.csv");
  tsc::write_summary_csv(f, rows);
  for (const auto& r : rows) {
    std::cout << r.config_id << ": mean Q_cycle " << r.mean_q << " +/- " << r.std_q
              << " over " << r.num_seeds << " seed(s)\n";
  }
  return 0;
}

int cmd_baseline(const Layered& layers) {
  auto cfg = tsc::experiment_from_config(layers.resolve());
  if (cfg.controller != "fixed" && cfg.controller != "webster") {
    throw tsc::ConfigError("--method must be webster or fixed");
  }
  if (cfg.id == "run") cfg.id = cfg.controller;
  cfg.validate();
  return evaluate(cfg);
}

int cmd_eval(const Layered& layers) {
  auto cfg = tsc::experiment_from_config(layers.resolve());
  if (cfg.controller == "fixed" || cfg.controller == "webster") {
    throw tsc::ConfigError("eval runs learned controllers; use baseline for " +
                           cfg.controller);
  }
  if (cfg.weights.empty()) {
    throw tsc::ConfigError("eval needs --weights for a " + cfg.controller +
                           " controller");
  }
  if (cfg.id == "run") cfg.id = cfg.controller;
  cfg.validate();
  return evaluate(cfg);
}

int cmd_compare(const Layered& layers, const std::string& grid_path, int workers) {
  tsc::KeyValueConfig kv = tsc::KeyValueConfig::load(grid_path);
  const auto overrides = layers.resolve();
  for (const auto& [k, v] : overrides.entries()) kv.set(k, v);
  const auto configs = tsc::grid_from_config(kv);
  const fs::path out = configs.front().output_dir;
  std::vector<tsc::GridJob> jobs;
  for (const auto& c : configs) {
    for (auto s : c.seeds) jobs.push_back({c, s});
  }
  // Fail on missing weights before any simulation starts.
  for (const auto& j : jobs) tsc::make_controller(j.config, j.seed);
  auto runs = tsc::run_grid(jobs, workers, [&](const tsc::GridJob& job) {
    auto controller = tsc::make_controller(job.config, job.seed);
    const auto ep = tsc::run_episode(job.config, *controller, job.seed);
    write_cycles(out / job.config.id / ("seed" + std::to_string(job.seed)) /
                     "cycles.csv",
                 ep.cycles);
    return tsc::summarize_run(job.config.id, job.seed, ep);
  });
  const auto rows = tsc::compare(runs);
  auto f = open_out(out / "summary.csv");
  tsc::write_summary_csv(f, rows);
  tsc::write_plot_script(out);
  for (const auto& r : rows) {
    std::cout << r.config_id << ": mean Q_cycle " << r.mean_q << " +/- " << r.std_q
              << '\n';
  }
  return 0;
}

int cmd_simulate(const Layered& layers, bool events) {
  auto cfg = tsc::experiment_from_config(layers.resolve());
  cfg.validate();
  const std::uint64_t seed = cfg.seeds.front();
  auto controller = tsc::make_controller(cfg, seed);
  tsc::EpisodeOptions opts;
  opts.record_ticks = true;
  opts.log_events = events;
  const auto ep = tsc::run_episode(cfg, *controller, seed, opts);
  const fs::path out = cfg.output_dir;
  auto f = open_out(out / "ticks.csv");
  f << "tick,phase,in_yellow";
  for (int l = 0; l < tsc::kNumLanes; ++l) f << ",q_" << tsc::lane_name(l);
  for (int l = 0; l < tsc::kNumLanes; ++l) f << ",arr_" << tsc::lane_name(l);
  for (int l = 0; l < tsc::kNumLanes; ++l) f << ",dep_" << tsc::lane_name(l);
  f << '\n';
  for (const auto& r : ep.ticks) {
    f << r.tick << ',' << r.phase + 1 << ',' << (r.in_yellow ? 1 : 0);
    for (int v : r.queues) f << ',' << v;
    for (int v : r.arrivals) f << ',' << v;
    for (int v : r.discharges) f << ',' << v;
    f << '\n';
  }
  write_cycles(out / "cycles.csv", ep.cycles);
  if (events) {
    auto e = open_out(out / "events.csv");
    tsc::write_events_csv(e, ep.events);
  }
  std::cout << ep.ticks.size() << " ticks, " << ep.cycles.size()
            << " cycles, mean Q_cycle " << tsc::mean_q_cycle(ep.cycles) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive traffic-signal control experiments"};
  app.require_subcommand(1);

  auto add_common = [](CLI::App* sub, Layered& l) {
    sub->add_option("--config", l.config_path, "key = value configuration file")
        ->check(CLI::ExistingFile);
    l.bind(sub->add_option("--seed", "Seed (first of experiment.seeds)"),
           "experiment.seeds");
    l.bind(sub->add_option("--out", "Output directory"), "experiment.out");
  };

  Layered train_l;
  auto* train = app.add_subcommand("train", "Train a PPO controller");
  add_common(train, train_l);
  train_l.bind(train->add_option("--repr", "baseline|expanded|ae4|ae8|ae16|ae19|ae32|kplanes")
                   ->check(CLI::IsMember({"baseline", "expanded", "ae4", "ae8", "ae16",
                                          "ae19", "ae32", "kplanes"})),
               "experiment.repr");
  train_l.bind(train->add_option("--reward", "queue|delay|pressure|speed")
                   ->check(CLI::IsMember({"queue", "delay", "pressure", "speed"})),
               "experiment.reward");
  train_l.bind(train->add_option("--timesteps", "Simulated seconds of training"),
               "ppo.total_timesteps");
  train_l.bind(train->add_option("--lr", "Adam learning rate"), "ppo.learning_rate");
  train_l.bind(train->add_option("--encoder", "Pretrained autoencoder weights"),
               "repr.encoder");

  Layered ae_l;
  auto* ae = app.add_subcommand("pretrain-ae", "Pretrain a state autoencoder");
  add_common(ae, ae_l);
  ae_l.bind(ae->add_option("--latent", "Latent width k"), "ae.latent");
  ae_l.bind(ae->add_option("--buffer-steps", "States in the training buffer"),
            "ae.buffer_states");
  ae_l.bind(ae->add_option("--epochs", "Training epochs"), "ae.epochs");

  Layered base_l;
  auto* baseline = app.add_subcommand("baseline", "Evaluate a classical controller");
  add_common(baseline, base_l);
  base_l.bind(baseline->add_option("--method", "webster|fixed")
                  ->check(CLI::IsMember({"webster", "fixed"})),
              "experiment.controller");
  base_l.bind(baseline->add_option("--horizon", "Simulated seconds"), "experiment.horizon");
  base_l.bind(baseline->add_option("--seeds", "Comma-separated seeds"), "experiment.seeds");

  Layered dqn_l;
  auto* dqn = app.add_subcommand("dqn", "Train the dense DQN baseline");
  add_common(dqn, dqn_l);
  dqn_l.bind(dqn->add_option("--timesteps", "Simulated seconds of training"),
             "dqn.total_timesteps");

  Layered eval_l;
  auto* eval = app.add_subcommand("eval", "Evaluate a trained controller");
  add_common(eval, eval_l);
  eval_l.fixed.emplace_back("experiment.controller", "ppo");
  eval_l.bind(eval->add_option("--weights", "Policy bundle ({seed} expands per seed)"),
              "experiment.weights");
  eval_l.bind(eval->add_option("--controller", "ppo|dqn")
                  ->check(CLI::IsMember({"ppo", "dqn"})),
              "experiment.controller");
  eval_l.bind(eval->add_option("--horizon", "Simulated seconds"), "experiment.horizon");
  eval_l.bind(eval->add_option("--seeds", "Comma-separated seeds"), "experiment.seeds");

  Layered cmp_l;
  std::string grid_path;
  int workers = 1;
  auto* cmp = app.add_subcommand("compare", "Run a configuration grid");
  cmp->add_option("--grid", grid_path, "Grid configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmp->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber);
  cmp_l.bind(cmp->add_option("--out", "Output directory"), "experiment.out");
  cmp_l.bind(cmp->add_option("--seeds", "Comma-separated seeds"), "experiment.seeds");

  Layered sim_l;
  bool events = false;
  auto* sim = app.add_subcommand("simulate", "Headless run emitting per-tick CSV");
  add_common(sim, sim_l);
  sim_l.bind(sim->add_option("--method", "fixed|webster|ppo|dqn")
                 ->check(CLI::IsMember({"fixed", "webster", "ppo", "dqn"})),
             "experiment.controller");
  sim_l.bind(sim->add_option("--weights", "Policy bundle for ppo/dqn"),
             "experiment.weights");
  sim_l.bind(sim->add_option("--horizon", "Simulated seconds"), "experiment.horizon");
  sim->add_flag("--events", events, "Also write events.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train) return cmd_train(train_l);
    if (*ae) return cmd_pretrain_ae(ae_l);
    if (*baseline) return cmd_baseline(base_l);
    if (*dqn) return cmd_dqn(dqn_l);
    if (*eval) return cmd_eval(eval_l);
    if (*cmp) return cmd_compare(cmp_l, grid_path, workers);
    if (*sim) return cmd_simulate(sim_l, events);
  } catch (const tsc::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
