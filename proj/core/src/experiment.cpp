#include "tsc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>

#include "tsc/errors.hpp"

namespace tsc {

namespace {

bool is_learned(const std::string& controller) {
  return controller == "ppo" || controller == "dqn";
}

}  // namespace

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  env.plan.validate();
  env.layout.validate();
  env.flows.validate();
  env.reward.validate();
  if (horizon_s < env.plan.cycle_length()) {
    throw ConfigError("horizon must cover at least one cycle (" +
                      std::to_string(env.plan.cycle_length()) + " s)");
  }
  if (controller != "fixed" && controller != "webster" && !is_learned(controller)) {
    throw ConfigError("unknown controller '" + controller + "'");
  }
  Representation::parse(repr);
  if (workers <= 0) throw ConfigError("workers must be positive");
  if (webster_interval <= 0 || webster_window <= 0) {
    throw ConfigError("Webster intervals must be positive");
  }
}

ExperimentConfig experiment_from_config(const KeyValueConfig& cfg,
                                        ExperimentConfig base) {
  base.id = cfg.get_string("experiment.id", base.id);
  base.controller = cfg.get_string("experiment.controller", base.controller);
  base.repr = cfg.get_string("experiment.repr", base.repr);
  if (cfg.has("experiment.seeds")) {
    base.seeds.clear();
    for (long long s : cfg.get_int_list("experiment.seeds", {})) {
      if (s < 0) throw ConfigError("seeds must be non-negative");
      base.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }
  base.horizon_s = static_cast<int>(cfg.get_int("experiment.horizon", base.horizon_s));
  base.output_dir = cfg.get_string("experiment.out", base.output_dir.string());
  base.weights = cfg.get_string("experiment.weights", base.weights);
  base.workers = static_cast<int>(cfg.get_int("experiment.workers", base.workers));
  base.encoder = cfg.get_string("repr.encoder", base.encoder);
  base.cycle_count_norm = cfg.get_double("repr.cycle_count_norm", base.cycle_count_norm);
  base.kplanes_seed = static_cast<std::uint64_t>(
      cfg.get_int("repr.kplanes_seed", static_cast<long long>(base.kplanes_seed)));
  base.kplanes_resolution =
      static_cast<int>(cfg.get_int("repr.kplanes_resolution", base.kplanes_resolution));
  base.kplanes_features =
      static_cast<int>(cfg.get_int("repr.kplanes_features", base.kplanes_features));
  base.webster_interval =
      static_cast<int>(cfg.get_int("webster.interval", base.webster_interval));
  base.webster_window = static_cast<int>(cfg.get_int("webster.window", base.webster_window));
  base.ae_buffer_states =
      static_cast<int>(cfg.get_int("ae.buffer_states", base.ae_buffer_states));
  base.env.layout = layout_from_config(cfg, base.env.layout);
  base.env.plan = plan_from_config(cfg, base.env.plan);
  base.env.flows = flow_from_config(cfg, base.env.flows);
  base.env.reward = reward_from_config(cfg, base.env.reward);
  if (const auto r = cfg.get("experiment.reward")) {
    base.env.reward.kind = reward_from_name(*r);
  }
  base.ppo = ppo_from_config(cfg, base.ppo);
  base.dqn = dqn_from_config(cfg, base.dqn);
  base.ae = autoencoder_from_config(cfg, base.ae);
  return base;
}

std::string with_seed(const std::string& pattern, std::uint64_t seed) {
  std::string out = pattern;
  const std::string token = "{seed}";
  const std::string value = std::to_string(seed);
  for (auto pos = out.find(token); pos != std::string::npos;
       pos = out.find(token, pos + value.size())) {
    out.replace(pos, token.size(), value);
  }
  return out;
}

PolicyController::PolicyController(PolicyBundle bundle)
    : bundle_(std::move(bundle)) {}

int PolicyController::decide(const Simulation& sim) {
  const auto obs = bundle_.repr.observe(sim, prev_queues_);
  prev_queues_ = approach_queues(sim);
  return bundle_.act(obs);
}

Representation build_representation(const ExperimentConfig& cfg,
                                     std::uint64_t seed) {
  const auto [kind, latent] = Representation::parse(cfg.repr);
  const auto norm = ExpandedNormalization::for_plan(
      cfg.env.plan, cfg.cycle_count_norm, cfg.env.layout.lane_storage_capacity);
  switch (kind) {
    case ReprKind::kBaseline:
      return Representation::baseline();
    case ReprKind::kExpanded:
      return Representation::expanded(norm);
    case ReprKind::kLaneFeatures:
      return Representation::lane_features();
    case ReprKind::kKPlanes:
      return Representation::kplanes(
          KPlanesParams(cfg.kplanes_seed, cfg.kplanes_resolution, cfg.kplanes_features),
          norm);
    case ReprKind::kLatent: {
      if (!cfg.encoder.empty()) {
        Mlp enc = load_encoder(with_seed(cfg.encoder, seed));
        if (enc.output_size() != latent) {
          throw ConfigError("encoder width " + std::to_string(enc.output_size()) +
                            " does not match " + cfg.repr);
        }
        return Representation::latent(std::move(enc), norm);
      }
      StateBufferConfig buf;
      buf.num_states = cfg.ae_buffer_states;
      buf.layout = cfg.env.layout;
      buf.plan = cfg.env.plan;
      buf.flows = cfg.env.flows;
      buf.norm = norm;
      AutoencoderConfig ae = cfg.ae;
      ae.latent = latent;
      const auto states = collect_state_buffer(buf, derive_seed(seed, 40));
      auto trained = train_autoencoder(states, ae, derive_seed(seed, 41));
      return Representation::latent(std::move(trained.encoder), norm);
    }
  }
  throw ConfigError("unknown representation '" + cfg.repr + "'");
}

std::unique_ptr<Controller> make_controller(const ExperimentConfig& cfg,
                                            std::uint64_t seed) {
  if (cfg.controller == "fixed") return std::make_unique<FixedTimeController>();
  if (cfg.controller == "webster") {
    return std::make_unique<DynamicWebsterController>(
        cfg.env.layout, cfg.env.plan, cfg.env.flows, cfg.webster_interval,
        cfg.webster_window);
  }
  if (is_learned(cfg.controller)) {
    if (cfg.weights.empty()) {
      throw ConfigError(cfg.controller + " controller needs a weights file");
    }
    PolicyBundle b = load_bundle(with_seed(cfg.weights, seed));
    if (b.algorithm != cfg.controller) {
      throw ConfigError("weights hold a " + b.algorithm + " policy, not " +
                        cfg.controller);
    }
    return std::make_unique<PolicyController>(std::move(b));
  }
  throw ConfigError("unknown controller '" + cfg.controller + "'");
}

TrainOutcome train_policy(const ExperimentConfig& cfg, std::uint64_t seed,
                          const PpoProgress& progress) {
  TrainOutcome out;
  out.bundle.seed = seed;
  if (cfg.controller == "dqn") {
    TrafficEnvConfig env = cfg.env;
    env.reward.kind = RewardKind::kRescoWait;
    auto repr = Representation::lane_features();
    DqnResult r = train_dqn(traffic_env_factory(env, repr), cfg.dqn, seed);
    out.bundle.algorithm = "dqn";
    out.bundle.repr = repr;
    out.bundle.reward = env.reward.kind;
    out.bundle.policy = std::move(r.q_network);
    out.dqn_log = std::move(r.log);
    return out;
  }
  if (cfg.controller != "ppo") {
    throw ConfigError("only ppo and dqn controllers are trained");
  }
  auto repr = build_representation(cfg, seed);
  PpoResult r = train_ppo(traffic_env_factory(cfg.env, repr), cfg.ppo, seed, progress);
  out.bundle.algorithm = "ppo";
  out.bundle.repr = std::move(repr);
  out.bundle.reward = cfg.env.reward.kind;
  out.bundle.policy = std::move(r.policy);
  out.bundle.value = std::move(r.value);
  out.ppo_log = std::move(r.log);
  return out;
}

std::uint64_t evaluation_seed(std::uint64_t seed) { return derive_seed(seed, 1000); }

EpisodeResult run_episode(const ExperimentConfig& cfg, Controller& controller,
                          std::uint64_t seed, const EpisodeOptions& opts) {
  Simulation sim(cfg.env.layout, cfg.env.plan, cfg.env.flows, evaluation_seed(seed));
  sim.set_event_logging(opts.log_events);
  CycleTracker tracker;
  tracker.keep_tick_logs(opts.keep_tick_logs);
  EpisodeResult res;
  res.horizon_s = cfg.horizon_s;
  for (int t = 0; t < cfg.horizon_s; ++t) {
    const TickReport r = sim.step();
    tracker.on_tick(sim, r);
    controller.observe_tick(sim, r);
    if (opts.record_ticks) res.ticks.push_back(r);
    if (sim.at_decision_point()) sim.apply_action(controller.decide(sim));
  }
  res.cycles = tracker.records();
  res.cycle_tick_logs = tracker.tick_logs();
  if (opts.log_events) res.events = sim.events();
  return res;
}

RunSummary summarize_run(const std::string& config_id, std::uint64_t seed,
                         const EpisodeResult& episode) {
  RunSummary s;
  s.config_id = config_id;
  s.seed = seed;
  s.horizon_s = episode.horizon_s;
  s.cycles = episode.cycles;
  s.mean_q_cycle = mean_q_cycle(s.cycles);
  return s;
}

std::vector<RunSummary> run_grid(
    std::span<const GridJob> jobs, int workers,
    const std::function<RunSummary(const GridJob&)>& run_job) {
  std::vector<RunSummary> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = run_job(jobs[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  const int n = std::clamp<int>(workers, 1, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<ExperimentConfig> grid_from_config(const KeyValueConfig& cfg) {
  const auto ids_text = cfg.get("experiment.configs");
  if (!ids_text) throw ConfigError("comparison needs experiment.configs");
  std::vector<ExperimentConfig> out;
  for (const auto& raw : split(*ids_text, ',')) {
    const std::string id = trim(raw);
    if (id.empty()) continue;
    KeyValueConfig merged = cfg;
    const std::string prefix = id + ".";
    for (const auto& key : cfg.keys_with_prefix(prefix)) {
      merged.set(key.substr(prefix.size()), *cfg.get(key));
    }
    ExperimentConfig e = experiment_from_config(merged);
    e.id = id;
    e.validate();
    out.push_back(std::move(e));
  }
  if (out.empty()) throw ConfigError("experiment.configs is empty");
  return out;
}

std::vector<SummaryRow> compare(std::span<const RunSummary> runs) {
  std::vector<SummaryRow> rows;
  if (runs.empty()) return rows;
  for (const auto& r : runs) {
    if (r.horizon_s != runs.front().horizon_s) {
      throw ConfigError("runs disagree on the horizon (" +
                        std::to_string(r.horizon_s) + " vs " +
                        std::to_string(runs.front().horizon_s) + " s)");
    }
  }
  std::vector<std::string> order;
  for (const auto& r : runs) {
    if (std::find(order.begin(), order.end(), r.config_id) == order.end()) {
      order.push_back(r.config_id);
    }
  }
  for (const auto& id : order) {
    SummaryRow row;
    row.config_id = id;
    std::vector<double> means;
    std::map<std::string, std::pair<PhaseArray<double>, int>> acc;
    for (const auto& r : runs) {
      if (r.config_id != id) continue;
      means.push_back(r.mean_q_cycle);
      for (const auto& c : r.cycles) {
        auto& [sum, n] = acc[c.regime.empty() ? "all" : c.regime];
        for (int p = 0; p < kNumPhases; ++p) sum[p] += c.phase_max_queue[p];
        ++n;
      }
    }
    row.num_seeds = static_cast<int>(means.size());
    for (double m : means) row.mean_q += m;
    row.mean_q /= static_cast<double>(means.size());
    if (means.size() > 1) {
      double ss = 0.0;
      for (double m : means) ss += (m - row.mean_q) * (m - row.mean_q);
      row.std_q = std::sqrt(ss / static_cast<double>(means.size() - 1));
    }
    for (const auto& [regime, sn] : acc) {
      PhaseArray<double> m{};
      for (int p = 0; p < kNumPhases; ++p) m[p] = sn.first[p] / sn.second;
      row.regime_phase_means[regime] = m;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  std::vector<std::string> regimes;
  for (const auto& r : rows) {
    for (const auto& [name, _] : r.regime_phase_means) {
      if (std::find(regimes.begin(), regimes.end(), name) == regimes.end()) {
        regimes.push_back(name);
      }
    }
  }
  const auto old = out.precision(10);
  out << "config_id,n_seeds,mean_Q,std_Q";
  for (const auto& g : regimes) {
    for (int p = 1; p <= kNumPhases; ++p) out << ',' << g << "_phase" << p;
  }
  out << '\n';
  for (const auto& r : rows) {
    out << r.config_id << ',' << r.num_seeds << ',' << r.mean_q << ',' << r.std_q;
    for (const auto& g : regimes) {
      const auto it = r.regime_phase_means.find(g);
      for (int p = 0; p < kNumPhases; ++p) {
        out << ',';
        if (it != r.regime_phase_means.end()) out << it->second[p];
      }
    }
    out << '\n';
  }
  out.precision(old);
}

std::vector<SummaryRow> read_summary_csv(std::istream& in) {
  std::vector<SummaryRow> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  const auto header = split(line, ',');
  if (header.size() < 4 || (header.size() - 4) % kNumPhases != 0) {
    throw IoError("summary.csv header is malformed");
  }
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw IoError("summary.csv row has wrong field count");
    SummaryRow r;
    r.config_id = f[0];
    r.num_seeds = static_cast<int>(parse_int(f[1], "n_seeds"));
    r.mean_q = parse_double(f[2], "mean_Q");
    r.std_q = parse_double(f[3], "std_Q");
    for (std::size_t c = 4; c < f.size(); c += kNumPhases) {
      if (trim(f[c]).empty()) continue;
      const std::string regime = header[c].substr(0, header[c].rfind("_phase"));
      PhaseArray<double> m{};
      for (int p = 0; p < kNumPhases; ++p) m[p] = parse_double(f[c + p], "phase mean");
      r.regime_phase_means[regime] = m;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_plot_script(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "plot.py");
  if (!out) throw IoError("cannot write " + (dir / "plot.py").string());
  out << R"PY(#!/usr/bin/env python3
# Plots summary.csv and every cycles.csv below this directory.
import csv, glob, os, sys
import matplotlib.pyplot as plt

root = os.path.dirname(os.path.abspath(__file__))

rows = list(csv.DictReader(open(os.path.join(root, "summary.csv"))))
fig, ax = plt.subplots()
ax.bar([r["config_id"] for r in rows], [float(r["mean_Q"]) for r in rows],
       yerr=[float(r["std_Q"]) for r in rows], capsize=4)
ax.set_ylabel("mean Q_cycle (veh)")
fig.savefig(os.path.join(root, "summary.png"), dpi=150)

regimes = sorted({k.rsplit("_phase", 1)[0] for k in rows[0] if "_phase" in k})
fig, axes = plt.subplots(1, len(regimes), figsize=(4 * len(regimes), 3), squeeze=False)
for ax, g in zip(axes[0], regimes):
    for r in rows:
        vals = [float(r[f"{g}_phase{p}"] or "nan") for p in range(1, 5)]
        ax.plot(range(1, 5), vals, marker="o", label=r["config_id"])
    ax.set_title(g)
    ax.set_xlabel("phase")
axes[0][0].set_ylabel("mean phase max queue (veh)")
axes[0][-1].legend()
fig.savefig(os.path.join(root, "regimes.png"), dpi=150)

for path in sorted(glob.glob(os.path.join(root, "**", "cycles.csv"), recursive=True)):
    cyc = list(csv.DictReader(open(path)))
    fig, (a, b) = plt.subplots(1, 2, figsize=(9, 3))
    for p in range(1, 5):
        a.scatter([float(c[f"pq{p}"]) for c in cyc], [float(c[f"g{p}"]) for c in cyc],
                  s=8, label=f"phase {p}")
    a.set_xlabel("phase max queue")
    a.set_ylabel("green (s)")
    a.legend()
    b.scatter([float(c["cycle_len_s"]) for c in cyc], [float(c["Q_cycle"]) for c in cyc], s=8)
    b.set_xlabel("cycle length (s)")
    b.set_ylabel("Q_cycle")
    fig.tight_layout()
    fig.savefig(os.path.splitext(path)[0] + ".png", dpi=150)
)PY";
}

}  // namespace tsc
