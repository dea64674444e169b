#ifndef TSC_EXPERIMENT_HPP_
#define TSC_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsc/autoencoder.hpp"
#include "tsc/baselines.hpp"
#include "tsc/config.hpp"
#include "tsc/dqn.hpp"
#include "tsc/env.hpp"
#include "tsc/metrics.hpp"
#include "tsc/policy_bundle.hpp"
#include "tsc/ppo.hpp"

namespace tsc {

// Everything one (controller, representation, reward) configuration needs.
//
// Keys: experiment.{id, controller, repr, reward, seeds, horizon, out,
// weights, workers}, repr.{encoder, cycle_count_norm, kplanes_seed,
// kplanes_resolution, kplanes_features}, webster.{interval, window},
// ae.buffer_states, plus the layout., plan., flow., reward., ppo., dqn. and
// ae. families. Paths may contain "{seed}".
struct ExperimentConfig {
  std::string id = "run";
  std::string controller = "fixed";  // fixed | webster | ppo | dqn
  std::string repr = "expanded";
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int horizon_s = 7200;
  std::filesystem::path output_dir = "out";
  std::string weights;   // trained bundle for ppo/dqn evaluation
  std::string encoder;   // pretrained autoencoder for aeK
  int workers = 1;
  int webster_interval = 145;
  int webster_window = 900;
  double cycle_count_norm = 1000.0;
  std::uint64_t kplanes_seed = 7;
  int kplanes_resolution = 8;
  int kplanes_features = 16;
  int ae_buffer_states = 10000;
  TrafficEnvConfig env;
  PpoConfig ppo;
  DqnConfig dqn;
  AutoencoderConfig ae;

  // Throws ConfigError: no seeds, horizon shorter than one cycle, unknown
  // controller/representation, or ppo/dqn without a learned controller.
  void validate() const;
};

ExperimentConfig experiment_from_config(const KeyValueConfig& cfg,
                                        ExperimentConfig base = {});
// Replaces every "{seed}" in `pattern`.
std::string with_seed(const std::string& pattern, std::uint64_t seed);

// Greedy controller for a trained bundle. Tracks the approach queues at the
// previous decision point, as during training.
class PolicyController : public Controller {
 public:
  explicit PolicyController(PolicyBundle bundle);
  std::string name() const override { return bundle_.algorithm; }
  int decide(const Simulation& sim) override;
  const PolicyBundle& bundle() const { return bundle_; }

 private:
  PolicyBundle bundle_;
  ApproachArray<int> prev_queues_{};
};

// Observation scheme of a learned controller. aeK loads the configured
// encoder or, with none configured, pretrains one on a fresh buffer.
Representation build_representation(const ExperimentConfig& cfg,
                                     std::uint64_t seed);

// Throws IoError when a learned controller's weights file is missing.
std::unique_ptr<Controller> make_controller(const ExperimentConfig& cfg,
                                            std::uint64_t seed);

struct TrainOutcome {
  PolicyBundle bundle;
  std::vector<PpoLogRow> ppo_log;
  std::vector<DqnLogRow> dqn_log;
};

TrainOutcome train_policy(const ExperimentConfig& cfg, std::uint64_t seed,
                          const PpoProgress& progress = {});

struct EpisodeOptions {
  bool log_events = false;
  bool keep_tick_logs = false;
  bool record_ticks = false;
};

struct EpisodeResult {
  std::vector<CycleRecord> cycles;
  std::vector<std::vector<LaneArray<int>>> cycle_tick_logs;
  std::vector<Event> events;
  std::vector<TickReport> ticks;
  int horizon_s = 0;
};

// Simulation seed used by run_episode for evaluation seed `seed`.
std::uint64_t evaluation_seed(std::uint64_t seed);

// Steps the horizon, letting the controller see every tick and act at each
// decision point.
EpisodeResult run_episode(const ExperimentConfig& cfg, Controller& controller,
                          std::uint64_t seed, const EpisodeOptions& opts = {});

struct RunSummary {
  std::string config_id;
  std::uint64_t seed = 0;
  int horizon_s = 0;
  double mean_q_cycle = 0.0;
  std::vector<CycleRecord> cycles;
};

RunSummary summarize_run(const std::string& config_id, std::uint64_t seed,
                         const EpisodeResult& episode);

struct GridJob {
  ExperimentConfig config;
  std::uint64_t seed = 0;
};

// Runs every job on at most `workers` threads; results keep job order. The
// first exception thrown by a job is rethrown after all workers stop.
std::vector<RunSummary> run_grid(
    std::span<const GridJob> jobs, int workers,
    const std::function<RunSummary(const GridJob&)>& run_job);

// Jobs of a comparison file: experiment.configs lists config ids, each
// overridden by its "<id>." keys on top of the shared keys.
std::vector<ExperimentConfig> grid_from_config(const KeyValueConfig& cfg);

struct SummaryRow {
  std::string config_id;
  int num_seeds = 0;
  double mean_q = 0.0;
  double std_q = 0.0;  // sample standard deviation across seeds
  // regime -> per-phase mean of the per-cycle phase max queue
  std::map<std::string, PhaseArray<double>> regime_phase_means;
};

// Groups runs by config id (first-appearance order). Throws ConfigError
// when runs disagree on the horizon.
std::vector<SummaryRow> compare(std::span<const RunSummary> runs);

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);
std::vector<SummaryRow> read_summary_csv(std::istream& in);

// Writes a matplotlib script that plots summary.csv and the per-run
// cycles.csv files found under `dir`.
void write_plot_script(const std::filesystem::path& dir);

}  // namespace tsc

#endif  // TSC_EXPERIMENT_HPP_
