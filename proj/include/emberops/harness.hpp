#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "emberops/checkpoint.hpp"
#include "emberops/env.hpp"
#include "emberops/ppo.hpp"
#include "emberops/scenario.hpp"
#include "emberops/stats.hpp"

namespace emberops {

std::uint64_t episode_seed(std::uint64_t master_seed, std::uint64_t episode_index);

struct StepRecord {
  int step = 0;
  std::vector<int> actions;
  double reward = 0.0;
  double moe = 0.0;
  Termination termination = Termination::Running;
};

struct EpisodeRecord {
  int episode = 0;
  std::uint64_t seed = 0;
  double initial_moe = 0.0;
  double final_moe = 0.0;
  int steps = 0;
  Termination termination = Termination::Running;
  double wall_ms = 0.0;
  std::vector<StepRecord> step_log;
};

struct RunLog {
  std::vector<EpisodeRecord> episodes;

  std::vector<double> final_moes() const;
};

enum class ActionMode { Sample, Argmax };

// Rolls out one full episode from env.reset(seed). When trajectory is given
// it receives states, actions, log-probs, rewards and values.
EpisodeRecord rollout_policy(WildfireEnv& env, const PolicyNetwork& net, ActionMode mode, int episode,
                             std::uint64_t seed, Trajectory* trajectory = nullptr);

// Independent uniform tactic per aircraft per step.
EpisodeRecord rollout_random(WildfireEnv& env, int episode, std::uint64_t seed);

struct TrainOptions {
  PpoConfig ppo;
  int episodes = 1;
  std::uint64_t master_seed = 0;
  std::optional<std::filesystem::path> out_dir;  // logs and checkpoints
  bool record_wall_time = false;  // off keeps logs byte-identical across runs
};

struct TrainResult {
  Checkpoint checkpoint;
  RunLog log;
  std::vector<UpdateDiagnostics> updates;  // one per episode with at least one step
};

// Called after every training episode; useful for progress output.
using TrainCallback = std::function<void(const EpisodeRecord&, const UpdateDiagnostics*)>;

TrainResult train(const Scenario& scenario, const TrainOptions& options, const TrainCallback& callback = {});

// Worker count from EMBEROPS_WORKERS, else the hardware concurrency.
int worker_count();

RunLog run_random_baseline(const Scenario& scenario, int episodes, std::uint64_t master_seed, int workers = 0,
                           bool record_wall_time = false);

// Argmax actions, no updates. Throws CheckpointMismatch.
RunLog evaluate_policy(const Checkpoint& checkpoint, const Scenario& scenario, int episodes,
                       std::uint64_t master_seed, int workers = 0, bool record_wall_time = false);

// JSON lines: one per step {episode, step, actions, reward, moe, termination,
// seed} followed by the episode summary {episode, final_moe, steps,
// termination, seed, wall_ms}.
std::string format_episode(const EpisodeRecord& record);
std::string format_step(const EpisodeRecord& record, const StepRecord& step);
std::string format_summary(const EpisodeRecord& record);
void write_run_log(const std::filesystem::path& path, const RunLog& log);

// Reads the summary lines of a log written by write_run_log.
RunLog read_run_log(const std::filesystem::path& path);

std::string format_stats_report(const StatsReport& report);

// Flat JSON object of PpoConfig fields; missing keys keep their defaults,
// unknown keys raise ParseError. Validated before returning.
PpoConfig parse_ppo_config(const std::string& text);
PpoConfig load_ppo_config(const std::filesystem::path& path);

}  // namespace emberops
