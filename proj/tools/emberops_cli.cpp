// emberops command line: train, baseline, eval, compare, replay, stats.
// Exit codes: 0 success, 2 validation or parse error, 3 runtime error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "emberops/checkpoint.hpp"
#include "emberops/errors.hpp"
#include "emberops/harness.hpp"
#include "emberops/scenario.hpp"
#include "emberops/stats.hpp"

namespace fs = std::filesystem;
using namespace emberops;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

void print_run_summary(const char* label, const RunLog& log) {
  const std::vector<double> moe = log.final_moes();
  std::fprintf(stderr, "%s: %zu episodes, mean MoE %.4f, median %.4f, IQR %.4f\n", label, moe.size(), mean(moe),
               median(moe), iqr(moe));
}

int cmd_train(const fs::path& scenario_path, int episodes, std::uint64_t seed, const std::string& config_path,
              const fs::path& out, bool wall, bool quiet) {
  const Scenario scenario = load_scenario(scenario_path);
  TrainOptions opt;
  if (!config_path.empty()) opt.ppo = load_ppo_config(config_path);
  opt.episodes = episodes;
  opt.master_seed = seed;
  opt.out_dir = out;
  opt.record_wall_time = wall;
  const TrainResult r = train(scenario, opt, [&](const EpisodeRecord& rec, const UpdateDiagnostics* d) {
    if (quiet || (rec.episode + 1) % 25 != 0) return;
    std::fprintf(stderr, "episode %d  moe %.4f  steps %d  %s", rec.episode + 1, rec.final_moe, rec.steps,
                 to_string(rec.termination).c_str());
    if (d) std::fprintf(stderr, "  kl %.2e  entropy %.3f", d->post_update_kl, d->entropy);
    std::fprintf(stderr, "\n");
  });
  if (!quiet) print_run_summary("train", r.log);
  return 0;
}

int cmd_baseline(const fs::path& scenario_path, int episodes, std::uint64_t seed, const fs::path& out, bool wall) {
  const Scenario scenario = load_scenario(scenario_path);
  const RunLog log = run_random_baseline(scenario, episodes, seed, worker_count(), wall);
  fs::create_directories(out);
  write_run_log(out / "log.jsonl", log);
  print_run_summary("baseline", log);
  return 0;
}

int cmd_eval(const fs::path& checkpoint_path, const fs::path& scenario_path, int episodes, std::uint64_t seed,
             const fs::path& out, bool wall) {
  const Scenario scenario = load_scenario(scenario_path);
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  const RunLog log = evaluate_policy(ck, scenario, episodes, seed, worker_count(), wall);
  fs::create_directories(out);
  write_run_log(out / "log.jsonl", log);
  print_run_summary("eval", log);
  return 0;
}

int cmd_compare(const fs::path& a, const fs::path& b) {
  const RunLog la = read_run_log(a);
  const RunLog lb = read_run_log(b);
  std::cout << format_stats_report(mann_whitney_u(la.final_moes(), lb.final_moes())) << "\n";
  return 0;
}

int cmd_replay(const fs::path& scenario_path, const fs::path& checkpoint_path, std::uint64_t seed,
               const fs::path& frames) {
  const Scenario scenario = load_scenario(scenario_path);
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  check_compatible(ck, scenario);
  fs::create_directories(frames);
  WildfireEnv env(scenario);
  StateVector state = env.reset(seed);
  int step = 0;
  write_frame_pgm(env.map(), frames / ("frame_" + std::to_string(step) + ".pgm"));
  while (!env.done()) {
    const SampledAction act = argmax_actions(ck.network.forward(state).logits);
    const StepResult r = env.step(act.actions);
    state = r.next_state;
    write_frame_pgm(env.map(), frames / ("frame_" + std::to_string(++step) + ".pgm"));
  }
  std::fprintf(stderr, "replay: %d steps, final MoE %.4f, %s\n", env.steps_taken(), env.moe(),
               to_string(env.termination()).c_str());
  return 0;
}

int cmd_stats(const fs::path& log_path, std::size_t window, const std::string& out_path, const std::string& box_path) {
  const RunLog log = read_run_log(log_path);
  const std::vector<double> moe = log.final_moes();
  const std::vector<double> ma = moving_average(moe, window);

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::trunc);
    if (!file) throw Error("cannot write " + out_path);
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  out.precision(17);
  out << "episode,final_moe,moving_average\n";
  for (std::size_t i = 0; i < moe.size(); ++i) {
    out << log.episodes[i].episode << "," << moe[i] << ",";
    if (i + 1 >= window) out << ma[i + 1 - window];
    out << "\n";
  }
  if (!box_path.empty()) {
    std::ofstream box(box_path, std::ios::trunc);
    if (!box) throw Error("cannot write " + box_path);
    box.precision(17);
    box << "min,q1,median,q3,max,iqr,mean,n\n"
        << quantile(moe, 0.0) << "," << quantile(moe, 0.25) << "," << median(moe) << "," << quantile(moe, 0.75)
        << "," << quantile(moe, 1.0) << "," << iqr(moe) << "," << mean(moe) << "," << moe.size() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wildfire mission sandbox: simulator, PPO coordinator and evaluation harness"};
  app.require_subcommand(1);

  std::string scenario, config, out, checkpoint, log_a, log_b, log, frames, csv_out, box_out;
  int episodes = 1;
  std::uint64_t seed = 0;
  std::size_t window = 25;
  bool wall = false, quiet = false;

  auto* train = app.add_subcommand("train", "train the PPO coordinator");
  train->add_option("--scenario", scenario, "scenario file")->required();
  train->add_option("--episodes", episodes, "training episodes")->required();
  train->add_option("--seed", seed, "master seed")->required();
  train->add_option("--config", config, "PPO config (JSON)");
  train->add_option("--out", out, "output directory")->required();
  train->add_flag("--record-wall-time", wall, "write measured wall_ms instead of 0");
  train->add_flag("--quiet", quiet, "no progress output");

  auto* baseline = app.add_subcommand("baseline", "random-tactics baseline");
  baseline->add_option("--scenario", scenario, "scenario file")->required();
  baseline->add_option("--episodes", episodes, "episodes")->required();
  baseline->add_option("--seed", seed, "master seed")->required();
  baseline->add_option("--out", out, "output directory")->required();
  baseline->add_flag("--record-wall-time", wall, "write measured wall_ms instead of 0");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint with argmax actions");
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--scenario", scenario, "scenario file")->required();
  eval->add_option("--episodes", episodes, "episodes")->required();
  eval->add_option("--seed", seed, "master seed")->required();
  eval->add_option("--out", out, "output directory")->required();
  eval->add_flag("--record-wall-time", wall, "write measured wall_ms instead of 0");

  auto* compare = app.add_subcommand("compare", "Mann-Whitney U on two run logs");
  compare->add_option("--log-a", log_a, "first log")->required();
  compare->add_option("--log-b", log_b, "second log")->required();

  auto* replay = app.add_subcommand("replay", "write per-step grid frames for one episode");
  replay->add_option("--scenario", scenario, "scenario file")->required();
  replay->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  replay->add_option("--seed", seed, "episode seed")->required();
  replay->add_option("--frames", frames, "frame directory")->required();

  auto* stats = app.add_subcommand("stats", "moving-average CSV of a run log");
  stats->add_option("--log", log, "run log")->required();
  stats->add_option("--window", window, "moving-average window")->capture_default_str();
  stats->add_option("--out", csv_out, "CSV file (default stdout)");
  stats->add_option("--box", box_out, "box-plot quartile CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*train) return cmd_train(scenario, episodes, seed, config, out, wall, quiet);
    if (*baseline) return cmd_baseline(scenario, episodes, seed, out, wall);
    if (*eval) return cmd_eval(checkpoint, scenario, episodes, seed, out, wall);
    if (*compare) return cmd_compare(log_a, log_b);
    if (*replay) return cmd_replay(scenario, checkpoint, seed, frames);
    if (*stats) return cmd_stats(log, window, csv_out, box_out);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  } catch (const CheckpointMismatch& e) {
    std::fprintf(stderr, "checkpoint mismatch: %s\n", e.what());
    return kExitValidation;
  } catch (const WindowTooLarge& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}
