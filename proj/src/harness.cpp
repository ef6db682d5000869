#include "emberops/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "emberops/errors.hpp"

namespace emberops {

using ordered_json = nlohmann::ordered_json;

std::uint64_t episode_seed(std::uint64_t master_seed, std::uint64_t episode_index) {
  return hash64(master_seed, episode_index);
}

std::vector<double> RunLog::final_moes() const {
  std::vector<double> out;
  out.reserve(episodes.size());
  for (const EpisodeRecord& e : episodes) out.push_back(e.final_moe);
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

EpisodeRecord begin_episode(WildfireEnv& env, int episode, std::uint64_t seed) {
  env.reset(seed);
  EpisodeRecord rec;
  rec.episode = episode;
  rec.seed = seed;
  rec.initial_moe = env.initial_moe();
  return rec;
}

void record_step(EpisodeRecord& rec, std::vector<int> actions, const StepResult& r) {
  rec.step_log.push_back({static_cast<int>(rec.step_log.size()), std::move(actions), r.reward, r.moe, r.termination});
}

void finish_episode(EpisodeRecord& rec, const WildfireEnv& env) {
  rec.final_moe = env.moe();
  rec.steps = env.steps_taken();
  rec.termination = env.termination();
}

}  // namespace

EpisodeRecord rollout_policy(WildfireEnv& env, const PolicyNetwork& net, ActionMode mode, int episode,
                             std::uint64_t seed, Trajectory* trajectory) {
  EpisodeRecord rec = begin_episode(env, episode, seed);
  if (trajectory) trajectory->clear();
  RngStream rng(hash64(seed, salt::kPolicy));
  StateVector state = env.observe();
  while (!env.done()) {
    const PolicyOutput out = net.forward(state);
    const SampledAction act = mode == ActionMode::Sample ? sample_actions(out.logits, rng) : argmax_actions(out.logits);
    const StepResult r = env.step(act.actions);
    if (trajectory) trajectory->push(state, act.actions, act.log_prob, r.reward, out.value, r.done);
    record_step(rec, act.actions, r);
    state = r.next_state;
  }
  finish_episode(rec, env);
  return rec;
}

EpisodeRecord rollout_random(WildfireEnv& env, int episode, std::uint64_t seed) {
  EpisodeRecord rec = begin_episode(env, episode, seed);
  RngStream rng(hash64(seed, salt::kBaseline));
  std::vector<int> actions(static_cast<std::size_t>(env.fleet_size()));
  while (!env.done()) {
    for (int& a : actions) a = static_cast<int>(uniform01(rng) * kTacticCount);
    const StepResult r = env.step(actions);
    record_step(rec, actions, r);
  }
  finish_episode(rec, env);
  return rec;
}

std::string format_step(const EpisodeRecord& rec, const StepRecord& s) {
  ordered_json j;
  j["episode"] = rec.episode;
  j["step"] = s.step;
  j["actions"] = s.actions;
  j["reward"] = s.reward;
  j["moe"] = s.moe;
  j["termination"] = to_string(s.termination);
  j["seed"] = rec.seed;
  return j.dump();
}

std::string format_summary(const EpisodeRecord& rec) {
  ordered_json j;
  j["episode"] = rec.episode;
  j["final_moe"] = rec.final_moe;
  j["steps"] = rec.steps;
  j["termination"] = to_string(rec.termination);
  j["seed"] = rec.seed;
  j["wall_ms"] = rec.wall_ms;
  return j.dump();
}

std::string format_episode(const EpisodeRecord& rec) {
  std::string out;
  for (const StepRecord& s : rec.step_log) out += format_step(rec, s) + "\n";
  out += format_summary(rec) + "\n";
  return out;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string format_update(int episode, const UpdateDiagnostics& d) {
  ordered_json j;
  j["episode"] = episode;
  j["clip_fraction"] = d.clip_fraction;
  j["approx_kl"] = d.approx_kl;
  j["post_update_kl"] = d.post_update_kl;
  j["policy_loss"] = d.policy_loss;
  j["value_loss"] = d.value_loss;
  j["entropy"] = d.entropy;
  j["first_minibatch_max_ratio_deviation"] = d.first_minibatch_max_ratio_deviation;
  j["minibatches"] = d.minibatches;
  return j.dump();
}

}  // namespace

void write_run_log(const std::filesystem::path& path, const RunLog& log) {
  std::ofstream out = open_out(path);
  for (const EpisodeRecord& rec : log.episodes) out << format_episode(rec);
  if (!out) throw Error("cannot write " + path.string());
}

RunLog read_run_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open log " + path.string());
  RunLog log;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(lineno), e.what());
    }
    if (!j.contains("final_moe")) continue;
    try {
      EpisodeRecord rec;
      rec.episode = j.at("episode").get<int>();
      rec.final_moe = j.at("final_moe").get<double>();
      rec.steps = j.at("steps").get<int>();
      rec.termination = termination_from_string(j.at("termination").get<std::string>());
      rec.seed = j.at("seed").get<std::uint64_t>();
      rec.wall_ms = j.value("wall_ms", 0.0);
      log.episodes.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(lineno), e.what());
    }
  }
  return log;
}

TrainResult train(const Scenario& scenario, const TrainOptions& options, const TrainCallback& callback) {
  if (options.episodes < 1) throw ValidationError("episodes", "must be at least 1");
  validate(options.ppo);
  WildfireEnv env(scenario);
  NetworkShape shape{env.observation_size(), env.fleet_size(), options.ppo.hidden};
  PpoLearner learner(PolicyNetwork::initialized(shape, options.master_seed), options.ppo);

  std::ofstream log_out, update_out;
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    log_out = open_out(*options.out_dir / "log.jsonl");
    update_out = open_out(*options.out_dir / "updates.jsonl");
  }
  auto checkpoint_now = [&] { return Checkpoint{learner.network(), env.normalization()}; };

  TrainResult result;
  Trajectory traj;
  for (int ep = 0; ep < options.episodes; ++ep) {
    const auto t0 = Clock::now();
    const std::uint64_t seed = episode_seed(options.master_seed, static_cast<std::uint64_t>(ep));
    EpisodeRecord rec = rollout_policy(env, learner.network(), ActionMode::Sample, ep, seed, &traj);

    const UpdateDiagnostics* diag = nullptr;
    if (traj.size() > 0) {
      attach_gae(traj, options.ppo);
      RngStream shuffle(hash64(seed, salt::kShuffle));
      result.updates.push_back(learner.update(traj, shuffle));
      diag = &result.updates.back();
    }
    if (options.record_wall_time) rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

    if (options.out_dir) {
      log_out << format_episode(rec);
      log_out.flush();
      if (diag) update_out << format_update(ep, *diag) << "\n";
      if ((ep + 1) % options.ppo.checkpoint_every == 0)
        save_checkpoint(*options.out_dir / ("checkpoint_" + std::to_string(ep + 1) + ".embr"), checkpoint_now());
      if (!log_out || !update_out) throw Error("cannot write training logs");
    }
    if (callback) callback(rec, diag);
    result.log.episodes.push_back(std::move(rec));
  }
  result.checkpoint = checkpoint_now();
  if (options.out_dir) save_checkpoint(*options.out_dir / "policy.embr", result.checkpoint);
  return result;
}

int worker_count() {
  if (const char* env = std::getenv("EMBEROPS_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return static_cast<int>(std::min<long>(n, 256));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Runs fn(env, index) for every episode across a pool of workers, each
// owning its environment. Records land at their episode index, so the
// result does not depend on scheduling.
RunLog parallel_episodes(const Scenario& scenario, int episodes, int workers, bool record_wall_time,
                         const std::function<EpisodeRecord(WildfireEnv&, int)>& fn) {
  if (episodes < 1) throw ValidationError("episodes", "must be at least 1");
  if (workers < 1) workers = worker_count();
  workers = std::min(workers, episodes);
  RunLog log;
  log.episodes.resize(static_cast<std::size_t>(episodes));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    try {
      WildfireEnv env(scenario);
      for (int i = next++; i < episodes; i = next++) {
        const auto t0 = Clock::now();
        EpisodeRecord rec = fn(env, i);
        if (record_wall_time) rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        log.episodes[static_cast<std::size_t>(i)] = std::move(rec);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = episodes;
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return log;
}

}  // namespace

RunLog run_random_baseline(const Scenario& scenario, int episodes, std::uint64_t master_seed, int workers,
                           bool record_wall_time) {
  return parallel_episodes(scenario, episodes, workers, record_wall_time, [&](WildfireEnv& env, int i) {
    return rollout_random(env, i, episode_seed(master_seed, static_cast<std::uint64_t>(i)));
  });
}

RunLog evaluate_policy(const Checkpoint& checkpoint, const Scenario& scenario, int episodes,
                       std::uint64_t master_seed, int workers, bool record_wall_time) {
  check_compatible(checkpoint, scenario);
  return parallel_episodes(scenario, episodes, workers, record_wall_time, [&](WildfireEnv& env, int i) {
    return rollout_policy(env, checkpoint.network, ActionMode::Argmax, i,
                          episode_seed(master_seed, static_cast<std::uint64_t>(i)));
  });
}

std::string format_stats_report(const StatsReport& r) {
  ordered_json j;
  j["n_a"] = r.n_a;
  j["n_b"] = r.n_b;
  j["mean_a"] = r.mean_a;
  j["mean_b"] = r.mean_b;
  j["median_a"] = r.median_a;
  j["median_b"] = r.median_b;
  j["u_a"] = r.u_a;
  j["u_b"] = r.u_b;
  j["z"] = r.z;
  j["p_value"] = r.p_value;
  j["method"] = r.exact ? "exact" : "normal";
  return j.dump(2);
}

PpoConfig parse_ppo_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("", e.what());
  }
  if (!j.is_object()) throw ParseError("", "config must be a JSON object");
  PpoConfig c;
  auto number = [&](const std::string& key, double& field) {
    if (!j[key].is_number()) throw ParseError(key, "expected a number");
    field = j[key].get<double>();
  };
  auto integer = [&](const std::string& key, int& field) {
    if (!j[key].is_number_integer()) throw ParseError(key, "expected an integer");
    field = j[key].get<int>();
  };
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "clip_epsilon") number(k, c.clip_epsilon);
    else if (k == "gamma") number(k, c.gamma);
    else if (k == "gae_lambda") number(k, c.gae_lambda);
    else if (k == "learning_rate") number(k, c.learning_rate);
    else if (k == "epochs_per_batch") integer(k, c.epochs_per_batch);
    else if (k == "minibatch_size") integer(k, c.minibatch_size);
    else if (k == "entropy_coef") number(k, c.entropy_coef);
    else if (k == "value_coef") number(k, c.value_coef);
    else if (k == "max_grad_norm") number(k, c.max_grad_norm);
    else if (k == "hidden") integer(k, c.hidden);
    else if (k == "checkpoint_every") integer(k, c.checkpoint_every);
    else if (k == "adam_beta1") number(k, c.adam_beta1);
    else if (k == "adam_beta2") number(k, c.adam_beta2);
    else if (k == "adam_eps") number(k, c.adam_eps);
    else if (k == "normalize_advantages") {
      if (!it->is_boolean()) throw ParseError(k, "expected true or false");
      c.normalize_advantages = it->get<bool>();
    } else {
      throw ParseError(k, "unknown config key");
    }
  }
  validate(c);
  return c;
}

PpoConfig load_ppo_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_ppo_config(text);
}

}  // namespace emberops
