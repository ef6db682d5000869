// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: emberops_acceptance [scenario.json [emberops-cli]]

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "emberops/checkpoint.hpp"
#include "emberops/env.hpp"
#include "emberops/errors.hpp"
#include "emberops/fleet.hpp"
#include "emberops/harness.hpp"
#include "emberops/policy.hpp"
#include "emberops/ppo.hpp"
#include "emberops/scenario.hpp"
#include "emberops/stats.hpp"

using namespace emberops;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kMasterSeed = 1;
constexpr int kTrainEpisodes = 500;
constexpr int kBaselineEpisodes = 500;
constexpr int kEvalEpisodes = 200;
constexpr double kAlpha = 0.05;
constexpr double kMinImprovement = 0.02;
constexpr int kImprovementSeeds = 5;
constexpr int kImprovementRequired = 4;
constexpr double kTelescopeTol = 1e-9;
constexpr double kGradTol = 1e-4;
constexpr double kFiniteDiffStep = 1e-5;
constexpr double kKlLimit = 0.05;

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double wall_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double gaussian(RngStream& rng) {
  const double u1 = 1.0 - uniform01(rng), u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::vector<double> head(const std::vector<double>& x, std::size_t n) {
  return {x.begin(), x.begin() + static_cast<std::ptrdiff_t>(std::min(n, x.size()))};
}

std::vector<double> tail(const std::vector<double>& x, std::size_t n) {
  return {x.end() - static_cast<std::ptrdiff_t>(std::min(n, x.size())), x.end()};
}

void learning_criteria(const Scenario& scenario) {
  const auto t0 = std::chrono::steady_clock::now();
  TrainOptions opt;
  opt.episodes = kTrainEpisodes;
  opt.master_seed = kMasterSeed;
  const TrainResult trained = train(scenario, opt);
  const RunLog baseline = run_random_baseline(scenario, kBaselineEpisodes, kMasterSeed);
  const RunLog eval = evaluate_policy(trained.checkpoint, scenario, kEvalEpisodes, kMasterSeed);
  const double elapsed = wall_seconds(t0);

  const std::vector<double> ev = eval.final_moes(), base = baseline.final_moes();
  const StatsReport s = mann_whitney_u(ev, base);
  report("learning_effect", s.mean_a > s.mean_b && s.p_value < kAlpha,
         fmt("eval mean %.4f (n=%zu) vs baseline mean %.4f (n=%zu), U=%.1f, p=%.3g, %.1f s", s.mean_a, s.n_a,
             s.mean_b, s.n_b, s.u_a, s.p_value, elapsed));

  // Episodes share seeds index by index, so the first 200 baseline episodes
  // face the same fires as the evaluation.
  const std::vector<double> paired = head(base, ev.size());
  report("variance_reduction", iqr(ev) < iqr(paired),
         fmt("IQR eval %.4f < IQR baseline %.4f over %zu paired seeds", iqr(ev), iqr(paired), ev.size()));

  bool ratio_one = true;
  double max_dev = 0.0, max_kl = 0.0;
  for (const UpdateDiagnostics& d : trained.updates) {
    max_dev = std::max(max_dev, d.first_minibatch_max_ratio_deviation);
    max_kl = std::max(max_kl, d.post_update_kl);
    ratio_one = ratio_one && d.first_minibatch_max_ratio_deviation < 1e-12 && d.first_minibatch_clip_fraction == 0.0;
  }
  report("ppo_proximity", ratio_one && max_kl < kKlLimit,
         fmt("%zu updates: first-minibatch max |r-1| = %.2e, clip 0; max post-update KL %.4f < %.2f",
             trained.updates.size(), max_dev, max_kl, kKlLimit));

  int improved = 0;
  std::string per_seed;
  for (int k = 0; k < kImprovementSeeds; ++k) {
    const std::uint64_t seed = kMasterSeed + static_cast<std::uint64_t>(k);
    std::vector<double> moes;
    if (seed == kMasterSeed) {
      moes = trained.log.final_moes();
    } else {
      TrainOptions o = opt;
      o.master_seed = seed;
      moes = train(scenario, o).log.final_moes();
    }
    const double gain = mean(tail(moes, 100)) - mean(head(moes, 100));
    improved += gain >= kMinImprovement;
    per_seed += fmt("%s%llu:%+.4f", per_seed.empty() ? "" : " ", static_cast<unsigned long long>(seed), gain);
  }
  report("improvement_over_training", improved >= kImprovementRequired,
         fmt("last-100 minus first-100 mean >= %.2f on %d/%d seeds (%s)", kMinImprovement, improved,
             kImprovementSeeds, per_seed.c_str()));
}

void moe_algebra() {
  const RegionMaxima unit{1.0, 1.0, 1.0, 1.0};
  const bool anchors = compute_moe({}, unit, false) == 1.0 && compute_moe({1, 1, 1, 1}, unit, true) == -1.0 &&
                       compute_moe({0.5, 0.5, 0.5, 0.5}, unit, false) == 0.5;
  RngStream rng(404);
  const RegionMaxima mx{3.5e7, 7.4e8, 7.4e4, 116.0};
  int outside = 0;
  for (int i = 0; i < 10000; ++i) {
    const DamageLedger d{uniform01(rng) * mx.burnt_area, uniform01(rng) * mx.cost, uniform01(rng) * mx.emissions,
                         uniform01(rng) * mx.casualties};
    const double m = compute_moe(d, mx, uniform01(rng) < 0.5);
    outside += m < -1.0 || m > 1.0;
  }
  report("moe_algebra", anchors && outside == 0,
         fmt("anchors 1/-1/0.5 %s; %d of 10000 fuzzed ledgers outside [-1, 1]", anchors ? "exact" : "WRONG", outside));
}

void reward_telescoping(const Scenario& scenario) {
  WildfireEnv env(scenario);
  RngStream rng(hash64(kMasterSeed, 0x54454C45ULL));
  double worst = 0.0;
  std::vector<int> actions(static_cast<std::size_t>(env.fleet_size()));
  for (int ep = 0; ep < 100; ++ep) {
    env.reset(episode_seed(7, static_cast<std::uint64_t>(ep)));
    const double m0 = env.moe();
    double sum = 0.0;
    while (!env.done()) {
      for (int& a : actions) a = static_cast<int>(uniform01(rng) * kTacticCount);
      sum += env.step(actions).reward;
    }
    worst = std::max(worst, std::abs(sum - (env.moe() - m0)));
  }
  report("reward_telescoping", worst < kTelescopeTol,
         fmt("max |sum rewards - (MoE_T - MoE_0)| = %.2e over 100 random episodes", worst));
}

void gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  RngStream rng(31337);
  const PpoConfig cfg;
  double worst = 0.0;
  int checked = 0;
  for (int draw = 0; draw < 100; ++draw) {
    PolicyNetwork net(NetworkShape{4, 2, 8});
    for (double& p : net.params()) p = 0.5 * gaussian(rng);
    Trajectory tr;
    for (int t = 0; t < 6; ++t) {
      std::vector<double> s(4);
      for (double& x : s) x = uniform01(rng);
      const PolicyOutput out = net.forward(s);
      const SampledAction a = sample_actions(out.logits, rng);
      tr.push(s, a.actions, a.log_prob + 0.3 * gaussian(rng), 0.0, out.value, t == 5);
      tr.advantages.push_back(gaussian(rng));
      tr.returns.push_back(gaussian(rng));
    }
    std::vector<std::size_t> batch(tr.size());
    std::iota(batch.begin(), batch.end(), std::size_t{0});
    std::vector<double> grad;
    ppo_loss(net, tr, batch, cfg, &grad);
    for (std::size_t i = 0; i < net.params().size(); ++i) {
      const double saved = net.params()[i];
      net.params()[i] = saved + kFiniteDiffStep;
      const double up = ppo_loss(net, tr, batch, cfg, nullptr).total;
      net.params()[i] = saved - kFiniteDiffStep;
      const double down = ppo_loss(net, tr, batch, cfg, nullptr).total;
      net.params()[i] = saved;
      const double numeric = (up - down) / (2.0 * kFiniteDiffStep);
      worst = std::max(worst, std::abs(numeric - grad[i]) / std::max(1e-6, std::abs(numeric) + std::abs(grad[i])));
      ++checked;
    }
  }
  const double elapsed = wall_seconds(t0);
  report("gradient_check", worst < kGradTol && elapsed < 60.0,
         fmt("max relative error %.2e over 100 draws (%d coordinates), %.1f s", worst, checked, elapsed));
}

int run(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism(const std::string& scenario_path, const std::string& cli) {
  const fs::path root = fs::temp_directory_path() / ("emberops_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::string args = " train --quiet --seed 42 --episodes 20 --scenario " + scenario_path + " --out ";
  const int rc1 = run(cli + args + (root / "a").string());
  const int rc2 = run(cli + args + (root / "b").string());
  std::vector<std::string> files;
  bool same = rc1 == 0 && rc2 == 0;
  if (same) {
    for (const auto& e : fs::directory_iterator(root / "a")) files.push_back(e.path().filename().string());
    std::sort(files.begin(), files.end());
    std::set<std::string> other;
    for (const auto& e : fs::directory_iterator(root / "b")) other.insert(e.path().filename().string());
    same = other == std::set<std::string>(files.begin(), files.end()) &&
           std::find(files.begin(), files.end(), "policy.embr") != files.end() &&
           std::find(files.begin(), files.end(), "log.jsonl") != files.end();
    for (const std::string& f : files) same = same && slurp(root / "a" / f) == slurp(root / "b" / f);
  }
  std::string listing;
  for (const std::string& f : files) listing += (listing.empty() ? "" : ", ") + f;
  fs::remove_all(root);
  report("determinism", same,
         fmt("two CLI runs (train --seed 42 --episodes 20), exit %d/%d, byte-identical: %s", rc1, rc2,
             listing.c_str()));
}

void statistics_oracle() {
  RngStream rng(1000);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t na = 1 + static_cast<std::size_t>(uniform01(rng) * 30);
    const std::size_t nb = 1 + static_cast<std::size_t>(uniform01(rng) * 30);
    const int levels = trial % 2 == 0 ? 0 : 2 + trial % 7;
    std::vector<double> a(na), b(nb);
    for (double& x : a) x = levels ? std::floor(uniform01(rng) * levels) : uniform01(rng);
    for (double& x : b) x = levels ? std::floor(uniform01(rng) * levels) : uniform01(rng);
    double u = 0.0;
    for (double x : a)
      for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
    const StatsReport r = mann_whitney_u(a, b);
    mismatches += r.u_a != u || r.u_a + r.u_b != static_cast<double>(na * nb) || r.p_value < 0.0 || r.p_value > 1.0;
  }
  report("statistics_oracle", mismatches == 0,
         fmt("%d of 1000 random cases (n <= 30, with ties) differ from pairwise counting", mismatches));
}

void structural_fidelity(const Scenario& scenario) {
  WildfireEnv env(scenario);
  const std::size_t obs = env.reset(3).size();
  const bool length_ok = obs == static_cast<std::size_t>(16 + 6 * env.fleet_size());
  std::set<int> images;
  bool roundtrip = true;
  for (int i = 0; i < 24; ++i) {
    const Tactic t = decode_tactic(i);
    roundtrip = roundtrip && encode_tactic(t) == i;
    images.insert(static_cast<int>(t.select) * 100 + static_cast<int>(t.track) * 10 + static_cast<int>(t.suppress));
  }
  const RunLog runs = run_random_baseline(scenario, 50, 99);
  int longest = 0;
  for (const EpisodeRecord& e : runs.episodes) longest = std::max(longest, e.steps);
  const bool pass = length_ok && roundtrip && images.size() == 24 && longest <= 96;
  report("structural_fidelity", pass,
         fmt("observation length %zu = 16 + 6*%d; decode bijective over 0..23: %s; longest of 50 episodes %d <= 96",
             obs, env.fleet_size(), roundtrip && images.size() == 24 ? "yes" : "no", longest));
}

}  // namespace

int main(int argc, char** argv) {
  const std::string scenario_path = argc > 1 ? argv[1] : EMBEROPS_SCENARIO_PATH;
  const std::string cli = argc > 2 ? argv[2] : EMBEROPS_CLI_PATH;
  try {
    const Scenario scenario = load_scenario(scenario_path);
    learning_criteria(scenario);
    moe_algebra();
    reward_telescoping(scenario);
    gradient_check();
    determinism(scenario_path, cli);
    statistics_oracle();
    structural_fidelity(scenario);
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance: aborted with %s\n", e.what());
    return 1;
  }
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
