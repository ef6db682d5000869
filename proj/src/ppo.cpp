#include "emberops/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "emberops/errors.hpp"

namespace emberops {

void validate(const PpoConfig& c) {
  auto fail = [](const char* key, const char* what) { throw ValidationError(key, what); };
  if (!(c.clip_epsilon > 0.0 && c.clip_epsilon < 1.0)) fail("ppo.clip_epsilon", "must lie in (0, 1)");
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) fail("ppo.gamma", "must lie in (0, 1]");
  if (!(c.gae_lambda > 0.0 && c.gae_lambda <= 1.0)) fail("ppo.gae_lambda", "must lie in (0, 1]");
  if (!(c.learning_rate > 0.0)) fail("ppo.learning_rate", "must be positive");
  if (c.epochs_per_batch < 1) fail("ppo.epochs_per_batch", "must be at least 1");
  if (c.minibatch_size < 1 || c.minibatch_size > 96) fail("ppo.minibatch_size", "must lie in 1..96");
  if (!(c.entropy_coef >= 0.0)) fail("ppo.entropy_coef", "must be non-negative");
  if (!(c.value_coef >= 0.0)) fail("ppo.value_coef", "must be non-negative");
  if (!(c.max_grad_norm > 0.0)) fail("ppo.max_grad_norm", "must be positive");
  if (c.hidden < 1) fail("ppo.hidden", "must be at least 1");
  if (c.checkpoint_every < 1) fail("ppo.checkpoint_every", "must be at least 1");
  if (!(c.adam_beta1 >= 0.0 && c.adam_beta1 < 1.0)) fail("ppo.adam_beta1", "must lie in [0, 1)");
  if (!(c.adam_beta2 >= 0.0 && c.adam_beta2 < 1.0)) fail("ppo.adam_beta2", "must lie in [0, 1)");
  if (!(c.adam_eps > 0.0)) fail("ppo.adam_eps", "must be positive");
}

void Trajectory::clear() { *this = Trajectory{}; }

void Trajectory::push(std::vector<double> state, std::vector<int> action, double log_prob, double reward,
                      double value, bool done) {
  states.push_back(std::move(state));
  actions.push_back(std::move(action));
  log_probs.push_back(log_prob);
  rewards.push_back(reward);
  values.push_back(value);
  dones.push_back(done);
}

GaeResult compute_gae(const Trajectory& tr, double gamma, double lambda, bool normalize) {
  const std::size_t n = tr.size();
  if (n == 0 || !tr.dones.back()) throw IncompleteTrajectory("trajectory must end with a terminal step");
  if (tr.values.size() != n || tr.dones.size() != n)
    throw IncompleteTrajectory("trajectory sequences differ in length");

  GaeResult r;
  r.advantages.assign(n, 0.0);
  r.returns.assign(n, 0.0);
  double next_adv = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double live = tr.dones[i] ? 0.0 : 1.0;
    const double next_value = i + 1 < n ? tr.values[i + 1] : 0.0;
    const double delta = tr.rewards[i] + gamma * next_value * live - tr.values[i];
    next_adv = delta + gamma * lambda * live * next_adv;
    r.advantages[i] = next_adv;
    r.returns[i] = next_adv + tr.values[i];
  }
  if (normalize) {
    const double mean = std::accumulate(r.advantages.begin(), r.advantages.end(), 0.0) / n;
    double var = 0.0;
    for (double a : r.advantages) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / n);
    for (double& a : r.advantages) a = (a - mean) / (sd + 1e-8);
  }
  return r;
}

void attach_gae(Trajectory& tr, const PpoConfig& config) {
  GaeResult g = compute_gae(tr, config.gamma, config.gae_lambda, config.normalize_advantages);
  tr.advantages = std::move(g.advantages);
  tr.returns = std::move(g.returns);
}

MinibatchLoss ppo_loss(const PolicyNetwork& net, const Trajectory& tr, std::span<const std::size_t> batch,
                       const PpoConfig& config, std::vector<double>* grad) {
  MinibatchLoss out;
  if (batch.empty()) return out;
  if (tr.advantages.size() != tr.size() || tr.returns.size() != tr.size())
    throw IncompleteTrajectory("advantages and returns must be computed before the update");
  if (grad) grad->assign(net.params().size(), 0.0);

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const double eps = config.clip_epsilon;
  ForwardCache cache;
  std::vector<std::vector<double>> dlogits;

  for (std::size_t idx : batch) {
    net.forward(tr.states[idx], cache);
    const PolicyOutput& o = cache.out;
    const std::vector<int>& act = tr.actions[idx];
    const double adv = tr.advantages[idx];

    double logp = 0.0;
    double entropy = 0.0;
    std::vector<std::vector<double>> probs(o.logits.size());
    std::vector<std::vector<double>> logps(o.logits.size());
    for (std::size_t a = 0; a < o.logits.size(); ++a) {
      logps[a] = log_softmax(o.logits[a]);
      probs[a].resize(logps[a].size());
      double h = 0.0;
      for (std::size_t k = 0; k < logps[a].size(); ++k) {
        probs[a][k] = std::exp(logps[a][k]);
        h -= probs[a][k] * logps[a][k];
      }
      entropy += h;
      logp += logps[a][act[a]];
    }

    const double log_ratio = logp - tr.log_probs[idx];
    const double ratio = std::exp(log_ratio);
    const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
    const double unclipped_obj = ratio * adv;
    const double clipped_obj = clipped * adv;
    const double surrogate = std::min(unclipped_obj, clipped_obj);
    const double verr = o.value - tr.returns[idx];

    out.policy_loss -= surrogate * inv_b;
    out.value_loss += verr * verr * inv_b;
    out.entropy += entropy * inv_b;
    if (std::abs(ratio - 1.0) > eps) out.clip_fraction += inv_b;
    out.approx_kl += ((ratio - 1.0) - log_ratio) * inv_b;
    out.max_ratio_deviation = std::max(out.max_ratio_deviation, std::abs(ratio - 1.0));

    if (!grad) continue;
    // d(-surrogate)/d(logp): the unclipped branch carries r * A, the
    // clipped branch is flat in theta.
    const double dlogp = unclipped_obj <= clipped_obj ? -ratio * adv * inv_b : 0.0;
    const double dvalue = config.value_coef * 2.0 * verr * inv_b;
    dlogits.assign(o.logits.size(), {});
    for (std::size_t a = 0; a < o.logits.size(); ++a) {
      double h = 0.0;
      for (std::size_t k = 0; k < probs[a].size(); ++k) h -= probs[a][k] * logps[a][k];
      dlogits[a].resize(probs[a].size());
      for (std::size_t k = 0; k < probs[a].size(); ++k) {
        const double indicator = static_cast<int>(k) == act[a] ? 1.0 : 0.0;
        const double d_entropy = -probs[a][k] * (logps[a][k] + h);
        dlogits[a][k] = dlogp * (indicator - probs[a][k]) - config.entropy_coef * inv_b * d_entropy;
      }
    }
    net.backward(cache, dlogits, dvalue, *grad);
  }
  out.total = out.policy_loss + config.value_coef * out.value_loss - config.entropy_coef * out.entropy;
  return out;
}

PpoLearner::PpoLearner(PolicyNetwork net, PpoConfig config)
    : net_(std::move(net)), config_(config), m_(net_.params().size(), 0.0), v_(net_.params().size(), 0.0) {
  validate(config_);
}

void PpoLearner::adam_step(const std::vector<double>& grad) {
  ++t_;
  const double b1 = config_.adam_beta1, b2 = config_.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  std::vector<double>& p = net_.params();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    p[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.adam_eps);
  }
}

UpdateDiagnostics PpoLearner::update(const Trajectory& tr, RngStream& rng) {
  const std::size_t n = tr.size();
  UpdateDiagnostics diag;
  if (n == 0) return diag;

  const PolicyNetwork saved_net = net_;
  const std::vector<double> saved_m = m_, saved_v = v_;
  const std::uint64_t saved_t = t_;

  std::vector<std::size_t> order(n);
  std::vector<double> grad;
  const std::size_t mb = static_cast<std::size_t>(config_.minibatch_size);
  for (int epoch = 0; epoch < config_.epochs_per_batch; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Fisher-Yates on raw-bit uniforms.
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
      std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    for (std::size_t start = 0; start < n; start += mb) {
      const std::span<const std::size_t> batch(order.data() + start, std::min(mb, n - start));
      const MinibatchLoss loss = ppo_loss(net_, tr, batch, config_, &grad);

      double norm2 = 0.0;
      for (double g : grad) norm2 += g * g;
      // A NaN advantage zeroes the surrogate gradient, so the loss is checked too.
      if (!std::isfinite(norm2) || !std::isfinite(loss.total)) {
        net_ = saved_net;
        m_ = saved_m;
        v_ = saved_v;
        t_ = saved_t;
        throw NonFiniteGradient("non-finite gradient during the update");
      }
      const double norm = std::sqrt(norm2);
      if (norm > config_.max_grad_norm) {
        const double scale = config_.max_grad_norm / norm;
        for (double& g : grad) g *= scale;
      }

      if (diag.minibatches == 0) {
        diag.first_minibatch_max_ratio_deviation = loss.max_ratio_deviation;
        diag.first_minibatch_clip_fraction = loss.clip_fraction;
      }
      ++diag.minibatches;
      diag.clip_fraction += loss.clip_fraction;
      diag.approx_kl += loss.approx_kl;
      diag.policy_loss += loss.policy_loss;
      diag.value_loss += loss.value_loss;
      diag.entropy += loss.entropy;

      adam_step(grad);
    }
  }
  const double k = static_cast<double>(diag.minibatches);
  diag.clip_fraction /= k;
  diag.approx_kl /= k;
  diag.policy_loss /= k;
  diag.value_loss /= k;
  diag.entropy /= k;

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  diag.post_update_kl = ppo_loss(net_, tr, all, config_, nullptr).approx_kl;
  return diag;
}

}  // namespace emberops
