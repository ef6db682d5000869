#include "emberops/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "emberops/errors.hpp"

namespace emberops {

std::size_t NetworkShape::parameter_count() const {
  const std::size_t d = input_dim, h = hidden, a = fleet_size;
  return h * d + h + h * h + h + a * (kHeadSize * h + kHeadSize) + h + 1;
}

PolicyNetwork::PolicyNetwork(NetworkShape shape) : shape_(shape), params_(shape.parameter_count(), 0.0) {
  if (shape.input_dim <= 0 || shape.fleet_size <= 0 || shape.hidden <= 0)
    throw DimensionMismatch("network dimensions must be positive");
}

PolicyNetwork::Offsets PolicyNetwork::offsets() const {
  const std::size_t d = shape_.input_dim, h = shape_.hidden;
  Offsets o{};
  o.w1 = 0;
  o.b1 = o.w1 + h * d;
  o.w2 = o.b1 + h;
  o.b2 = o.w2 + h * h;
  o.heads = o.b2 + h;
  o.head_stride = kHeadSize * h + kHeadSize;
  o.wv = o.heads + o.head_stride * shape_.fleet_size;
  o.bv = o.wv + h;
  return o;
}

namespace {

double standard_normal(RngStream& rng) {
  // Box-Muller on raw-bit uniforms; u1 kept away from zero.
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Fills a rows x cols row-major block with a scaled (semi-)orthogonal matrix
// obtained by Gram-Schmidt on Gaussian vectors along the shorter side.
void orthogonal_block(double* out, std::size_t rows, std::size_t cols, double gain, RngStream& rng) {
  const bool transpose = rows < cols;
  const std::size_t n = transpose ? rows : cols;  // vectors to orthogonalise
  const std::size_t m = transpose ? cols : rows;  // their length
  std::vector<std::vector<double>> q(n, std::vector<double>(m));
  for (std::size_t k = 0; k < n; ++k) {
    for (double& v : q[k]) v = standard_normal(rng);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < k; ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < m; ++i) dot += q[k][i] * q[j][i];
        for (std::size_t i = 0; i < m; ++i) q[k][i] -= dot * q[j][i];
      }
    }
    double norm = 0.0;
    for (double v : q[k]) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : q[k]) v /= norm;
  }
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = gain * (transpose ? q[r][c] : q[c][r]);
}

}  // namespace

PolicyNetwork PolicyNetwork::initialized(NetworkShape shape, std::uint64_t seed) {
  PolicyNetwork net(shape);
  RngStream rng(hash64(seed, salt::kInit));
  const Offsets o = net.offsets();
  const std::size_t d = shape.input_dim, h = shape.hidden;
  double* p = net.params_.data();
  orthogonal_block(p + o.w1, h, d, std::numbers::sqrt2, rng);
  orthogonal_block(p + o.w2, h, h, std::numbers::sqrt2, rng);
  for (int a = 0; a < shape.fleet_size; ++a) orthogonal_block(p + o.heads + a * o.head_stride, kHeadSize, h, 0.01, rng);
  orthogonal_block(p + o.wv, 1, h, 1.0, rng);
  return net;
}

PolicyOutput PolicyNetwork::forward(std::span<const double> state) const {
  ForwardCache cache;
  return forward(state, cache);
}

PolicyOutput PolicyNetwork::forward(std::span<const double> state, ForwardCache& cache) const {
  if (static_cast<int>(state.size()) != shape_.input_dim)
    throw DimensionMismatch("state length " + std::to_string(state.size()) + " does not match input_dim " +
                            std::to_string(shape_.input_dim));
  const Offsets o = offsets();
  const std::size_t d = shape_.input_dim, h = shape_.hidden;
  const double* p = params_.data();

  cache.input.assign(state.begin(), state.end());
  cache.h1.assign(h, 0.0);
  cache.h2.assign(h, 0.0);
  for (std::size_t r = 0; r < h; ++r) {
    double z = p[o.b1 + r];
    const double* w = p + o.w1 + r * d;
    for (std::size_t c = 0; c < d; ++c) z += w[c] * state[c];
    cache.h1[r] = std::tanh(z);
  }
  for (std::size_t r = 0; r < h; ++r) {
    double z = p[o.b2 + r];
    const double* w = p + o.w2 + r * h;
    for (std::size_t c = 0; c < h; ++c) z += w[c] * cache.h1[c];
    cache.h2[r] = std::tanh(z);
  }

  PolicyOutput& out = cache.out;
  out.logits.assign(shape_.fleet_size, std::vector<double>(kHeadSize, 0.0));
  for (int a = 0; a < shape_.fleet_size; ++a) {
    const double* base = p + o.heads + a * o.head_stride;
    for (int k = 0; k < kHeadSize; ++k) {
      double z = base[kHeadSize * h + k];
      const double* w = base + k * h;
      for (std::size_t c = 0; c < h; ++c) z += w[c] * cache.h2[c];
      out.logits[a][k] = z;
    }
  }
  double v = p[o.bv];
  for (std::size_t c = 0; c < h; ++c) v += p[o.wv + c] * cache.h2[c];
  out.value = v;
  return out;
}

void PolicyNetwork::backward(const ForwardCache& cache, const std::vector<std::vector<double>>& dlogits,
                             double dvalue, std::vector<double>& grad) const {
  const Offsets o = offsets();
  const std::size_t d = shape_.input_dim, h = shape_.hidden;
  const double* p = params_.data();
  if (grad.size() != params_.size()) grad.assign(params_.size(), 0.0);

  std::vector<double> dh2(h, 0.0);
  for (int a = 0; a < shape_.fleet_size; ++a) {
    const std::size_t base = o.heads + a * o.head_stride;
    for (int k = 0; k < kHeadSize; ++k) {
      const double g = dlogits[a][k];
      if (g == 0.0) continue;
      grad[base + kHeadSize * h + k] += g;
      for (std::size_t c = 0; c < h; ++c) {
        grad[base + k * h + c] += g * cache.h2[c];
        dh2[c] += g * p[base + k * h + c];
      }
    }
  }
  grad[o.bv] += dvalue;
  for (std::size_t c = 0; c < h; ++c) {
    grad[o.wv + c] += dvalue * cache.h2[c];
    dh2[c] += dvalue * p[o.wv + c];
  }

  std::vector<double> dh1(h, 0.0);
  for (std::size_t r = 0; r < h; ++r) {
    const double dz = dh2[r] * (1.0 - cache.h2[r] * cache.h2[r]);
    grad[o.b2 + r] += dz;
    for (std::size_t c = 0; c < h; ++c) {
      grad[o.w2 + r * h + c] += dz * cache.h1[c];
      dh1[c] += dz * p[o.w2 + r * h + c];
    }
  }
  for (std::size_t r = 0; r < h; ++r) {
    const double dz = dh1[r] * (1.0 - cache.h1[r] * cache.h1[r]);
    grad[o.b1 + r] += dz;
    for (std::size_t c = 0; c < d; ++c) grad[o.w1 + r * d + c] += dz * cache.input[c];
  }
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - mx);
  const double lse = mx + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out = log_softmax(logits);
  for (double& v : out) v = std::exp(v);
  return out;
}

namespace {
void require_finite(const std::vector<std::vector<double>>& logits) {
  for (const auto& head : logits)
    for (double z : head)
      if (!std::isfinite(z)) throw NonFiniteLogits("policy produced a non-finite logit");
}
}  // namespace

SampledAction sample_actions(const std::vector<std::vector<double>>& logits, RngStream& rng) {
  require_finite(logits);
  SampledAction s;
  for (const auto& head : logits) {
    const std::vector<double> lp = log_softmax(head);
    const double u = uniform01(rng);
    double cdf = 0.0;
    int chosen = static_cast<int>(head.size()) - 1;
    for (std::size_t k = 0; k < head.size(); ++k) {
      cdf += std::exp(lp[k]);
      if (u < cdf) {
        chosen = static_cast<int>(k);
        break;
      }
    }
    // Rounding can leave the CDF just short of 1; fall back to the last
    // index with non-zero mass.
    if (u >= cdf)
      while (chosen > 0 && std::exp(lp[chosen]) == 0.0) --chosen;
    s.actions.push_back(chosen);
    s.log_prob += lp[chosen];
  }
  return s;
}

SampledAction argmax_actions(const std::vector<std::vector<double>>& logits) {
  require_finite(logits);
  SampledAction s;
  for (const auto& head : logits) {
    const int best = static_cast<int>(std::max_element(head.begin(), head.end()) - head.begin());
    s.actions.push_back(best);
    s.log_prob += log_softmax(head)[best];
  }
  return s;
}

double joint_log_prob(const std::vector<std::vector<double>>& logits, std::span<const int> actions) {
  if (actions.size() != logits.size()) throw DimensionMismatch("one action per head is required");
  double lp = 0.0;
  for (std::size_t a = 0; a < logits.size(); ++a) lp += log_softmax(logits[a])[actions[a]];
  return lp;
}

}  // namespace emberops
