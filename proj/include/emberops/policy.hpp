#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "emberops/rng.hpp"

namespace emberops {

inline constexpr int kHeadSize = 24;

struct NetworkShape {
  int input_dim = 0;
  int fleet_size = 0;
  int hidden = 64;

  std::size_t parameter_count() const;
  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

struct PolicyOutput {
  std::vector<std::vector<double>> logits;  // [fleet_size][24]
  double value = 0.0;
};

// Activations kept by forward() for a later backward pass.
struct ForwardCache {
  std::vector<double> input;
  std::vector<double> h1;  // tanh outputs
  std::vector<double> h2;
  PolicyOutput out;
};

// Shared two-layer tanh trunk, one 24-way linear head per aircraft and a
// scalar value head. Parameters live in one flat vector in this order:
//   W1[hidden][input], b1[hidden], W2[hidden][hidden], b2[hidden],
//   per aircraft Wa[24][hidden], ba[24], then Wv[hidden], bv.
// The same order is used on disk.
class PolicyNetwork {
 public:
  PolicyNetwork() = default;
  explicit PolicyNetwork(NetworkShape shape);  // all-zero weights

  // Orthogonal init: trunk gain sqrt(2), policy heads 0.01, value head 1;
  // biases zero.
  static PolicyNetwork initialized(NetworkShape shape, std::uint64_t seed);

  const NetworkShape& shape() const { return shape_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // Throws DimensionMismatch when the state length differs from input_dim.
  PolicyOutput forward(std::span<const double> state) const;
  PolicyOutput forward(std::span<const double> state, ForwardCache& cache) const;

  // Accumulates d(loss)/d(params) into grad given the loss gradients with
  // respect to the logits and the value of one cached forward pass.
  void backward(const ForwardCache& cache, const std::vector<std::vector<double>>& dlogits, double dvalue,
                std::vector<double>& grad) const;

  friend bool operator==(const PolicyNetwork&, const PolicyNetwork&) = default;

 private:
  struct Offsets {
    std::size_t w1, b1, w2, b2, heads, head_stride, wv, bv;
  };
  Offsets offsets() const;

  NetworkShape shape_;
  std::vector<double> params_;
};

std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);

struct SampledAction {
  std::vector<int> actions;
  double log_prob = 0.0;  // sum over heads
};

// One categorical draw per head by inverse CDF. Throws NonFiniteLogits.
SampledAction sample_actions(const std::vector<std::vector<double>>& logits, RngStream& rng);

// Highest logit per head, lowest index on ties.
SampledAction argmax_actions(const std::vector<std::vector<double>>& logits);

double joint_log_prob(const std::vector<std::vector<double>>& logits, std::span<const int> actions);

}  // namespace emberops
