#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "frame.hpp"
#include "rng.hpp"

namespace cvt {

// Actor-critic network: a stack of 3x3 convolutions (ReLU, padding 1),
// an LSTM cell over the flattened features, and linear policy/value heads.

struct ConvSpec {
  int filters = 8;
  int stride = 1;
  bool operator==(const ConvSpec&) const = default;
};

struct NetDescriptor {
  int input_c = 3;
  int input_h = kFrameSize;
  int input_w = kFrameSize;
  std::vector<ConvSpec> convs = {{8, 2}, {8, 2}, {8, 1}, {8, 1}};
  int hidden = 64;
  int n_actions = 4;

  bool operator==(const NetDescriptor&) const = default;

  // Spatial size after layer `i` (0-based); kernel 3, padding 1:
  // out = (in - 1) / stride + 1.
  int out_h(int layer) const;
  int out_w(int layer) const;
  int flat_size() const;  // LSTM input width

  std::string to_text() const;
  static NetDescriptor from_text(const std::string& text);
};

struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);

  int size() const { return static_cast<int>(data.size()); }
  double& operator[](int i) { return data[i]; }
  double operator[](int i) const { return data[i]; }

  bool operator==(const Tensor&) const = default;
};

// Named tensors in a fixed order: conv{i}.w/.b, lstm.wx/.wh/.b, pi.w/.b,
// v.w/.b. The order is the checkpoint order.
struct ParameterSet {
  NetDescriptor desc;
  std::vector<std::pair<std::string, Tensor>> tensors;

  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool has(const std::string& name) const;

  bool operator==(const ParameterSet&) const = default;
};

// All-zero parameters with the right shapes.
ParameterSet zero_params(const NetDescriptor& desc);
// Seeded uniform init in +-1/sqrt(fan_in) per tensor.
ParameterSet init_params(const NetDescriptor& desc, std::uint64_t seed);

bool all_finite(const ParameterSet& p);

struct RecurrentState {
  std::vector<double> h;
  std::vector<double> c;

  static RecurrentState zero(int hidden) { return {std::vector<double>(hidden, 0.0), std::vector<double>(hidden, 0.0)}; }
  bool operator==(const RecurrentState&) const = default;
};

// Per-step cache retained for backward and for dump_activations.
struct ForwardCache {
  std::vector<std::vector<double>> conv_in;    // input to each conv layer
  std::vector<std::vector<double>> conv_pre;   // pre-ReLU outputs
  std::vector<std::vector<double>> conv_post;  // post-ReLU outputs
  std::vector<double> lstm_x;                  // flattened features
  std::vector<double> gates;                   // [i f g o], post-nonlinearity
  std::vector<double> c_prev, h_prev, c_new, tanh_c;
  std::vector<double> policy;
  double value = 0.0;
};

struct ForwardResult {
  std::vector<double> policy;  // softmax over n_actions, sums to 1
  double value = 0.0;
  RecurrentState state;
};

// Pure given (params, obs, state). Throws std::invalid_argument on a shape
// mismatch and std::runtime_error on non-finite parameters.
ForwardResult forward(const ParameterSet& params, const PreprocessedFrame& obs,
                      const RecurrentState& state, ForwardCache* cache = nullptr);

struct TrajectoryStep {
  PreprocessedFrame obs;
  int action = 0;
  double reward = 0.0;
  double value = 0.0;
  std::vector<double> log_probs;
};

// n-step rollout segment consumed by the actor-critic update.
struct Trajectory {
  std::vector<TrajectoryStep> steps;
  double bootstrap_value = 0.0;  // 0 if the segment ended the episode
  RecurrentState initial_state;
};

// R_t = r_t + gamma * R_{t+1}, seeded with the bootstrap value.
// Throws std::invalid_argument on an empty trajectory.
std::vector<double> n_step_returns(const Trajectory& traj, double gamma);

struct LossAndGrads {
  double loss = 0.0;
  ParameterSet grads;
};

// loss = sum_t [ -log pi(a_t|s_t) * A_t - beta * H(pi_t) + c * (R_t - V_t)^2 ]
// with the advantage A_t treated as a constant in the policy term. Gradients
// are exact reverse-mode derivatives, BPTT over the whole segment. `caches`
// may supply the per-step forward caches already computed during the rollout
// (against the same parameters); when absent the forwards are recomputed.
LossAndGrads a3c_loss_and_grads(const ParameterSet& params, const Trajectory& traj,
                                double gamma, double beta_entropy, double c_value,
                                const std::vector<ForwardCache>* caches = nullptr);

// Body tensors (convs + LSTM) copied bitwise from the source; both output
// heads freshly initialized for the target head widths.
ParameterSet init_transfer_weights(const ParameterSet& source, const NetDescriptor& target_arch,
                                   std::uint64_t seed);

// Post-ReLU feature maps of conv layer `layer` (1-based), each map
// max-normalized to [0,1]; an all-zero map stays zero.
std::vector<Tensor> dump_activations(const ParameterSet& params, const PreprocessedFrame& obs,
                                     int layer);

}  // namespace cvt
