#ifndef PBL_NEURAL_HPP_
#define PBL_NEURAL_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pbl/rng.hpp"

namespace pbl {

enum class Head { kLinear, kSoftmax, kSigmoid };

// One dense layer; weights row-major, w[o * in + i].
struct LayerParams {
  int in = 0;
  int out = 0;
  std::vector<double> w;
  std::vector<double> b;

  static LayerParams zeros(int in, int out) {
    return LayerParams{in, out, std::vector<double>(static_cast<std::size_t>(in) * out, 0.0),
                       std::vector<double>(out, 0.0)};
  }
};

// Dense ReLU stack with a typed head. Doubles throughout.
struct Mlp {
  std::vector<LayerParams> layers;
  Head head = Head::kLinear;

  int input_dim() const { return layers.front().in; }
  int output_dim() const { return layers.back().out; }
  std::size_t param_count() const;

  // He-style fan-in uniform init.
  static Mlp make(int in, const std::vector<int>& hidden, int out, Head head, Rng& rng);
};

using Grads = std::vector<LayerParams>;

Grads zero_grads(const Mlp& net);
void accumulate(Grads& acc, const Grads& g, double scale = 1.0);
void scale_grads(Grads& g, double scale);

struct ForwardCache {
  std::vector<std::vector<double>> inputs;  // input to each layer
  std::vector<std::vector<double>> pre;     // pre-activation per layer
  std::vector<double> output;               // post-head
};

ForwardCache forward(const Mlp& net, std::span<const double> input);

// Exact reverse-mode gradients of a scalar loss given dL/d(output).
// Accumulates into `grads`; returns dL/d(input) when `input_grad` non-null.
void backward(const Mlp& net, const ForwardCache& cache, std::span<const double> output_grad,
              Grads& grads, std::vector<double>* input_grad = nullptr);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double decay_rate = 0.95;
  int decay_step = 50;
};

struct AdamState {
  Grads m;
  Grads v;
  std::int64_t t = 0;

  static AdamState init(const Mlp& net) { return AdamState{zero_grads(net), zero_grads(net), 0}; }
};

// Effective lr = lr * decay_rate^(t / decay_step). Throws on non-finite grads.
void adam_step(Mlp& net, const Grads& grads, AdamState& state, const AdamConfig& cfg);

// Max relative error between analytic gradients and central differences
// (h = 1e-5) over `samples` randomly chosen parameters.
double grad_check(Mlp& net, const std::function<double(const Mlp&)>& loss, const Grads& analytic,
                  Rng& rng, int samples = 50);

// Softmax restricted to masked-in entries; masked-out probabilities are 0.
std::vector<double> masked_softmax(std::span<const double> logits, const std::vector<bool>& mask);

// Checkpoints: named parameter bundles, self-describing binary layout.
struct Checkpoint {
  std::vector<std::pair<std::string, Mlp>> nets;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace pbl

#endif  // PBL_NEURAL_HPP_
