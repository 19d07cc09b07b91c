#include "pbl/neural.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace pbl {

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.w.size() + l.b.size();
  return n;
}

Mlp Mlp::make(int in, const std::vector<int>& hidden, int out, Head head, Rng& rng) {
  Mlp net;
  net.head = head;
  std::vector<int> dims;
  dims.push_back(in);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    LayerParams l = LayerParams::zeros(dims[i], dims[i + 1]);
    const double bound = std::sqrt(6.0 / dims[i]);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : l.w) w = dist(rng);
    net.layers.push_back(std::move(l));
  }
  return net;
}

Grads zero_grads(const Mlp& net) {
  Grads g;
  for (const auto& l : net.layers) g.push_back(LayerParams::zeros(l.in, l.out));
  return g;
}

void accumulate(Grads& acc, const Grads& g, double scale) {
  for (std::size_t i = 0; i < acc.size(); ++i) {
    for (std::size_t j = 0; j < acc[i].w.size(); ++j) acc[i].w[j] += scale * g[i].w[j];
    for (std::size_t j = 0; j < acc[i].b.size(); ++j) acc[i].b[j] += scale * g[i].b[j];
  }
}

void scale_grads(Grads& g, double scale) {
  for (auto& l : g) {
    for (double& v : l.w) v *= scale;
    for (double& v : l.b) v *= scale;
  }
}

ForwardCache forward(const Mlp& net, std::span<const double> input) {
  if (static_cast<int>(input.size()) != net.input_dim())
    throw std::invalid_argument("forward: input dimension mismatch");
  ForwardCache cache;
  std::vector<double> x(input.begin(), input.end());
  const std::size_t n_layers = net.layers.size();
  for (std::size_t li = 0; li < n_layers; ++li) {
    const LayerParams& l = net.layers[li];
    cache.inputs.push_back(x);
    std::vector<double> z(l.out);
    for (int o = 0; o < l.out; ++o) {
      const double* wrow = l.w.data() + static_cast<std::size_t>(o) * l.in;
      double acc = l.b[o];
      for (int i = 0; i < l.in; ++i) acc += wrow[i] * x[i];
      z[o] = acc;
    }
    cache.pre.push_back(z);
    if (li + 1 < n_layers) {
      for (double& v : z) v = std::max(0.0, v);  // ReLU
      x = std::move(z);
    } else {
      x = std::move(z);
    }
  }
  // Head.
  switch (net.head) {
    case Head::kLinear:
      break;
    case Head::kSigmoid:
      for (double& v : x) v = 1.0 / (1.0 + std::exp(-v));
      break;
    case Head::kSoftmax: {
      const double mx = *std::max_element(x.begin(), x.end());
      double sum = 0.0;
      for (double& v : x) {
        v = std::exp(v - mx);
        sum += v;
      }
      for (double& v : x) v /= sum;
      break;
    }
  }
  cache.output = std::move(x);
  return cache;
}

void backward(const Mlp& net, const ForwardCache& cache, std::span<const double> output_grad,
              Grads& grads, std::vector<double>* input_grad) {
  if (cache.pre.size() != net.layers.size())
    throw std::logic_error("backward: cache does not match network");
  if (static_cast<int>(output_grad.size()) != net.output_dim())
    throw std::invalid_argument("backward: output gradient dimension mismatch");

  const std::vector<double>& y = cache.output;
  std::vector<double> delta(y.size());  // dL/d(pre-head logits)
  switch (net.head) {
    case Head::kLinear:
      delta.assign(output_grad.begin(), output_grad.end());
      break;
    case Head::kSigmoid:
      for (std::size_t k = 0; k < y.size(); ++k)
        delta[k] = output_grad[k] * y[k] * (1.0 - y[k]);
      break;
    case Head::kSoftmax: {
      double dot = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) dot += output_grad[k] * y[k];
      for (std::size_t k = 0; k < y.size(); ++k) delta[k] = y[k] * (output_grad[k] - dot);
      break;
    }
  }

  for (int li = static_cast<int>(net.layers.size()) - 1; li >= 0; --li) {
    const LayerParams& l = net.layers[li];
    LayerParams& g = grads[li];
    const std::vector<double>& x = cache.inputs[li];
    for (int o = 0; o < l.out; ++o) {
      const double d = delta[o];
      g.b[o] += d;
      double* grow = g.w.data() + static_cast<std::size_t>(o) * l.in;
      for (int i = 0; i < l.in; ++i) grow[i] += d * x[i];
    }
    const bool need_input = li > 0 || input_grad != nullptr;
    if (!need_input) break;
    std::vector<double> prev(l.in, 0.0);
    for (int o = 0; o < l.out; ++o) {
      const double d = delta[o];
      const double* wrow = l.w.data() + static_cast<std::size_t>(o) * l.in;
      for (int i = 0; i < l.in; ++i) prev[i] += d * wrow[i];
    }
    if (li > 0) {
      // Back through the previous layer's ReLU.
      const std::vector<double>& pre = cache.pre[li - 1];
      for (int i = 0; i < l.in; ++i)
        if (pre[i] <= 0.0) prev[i] = 0.0;
    }
    if (li == 0 && input_grad != nullptr) *input_grad = prev;
    delta = std::move(prev);
  }
}

void adam_step(Mlp& net, const Grads& grads, AdamState& state, const AdamConfig& cfg) {
  state.t += 1;
  const double lr = cfg.lr * std::pow(cfg.decay_rate,
                                      static_cast<double>(state.t) / cfg.decay_step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (!std::isfinite(g[j])) throw std::runtime_error("adam_step: non-finite gradient");
        m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
        v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
        p[j] -= lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + cfg.eps);
      }
    };
    update(net.layers[li].w, grads[li].w, state.m[li].w, state.v[li].w);
    update(net.layers[li].b, grads[li].b, state.m[li].b, state.v[li].b);
  }
}

double grad_check(Mlp& net, const std::function<double(const Mlp&)>& loss, const Grads& analytic,
                  Rng& rng, int samples) {
  const double h = 1e-5;
  double max_err = 0.0;
  for (int s = 0; s < samples; ++s) {
    const int li = uniform_int(rng, 0, static_cast<int>(net.layers.size()) - 1);
    LayerParams& l = net.layers[li];
    const bool pick_bias = uniform_int(rng, 0, static_cast<int>(l.w.size() + l.b.size()) - 1) >=
                           static_cast<int>(l.w.size());
    std::vector<double>& params = pick_bias ? l.b : l.w;
    const std::vector<double>& grads = pick_bias ? analytic[li].b : analytic[li].w;
    const int j = uniform_int(rng, 0, static_cast<int>(params.size()) - 1);
    const double saved = params[j];
    params[j] = saved + h;
    const double lp = loss(net);
    params[j] = saved - h;
    const double lm = loss(net);
    params[j] = saved;
    const double numeric = (lp - lm) / (2.0 * h);
    const double denom = std::max({std::abs(grads[j]), std::abs(numeric), 1e-8});
    max_err = std::max(max_err, std::abs(grads[j] - numeric) / denom);
  }
  return max_err;
}

std::vector<double> masked_softmax(std::span<const double> logits, const std::vector<bool>& mask) {
  std::vector<double> out(logits.size(), 0.0);
  double mx = -1e300;
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask[i]) mx = std::max(mx, logits[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) {
      out[i] = std::exp(logits[i] - mx);
      sum += out[i];
    }
  }
  for (double& v : out) v /= sum;
  return out;
}

namespace {
constexpr char kMagic[8] = {'P', 'B', 'L', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

void write_string(std::ostream& os, const std::string& s) {
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  const auto n = read_pod<std::uint32_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}
}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.nets.size()));
  for (const auto& [name, net] : ckpt.nets) {
    write_string(os, name);
    write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(net.head));
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net.layers.size()));
    for (const auto& l : net.layers) {
      write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(l.in));
      write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(l.out));
      os.write(reinterpret_cast<const char*>(l.w.data()),
               static_cast<std::streamsize>(l.w.size() * sizeof(double)));
      os.write(reinterpret_cast<const char*>(l.b.data()),
               static_cast<std::streamsize>(l.b.size() * sizeof(double)));
    }
  }
  if (!os) throw std::runtime_error("save_checkpoint: write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  Checkpoint ckpt;
  const auto n_nets = read_pod<std::uint32_t>(is);
  for (std::uint32_t k = 0; k < n_nets; ++k) {
    std::string name = read_string(is);
    Mlp net;
    net.head = static_cast<Head>(read_pod<std::uint8_t>(is));
    const auto n_layers = read_pod<std::uint32_t>(is);
    for (std::uint32_t li = 0; li < n_layers; ++li) {
      const int in = static_cast<int>(read_pod<std::uint32_t>(is));
      const int out = static_cast<int>(read_pod<std::uint32_t>(is));
      LayerParams l = LayerParams::zeros(in, out);
      is.read(reinterpret_cast<char*>(l.w.data()),
              static_cast<std::streamsize>(l.w.size() * sizeof(double)));
      is.read(reinterpret_cast<char*>(l.b.data()),
              static_cast<std::streamsize>(l.b.size() * sizeof(double)));
      net.layers.push_back(std::move(l));
    }
    ckpt.nets.emplace_back(std::move(name), std::move(net));
  }
  if (!is) throw std::runtime_error("load_checkpoint: truncated file " + path);
  return ckpt;
}

}  // namespace pbl
