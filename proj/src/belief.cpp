#include "pbl/belief.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pbl {

namespace {
constexpr double kLogClamp = 1e-12;

double safe_log(double v) { return std::log(std::max(v, kLogClamp)); }
}  // namespace

bool is_validation_pair(const BeliefPair& pair) { return splitmix64(pair.id) % 10 == 0; }

double belief_loss(std::span<const double> belief, std::span<const double> target) {
  if (belief.size() != target.size()) throw std::invalid_argument("belief_loss: size mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < belief.size(); ++i)
    loss -= target[i] * safe_log(belief[i]) + (1.0 - target[i]) * safe_log(1.0 - belief[i]);
  return loss;
}

double belief_loss_categorical(std::span<const double> belief, std::span<const double> target) {
  if (belief.size() != target.size())
    throw std::invalid_argument("belief_loss_categorical: size mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < belief.size(); ++i) loss -= target[i] * safe_log(belief[i]);
  return loss;
}

std::vector<double> belief_loss_grad(std::span<const double> belief,
                                     std::span<const double> target) {
  std::vector<double> g(belief.size());
  for (std::size_t i = 0; i < belief.size(); ++i) {
    g[i] = -target[i] / std::max(belief[i], kLogClamp) +
           (1.0 - target[i]) / std::max(1.0 - belief[i], kLogClamp);
  }
  return g;
}

std::vector<double> belief_loss_grad_categorical(std::span<const double> belief,
                                                 std::span<const double> target) {
  std::vector<double> g(belief.size());
  for (std::size_t i = 0; i < belief.size(); ++i)
    g[i] = -target[i] / std::max(belief[i], kLogClamp);
  return g;
}

std::vector<double> bridge_belief_input(const DeckSpec& deck, const BiddingHistory& history,
                                        int history_slots, Seat viewer) {
  std::vector<double> v = encode_history(deck, history, history_slots);
  v.push_back(viewer == Seat::kSouth ? 1.0 : 0.0);
  return v;
}

BeliefDataset generate_bridge_dataset(const BridgeEnv& env, const DealSet& deals, int n_episodes,
                                      const BridgeActFn& act, Rng& rng) {
  BeliefDataset ds;
  std::uint64_t pair_id = 0;
  const int slots = env.history_slots();
  for (int ep = 0; ep < n_episodes; ++ep) {
    const Deal& deal = deals.deals[uniform_int(rng, 0, static_cast<int>(deals.size()) - 1)];
    AuctionState s = env.reset(deal.hand_n, deal.hand_s);
    auto emit_both = [&](const BiddingHistory& h) {
      ds.pairs.push_back({bridge_belief_input(env.deck(), h, slots, Seat::kNorth),
                          encode_hand(env.deck(), s.hand_s), pair_id++});
      ds.pairs.push_back({bridge_belief_input(env.deck(), h, slots, Seat::kSouth),
                          encode_hand(env.deck(), s.hand_n), pair_id++});
    };
    while (!s.terminal) {
      emit_both(s.history);
      const int a = act(s, s.to_act, env.legal_actions(s), rng);
      s = env.step(s, a);
    }
    emit_both(s.history);
  }
  return ds;
}

double dataset_loss(const BeliefDataset& dataset, const Mlp& net, bool validation_split,
                    bool categorical) {
  double total = 0.0;
  std::size_t count = 0;
  for (const BeliefPair& p : dataset.pairs) {
    if (is_validation_pair(p) != validation_split) continue;
    const ForwardCache cache = forward(net, p.input);
    total += categorical ? belief_loss_categorical(cache.output, p.target)
                         : belief_loss(cache.output, p.target);
    ++count;
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

BeliefTrainResult train_belief(const BeliefDataset& dataset, Mlp& net,
                               const BeliefTrainConfig& cfg) {
  if (dataset.pairs.empty()) throw std::invalid_argument("train_belief: empty dataset");

  std::vector<std::size_t> train_idx;
  for (std::size_t i = 0; i < dataset.pairs.size(); ++i)
    if (!is_validation_pair(dataset.pairs[i])) train_idx.push_back(i);
  if (train_idx.empty()) throw std::invalid_argument("train_belief: no training pairs");

  // Tiny datasets may land entirely in the training split; early-stop on the
  // training loss then.
  const bool has_val = train_idx.size() < dataset.pairs.size();

  BeliefTrainResult result;
  result.initial_val_loss = dataset_loss(dataset, net, has_val, cfg.categorical);
  Mlp best = net;
  double best_val = result.initial_val_loss;
  int stale = 0;

  AdamState adam = AdamState::init(net);
  Rng rng = make_stream(cfg.seed, "belief-train");
  Grads grads = zero_grads(net);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    for (std::size_t start = 0; start < train_idx.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(train_idx.size(), start + static_cast<std::size_t>(cfg.batch_size));
      scale_grads(grads, 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const BeliefPair& p = dataset.pairs[train_idx[k]];
        const ForwardCache cache = forward(net, p.input);
        const std::vector<double> g =
            cfg.categorical ? belief_loss_grad_categorical(cache.output, p.target)
                            : belief_loss_grad(cache.output, p.target);
        backward(net, cache, g, grads);
      }
      scale_grads(grads, 1.0 / static_cast<double>(end - start));
      adam_step(net, grads, adam, cfg.adam);
    }
    result.epochs_run = epoch + 1;
    const double val = dataset_loss(dataset, net, has_val, cfg.categorical);
    if (val < best_val) {
      best_val = val;
      best = net;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  net = best;
  result.best_val_loss = best_val;
  return result;
}

}  // namespace pbl
