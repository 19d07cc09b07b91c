#ifndef PBL_BELIEF_HPP_
#define PBL_BELIEF_HPP_

#include <functional>
#include <string>
#include <vector>

#include "pbl/bridge_env.hpp"
#include "pbl/data.hpp"
#include "pbl/neural.hpp"

namespace pbl {

// One supervised pair: observed-history features -> partner hidden info.
// `id` is assigned at generation time and drives the train/validation split,
// so shuffling the dataset never moves a pair across the split.
struct BeliefPair {
  std::vector<double> input;
  std::vector<double> target;
  std::uint64_t id = 0;
};

struct BeliefDataset {
  std::vector<BeliefPair> pairs;

  std::size_t size() const { return pairs.size(); }
};

bool is_validation_pair(const BeliefPair& pair);  // stable ~10% split

// Summed binary cross-entropy treating each dimension as an independent
// Bernoulli; logs clamped at 1e-12.
double belief_loss(std::span<const double> belief, std::span<const double> target);
// Categorical cross-entropy for one-hot goal targets.
double belief_loss_categorical(std::span<const double> belief, std::span<const double> target);

// dL/d(belief output) for the Bernoulli loss.
std::vector<double> belief_loss_grad(std::span<const double> belief,
                                     std::span<const double> target);
std::vector<double> belief_loss_grad_categorical(std::span<const double> belief,
                                                 std::span<const double> target);

// Belief-network input for a bridge seat: encoded public history plus one
// viewer-seat bit (0 = North, 1 = South). The net predicts the partner's hand.
std::vector<double> bridge_belief_input(const DeckSpec& deck, const BiddingHistory& history,
                                        int history_slots, Seat viewer);
inline int bridge_belief_input_dim(const DeckSpec& deck, int history_slots) {
  return history_slots * history_slot_width(deck) + 1;
}

// Acting policy used during dataset self-play.
using BridgeActFn =
    std::function<int(const AuctionState& state, Seat seat, const std::vector<bool>& mask, Rng& rng)>;

// Self-play dataset: one pair per decision point from each seat's perspective,
// plus one pair per seat for the terminal history (the belief net is queried
// on post-action histories when communication rewards are computed).
BeliefDataset generate_bridge_dataset(const BridgeEnv& env, const DealSet& deals, int n_episodes,
                                      const BridgeActFn& act, Rng& rng);

struct BeliefTrainConfig {
  AdamConfig adam{.lr = 1e-3};
  int batch_size = 1024;
  int max_epochs = 40;
  int patience = 5;  // evaluation rounds without val improvement
  bool categorical = false;
  std::uint64_t seed = 0;
};

struct BeliefTrainResult {
  double best_val_loss = 0.0;
  double initial_val_loss = 0.0;
  int epochs_run = 0;
};

// Minibatch Adam on belief_loss with early stopping on the held-out split;
// leaves the best-validation parameters in `net`. Throws std::invalid_argument
// on an empty dataset.
BeliefTrainResult train_belief(const BeliefDataset& dataset, Mlp& net,
                               const BeliefTrainConfig& cfg);

double dataset_loss(const BeliefDataset& dataset, const Mlp& net, bool validation_split,
                    bool categorical);

}  // namespace pbl

#endif  // PBL_BELIEF_HPP_
