#ifndef PBL_BRIDGE_ENV_HPP_
#define PBL_BRIDGE_ENV_HPP_

#include <optional>
#include <vector>

#include "pbl/core.hpp"

namespace pbl {

struct Contract {
  int level = 0;
  int trump = 0;
  Seat declarer = Seat::kNorth;
  friend bool operator==(const Contract&, const Contract&) = default;
};

// Non-competitive auction between North and South; East/West pass implicitly.
// A single N/S pass after any contract finalizes it (their pass plus the two
// implicit E/W passes makes three consecutive). Two opening passes terminate
// with the double-pass flag.
struct AuctionState {
  Hand hand_n;
  Hand hand_s;
  BiddingHistory history;
  Seat to_act = Seat::kNorth;
  std::optional<Bid> highest;
  bool terminal = false;
  bool double_pass = false;
  std::optional<Contract> final_contract;
};

struct Observation {
  std::vector<double> own_hand;
  std::vector<double> history_enc;
};

class BridgeEnv {
 public:
  explicit BridgeEnv(DeckSpec deck, int history_slots = 16)
      : deck_(std::move(deck)), history_slots_(history_slots) {
    deck_.validate();
  }

  const DeckSpec& deck() const { return deck_; }
  int history_slots() const { return history_slots_; }
  int num_actions() const { return deck_.num_bid_actions(); }

  // Throws std::invalid_argument on overlapping hands or wrong hand sizes.
  AuctionState reset(const Hand& hand_n, const Hand& hand_s) const;

  // PASS is always legal; a contract is legal iff strictly above the highest.
  // Throws std::logic_error on a terminal state.
  std::vector<bool> legal_actions(const AuctionState& s) const;

  // Throws std::logic_error on an illegal action or terminal state.
  AuctionState step(const AuctionState& s, int action) const;

  Observation observation(const AuctionState& s, Seat seat) const;

 private:
  DeckSpec deck_;
  int history_slots_;
};

}  // namespace pbl

#endif  // PBL_BRIDGE_ENV_HPP_
