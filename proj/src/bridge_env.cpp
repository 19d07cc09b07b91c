#include "pbl/bridge_env.hpp"

#include <stdexcept>

namespace pbl {

AuctionState BridgeEnv::reset(const Hand& hand_n, const Hand& hand_s) const {
  if (!hand_n.disjoint(hand_s)) throw std::invalid_argument("reset: overlapping hands");
  if (hand_n.size() != deck_.cards_per_hand || hand_s.size() != deck_.cards_per_hand)
    throw std::invalid_argument("reset: wrong hand size");
  AuctionState s;
  s.hand_n = hand_n;
  s.hand_s = hand_s;
  s.to_act = Seat::kNorth;
  return s;
}

std::vector<bool> BridgeEnv::legal_actions(const AuctionState& s) const {
  if (s.terminal) throw std::logic_error("legal_actions: terminal state");
  std::vector<bool> mask(deck_.num_bid_actions(), false);
  mask[0] = true;  // PASS
  for (int a = 1; a < deck_.num_bid_actions(); ++a) {
    const Bid bid = bid_from_index(deck_, a);
    mask[a] = !s.highest || legal_followup(*s.highest, bid);
  }
  return mask;
}

AuctionState BridgeEnv::step(const AuctionState& s, int action) const {
  if (s.terminal) throw std::logic_error("step: terminal state");
  if (action < 0 || action >= deck_.num_bid_actions())
    throw std::logic_error("step: action index out of range");
  const Bid bid = bid_from_index(deck_, action);
  if (!bid.is_pass() && s.highest && !legal_followup(*s.highest, bid))
    throw std::logic_error("step: contract bid not above highest");

  AuctionState next = s;
  next.history.append(s.to_act, bid);
  next.to_act = s.to_act == Seat::kNorth ? Seat::kSouth : Seat::kNorth;

  if (bid.is_pass()) {
    if (s.highest) {
      // One N/S pass plus the implicit E/W passes completes three in a row.
      next.terminal = true;
      Seat declarer = Seat::kNorth;
      for (const auto& e : next.history.entries) {
        if (!e.bid.is_pass() && e.bid.trump == s.highest->trump) {
          declarer = e.seat;
          break;
        }
      }
      next.final_contract = Contract{s.highest->level, s.highest->trump, declarer};
    } else if (!s.history.empty()) {
      // Second opening pass: double pass.
      next.terminal = true;
      next.double_pass = true;
    }
  } else {
    next.highest = bid;
  }
  return next;
}

Observation BridgeEnv::observation(const AuctionState& s, Seat seat) const {
  if (seat != Seat::kNorth && seat != Seat::kSouth)
    throw std::invalid_argument("observation: seat must be N or S");
  Observation obs;
  obs.own_hand = encode_hand(deck_, seat == Seat::kNorth ? s.hand_n : s.hand_s);
  obs.history_enc = encode_history(deck_, s.history, history_slots_);
  return obs;
}

}  // namespace pbl
