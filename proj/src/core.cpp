#include "pbl/core.hpp"

#include <algorithm>

namespace pbl {

void DeckSpec::validate() const {
  if (suits.empty()) throw std::invalid_argument("DeckSpec: suits empty");
  if (ranks.empty()) throw std::invalid_argument("DeckSpec: ranks empty");
  if (cards_per_hand < 1) throw std::invalid_argument("DeckSpec: cards_per_hand < 1");
  if (2 * cards_per_hand > deck_size())
    throw std::invalid_argument("DeckSpec: N and S hands do not fit in the deck");
  if (deck_size() > 64) throw std::invalid_argument("DeckSpec: deck larger than 64 cards");
  if (max_level < 1) throw std::invalid_argument("DeckSpec: max_level < 1");
}

Ordering compare_bids(const Bid& a, const Bid& b) {
  if (a.level != b.level) return a.level < b.level ? Ordering::kLt : Ordering::kGt;
  if (a.trump != b.trump) return a.trump < b.trump ? Ordering::kLt : Ordering::kGt;
  return Ordering::kEq;
}

bool legal_followup(const Bid& prev, const Bid& next) {
  return compare_bids(next, prev) == Ordering::kGt;
}

int bid_index(const DeckSpec& deck, const Bid& bid) {
  if (bid.is_pass()) return 0;
  return 1 + (bid.level - 1) * deck.num_trumps() + bid.trump;
}

Bid bid_from_index(const DeckSpec& deck, int index) {
  if (index < 0 || index >= deck.num_bid_actions())
    throw std::out_of_range("bid_from_index: index out of range");
  if (index == 0) return Bid::pass();
  int c = index - 1;
  return Bid::contract(c / deck.num_trumps() + 1, c % deck.num_trumps());
}

std::string bid_to_string(const DeckSpec& deck, const Bid& bid) {
  if (bid.is_pass()) return "PASS";
  std::string trump = bid.trump == deck.nt_index() ? "NT" : deck.suits[bid.trump];
  return std::to_string(bid.level) + trump;
}

int rank_hcp(const std::string& rank) {
  if (rank == "A") return 4;
  if (rank == "K") return 3;
  if (rank == "Q") return 2;
  if (rank == "J") return 1;
  return 0;
}

HcpCount hand_hcp(const DeckSpec& deck, const Hand& hand) {
  HcpCount out;
  out.per_suit.assign(deck.num_suits(), 0);
  for (int card : hand.cards()) {
    int pts = rank_hcp(deck.ranks[deck.rank_of(card)]);
    out.per_suit[deck.suit_of(card)] += pts;
    out.total += pts;
  }
  return out;
}

std::vector<double> encode_hand(const DeckSpec& deck, const Hand& hand) {
  std::vector<double> v(deck.deck_size(), 0.0);
  for (int card : hand.cards()) v[card] = 1.0;
  return v;
}

std::vector<double> encode_history(const DeckSpec& deck, const BiddingHistory& history,
                                   int num_slots) {
  if (num_slots < 1) throw std::invalid_argument("encode_history: num_slots < 1");
  const int width = history_slot_width(deck);
  std::vector<double> v(static_cast<std::size_t>(num_slots) * width, 0.0);
  const int n = history.size();
  const int kept = std::min(n, num_slots);
  for (int i = 0; i < kept; ++i) {
    // Most recent entry goes in the last slot.
    const HistoryEntry& e = history.entries[n - kept + i];
    double* slot = v.data() + static_cast<std::size_t>(num_slots - kept + i) * width;
    slot[bid_index(deck, e.bid)] = 1.0;
    slot[width - 2] = 1.0;  // validity
    slot[width - 1] = e.seat == Seat::kSouth ? 1.0 : 0.0;
  }
  return v;
}

}  // namespace pbl
