#ifndef PBL_CORE_HPP_
#define PBL_CORE_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pbl {

// Deck-parametric card universe. Card index = suit_index * |ranks| + rank_index.
struct DeckSpec {
  std::vector<std::string> suits = {"C", "D", "H", "S"};
  std::vector<std::string> ranks = {"2", "3", "4", "5", "6", "7", "8", "9",
                                    "T", "J", "Q", "K", "A"};
  int cards_per_hand = 13;
  int max_level = 7;

  int num_suits() const { return static_cast<int>(suits.size()); }
  int num_ranks() const { return static_cast<int>(ranks.size()); }
  int deck_size() const { return num_suits() * num_ranks(); }
  int card_index(int suit, int rank) const { return suit * num_ranks() + rank; }
  int suit_of(int card) const { return card / num_ranks(); }
  int rank_of(int card) const { return card % num_ranks(); }

  // Number of trump choices including no-trump (always last).
  int num_trumps() const { return num_suits() + 1; }
  int nt_index() const { return num_suits(); }

  // PASS plus one action per (level, trump); 36 for the standard deck.
  int num_bid_actions() const { return 1 + max_level * num_trumps(); }
  int num_contracts() const { return max_level * num_trumps(); }

  void validate() const;

  static DeckSpec standard() { return DeckSpec{}; }
  // 16-card deck (4 suits x J,Q,K,A), 4 cards per hand, contracts up to level 2.
  static DeckSpec mini16() {
    DeckSpec d;
    d.ranks = {"J", "Q", "K", "A"};
    d.cards_per_hand = 4;
    d.max_level = 2;
    return d;
  }
};

// A set of cards as a bit vector over the deck. Decks are capped at 64 cards.
struct Hand {
  std::uint64_t bits = 0;

  bool has(int card) const { return (bits >> card) & 1u; }
  void add(int card) { bits |= (1ULL << card); }
  void remove(int card) { bits &= ~(1ULL << card); }
  int size() const { return __builtin_popcountll(bits); }
  bool disjoint(const Hand& other) const { return (bits & other.bits) == 0; }

  std::vector<int> cards() const {
    std::vector<int> out;
    std::uint64_t b = bits;
    while (b) {
      out.push_back(__builtin_ctzll(b));
      b &= b - 1;
    }
    return out;
  }

  friend bool operator==(const Hand&, const Hand&) = default;
};

enum class BidKind { kPass, kContract };

struct Bid {
  BidKind kind = BidKind::kPass;
  int level = 0;   // in [1, max_level] when kContract
  int trump = 0;   // suit index, or deck.nt_index() for no-trump

  static Bid pass() { return Bid{}; }
  static Bid contract(int level, int trump) {
    return Bid{BidKind::kContract, level, trump};
  }
  bool is_pass() const { return kind == BidKind::kPass; }

  friend bool operator==(const Bid&, const Bid&) = default;
};

enum class Ordering { kLt, kEq, kGt };

// Strict total order on contract bids: level major, trump minor (NT highest).
Ordering compare_bids(const Bid& a, const Bid& b);
bool legal_followup(const Bid& prev, const Bid& next);

// Stable action indexing with PASS = 0 and contracts in ascending strength.
int bid_index(const DeckSpec& deck, const Bid& bid);
Bid bid_from_index(const DeckSpec& deck, int index);
std::string bid_to_string(const DeckSpec& deck, const Bid& bid);

enum class Seat { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };

inline Seat partner_of(Seat s) { return static_cast<Seat>((static_cast<int>(s) + 2) % 4); }
inline Seat left_of(Seat s) { return static_cast<Seat>((static_cast<int>(s) + 1) % 4); }

struct HistoryEntry {
  Seat seat;
  Bid bid;
  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

// Public bidding history; contract bids appear in strictly increasing order.
struct BiddingHistory {
  std::vector<HistoryEntry> entries;

  void append(Seat seat, const Bid& bid) { entries.push_back({seat, bid}); }
  bool empty() const { return entries.empty(); }
  int size() const { return static_cast<int>(entries.size()); }
};

// Per-card (or per-goal) probabilities.
struct BeliefVector {
  std::vector<double> probs;
};

struct HcpCount {
  std::vector<int> per_suit;
  int total = 0;
};

// A=4, K=3, Q=2, J=1, else 0; keyed on the rank identifier.
int rank_hcp(const std::string& rank);
HcpCount hand_hcp(const DeckSpec& deck, const Hand& hand);

std::vector<double> encode_hand(const DeckSpec& deck, const Hand& hand);

// Width of one history slot: one-hot over bid actions + validity + seat flag.
inline int history_slot_width(const DeckSpec& deck) { return deck.num_bid_actions() + 2; }

// Flat fixed-length encoding, most recent entry in the last slot. Entries
// older than L are dropped; unused leading slots stay all-zero with validity 0.
// Seat flag is 0 for North, 1 for South.
std::vector<double> encode_history(const DeckSpec& deck, const BiddingHistory& history, int num_slots);

}  // namespace pbl

#endif  // PBL_CORE_HPP_
