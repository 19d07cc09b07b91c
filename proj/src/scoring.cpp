#include "pbl/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <unordered_map>

namespace pbl {

int trump_scale(const DeckSpec& deck, int trump) {
  (void)deck;
  return trump < 2 ? 20 : 30;
}

int trump_bias(const DeckSpec& deck, int trump) {
  return trump == deck.nt_index() ? 10 : 0;
}

int duplicate_score(const DeckSpec& deck, const ScoringRules& rules, int tricks_made,
                    int bid_level, int trump) {
  if (tricks_made < 0 || tricks_made > deck.cards_per_hand)
    throw std::domain_error("duplicate_score: tricks_made out of range");
  if (bid_level < 1 || bid_level > deck.max_level)
    throw std::domain_error("duplicate_score: bid_level out of range");
  if (trump < 0 || trump >= deck.num_trumps())
    throw std::domain_error("duplicate_score: trump out of range");

  const int scale = trump_scale(deck, trump);
  const int delta = tricks_made - (bid_level + rules.book);
  int score = 0;
  if (delta >= 0) {
    score += bid_level * scale + trump_bias(deck, trump);  // contract tricks
    if (rules.real_bridge_bonuses) {
      score += score >= 100 ? 300 : 50;
    } else {
      score = score >= 100 ? 300 : 50;  // literal assignment
    }
    if (delta == 6) {
      score += 500;   // slam
    } else if (delta == 7) {
      score += 1000;  // grand slam (unreachable with book 6 and 13 tricks)
    }
    if (delta > 0) score += delta * scale;
  } else {
    score -= (rules.real_bridge_bonuses ? -delta : bid_level) * 50;
  }
  return score;
}

int max_abs_score(const DeckSpec& deck, const ScoringRules& rules) {
  int best = 0;
  for (int tricks = 0; tricks <= deck.cards_per_hand; ++tricks)
    for (int level = 1; level <= deck.max_level; ++level)
      for (int trump = 0; trump < deck.num_trumps(); ++trump)
        best = std::max(best, std::abs(duplicate_score(deck, rules, tricks, level, trump)));
  return best;
}

double compute_double_pass_reward(const std::vector<double>& contract_scores) {
  return -*std::max_element(contract_scores.begin(), contract_scores.end());
}

namespace {

// Double-dummy alpha-beta solver. Seats move clockwise N,E,S,W; a seat that
// has run out of cards is skipped, so partial E/W hands (mini-deck sampling)
// play out naturally.
class DdSolver {
 public:
  DdSolver(const DeckSpec& deck, const Hand hands[4], Seat declarer, int trump)
      : deck_(deck), trump_(trump), num_ranks_(deck.num_ranks()) {
    for (int i = 0; i < 4; ++i) hands_[i] = hands[i].bits;
    decl_mask_ = (1 << static_cast<int>(declarer)) | (1 << (static_cast<int>(declarer) + 2) % 4);
    for (int s = 0; s < deck_.num_suits(); ++s) {
      std::uint64_t m = 0;
      for (int r = 0; r < num_ranks_; ++r) m |= 1ULL << deck_.card_index(s, r);
      suit_mask_.push_back(m);
    }
  }

  int solve(Seat leader, int total_tricks) {
    return trick_start(static_cast<int>(leader), 0, total_tricks);
  }

 private:
  struct TtEntry {
    int lo;
    int hi;
  };

  bool declaring(int seat) const { return (decl_mask_ >> seat) & 1; }

  std::uint64_t state_key(int leader) const {
    std::uint64_t h = static_cast<std::uint64_t>(leader);
    for (int i = 0; i < 4; ++i) h = hash_combine(h, hands_[i]);
    return h;
  }

  int tricks_left() const {
    int mx = 0;
    for (std::uint64_t h : hands_) mx = std::max(mx, __builtin_popcountll(h));
    return mx;
  }

  // Value = declaring-side tricks from here on, searched in [alpha, beta].
  int trick_start(int leader, int alpha, int beta) {
    const int remaining = tricks_left();
    if (remaining == 0) return 0;
    alpha = std::max(alpha, 0);
    beta = std::min(beta, remaining);
    if (alpha >= beta) return alpha;

    const std::uint64_t key = state_key(leader);
    auto it = tt_.find(key);
    if (it != tt_.end()) {
      if (it->second.lo >= beta) return it->second.lo;
      if (it->second.hi <= alpha) return it->second.hi;
      alpha = std::max(alpha, it->second.lo);
      beta = std::min(beta, it->second.hi);
    }

    int trick_cards[4];
    int trick_seats[4];
    const int v = play_position(leader, 0, 0, trick_cards, trick_seats, -1, alpha, beta);

    TtEntry& e = tt_[key];
    if (it == tt_.end()) e = {0, remaining};
    if (v <= alpha)
      e.hi = std::min(e.hi, v);
    else if (v >= beta)
      e.lo = std::max(e.lo, v);
    else
      e.lo = e.hi = v;
    return v;
  }

  int play_position(int leader, int pos, int played, int trick_cards[4], int trick_seats[4],
                    int led_suit, int alpha, int beta) {
    if (pos == 4) return finish_trick(played, trick_cards, trick_seats, led_suit, alpha, beta);
    const int seat = (leader + pos) % 4;
    if (hands_[seat] == 0)
      return play_position(leader, pos + 1, played, trick_cards, trick_seats, led_suit, alpha, beta);

    std::uint64_t moves = hands_[seat];
    if (led_suit >= 0) {
      std::uint64_t follow = moves & suit_mask_[led_suit];
      if (follow) moves = follow;
    }
    std::uint64_t in_trick = 0;
    for (int i = 0; i < played; ++i) in_trick |= 1ULL << trick_cards[i];
    moves = prune_equivalent(seat, moves, in_trick);

    const bool maximizing = declaring(seat);
    int best = maximizing ? -1 : 1 << 20;
    // Iterate high cards first.
    std::vector<int> cards;
    for (std::uint64_t b = moves; b; b &= b - 1) cards.push_back(__builtin_ctzll(b));
    for (auto rit = cards.rbegin(); rit != cards.rend(); ++rit) {
      const int card = *rit;
      hands_[seat] &= ~(1ULL << card);
      trick_cards[played] = card;
      trick_seats[played] = seat;
      const int next_led = led_suit >= 0 ? led_suit : deck_.suit_of(card);
      const int v = play_position(leader, pos + 1, played + 1, trick_cards, trick_seats,
                                  next_led, alpha, beta);
      hands_[seat] |= 1ULL << card;
      if (maximizing) {
        best = std::max(best, v);
        alpha = std::max(alpha, v);
      } else {
        best = std::min(best, v);
        beta = std::min(beta, v);
      }
      if (alpha >= beta) break;
    }
    return best;
  }

  int finish_trick(int played, const int trick_cards[4], const int trick_seats[4], int led_suit,
                   int alpha, int beta) {
    if (played == 0) return 0;  // nobody could play
    int win = 0;
    for (int i = 1; i < played; ++i) {
      if (beats(trick_cards[i], trick_cards[win], led_suit)) win = i;
    }
    const int winner = trick_seats[win];
    const int won = declaring(winner) ? 1 : 0;
    return won + trick_start(winner, alpha - won, beta - won);
  }

  bool beats(int card, int over, int led_suit) const {
    const int s1 = deck_.suit_of(card), s2 = deck_.suit_of(over);
    const bool t1 = s1 == trump_ && trump_ != deck_.nt_index();
    const bool t2 = s2 == trump_ && trump_ != deck_.nt_index();
    if (t1 != t2) return t1;
    if (s1 != s2) return !t1 && s1 == led_suit && s2 != led_suit;
    return deck_.rank_of(card) > deck_.rank_of(over);
  }

  // Drop all but the lowest card of each run of equivalent cards: cards in the
  // same suit with no live card between them play identically. Live means held
  // by another seat or already on the table in the current trick.
  std::uint64_t prune_equivalent(int seat, std::uint64_t moves, std::uint64_t in_trick) const {
    std::uint64_t live_other = in_trick;
    for (int i = 0; i < 4; ++i)
      if (i != seat) live_other |= hands_[i];
    std::uint64_t out = 0;
    std::uint64_t rest = moves;
    while (rest) {
      const int card = __builtin_ctzll(rest);
      out |= 1ULL << card;
      // Skip upward-adjacent equivalents within the suit.
      int c = card;
      while (deck_.rank_of(c) + 1 < num_ranks_) {
        const int up = c + 1;
        if (rest & (1ULL << up)) {
          c = up;  // equivalent, owned by us; keep skipping
        } else if (live_other & (1ULL << up)) {
          break;  // blocked by a live card elsewhere
        } else {
          c = up;  // dead card, transparent
        }
      }
      for (int k = card; k <= c; ++k) rest &= ~(1ULL << k);
    }
    return out;
  }

  const DeckSpec& deck_;
  int trump_;
  int num_ranks_;
  std::uint64_t hands_[4];
  int decl_mask_ = 0;
  std::vector<std::uint64_t> suit_mask_;
  std::unordered_map<std::uint64_t, TtEntry> tt_;
};

}  // namespace

int dd_tricks(const DeckSpec& deck, const Hand hands[4], Seat declarer, int trump,
              int exact_search_limit) {
  int total = 0;
  std::uint64_t all = 0;
  for (int i = 0; i < 4; ++i) {
    if ((all & hands[i].bits) != 0) throw std::invalid_argument("dd_tricks: overlapping hands");
    all |= hands[i].bits;
    total += hands[i].size();
  }
  if (total > exact_search_limit)
    throw std::domain_error("dd_tricks: deal above exact-search limit");
  if (hands[0].size() != hands[2].size() || hands[1].size() != hands[3].size())
    throw std::invalid_argument("dd_tricks: partner hands must have equal sizes");
  const int tricks = std::max(hands[0].size(), hands[1].size());
  if (tricks == 0) return 0;

  DdSolver solver(deck, hands, declarer, trump);
  return solver.solve(left_of(declarer), tricks);
}

Seat declarer_for_contract(const DeckSpec& deck, const Hand& hand_n, const Hand& hand_s,
                           int trump) {
  if (trump == deck.nt_index()) return Seat::kNorth;
  std::uint64_t mask = 0;
  for (int r = 0; r < deck.num_ranks(); ++r) mask |= 1ULL << deck.card_index(trump, r);
  const int n = __builtin_popcountll(hand_n.bits & mask);
  const int s = __builtin_popcountll(hand_s.bits & mask);
  return s > n ? Seat::kSouth : Seat::kNorth;
}

namespace {

// All ways to choose |east| cards for East out of `remaining`; West gets the rest.
void enumerate_completions(const std::vector<int>& remaining, int east_size,
                           std::vector<std::pair<Hand, Hand>>& out) {
  const int m = static_cast<int>(remaining.size());
  std::vector<int> idx(east_size);
  for (int i = 0; i < east_size; ++i) idx[i] = i;
  while (true) {
    Hand east, west;
    std::size_t k = 0;
    for (int i = 0; i < m; ++i) {
      if (k < idx.size() && idx[k] == i) {
        east.add(remaining[i]);
        ++k;
      } else {
        west.add(remaining[i]);
      }
    }
    out.emplace_back(east, west);
    // next combination
    int j = east_size - 1;
    while (j >= 0 && idx[j] == m - east_size + j) --j;
    if (j < 0) break;
    ++idx[j];
    for (int t = j + 1; t < east_size; ++t) idx[t] = idx[t - 1] + 1;
  }
}

}  // namespace

ScoreTable estimate_re(const DeckSpec& deck, const ScoringRules& rules, const Hand& hand_n,
                       const Hand& hand_s, const DDAConfig& cfg) {
  if (!hand_n.disjoint(hand_s)) throw std::invalid_argument("estimate_re: overlapping hands");
  if (hand_n.size() != deck.cards_per_hand || hand_s.size() != deck.cards_per_hand)
    throw std::invalid_argument("estimate_re: wrong hand size");
  if (cfg.num_samples < 1) throw std::invalid_argument("estimate_re: U < 1");

  std::vector<int> remaining;
  for (int c = 0; c < deck.deck_size(); ++c)
    if (!hand_n.has(c) && !hand_s.has(c)) remaining.push_back(c);
  const int east_size = std::min<int>(static_cast<int>(remaining.size()) / 2,
                                      deck.cards_per_hand);

  std::vector<std::pair<Hand, Hand>> completions;
  if (cfg.exhaustive || remaining.empty()) {
    if (remaining.empty()) {
      completions.emplace_back(Hand{}, Hand{});
    } else {
      enumerate_completions(remaining, east_size, completions);
    }
  } else {
    Rng rng = make_stream(cfg.seed, "dda");
    for (int u = 0; u < cfg.num_samples; ++u) {
      std::vector<int> pool = remaining;
      std::shuffle(pool.begin(), pool.end(), rng);
      Hand east, west;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (static_cast<int>(i) < east_size)
          east.add(pool[i]);
        else
          west.add(pool[i]);
      }
      completions.emplace_back(east, west);
    }
  }

  const double norm = static_cast<double>(max_abs_score(deck, rules));
  ScoreTable table;
  table.contract_scores.assign(deck.num_contracts(), 0.0);

  for (const auto& [east, west] : completions) {
    // One solve per trump; every level of the same trump shares the trick count.
    for (int trump = 0; trump < deck.num_trumps(); ++trump) {
      const Seat declarer = declarer_for_contract(deck, hand_n, hand_s, trump);
      Hand hands[4] = {hand_n, east, hand_s, west};
      const int tricks = dd_tricks(deck, hands, declarer, trump, cfg.exact_search_limit);
      for (int level = 1; level <= deck.max_level; ++level) {
        const int idx = bid_index(deck, Bid::contract(level, trump)) - 1;
        table.contract_scores[idx] +=
            duplicate_score(deck, rules, tricks, level, trump) / norm;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(completions.size());
  for (double& v : table.contract_scores) v *= inv;
  table.double_pass_reward = compute_double_pass_reward(table.contract_scores);
  return table;
}

}  // namespace pbl
