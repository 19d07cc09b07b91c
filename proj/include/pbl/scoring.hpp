#ifndef PBL_SCORING_HPP_
#define PBL_SCORING_HPP_

#include <cstdint>
#include <vector>

#include "pbl/core.hpp"
#include "pbl/rng.hpp"

namespace pbl {

// Duplicate-scoring knobs. The default follows the literal pseudocode
// semantics: the 300/50 bonus REPLACES the contract score and undertricks
// cost bid_level*50. `real_bridge_bonuses` switches to additive bonuses and
// |delta|*50 undertricks.
struct ScoringRules {
  // Tricks needed for a level-L contract = L + book. 6 for the standard deck;
  // mini decks use tricks_per_deal - max_level so that contracts stay makeable.
  int book = 6;
  bool real_bridge_bonuses = false;

  static ScoringRules for_deck(const DeckSpec& deck) {
    ScoringRules r;
    r.book = deck.cards_per_hand - deck.max_level;
    return r;
  }
};

// Scale is 20 for the first two suits (clubs/diamonds) and 30 otherwise;
// NT carries a +10 bias.
int trump_scale(const DeckSpec& deck, int trump);
int trump_bias(const DeckSpec& deck, int trump);

// Raw duplicate score for a declared contract. tricks_made in
// [0, cards_per_hand], level in [1, max_level].
int duplicate_score(const DeckSpec& deck, const ScoringRules& rules, int tricks_made,
                    int bid_level, int trump);

// Max |duplicate_score| over all inputs; 730 for the standard deck.
int max_abs_score(const DeckSpec& deck, const ScoringRules& rules);

// Per-deal normalized rewards, one entry per contract action, plus the
// double-pass penalty r_dp = -max(entries).
struct ScoreTable {
  std::vector<double> contract_scores;  // indexed by contract index (bid index - 1)
  double double_pass_reward = 0.0;
};

double compute_double_pass_reward(const std::vector<double>& contract_scores);

struct DDAConfig {
  int num_samples = 20;      // U
  std::uint64_t seed = 0;
  bool exhaustive = false;   // enumerate all E/W completions (mini decks only)
  int exact_search_limit = 16;  // max total cards for in-process solving
};

// Exact double-dummy trick count for the declaring side (declarer + partner),
// perfect information, optimal play. hands indexed by Seat. trump may be
// deck.nt_index() for no-trump. Throws std::domain_error above the search limit.
int dd_tricks(const DeckSpec& deck, const Hand hands[4], Seat declarer, int trump,
              int exact_search_limit = 16);

// Appendix-style sampled estimator: average DDA score over U random E/W
// completions of the remaining cards (or the full enumeration in exhaustive
// mode). Scores are normalized by max_abs_score. Declarer per contract column
// is the seat holding more cards of that trump, ties (and NT) to North.
ScoreTable estimate_re(const DeckSpec& deck, const ScoringRules& rules, const Hand& hand_n,
                       const Hand& hand_s, const DDAConfig& cfg);

Seat declarer_for_contract(const DeckSpec& deck, const Hand& hand_n, const Hand& hand_s,
                           int trump);

}  // namespace pbl

#endif  // PBL_SCORING_HPP_
