#ifndef PBL_DATA_HPP_
#define PBL_DATA_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "pbl/core.hpp"
#include "pbl/scoring.hpp"

namespace pbl {

struct Deal {
  Hand hand_n;
  Hand hand_s;
  friend bool operator==(const Deal&, const Deal&) = default;
};

// Pre-generated N/S deals with optional per-contract score rows.
struct DealSet {
  DeckSpec deck;
  std::uint64_t seed = 0;
  DDAConfig dda;
  bool scored = false;
  std::vector<Deal> deals;
  std::vector<ScoreTable> scores;  // parallel to deals when scored

  std::size_t size() const { return deals.size(); }
};

// Uniform random disjoint N/S hands via seeded shuffle; deterministic in
// (deck, n, seed).
DealSet gen_deals(const DeckSpec& deck, int n, std::uint64_t seed);

// In-process scoring via the sampled DDA estimator. Per-deal rng streams are
// derived from (cfg.seed, deal index), so results do not depend on the number
// of worker threads.
void score_deals(DealSet& set, const ScoringRules& rules, const DDAConfig& cfg,
                 int num_workers = 1);

// Ingest externally produced raw score tables (CSV: hand_n hex, hand_s hex,
// then one raw duplicate score per contract). Scores are normalized by
// max_abs_score on ingest. Throws std::runtime_error naming the first deal
// missing from the file.
void score_deals_from_file(DealSet& set, const ScoringRules& rules, const std::string& path);

void save_dealset(const DealSet& set, const std::string& path);
DealSet load_dealset(const std::string& path);

// Human-inspectable mirror.
void export_dealset_csv(const DealSet& set, const std::string& path);

}  // namespace pbl

#endif  // PBL_DATA_HPP_
