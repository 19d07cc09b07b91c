#ifndef PBL_REPORT_HPP_
#define PBL_REPORT_HPP_

#include <functional>
#include <string>
#include <vector>

#include "pbl/bridge_env.hpp"
#include "pbl/core.hpp"
#include "pbl/data.hpp"

namespace pbl {

// Greedy action for `seat` in `state` given the legal-action mask.
using GreedyPolicyFn =
    std::function<int(const AuctionState& state, Seat seat, const std::vector<bool>& mask)>;
// Belief over the partner's cards from the public history, as seen by `viewer`.
using BeliefQueryFn =
    std::function<std::vector<double>(const BiddingHistory& history, Seat viewer)>;

struct EpisodeStep {
  Seat seat = Seat::kNorth;
  int action = 0;
  std::vector<double> belief;  // actor's belief about the partner at decision time
};

struct EpisodeRecord {
  Deal deal;
  std::vector<EpisodeStep> steps;
  bool double_pass = false;
  double reward = 0.0;  // normalized duplicate score (r_dp on double pass)
};

struct EvalResult {
  double mean_score = 0.0;
  std::vector<EpisodeRecord> episodes;
};

// Plays greedy episodes on the first n deals (0 = all) of a scored set and
// scores each from its ScoreTable row. Throws std::invalid_argument on an
// unscored set.
EvalResult run_greedy_episodes(const BridgeEnv& env, const DealSet& set,
                               const GreedyPolicyFn& policy, const BeliefQueryFn& belief,
                               int n_episodes = 0);

// Per-suit expected HCP of a belief vector: sum over cards of prob * hcp.
std::vector<double> belief_hcp(const DeckSpec& deck, const std::vector<double>& belief);

enum class HcpStage { kOpening, kResponse };
enum class HcpSource { kOwn, kBelief, kOwnPlusBelief };

struct HcpRow {
  int bid_action = 0;  // action index of the grouping bid
  std::string bid_label;
  int count = 0;
  std::vector<double> per_suit;
  double total = 0.0;
  int max_suit = -1;  // row-max suit column; marked only for suited bids
};

struct HcpTable {
  HcpStage stage = HcpStage::kOpening;
  HcpSource source = HcpSource::kOwn;
  std::vector<HcpRow> rows;  // sorted by bid index; empty groups omitted

  std::string to_csv(const DeckSpec& deck) const;
};

// Groups episodes by the bid made at the given stage (opening = the first
// decision, response = the second) and averages the chosen HCP source for the
// acting seat.
HcpTable hcp_table(const DeckSpec& deck, const std::vector<EpisodeRecord>& episodes,
                   HcpStage stage, HcpSource source);

struct BeliefTracePoint {
  int step = 0;                      // 0 = empty history, then one per bid
  std::string last_bid;              // empty at step 0
  std::vector<double> hcp_n;         // North's belief about South, per suit
  std::vector<double> hcp_s;         // South's belief about North, per suit
};

struct BeliefTrace {
  std::vector<BeliefTracePoint> points;
  std::vector<std::string> bids;

  std::string to_json(const DeckSpec& deck) const;
};

// Plays one greedy episode and records both seats' belief-HCP after each bid.
BeliefTrace belief_trace(const BridgeEnv& env, const Deal& deal, const GreedyPolicyFn& policy,
                         const BeliefQueryFn& belief);

}  // namespace pbl

#endif  // PBL_REPORT_HPP_
