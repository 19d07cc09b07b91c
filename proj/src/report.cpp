#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pbl/report.hpp"

namespace pbl {

EvalResult run_greedy_episodes(const BridgeEnv& env, const DealSet& set,
                               const GreedyPolicyFn& policy, const BeliefQueryFn& belief,
                               int n_episodes) {
  if (!set.scored) throw std::invalid_argument("run_greedy_episodes: deal set is not scored");
  const int n = n_episodes > 0 ? std::min<int>(n_episodes, static_cast<int>(set.size()))
                               : static_cast<int>(set.size());
  EvalResult result;
  result.episodes.reserve(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Deal& deal = set.deals[i];
    EpisodeRecord rec;
    rec.deal = deal;
    AuctionState s = env.reset(deal.hand_n, deal.hand_s);
    while (!s.terminal) {
      EpisodeStep step;
      step.seat = s.to_act;
      step.belief = belief(s.history, s.to_act);
      step.action = policy(s, s.to_act, env.legal_actions(s));
      s = env.step(s, step.action);
      rec.steps.push_back(std::move(step));
    }
    const ScoreTable& table = set.scores[i];
    rec.double_pass = s.double_pass;
    if (s.double_pass) {
      rec.reward = table.double_pass_reward;
    } else {
      const Bid bid = Bid::contract(s.final_contract->level, s.final_contract->trump);
      rec.reward = table.contract_scores[bid_index(env.deck(), bid) - 1];
    }
    sum += rec.reward;
    result.episodes.push_back(std::move(rec));
  }
  result.mean_score = n > 0 ? sum / n : 0.0;
  return result;
}

std::vector<double> belief_hcp(const DeckSpec& deck, const std::vector<double>& belief) {
  std::vector<double> per_suit(deck.num_suits(), 0.0);
  for (int c = 0; c < deck.deck_size(); ++c)
    per_suit[deck.suit_of(c)] += belief[c] * rank_hcp(deck.ranks[deck.rank_of(c)]);
  return per_suit;
}

namespace {

std::vector<double> source_hcp(const DeckSpec& deck, const EpisodeRecord& rec,
                               const EpisodeStep& step, HcpSource source) {
  std::vector<double> v(deck.num_suits(), 0.0);
  if (source == HcpSource::kOwn || source == HcpSource::kOwnPlusBelief) {
    const Hand& own = step.seat == Seat::kNorth ? rec.deal.hand_n : rec.deal.hand_s;
    const HcpCount own_hcp = hand_hcp(deck, own);
    for (int s = 0; s < deck.num_suits(); ++s) v[s] += own_hcp.per_suit[s];
  }
  if (source == HcpSource::kBelief || source == HcpSource::kOwnPlusBelief) {
    const std::vector<double> b = belief_hcp(deck, step.belief);
    for (int s = 0; s < deck.num_suits(); ++s) v[s] += b[s];
  }
  return v;
}

}  // namespace

HcpTable hcp_table(const DeckSpec& deck, const std::vector<EpisodeRecord>& episodes,
                   HcpStage stage, HcpSource source) {
  const std::size_t stage_index = stage == HcpStage::kOpening ? 0 : 1;

  struct Accum {
    int count = 0;
    std::vector<double> sum;
  };
  std::map<int, Accum> groups;
  for (const EpisodeRecord& rec : episodes) {
    if (rec.steps.size() <= stage_index) continue;
    const EpisodeStep& step = rec.steps[stage_index];
    Accum& acc = groups[step.action];
    if (acc.sum.empty()) acc.sum.assign(deck.num_suits(), 0.0);
    const std::vector<double> v = source_hcp(deck, rec, step, source);
    for (int s = 0; s < deck.num_suits(); ++s) acc.sum[s] += v[s];
    ++acc.count;
  }

  HcpTable table;
  table.stage = stage;
  table.source = source;
  for (const auto& [action, acc] : groups) {
    HcpRow row;
    row.bid_action = action;
    const Bid bid = bid_from_index(deck, action);
    row.bid_label = bid_to_string(deck, bid);
    row.count = acc.count;
    row.per_suit.resize(deck.num_suits());
    for (int s = 0; s < deck.num_suits(); ++s) {
      row.per_suit[s] = acc.sum[s] / acc.count;
      row.total += row.per_suit[s];
    }
    if (!bid.is_pass() && bid.trump != deck.nt_index()) {
      row.max_suit = static_cast<int>(
          std::max_element(row.per_suit.begin(), row.per_suit.end()) - row.per_suit.begin());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string HcpTable::to_csv(const DeckSpec& deck) const {
  std::ostringstream out;
  out << "bid,count";
  for (const std::string& s : deck.suits) out << ',' << s;
  out << ",total,max_suit\n";
  for (const HcpRow& row : rows) {
    out << row.bid_label << ',' << row.count;
    for (double v : row.per_suit) out << ',' << v;
    out << ',' << row.total << ','
        << (row.max_suit >= 0 ? deck.suits[row.max_suit] : std::string("-")) << '\n';
  }
  return out.str();
}

BeliefTrace belief_trace(const BridgeEnv& env, const Deal& deal, const GreedyPolicyFn& policy,
                         const BeliefQueryFn& belief) {
  const DeckSpec& deck = env.deck();
  BeliefTrace trace;
  AuctionState s = env.reset(deal.hand_n, deal.hand_s);

  const auto record = [&](const std::string& last_bid) {
    BeliefTracePoint p;
    p.step = static_cast<int>(trace.points.size());
    p.last_bid = last_bid;
    p.hcp_n = belief_hcp(deck, belief(s.history, Seat::kNorth));
    p.hcp_s = belief_hcp(deck, belief(s.history, Seat::kSouth));
    trace.points.push_back(std::move(p));
  };

  record("");
  while (!s.terminal) {
    const int action = policy(s, s.to_act, env.legal_actions(s));
    s = env.step(s, action);
    const std::string label = bid_to_string(deck, bid_from_index(deck, action));
    trace.bids.push_back(label);
    record(label);
  }
  return trace;
}

std::string BeliefTrace::to_json(const DeckSpec& deck) const {
  nlohmann::json j;
  j["suits"] = deck.suits;
  j["bids"] = bids;
  j["points"] = nlohmann::json::array();
  for (const BeliefTracePoint& p : points) {
    j["points"].push_back({{"step", p.step},
                           {"last_bid", p.last_bid},
                           {"hcp_north_about_south", p.hcp_n},
                           {"hcp_south_about_north", p.hcp_s}});
  }
  return j.dump(2);
}

}  // namespace pbl
