#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>

#include "pbl/config.hpp"
#include "pbl/report.hpp"

using namespace pbl;

TEST_CASE("config parsing: sections, comments, type checks") {
  const ConfigFile f = ConfigFile::parse(
      "# comment\n"
      "[run]\n"
      "experiment = matrix\n"
      "seed = 7 ; trailing comment\n"
      "[trainer]\n"
      "alpha0 = 2.5\n"
      "hidden = 32, 16\n");
  CHECK(f.get("run.experiment", "") == "matrix");
  CHECK(f.get_int("run.seed", 0) == 7);
  CHECK(f.get_double("trainer.alpha0", 0.0) == doctest::Approx(2.5));

  const RunConfig rc = RunConfig::from_file(f);
  CHECK(rc.experiment == Experiment::kMatrix);
  CHECK(rc.trainer.alpha0 == doctest::Approx(2.5));
  CHECK(rc.trainer.hidden == std::vector<int>{32, 16});

  CHECK_THROWS_AS(ConfigFile::parse("[run\nx = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(ConfigFile::parse("[run]\nnovalue\n"), std::invalid_argument);
  CHECK_THROWS_AS(ConfigFile::parse("[run]\nseed = 1\nseed = 2\n"), std::invalid_argument);
}

TEST_CASE("unknown config keys are rejected") {
  const ConfigFile f = ConfigFile::parse("[run]\nbogus_key = 1\n");
  CHECK_THROWS_AS(RunConfig::from_file(f), std::invalid_argument);
}

TEST_CASE("PBL_SEED environment variable overrides the configured seed") {
  const ConfigFile f = ConfigFile::parse("[run]\nseed = 7\n");
  setenv("PBL_SEED", "4242", 1);
  const RunConfig rc = RunConfig::from_file(f);
  unsetenv("PBL_SEED");
  CHECK(rc.trainer.seed == 4242);
  const RunConfig rc2 = RunConfig::from_file(f);
  CHECK(rc2.trainer.seed == 7);
}

TEST_CASE("baseline and mode names map onto the trainer config") {
  const ConfigFile f = ConfigFile::parse(
      "[trainer]\nbaseline = ncr\nmode = distributed\n");
  const RunConfig rc = RunConfig::from_file(f);
  CHECK(rc.trainer.baseline == BaselineKind::kNcr);
  CHECK(rc.trainer.mode == TrainMode::kDistributed);
  CHECK_THROWS_AS(
      RunConfig::from_file(ConfigFile::parse("[trainer]\nbaseline = bogus\n")),
      std::invalid_argument);
}

TEST_CASE("uniform belief HCP equals the closed-form prior") {
  // Every card held with probability cards_per_hand / deck_size; each suit of
  // the standard deck carries 10 HCP, so per-suit belief HCP = 10 * 13/52.
  const DeckSpec deck = DeckSpec::standard();
  const std::vector<double> uniform(deck.deck_size(), 13.0 / 52.0);
  const std::vector<double> hcp = belief_hcp(deck, uniform);
  REQUIRE(static_cast<int>(hcp.size()) == deck.num_suits());
  for (double v : hcp) CHECK(v == doctest::Approx(2.5));
}

namespace {

// Synthetic fixture: every episode opens 1S; the opener's spade HCP are fixed
// by construction.
std::vector<EpisodeRecord> synthetic_episodes(const DeckSpec& deck) {
  std::vector<EpisodeRecord> eps;
  const int spade = 3;
  // Hand A: AS + KS (7 spade HCP) plus two club fillers.
  EpisodeRecord a;
  a.deal.hand_n.add(deck.card_index(spade, 3));
  a.deal.hand_n.add(deck.card_index(spade, 2));
  a.deal.hand_n.add(deck.card_index(0, 0));
  a.deal.hand_n.add(deck.card_index(0, 1));
  for (int c = 0; c < deck.deck_size() && a.deal.hand_s.size() < deck.cards_per_hand; ++c)
    if (!a.deal.hand_n.has(c)) a.deal.hand_s.add(c);
  EpisodeStep sa;
  sa.seat = Seat::kNorth;
  sa.action = bid_index(deck, Bid::contract(1, spade));
  sa.belief.assign(deck.deck_size(), 0.0);
  a.steps.push_back(sa);
  eps.push_back(a);

  // Hand B: AS + QS + JS (7 spade HCP) plus one filler.
  EpisodeRecord b;
  b.deal.hand_n.add(deck.card_index(spade, 3));
  b.deal.hand_n.add(deck.card_index(spade, 1));
  b.deal.hand_n.add(deck.card_index(spade, 0));
  b.deal.hand_n.add(deck.card_index(1, 0));
  for (int c = 0; c < deck.deck_size() && b.deal.hand_s.size() < deck.cards_per_hand; ++c)
    if (!b.deal.hand_n.has(c)) b.deal.hand_s.add(c);
  EpisodeStep sb = sa;
  b.steps.push_back(sb);
  eps.push_back(b);
  return eps;
}

}  // namespace

TEST_CASE("hcp_table reproduces hand-computed averages on a synthetic fixture") {
  const DeckSpec deck = DeckSpec::mini16();
  const std::vector<EpisodeRecord> eps = synthetic_episodes(deck);
  const HcpTable table = hcp_table(deck, eps, HcpStage::kOpening, HcpSource::kOwn);
  REQUIRE(table.rows.size() == 1);
  const HcpRow& row = table.rows.front();
  CHECK(row.count == 2);
  CHECK(row.bid_label == "1S");
  // Both hands hold exactly 7 spade HCP.
  CHECK(row.per_suit[3] == doctest::Approx(7.0));
  CHECK(row.max_suit == 3);
  // Club fillers: hand A holds J+Q of clubs (mini deck ranks J,Q,K,A).
  CHECK(row.per_suit[0] == doctest::Approx((1.0 + 2.0) / 2));

  // Belief source with all-zero beliefs yields zero HCP.
  const HcpTable bt = hcp_table(deck, eps, HcpStage::kOpening, HcpSource::kBelief);
  for (double v : bt.rows.front().per_suit) CHECK(v == doctest::Approx(0.0));

  // own+belief with zero beliefs equals own.
  const HcpTable ob = hcp_table(deck, eps, HcpStage::kOpening, HcpSource::kOwnPlusBelief);
  CHECK(ob.rows.front().per_suit[3] == doctest::Approx(7.0));

  const std::string csv = table.to_csv(deck);
  CHECK(csv.find("1S") != std::string::npos);
}

TEST_CASE("belief_trace: step 0 is the prior and length = bids + 1") {
  const DeckSpec deck = DeckSpec::mini16();
  const BridgeEnv env(deck, 4);
  Deal deal;
  for (int c = 0; c < 4; ++c) deal.hand_n.add(c);
  for (int c = 4; c < 8; ++c) deal.hand_s.add(c);

  // Scripted: North opens 1C, South passes.
  const GreedyPolicyFn policy = [&](const AuctionState& s, Seat, const std::vector<bool>&) {
    return s.history.empty() ? bid_index(deck, Bid::contract(1, 0)) : 0;
  };
  // Belief: uniform prior on an empty history, clubs-heavy afterwards.
  const BeliefQueryFn belief = [&](const BiddingHistory& h, Seat) {
    std::vector<double> b(deck.deck_size(), 0.25);
    if (!h.empty())
      for (int r = 0; r < deck.num_ranks(); ++r) b[deck.card_index(0, r)] = 0.9;
    return b;
  };

  const BeliefTrace trace = belief_trace(env, deal, policy, belief);
  REQUIRE(trace.bids.size() == 2);
  REQUIRE(trace.points.size() == 3);  // bids + 1
  // Step 0: both seats see the uniform prior.
  CHECK(trace.points[0].hcp_n == trace.points[0].hcp_s);
  // After the 1C bid, club belief HCP strictly increases.
  CHECK(trace.points[1].hcp_s[0] > trace.points[0].hcp_s[0]);

  const std::string json = trace.to_json(deck);
  CHECK(json.find("hcp_south_about_north") != std::string::npos);
}

TEST_CASE("run_greedy_episodes scores from the deal tables") {
  const DeckSpec deck = DeckSpec::mini16();
  const BridgeEnv env(deck, 4);
  DealSet set = gen_deals(deck, 6, 3);
  DDAConfig dda;
  dda.exhaustive = true;
  score_deals(set, ScoringRules::for_deck(deck), dda);

  const BeliefQueryFn belief = [&](const BiddingHistory&, Seat) {
    return std::vector<double>(deck.deck_size(), 0.25);
  };

  // Always double-pass: mean equals the mean r_dp.
  const GreedyPolicyFn pass = [](const AuctionState&, Seat, const std::vector<bool>&) {
    return 0;
  };
  const EvalResult r = run_greedy_episodes(env, set, pass, belief);
  double expected = 0.0;
  for (const ScoreTable& t : set.scores) expected += t.double_pass_reward;
  CHECK(r.mean_score == doctest::Approx(expected / set.size()));
  CHECK(r.episodes.front().double_pass);

  // Per-deal argmax contract realizes the mean of per-deal maxima.
  const GreedyPolicyFn argmax = [&](const AuctionState& s, Seat, const std::vector<bool>&) {
    if (!s.history.empty()) return 0;
    // Find this deal's table by matching hands.
    for (std::size_t i = 0; i < set.size(); ++i)
      if (set.deals[i].hand_n == s.hand_n && set.deals[i].hand_s == s.hand_s) {
        const std::vector<double>& scores = set.scores[i].contract_scores;
        const int best = static_cast<int>(
            std::max_element(scores.begin(), scores.end()) - scores.begin());
        return best + 1;
      }
    return 0;
  };
  const EvalResult rmax = run_greedy_episodes(env, set, argmax, belief);
  double upper = 0.0;
  for (const ScoreTable& t : set.scores)
    upper += *std::max_element(t.contract_scores.begin(), t.contract_scores.end());
  CHECK(rmax.mean_score == doctest::Approx(upper / set.size()));

  // Unscored sets are rejected.
  const DealSet raw = gen_deals(deck, 2, 9);
  CHECK_THROWS_AS(run_greedy_episodes(env, raw, pass, belief), std::invalid_argument);
}
