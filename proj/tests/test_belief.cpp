#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pbl/belief.hpp"
#include "pbl/bridge_env.hpp"
#include "pbl/data.hpp"

using namespace pbl;

TEST_CASE("Bernoulli belief loss closed forms") {
  // Uniform 0.5 belief: n * ln 2 regardless of the binary target.
  const int n = 52;
  std::vector<double> b(n, 0.5), x(n, 0.0);
  for (int i = 0; i < 13; ++i) x[i] = 1.0;
  CHECK(belief_loss(b, x) == doctest::Approx(n * std::log(2.0)));
  CHECK(belief_loss(b, x) == doctest::Approx(36.04).epsilon(0.001));

  // Perfect belief has zero loss.
  CHECK(belief_loss(x, x) == doctest::Approx(0.0).epsilon(1e-9));

  // Clamped logs keep a confident wrong belief finite.
  std::vector<double> wrong(n, 0.0);
  for (int i = 13; i < 26; ++i) wrong[i] = 1.0;
  CHECK(std::isfinite(belief_loss(wrong, x)));
}

TEST_CASE("categorical belief loss is cross entropy against the one-hot target") {
  const std::vector<double> b = {0.2, 0.5, 0.3};
  const std::vector<double> x = {0.0, 1.0, 0.0};
  CHECK(belief_loss_categorical(b, x) == doctest::Approx(-std::log(0.5)));
}

TEST_CASE("belief loss gradients match finite differences") {
  Rng rng = make_stream(1, "bl");
  const int n = 6;
  std::vector<double> b(n), x(n);
  for (int i = 0; i < n; ++i) {
    b[i] = 0.1 + 0.8 * uniform01(rng);
    x[i] = uniform01(rng) < 0.5 ? 0.0 : 1.0;
  }
  const std::vector<double> g = belief_loss_grad(b, x);
  const double h = 1e-6;
  for (int i = 0; i < n; ++i) {
    std::vector<double> bp = b, bm = b;
    bp[i] += h;
    bm[i] -= h;
    const double fd = (belief_loss(bp, x) - belief_loss(bm, x)) / (2 * h);
    CHECK(g[i] == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("validation split is stable under shuffling") {
  BeliefDataset ds;
  for (std::uint64_t i = 0; i < 1000; ++i)
    ds.pairs.push_back({{static_cast<double>(i)}, {0.0}, i});

  std::vector<bool> before(ds.pairs.size());
  for (std::size_t i = 0; i < ds.pairs.size(); ++i) before[i] = is_validation_pair(ds.pairs[i]);

  Rng rng = make_stream(3, "shuffle");
  std::shuffle(ds.pairs.begin(), ds.pairs.end(), rng);
  for (const BeliefPair& p : ds.pairs) {
    const std::size_t original = static_cast<std::size_t>(p.input[0]);
    CHECK(is_validation_pair(p) == before[original]);
  }

  // Roughly 10% of pairs land in validation.
  const int n_val = static_cast<int>(std::count(before.begin(), before.end(), true));
  CHECK(n_val > 50);
  CHECK(n_val < 200);
}

TEST_CASE("bridge belief inputs carry the viewer bit") {
  const DeckSpec deck = DeckSpec::mini16();
  BiddingHistory h;
  h.append(Seat::kNorth, Bid::contract(1, 0));
  const int slots = 4;
  const std::vector<double> vn = bridge_belief_input(deck, h, slots, Seat::kNorth);
  const std::vector<double> vs = bridge_belief_input(deck, h, slots, Seat::kSouth);
  REQUIRE(static_cast<int>(vn.size()) == bridge_belief_input_dim(deck, slots));
  CHECK(vn.back() == 0.0);
  CHECK(vs.back() == 1.0);
  CHECK(std::equal(vn.begin(), vn.end() - 1, vs.begin()));
}

TEST_CASE("dataset generation emits both perspectives per decision point") {
  const DeckSpec deck = DeckSpec::mini16();
  const BridgeEnv env(deck, 4);
  const DealSet deals = gen_deals(deck, 8, 2024);
  Rng rng = make_stream(7, "ds");

  // Scripted: open 1C then pass, so every episode has 2 decisions.
  const BridgeActFn act = [&](const AuctionState& s, Seat, const std::vector<bool>&, Rng&) {
    return s.history.empty() ? bid_index(deck, Bid::contract(1, 0)) : 0;
  };
  const BeliefDataset ds = generate_bridge_dataset(env, deals, 8, act, rng);
  // Per episode: 2 decision points x 2 seats + 2 terminal-history pairs.
  CHECK(ds.size() == 8 * (2 * 2 + 2));
  for (const BeliefPair& p : ds.pairs) {
    CHECK(static_cast<int>(p.input.size()) == bridge_belief_input_dim(deck, 4));
    CHECK(static_cast<int>(p.target.size()) == deck.deck_size());
    double tsum = 0.0;
    for (double t : p.target) tsum += t;
    CHECK(tsum == doctest::Approx(deck.cards_per_hand));
  }
}

TEST_CASE("training on an informative scripted policy beats the uninformed prior") {
  // Scripted opener: bid 1 of the suit with maximal HCP; responder passes.
  const DeckSpec deck = DeckSpec::mini16();
  const BridgeEnv env(deck, 4);
  const DealSet deals = gen_deals(deck, 400, 5);
  Rng rng = make_stream(9, "informative");

  const BridgeActFn act = [&](const AuctionState& s, Seat seat, const std::vector<bool>&, Rng&) {
    if (!s.history.empty()) return 0;
    const Hand& own = seat == Seat::kNorth ? s.hand_n : s.hand_s;
    const HcpCount hcp = hand_hcp(deck, own);
    const int suit = static_cast<int>(
        std::max_element(hcp.per_suit.begin(), hcp.per_suit.end()) - hcp.per_suit.begin());
    return bid_index(deck, Bid::contract(1, suit));
  };
  const BeliefDataset ds = generate_bridge_dataset(env, deals, 400, act, rng);

  Rng init = make_stream(9, "init");
  Mlp net = Mlp::make(bridge_belief_input_dim(deck, 4), {32}, deck.deck_size(), Head::kSigmoid,
                      init);
  BeliefTrainConfig cfg;
  cfg.max_epochs = 10;
  cfg.seed = 9;
  const BeliefTrainResult r = train_belief(ds, net, cfg);
  CHECK(r.best_val_loss < r.initial_val_loss);

  // Mean probability mass on the partner's actual strongest suit exceeds the
  // uninformed prior cards_per_hand / deck_size.
  const double prior = static_cast<double>(deck.cards_per_hand) / deck.deck_size();
  double mass = 0.0;
  int count = 0;
  for (int i = 0; i < 100; ++i) {
    const Deal& deal = deals.deals[i];
    AuctionState s = env.reset(deal.hand_n, deal.hand_s);
    const int a = act(s, Seat::kNorth, {}, rng);
    s = env.step(s, a);
    const std::vector<double> b =
        forward(net, bridge_belief_input(deck, s.history, 4, Seat::kSouth)).output;
    const HcpCount hcp = hand_hcp(deck, deal.hand_n);
    const int suit = static_cast<int>(
        std::max_element(hcp.per_suit.begin(), hcp.per_suit.end()) - hcp.per_suit.begin());
    double suit_mass = 0.0;
    for (int rk = 0; rk < deck.num_ranks(); ++rk) suit_mass += b[deck.card_index(suit, rk)];
    mass += suit_mass / deck.num_ranks();
    ++count;
  }
  CHECK(mass / count > prior);
}

TEST_CASE("train_belief rejects an empty dataset") {
  Rng rng = make_stream(1, "e");
  Mlp net = Mlp::make(2, {4}, 2, Head::kSigmoid, rng);
  BeliefDataset empty;
  CHECK_THROWS_AS(train_belief(empty, net, BeliefTrainConfig{}), std::invalid_argument);
}
