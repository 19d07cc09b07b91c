#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pbl/bridge_env.hpp"

using namespace pbl;

namespace {

// Fixed disjoint mini-deck hands for auction tests.
struct Fixture {
  DeckSpec deck = DeckSpec::mini16();
  BridgeEnv env{DeckSpec::mini16(), 8};
  Hand n, s;

  Fixture() {
    for (int c = 0; c < 4; ++c) n.add(c);
    for (int c = 4; c < 8; ++c) s.add(c);
  }
};

}  // namespace

TEST_CASE("reset validates hands") {
  Fixture f;
  CHECK_NOTHROW(f.env.reset(f.n, f.s));
  Hand overlap = f.n;
  CHECK_THROWS_AS(f.env.reset(f.n, overlap), std::invalid_argument);
  Hand small;
  small.add(0);
  CHECK_THROWS_AS(f.env.reset(small, f.s), std::invalid_argument);
}

TEST_CASE("two opening passes end the episode as a double pass") {
  Fixture f;
  AuctionState s = f.env.reset(f.n, f.s);
  CHECK(s.to_act == Seat::kNorth);
  s = f.env.step(s, 0);
  CHECK(!s.terminal);
  CHECK(s.to_act == Seat::kSouth);
  s = f.env.step(s, 0);
  CHECK(s.terminal);
  CHECK(s.double_pass);
  CHECK(!s.final_contract.has_value());
}

TEST_CASE("a pass after any contract finalizes it") {
  Fixture f;
  AuctionState s = f.env.reset(f.n, f.s);
  const int bid_1c = bid_index(f.deck, Bid::contract(1, 0));
  s = f.env.step(s, bid_1c);  // North opens 1C
  CHECK(!s.terminal);
  s = f.env.step(s, 0);  // South passes
  CHECK(s.terminal);
  CHECK(!s.double_pass);
  REQUIRE(s.final_contract.has_value());
  CHECK(s.final_contract->level == 1);
  CHECK(s.final_contract->trump == 0);
  CHECK(s.final_contract->declarer == Seat::kNorth);
}

TEST_CASE("declarer is the seat that first bid the final trump") {
  Fixture f;
  const int bid_1c = bid_index(f.deck, Bid::contract(1, 0));
  const int bid_1d = bid_index(f.deck, Bid::contract(1, 1));
  const int bid_2c = bid_index(f.deck, Bid::contract(2, 0));

  AuctionState s = f.env.reset(f.n, f.s);
  s = f.env.step(s, bid_1c);  // N: 1C
  s = f.env.step(s, bid_1d);  // S: 1D
  s = f.env.step(s, bid_2c);  // N: 2C -- North bid clubs first
  s = f.env.step(s, 0);       // S passes
  REQUIRE(s.final_contract.has_value());
  CHECK(s.final_contract->level == 2);
  CHECK(s.final_contract->declarer == Seat::kNorth);

  // Same auction but South raises North's diamonds: North never bid clubs.
  s = f.env.reset(f.n, f.s);
  s = f.env.step(s, bid_1d);                                // N: 1D
  s = f.env.step(s, bid_2c);                                // S: 2C
  s = f.env.step(s, 0);                                     // N passes
  REQUIRE(s.final_contract.has_value());
  CHECK(s.final_contract->trump == 0);
  CHECK(s.final_contract->declarer == Seat::kSouth);
}

TEST_CASE("legal actions are PASS plus strictly higher contracts") {
  Fixture f;
  AuctionState s = f.env.reset(f.n, f.s);
  std::vector<bool> legal = f.env.legal_actions(s);
  CHECK(legal[0]);
  for (int a = 1; a < f.deck.num_bid_actions(); ++a) CHECK(legal[a]);

  const int bid_1h = bid_index(f.deck, Bid::contract(1, 2));
  s = f.env.step(s, bid_1h);
  legal = f.env.legal_actions(s);
  CHECK(legal[0]);
  for (int a = 1; a < f.deck.num_bid_actions(); ++a) {
    const Bid bid = bid_from_index(f.deck, a);
    CHECK(legal[a] == (compare_bids(bid, Bid::contract(1, 2)) == Ordering::kGt));
  }
}

TEST_CASE("stepping an illegal or terminal state throws") {
  Fixture f;
  AuctionState s = f.env.reset(f.n, f.s);
  const int bid_2nt = bid_index(f.deck, Bid::contract(2, f.deck.nt_index()));
  s = f.env.step(s, bid_2nt);  // highest possible contract
  const int bid_1c = bid_index(f.deck, Bid::contract(1, 0));
  CHECK_THROWS_AS(f.env.step(s, bid_1c), std::logic_error);
  s = f.env.step(s, 0);
  CHECK(s.terminal);
  CHECK_THROWS_AS(f.env.step(s, 0), std::logic_error);
  CHECK_THROWS_AS(f.env.legal_actions(s), std::logic_error);
}

TEST_CASE("alternation and history bookkeeping") {
  Fixture f;
  AuctionState s = f.env.reset(f.n, f.s);
  const int bid_1c = bid_index(f.deck, Bid::contract(1, 0));
  const int bid_1s = bid_index(f.deck, Bid::contract(1, 3));
  s = f.env.step(s, bid_1c);
  CHECK(s.history.size() == 1);
  CHECK(s.history.entries[0].seat == Seat::kNorth);
  s = f.env.step(s, bid_1s);
  CHECK(s.to_act == Seat::kNorth);
  CHECK(s.history.entries[1].seat == Seat::kSouth);
  // Contract bids in the history are strictly increasing.
  CHECK(compare_bids(s.history.entries[0].bid, s.history.entries[1].bid) == Ordering::kLt);
}

TEST_CASE("observations expose only the viewer's hand plus public history") {
  Fixture f;
  AuctionState s = f.env.reset(f.n, f.s);
  const Observation on = f.env.observation(s, Seat::kNorth);
  const Observation os = f.env.observation(s, Seat::kSouth);
  CHECK(on.own_hand == encode_hand(f.deck, f.n));
  CHECK(os.own_hand == encode_hand(f.deck, f.s));
  CHECK(on.history_enc == os.history_enc);
  CHECK(static_cast<int>(on.history_enc.size()) ==
        f.env.history_slots() * history_slot_width(f.deck));
}
