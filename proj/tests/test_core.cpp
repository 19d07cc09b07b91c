#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "pbl/core.hpp"
#include "pbl/rng.hpp"

using namespace pbl;

TEST_CASE("deck invariants") {
  const DeckSpec std_deck = DeckSpec::standard();
  CHECK(std_deck.deck_size() == 52);
  CHECK(std_deck.num_bid_actions() == 36);
  CHECK(std_deck.num_trumps() == 5);

  const DeckSpec mini = DeckSpec::mini16();
  CHECK(mini.deck_size() == 16);
  CHECK(mini.num_bid_actions() == 11);  // PASS + 2 levels x 5 trumps
  CHECK_NOTHROW(std_deck.validate());
  CHECK_NOTHROW(mini.validate());
}

TEST_CASE("card indexing round-trips") {
  const DeckSpec deck = DeckSpec::standard();
  for (int s = 0; s < deck.num_suits(); ++s)
    for (int r = 0; r < deck.num_ranks(); ++r) {
      const int c = deck.card_index(s, r);
      CHECK(deck.suit_of(c) == s);
      CHECK(deck.rank_of(c) == r);
    }
}

TEST_CASE("bid ordering is a strict total order with NT highest per level") {
  const DeckSpec deck = DeckSpec::standard();
  std::vector<Bid> bids;
  for (int level = 1; level <= deck.max_level; ++level)
    for (int trump = 0; trump < deck.num_trumps(); ++trump)
      bids.push_back(Bid::contract(level, trump));

  for (std::size_t i = 0; i < bids.size(); ++i)
    for (std::size_t j = 0; j < bids.size(); ++j) {
      const Ordering o = compare_bids(bids[i], bids[j]);
      if (i < j) CHECK(o == Ordering::kLt);
      if (i == j) CHECK(o == Ordering::kEq);
      if (i > j) CHECK(o == Ordering::kGt);
    }

  CHECK(compare_bids(Bid::contract(1, deck.nt_index()), Bid::contract(2, 0)) == Ordering::kLt);
  CHECK(legal_followup(Bid::contract(1, 2), Bid::contract(1, 3)));
  CHECK_FALSE(legal_followup(Bid::contract(1, 3), Bid::contract(1, 3)));
  CHECK_FALSE(legal_followup(Bid::contract(2, 0), Bid::contract(1, 4)));
}

TEST_CASE("bid indices are stable, dense, and round-trip") {
  for (const DeckSpec& deck : {DeckSpec::standard(), DeckSpec::mini16()}) {
    CHECK(bid_index(deck, Bid::pass()) == 0);
    std::set<int> seen;
    for (int level = 1; level <= deck.max_level; ++level)
      for (int trump = 0; trump < deck.num_trumps(); ++trump) {
        const Bid bid = Bid::contract(level, trump);
        const int idx = bid_index(deck, bid);
        CHECK(idx >= 1);
        CHECK(idx < deck.num_bid_actions());
        CHECK(seen.insert(idx).second);
        CHECK(bid_from_index(deck, idx) == bid);
      }
    CHECK(static_cast<int>(seen.size()) == deck.num_bid_actions() - 1);
    // Ascending strength matches ascending index.
    for (int i = 1; i + 1 < deck.num_bid_actions(); ++i)
      CHECK(compare_bids(bid_from_index(deck, i), bid_from_index(deck, i + 1)) == Ordering::kLt);
  }
}

TEST_CASE("HCP: A=4 K=3 Q=2 J=1, 10 per suit, 40 per standard deck") {
  CHECK(rank_hcp("A") == 4);
  CHECK(rank_hcp("K") == 3);
  CHECK(rank_hcp("Q") == 2);
  CHECK(rank_hcp("J") == 1);
  CHECK(rank_hcp("T") == 0);
  CHECK(rank_hcp("2") == 0);

  const DeckSpec deck = DeckSpec::standard();
  Hand full;
  for (int c = 0; c < deck.deck_size(); ++c) full.add(c);
  const HcpCount hcp = hand_hcp(deck, full);
  CHECK(hcp.total == 40);
  for (int s = 0; s < deck.num_suits(); ++s) CHECK(hcp.per_suit[s] == 10);
}

TEST_CASE("hand HCP sums over a 4-way partition equal the deck total") {
  const DeckSpec deck = DeckSpec::standard();
  Rng rng = make_stream(7, "partition");
  std::vector<int> cards(deck.deck_size());
  for (int i = 0; i < deck.deck_size(); ++i) cards[i] = i;
  std::shuffle(cards.begin(), cards.end(), rng);
  Hand hands[4];
  for (int i = 0; i < deck.deck_size(); ++i) hands[i % 4].add(cards[i]);
  int total = 0;
  for (const Hand& h : hands) total += hand_hcp(deck, h).total;
  CHECK(total == 40);
}

TEST_CASE("encode_hand is the indicator vector") {
  const DeckSpec deck = DeckSpec::mini16();
  Hand h;
  h.add(0);
  h.add(5);
  h.add(15);
  const std::vector<double> x = encode_hand(deck, h);
  REQUIRE(static_cast<int>(x.size()) == deck.deck_size());
  for (int c = 0; c < deck.deck_size(); ++c) CHECK(x[c] == (h.has(c) ? 1.0 : 0.0));
}

namespace {

BiddingHistory random_history(const DeckSpec& deck, Rng& rng, int max_len) {
  BiddingHistory h;
  const int len = uniform_int(rng, 0, max_len);
  Seat seat = Seat::kNorth;
  int last = 0;  // last contract index, 0 = none yet
  for (int i = 0; i < len; ++i) {
    // Weighted toward contracts so histories stay distinguishable.
    const bool pass = last + 1 >= deck.num_bid_actions() || uniform01(rng) < 0.3;
    if (pass) {
      h.append(seat, Bid::pass());
    } else {
      last = uniform_int(rng, last + 1, deck.num_bid_actions() - 1);
      h.append(seat, bid_from_index(deck, last));
    }
    seat = partner_of(seat);
  }
  return h;
}

}  // namespace

TEST_CASE("encode_history is injective on histories within the window") {
  const DeckSpec deck = DeckSpec::mini16();
  const int slots = 8;
  Rng rng = make_stream(3, "inj");
  std::map<std::vector<double>, BiddingHistory> seen;
  for (int trial = 0; trial < 400; ++trial) {
    const BiddingHistory h = random_history(deck, rng, slots);
    const std::vector<double> enc = encode_history(deck, h, slots);
    REQUIRE(static_cast<int>(enc.size()) == slots * history_slot_width(deck));
    const auto [it, fresh] = seen.emplace(enc, h);
    if (!fresh) {
      // A collision is only acceptable for identical histories.
      CHECK(it->second.entries == h.entries);
    }
  }
}

TEST_CASE("encode_history keeps the most recent entries when truncating") {
  const DeckSpec deck = DeckSpec::mini16();
  BiddingHistory h;
  h.append(Seat::kNorth, Bid::contract(1, 0));
  h.append(Seat::kSouth, Bid::contract(1, 1));
  h.append(Seat::kNorth, Bid::contract(1, 2));

  BiddingHistory tail;
  tail.append(Seat::kSouth, Bid::contract(1, 1));
  tail.append(Seat::kNorth, Bid::contract(1, 2));

  CHECK(encode_history(deck, h, 2) == encode_history(deck, tail, 2));
  // Empty slots lead; the last slot holds the most recent bid.
  const std::vector<double> enc = encode_history(deck, h, 8);
  const int w = history_slot_width(deck);
  for (int s = 0; s < 5; ++s)
    for (int k = 0; k < w; ++k) CHECK(enc[s * w + k] == 0.0);
}

TEST_CASE("named rng streams are decoupled") {
  Rng a1 = make_stream(42, "alpha");
  Rng a2 = make_stream(42, "alpha");
  Rng b = make_stream(42, "beta");
  CHECK(a1() == a2());
  CHECK(make_stream(42, "alpha", 0)() != make_stream(42, "alpha", 1)());
  bool differs = false;
  Rng a3 = make_stream(42, "alpha");
  for (int i = 0; i < 4; ++i) differs |= (a3() != b());
  CHECK(differs);
}
