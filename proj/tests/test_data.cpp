#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pbl/data.hpp"

using namespace pbl;

namespace {

std::string tmp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("gen_deals: deterministic, disjoint, correctly sized") {
  const DeckSpec deck = DeckSpec::mini16();
  const DealSet a = gen_deals(deck, 64, 123);
  const DealSet b = gen_deals(deck, 64, 123);
  const DealSet c = gen_deals(deck, 64, 124);
  REQUIRE(a.size() == 64);
  CHECK(a.deals == b.deals);
  CHECK(a.deals != c.deals);
  for (const Deal& d : a.deals) {
    CHECK(d.hand_n.size() == deck.cards_per_hand);
    CHECK(d.hand_s.size() == deck.cards_per_hand);
    CHECK(d.hand_n.disjoint(d.hand_s));
  }
}

TEST_CASE("score_deals is worker-count independent") {
  const DeckSpec deck = DeckSpec::mini16();
  const ScoringRules rules = ScoringRules::for_deck(deck);
  DDAConfig cfg;
  cfg.num_samples = 4;
  cfg.seed = 9;

  DealSet one = gen_deals(deck, 16, 5);
  DealSet two = gen_deals(deck, 16, 5);
  score_deals(one, rules, cfg, 1);
  score_deals(two, rules, cfg, 3);
  REQUIRE(one.scored);
  REQUIRE(two.scored);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one.scores[i].contract_scores == two.scores[i].contract_scores);
    CHECK(one.scores[i].double_pass_reward == two.scores[i].double_pass_reward);
  }
}

TEST_CASE("deal sets round-trip through the binary format") {
  const DeckSpec deck = DeckSpec::mini16();
  DealSet set = gen_deals(deck, 32, 77);
  DDAConfig cfg;
  cfg.num_samples = 2;
  cfg.seed = 1;
  score_deals(set, ScoringRules::for_deck(deck), cfg);

  const std::string path = tmp_file("pbl_deals_test.bin");
  save_dealset(set, path);
  const DealSet loaded = load_dealset(path);
  std::filesystem::remove(path);

  CHECK(loaded.seed == set.seed);
  CHECK(loaded.scored);
  CHECK(loaded.deals == set.deals);
  REQUIRE(loaded.scores.size() == set.scores.size());
  for (std::size_t i = 0; i < set.size(); ++i)
    CHECK(loaded.scores[i].contract_scores == set.scores[i].contract_scores);
  CHECK(loaded.deck.deck_size() == deck.deck_size());
}

TEST_CASE("external raw-score CSV ingestion normalizes and validates") {
  const DeckSpec deck = DeckSpec::mini16();
  const ScoringRules rules = ScoringRules::for_deck(deck);
  DealSet set = gen_deals(deck, 3, 4);

  // Write raw scores 50 for every contract; normalization divides by the
  // deck's max |score|.
  const std::string path = tmp_file("pbl_scores_test.csv");
  {
    std::ofstream out(path);
    char buf[32];
    for (const Deal& d : set.deals) {
      std::snprintf(buf, sizeof(buf), "%llx", static_cast<unsigned long long>(d.hand_n.bits));
      out << buf << ',';
      std::snprintf(buf, sizeof(buf), "%llx", static_cast<unsigned long long>(d.hand_s.bits));
      out << buf;
      for (int c = 0; c < deck.num_contracts(); ++c) out << ",50";
      out << '\n';
    }
  }
  score_deals_from_file(set, rules, path);
  std::filesystem::remove(path);

  REQUIRE(set.scored);
  const double expected = 50.0 / max_abs_score(deck, rules);
  for (const ScoreTable& t : set.scores) {
    for (double v : t.contract_scores) CHECK(v == doctest::Approx(expected));
    CHECK(t.double_pass_reward == doctest::Approx(-expected));
  }
}

TEST_CASE("missing table rows are reported with the deal index") {
  const DeckSpec deck = DeckSpec::mini16();
  DealSet set = gen_deals(deck, 2, 4);
  const std::string path = tmp_file("pbl_scores_missing.csv");
  {
    std::ofstream out(path);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%llx",
                  static_cast<unsigned long long>(set.deals[0].hand_n.bits));
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%llx",
                  static_cast<unsigned long long>(set.deals[0].hand_s.bits));
    out << buf;
    for (int c = 0; c < deck.num_contracts(); ++c) out << ",100";
    out << '\n';
  }
  try {
    score_deals_from_file(set, ScoringRules::for_deck(deck), path);
    FAIL("expected a missing-row error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("CSV export mirrors the binary content") {
  const DeckSpec deck = DeckSpec::mini16();
  DealSet set = gen_deals(deck, 4, 8);
  DDAConfig cfg;
  cfg.num_samples = 2;
  score_deals(set, ScoringRules::for_deck(deck), cfg);

  const std::string path = tmp_file("pbl_deals_test.csv");
  export_dealset_csv(set, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header.find("hand_n") != std::string::npos);
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 4);
  in.close();
  std::filesystem::remove(path);
}
