#include "pbl/data.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "pbl/rng.hpp"

namespace pbl {

DealSet gen_deals(const DeckSpec& deck, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_deals: n < 1");
  deck.validate();
  DealSet set;
  set.deck = deck;
  set.seed = seed;
  std::vector<int> cards(deck.deck_size());
  std::iota(cards.begin(), cards.end(), 0);
  Rng rng = make_stream(seed, "deals");
  for (int i = 0; i < n; ++i) {
    std::shuffle(cards.begin(), cards.end(), rng);
    Deal d;
    for (int k = 0; k < deck.cards_per_hand; ++k) {
      d.hand_n.add(cards[k]);
      d.hand_s.add(cards[deck.cards_per_hand + k]);
    }
    set.deals.push_back(d);
  }
  return set;
}

void score_deals(DealSet& set, const ScoringRules& rules, const DDAConfig& cfg,
                 int num_workers) {
  set.dda = cfg;
  set.scores.assign(set.size(), ScoreTable{});
  auto score_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      DDAConfig deal_cfg = cfg;
      deal_cfg.seed = hash_combine(cfg.seed, i);
      set.scores[i] =
          estimate_re(set.deck, rules, set.deals[i].hand_n, set.deals[i].hand_s, deal_cfg);
    }
  };
  if (num_workers <= 1) {
    score_range(0, set.size());
  } else {
    std::vector<std::thread> workers;
    const std::size_t chunk = (set.size() + num_workers - 1) / num_workers;
    for (int w = 0; w < num_workers; ++w) {
      const std::size_t begin = std::min(set.size(), w * chunk);
      const std::size_t end = std::min(set.size(), begin + chunk);
      if (begin < end) workers.emplace_back(score_range, begin, end);
    }
    for (auto& t : workers) t.join();
  }
  set.scored = true;
}

void score_deals_from_file(DealSet& set, const ScoringRules& rules, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("score_deals_from_file: cannot open " + path);
  struct Row {
    std::vector<double> raw;
  };
  std::unordered_map<std::uint64_t, Row> rows;
  auto key = [](std::uint64_t n, std::uint64_t s) { return hash_combine(splitmix64(n), s); };
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string field;
    if (!std::getline(ss, field, ',')) continue;
    const std::uint64_t hn = std::stoull(field, nullptr, 16);
    if (!std::getline(ss, field, ','))
      throw std::runtime_error("score_deals_from_file: malformed line: " + line);
    const std::uint64_t hs = std::stoull(field, nullptr, 16);
    Row row;
    while (std::getline(ss, field, ',')) row.raw.push_back(std::stod(field));
    if (static_cast<int>(row.raw.size()) != set.deck.num_contracts())
      throw std::runtime_error("score_deals_from_file: wrong score count in line: " + line);
    rows[key(hn, hs)] = std::move(row);
  }
  const double norm = static_cast<double>(max_abs_score(set.deck, rules));
  set.scores.assign(set.size(), ScoreTable{});
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto it = rows.find(key(set.deals[i].hand_n.bits, set.deals[i].hand_s.bits));
    if (it == rows.end())
      throw std::runtime_error("score_deals_from_file: no table row for deal index " +
                               std::to_string(i));
    ScoreTable table;
    table.contract_scores.reserve(it->second.raw.size());
    for (double raw : it->second.raw) table.contract_scores.push_back(raw / norm);
    table.double_pass_reward = compute_double_pass_reward(table.contract_scores);
    set.scores[i] = std::move(table);
  }
  set.scored = true;
}

namespace {
constexpr char kMagic[8] = {'P', 'B', 'L', 'D', 'E', 'A', 'L', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

void write_string(std::ostream& os, const std::string& s) {
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  const auto n = read_pod<std::uint32_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}
}  // namespace

void save_dealset(const DealSet& set, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_dealset: cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(set.deck.suits.size()));
  for (const auto& s : set.deck.suits) write_string(os, s);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(set.deck.ranks.size()));
  for (const auto& r : set.deck.ranks) write_string(os, r);
  write_pod<std::int32_t>(os, set.deck.cards_per_hand);
  write_pod<std::int32_t>(os, set.deck.max_level);
  write_pod<std::uint64_t>(os, set.seed);
  write_pod<std::int32_t>(os, set.dda.num_samples);
  write_pod<std::uint64_t>(os, set.dda.seed);
  write_pod<std::uint8_t>(os, set.dda.exhaustive ? 1 : 0);
  write_pod<std::int32_t>(os, set.dda.exact_search_limit);
  write_pod<std::uint8_t>(os, set.scored ? 1 : 0);
  write_pod<std::uint64_t>(os, set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    write_pod<std::uint64_t>(os, set.deals[i].hand_n.bits);
    write_pod<std::uint64_t>(os, set.deals[i].hand_s.bits);
    if (set.scored) {
      const ScoreTable& t = set.scores[i];
      os.write(reinterpret_cast<const char*>(t.contract_scores.data()),
               static_cast<std::streamsize>(t.contract_scores.size() * sizeof(double)));
      write_pod<double>(os, t.double_pass_reward);
    }
  }
  if (!os) throw std::runtime_error("save_dealset: write failed");
}

DealSet load_dealset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_dealset: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("load_dealset: bad magic in " + path);
  DealSet set;
  set.deck.suits.clear();
  set.deck.ranks.clear();
  const auto n_suits = read_pod<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < n_suits; ++i) set.deck.suits.push_back(read_string(is));
  const auto n_ranks = read_pod<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < n_ranks; ++i) set.deck.ranks.push_back(read_string(is));
  set.deck.cards_per_hand = read_pod<std::int32_t>(is);
  set.deck.max_level = read_pod<std::int32_t>(is);
  set.seed = read_pod<std::uint64_t>(is);
  set.dda.num_samples = read_pod<std::int32_t>(is);
  set.dda.seed = read_pod<std::uint64_t>(is);
  set.dda.exhaustive = read_pod<std::uint8_t>(is) != 0;
  set.dda.exact_search_limit = read_pod<std::int32_t>(is);
  set.scored = read_pod<std::uint8_t>(is) != 0;
  const auto n = read_pod<std::uint64_t>(is);
  for (std::uint64_t i = 0; i < n; ++i) {
    Deal d;
    d.hand_n.bits = read_pod<std::uint64_t>(is);
    d.hand_s.bits = read_pod<std::uint64_t>(is);
    set.deals.push_back(d);
    if (set.scored) {
      ScoreTable t;
      t.contract_scores.resize(set.deck.num_contracts());
      is.read(reinterpret_cast<char*>(t.contract_scores.data()),
              static_cast<std::streamsize>(t.contract_scores.size() * sizeof(double)));
      t.double_pass_reward = read_pod<double>(is);
      set.scores.push_back(std::move(t));
    }
  }
  if (!is) throw std::runtime_error("load_dealset: truncated file " + path);
  return set;
}

void export_dealset_csv(const DealSet& set, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("export_dealset_csv: cannot open " + path);
  os << "hand_n,hand_s";
  if (set.scored) {
    for (int c = 0; c < set.deck.num_contracts(); ++c)
      os << "," << bid_to_string(set.deck, bid_from_index(set.deck, c + 1));
    os << ",r_dp";
  }
  os << "\n";
  os.precision(17);
  for (std::size_t i = 0; i < set.size(); ++i) {
    os << std::hex << set.deals[i].hand_n.bits << "," << set.deals[i].hand_s.bits << std::dec;
    if (set.scored) {
      for (double v : set.scores[i].contract_scores) os << "," << v;
      os << "," << set.scores[i].double_pass_reward;
    }
    os << "\n";
  }
}

}  // namespace pbl
