#ifndef PBL_CONFIG_HPP_
#define PBL_CONFIG_HPP_

#include <map>
#include <string>

#include "pbl/core.hpp"
#include "pbl/scoring.hpp"
#include "pbl/trainer.hpp"

namespace pbl {

// Parsed key-value config file: `[section]` headers, `key = value` lines,
// `#` or `;` comments. Keys are stored as "section.key".
struct ConfigFile {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  long get_int(const std::string& key, long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::string& path);
};

enum class Experiment { kMatrix, kBridge, kGuide };

struct RunConfig {
  Experiment experiment = Experiment::kBridge;
  std::string deck = "mini16";  // "mini16" or "standard"
  TrainerConfig trainer = TrainerConfig::desk_scale();
  DDAConfig dda;
  ScoringRules scoring;
  std::string train_deals;  // path to a scored DealSet (bridge)
  std::string test_deals;
  std::string out_dir = ".";
  bool deterministic = false;

  DeckSpec deck_spec() const;

  // Builds from a parsed file, rejecting unknown keys with
  // std::invalid_argument. The PBL_SEED environment variable, when set,
  // overrides the configured seed.
  static RunConfig from_file(const ConfigFile& file);
};

}  // namespace pbl

#endif  // PBL_CONFIG_HPP_
