#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pbl/config.hpp"

namespace pbl {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string ConfigFile::get(const std::string& key, const std::string& fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

long ConfigFile::get_int(const std::string& key, long fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::size_t pos = 0;
  const long v = std::stol(it->second, &pos);
  if (pos != it->second.size())
    throw std::invalid_argument("config: key '" + key + "' is not an integer: " + it->second);
  return v;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::size_t pos = 0;
  const double v = std::stod(it->second, &pos);
  if (pos != it->second.size())
    throw std::invalid_argument("config: key '" + key + "' is not a number: " + it->second);
  return v;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw std::invalid_argument("config: key '" + key + "' is not a boolean: " + it->second);
}

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config: malformed section at line " +
                                    std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value at line " +
                                  std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config: empty key at line " + std::to_string(line_no));
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.values.count(full))
      throw std::invalid_argument("config: duplicate key '" + full + "'");
    cfg.values[full] = value;
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

DeckSpec RunConfig::deck_spec() const {
  if (deck == "standard") return DeckSpec::standard();
  if (deck == "mini16") return DeckSpec::mini16();
  throw std::invalid_argument("config: unknown deck '" + deck + "'");
}

RunConfig RunConfig::from_file(const ConfigFile& file) {
  static const std::set<std::string> known = {
      "run.experiment", "run.deck", "run.seed", "run.out_dir", "run.deterministic",
      "run.train_deals", "run.test_deals",
      "trainer.alpha0", "trainer.alpha_decay", "trainer.gamma", "trainer.ppo_clip",
      "trainer.pg_updates_per_iter", "trainer.episodes_per_update",
      "trainer.minibatch_episodes", "trainer.ppo_epochs", "trainer.pbl_iterations",
      "trainer.mode", "trainer.baseline", "trainer.pretrain_tau", "trainer.pretrain_steps",
      "trainer.pretrain_batch", "trainer.belief_episodes", "trainer.eval_every",
      "trainer.eval_episodes", "trainer.hidden", "trainer.history_slots",
      "trainer.entropy_coef", "trainer.policy_lr", "trainer.value_lr", "trainer.belief_lr",
      "trainer.belief_batch", "trainer.belief_max_epochs", "trainer.belief_patience",
      "dda.num_samples", "dda.exhaustive", "dda.exact_search_limit",
      "scoring.book", "scoring.real_bridge_bonuses",
  };
  for (const auto& [key, value] : file.values) {
    (void)value;
    if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
  }

  RunConfig rc;
  const std::string exp = file.get("run.experiment", "bridge");
  if (exp == "matrix") rc.experiment = Experiment::kMatrix;
  else if (exp == "bridge") rc.experiment = Experiment::kBridge;
  else if (exp == "guide") rc.experiment = Experiment::kGuide;
  else throw std::invalid_argument("config: unknown experiment '" + exp + "'");

  rc.deck = file.get("run.deck", rc.deck);
  rc.deck_spec();  // validates the name
  rc.out_dir = file.get("run.out_dir", rc.out_dir);
  rc.deterministic = file.get_bool("run.deterministic", rc.deterministic);
  rc.train_deals = file.get("run.train_deals", rc.train_deals);
  rc.test_deals = file.get("run.test_deals", rc.test_deals);

  TrainerConfig& t = rc.trainer;
  t.seed = static_cast<std::uint64_t>(file.get_int("run.seed", 0));
  if (const char* env_seed = std::getenv("PBL_SEED"))
    t.seed = static_cast<std::uint64_t>(std::stoull(env_seed));

  t.alpha0 = file.get_double("trainer.alpha0", t.alpha0);
  t.alpha_decay = file.get_double("trainer.alpha_decay", t.alpha_decay);
  t.gamma = file.get_double("trainer.gamma", t.gamma);
  t.ppo_clip = file.get_double("trainer.ppo_clip", t.ppo_clip);
  t.pg_updates_per_iter =
      static_cast<int>(file.get_int("trainer.pg_updates_per_iter", t.pg_updates_per_iter));
  t.episodes_per_update =
      static_cast<int>(file.get_int("trainer.episodes_per_update", t.episodes_per_update));
  t.minibatch_episodes =
      static_cast<int>(file.get_int("trainer.minibatch_episodes", t.minibatch_episodes));
  t.ppo_epochs = static_cast<int>(file.get_int("trainer.ppo_epochs", t.ppo_epochs));
  t.pbl_iterations = static_cast<int>(file.get_int("trainer.pbl_iterations", t.pbl_iterations));
  t.pretrain_tau = file.get_double("trainer.pretrain_tau", t.pretrain_tau);
  t.pretrain_steps = static_cast<int>(file.get_int("trainer.pretrain_steps", t.pretrain_steps));
  t.pretrain_batch = static_cast<int>(file.get_int("trainer.pretrain_batch", t.pretrain_batch));
  t.belief_episodes =
      static_cast<int>(file.get_int("trainer.belief_episodes", t.belief_episodes));
  t.eval_every = static_cast<int>(file.get_int("trainer.eval_every", t.eval_every));
  t.eval_episodes = static_cast<int>(file.get_int("trainer.eval_episodes", t.eval_episodes));
  t.history_slots = static_cast<int>(file.get_int("trainer.history_slots", t.history_slots));
  t.entropy_coef = file.get_double("trainer.entropy_coef", t.entropy_coef);
  t.policy_adam.lr = file.get_double("trainer.policy_lr", t.policy_adam.lr);
  t.value_adam.lr = file.get_double("trainer.value_lr", t.value_adam.lr);
  t.belief_train.adam.lr = file.get_double("trainer.belief_lr", t.belief_train.adam.lr);
  t.belief_train.batch_size =
      static_cast<int>(file.get_int("trainer.belief_batch", t.belief_train.batch_size));
  t.belief_train.max_epochs =
      static_cast<int>(file.get_int("trainer.belief_max_epochs", t.belief_train.max_epochs));
  t.belief_train.patience =
      static_cast<int>(file.get_int("trainer.belief_patience", t.belief_train.patience));

  const std::string mode = file.get("trainer.mode", "centralized");
  if (mode == "centralized") t.mode = TrainMode::kCentralized;
  else if (mode == "distributed") t.mode = TrainMode::kDistributed;
  else throw std::invalid_argument("config: unknown mode '" + mode + "'");

  const std::string baseline = file.get("trainer.baseline", "pbl");
  if (baseline == "pbl") t.baseline = BaselineKind::kPbl;
  else if (baseline == "ip") t.baseline = BaselineKind::kIp;
  else if (baseline == "ncr") t.baseline = BaselineKind::kNcr;
  else if (baseline == "npbi") t.baseline = BaselineKind::kNpbi;
  else throw std::invalid_argument("config: unknown baseline '" + baseline + "'");

  if (file.has("trainer.hidden")) {
    t.hidden.clear();
    std::istringstream in(file.get("trainer.hidden", ""));
    std::string tok;
    while (std::getline(in, tok, ',')) {
      tok = trim(tok);
      if (!tok.empty()) t.hidden.push_back(std::stoi(tok));
    }
    if (t.hidden.empty()) throw std::invalid_argument("config: trainer.hidden is empty");
  }

  rc.dda.num_samples = static_cast<int>(file.get_int("dda.num_samples", rc.dda.num_samples));
  rc.dda.exhaustive = file.get_bool("dda.exhaustive", rc.dda.exhaustive);
  rc.dda.exact_search_limit =
      static_cast<int>(file.get_int("dda.exact_search_limit", rc.dda.exact_search_limit));
  rc.dda.seed = t.seed;

  rc.scoring = ScoringRules::for_deck(rc.deck_spec());
  rc.scoring.book = static_cast<int>(file.get_int("scoring.book", rc.scoring.book));
  rc.scoring.real_bridge_bonuses =
      file.get_bool("scoring.real_bridge_bonuses", rc.scoring.real_bridge_bonuses);

  return rc;
}

}  // namespace pbl
