// Command-line surface: data generation/scoring, training, evaluation, and
// reporting. Exit codes: 0 success, 2 config error, 3 data error, 4 numeric
// error.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "pbl/belief.hpp"
#include "pbl/config.hpp"
#include "pbl/data.hpp"
#include "pbl/report.hpp"
#include "pbl/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct GlobalOpts {
  std::string out_dir = ".";
  int workers = 1;
  bool deterministic = false;
  bool paper_scale = false;
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

std::filesystem::path out_path(const GlobalOpts& g, const std::string& name) {
  std::filesystem::create_directories(g.out_dir);
  return std::filesystem::path(g.out_dir) / name;
}

pbl::RunConfig load_run_config(const GlobalOpts& g) {
  pbl::RunConfig rc;
  if (!g.config_path.empty()) {
    rc = pbl::RunConfig::from_file(pbl::ConfigFile::load(g.config_path));
  } else if (const char* env_seed = std::getenv("PBL_SEED")) {
    rc.trainer.seed = std::stoull(env_seed);
  }
  if (g.paper_scale) {
    pbl::TrainerConfig paper;  // struct defaults are the published constants
    paper.seed = rc.trainer.seed;
    paper.mode = rc.trainer.mode;
    paper.baseline = rc.trainer.baseline;
    rc.trainer = paper;
  }
  if (g.seed_set) rc.trainer.seed = g.seed;
  if (g.deterministic) rc.deterministic = true;
  rc.out_dir = g.out_dir;
  return rc;
}

pbl::DeckSpec deck_by_name(const std::string& name) {
  if (name == "standard") return pbl::DeckSpec::standard();
  if (name == "mini16") return pbl::DeckSpec::mini16();
  throw std::invalid_argument("unknown deck '" + name + "'");
}

// Loads a bridge checkpoint (policy + value + belief nets) and answers
// greedy-policy and belief queries the way the trainer does: the policy input
// is the own-hand encoding plus the belief about the partner.
struct BridgeBundle {
  pbl::DeckSpec deck;
  int history_slots = 16;
  pbl::Mlp policy;
  std::vector<pbl::Mlp> beliefs;

  std::vector<double> belief_probs(const pbl::BiddingHistory& history, pbl::Seat viewer) const {
    const pbl::Mlp& net =
        beliefs.size() > 1 && viewer == pbl::Seat::kSouth ? beliefs[1] : beliefs[0];
    return pbl::forward(net, pbl::bridge_belief_input(deck, history, history_slots, viewer))
        .output;
  }

  int greedy(const pbl::AuctionState& s, pbl::Seat seat, const std::vector<bool>& mask) const {
    const pbl::Hand& own = seat == pbl::Seat::kNorth ? s.hand_n : s.hand_s;
    std::vector<double> eta = pbl::encode_hand(deck, own);
    const std::vector<double> b = belief_probs(s.history, seat);
    for (std::size_t i = 0; i < eta.size(); ++i) eta[i] += b[i];
    const std::vector<double> probs = pbl::masked_softmax(pbl::forward(policy, eta).output, mask);
    int best = 0;
    for (std::size_t a = 1; a < probs.size(); ++a)
      if (probs[a] > probs[best]) best = static_cast<int>(a);
    return best;
  }
};

BridgeBundle load_bundle(const std::string& ckpt_path, const pbl::DeckSpec& deck,
                         int history_slots) {
  BridgeBundle bundle;
  bundle.deck = deck;
  bundle.history_slots = history_slots;
  const pbl::Checkpoint ckpt = pbl::load_checkpoint(ckpt_path);
  for (const auto& [name, net] : ckpt.nets) {
    if (name == "policy") bundle.policy = net;
    if (name.rfind("belief", 0) == 0) bundle.beliefs.push_back(net);
  }
  if (bundle.policy.layers.empty() || bundle.beliefs.empty())
    throw std::runtime_error("checkpoint " + ckpt_path + " is missing policy or belief nets");
  return bundle;
}

void save_bridge_checkpoint(const pbl::BridgeTrainResult& result, const std::string& path) {
  pbl::Checkpoint ckpt;
  ckpt.nets.emplace_back("policy", result.policy);
  ckpt.nets.emplace_back("value", result.value);
  for (std::size_t i = 0; i < result.beliefs.size(); ++i)
    ckpt.nets.emplace_back("belief_" + std::to_string(i), result.beliefs[i]);
  pbl::save_checkpoint(ckpt, path);
}

int cmd_train(const GlobalOpts& g) {
  const pbl::RunConfig rc = load_run_config(g);
  pbl::TrainerConfig tc = rc.trainer;
  switch (rc.experiment) {
    case pbl::Experiment::kMatrix: {
      const pbl::MatrixGameSpec spec = pbl::MatrixGameSpec::default_fixture();
      const pbl::MatrixTrainResult r = pbl::train_matrix(spec, tc);
      r.log.save_csv(out_path(g, "learning_curve.csv").string(), rc.deterministic);
      std::cout << "final_eval " << r.final_eval << '\n';
      break;
    }
    case pbl::Experiment::kGuide: {
      tc.mode = pbl::TrainMode::kDistributed;
      const pbl::GuideTrainResult r = pbl::train_guide(pbl::GuideSpec{}, tc);
      r.log.save_csv(out_path(g, "learning_curve.csv").string(), rc.deterministic);
      std::cout << "final_mean_reward " << r.final_mean_reward << '\n'
                << "final_goal_distance " << r.final_goal_distance << '\n';
      break;
    }
    case pbl::Experiment::kBridge: {
      if (rc.train_deals.empty() || rc.test_deals.empty())
        throw std::invalid_argument("bridge training needs run.train_deals and run.test_deals");
      pbl::DealSet train = pbl::load_dealset(rc.train_deals);
      pbl::DealSet test = pbl::load_dealset(rc.test_deals);
      if (!train.scored || !test.scored)
        throw std::runtime_error("bridge training needs scored deal sets");
      pbl::BridgeTrainer trainer(rc.deck_spec(), std::move(train), std::move(test), tc);
      const pbl::BridgeTrainResult r = trainer.run();
      r.log.save_csv(out_path(g, "learning_curve.csv").string(), rc.deterministic);
      save_bridge_checkpoint(r, out_path(g, "checkpoint.bin").string());
      std::cout << "final_eval " << r.final_eval << '\n';
      break;
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Belief-augmented multi-agent training toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--out", g.out_dir, "Output directory");
  app.add_option("--workers", g.workers, "Parallel worker count");
  app.add_flag("--deterministic", g.deterministic, "Single worker, zeroed wallclock in logs");
  app.add_flag("--paper-scale", g.paper_scale, "Use published full-scale constants");
  app.add_option("--config", g.config_path, "Run configuration file");
  auto* seed_opt = app.add_option("--seed", g.seed, "Override seed");

  // gen-deals
  auto* gen = app.add_subcommand("gen-deals", "Generate random N/S deals");
  std::string gen_deck = "mini16";
  int gen_n = 1000;
  gen->add_option("--deck", gen_deck, "Deck name: mini16 or standard");
  gen->add_option("--n", gen_n, "Number of deals");

  // score-deals
  auto* score = app.add_subcommand("score-deals", "Attach score tables to a deal set");
  std::string score_in, score_table;
  int score_samples = 20;
  bool score_exhaustive = false;
  score->add_option("--in", score_in, "Input deal set (.bin)")->required();
  score->add_option("--samples", score_samples, "Completions per deal");
  score->add_flag("--exhaustive", score_exhaustive, "Enumerate all completions");
  score->add_option("--table-file", score_table, "Ingest raw scores from CSV instead");

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "Policy pre-training only");

  // train
  auto* train = app.add_subcommand("train", "Run the full training loop");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a deal set");
  std::string eval_ckpt, eval_deals;
  int eval_n = 0;
  eval->add_option("--checkpoint", eval_ckpt)->required();
  eval->add_option("--deals", eval_deals)->required();
  eval->add_option("--n", eval_n, "Episodes (0 = all)");

  // hcp-table
  auto* hcp = app.add_subcommand("hcp-table", "Aggregate HCP conventions from greedy play");
  std::string hcp_ckpt, hcp_deals, hcp_stage = "opening", hcp_source = "own";
  int hcp_n = 0;
  hcp->add_option("--checkpoint", hcp_ckpt)->required();
  hcp->add_option("--deals", hcp_deals)->required();
  hcp->add_option("--stage", hcp_stage, "opening or response");
  hcp->add_option("--source", hcp_source, "own, belief, or own+belief");
  hcp->add_option("--n", hcp_n, "Episodes (0 = all)");

  // belief-trace
  auto* trace = app.add_subcommand("belief-trace", "Per-step belief HCP for one deal");
  std::string trace_ckpt, trace_deals;
  int trace_index = 0;
  trace->add_option("--checkpoint", trace_ckpt)->required();
  trace->add_option("--deals", trace_deals)->required();
  trace->add_option("--deal-index", trace_index);

  // grad-check
  auto* gc = app.add_subcommand("grad-check", "Finite-difference audit of the gradient engine");
  int gc_configs = 20;
  gc->add_option("--configs", gc_configs, "Random net/loss configurations");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Independent reference computations");
  oracle->require_subcommand(1);
  auto* omx = oracle->add_subcommand("matrix-optimum", "Brute-force signaling-game optimum");
  std::string omx_spec;
  omx->add_option("--spec", omx_spec, "Payoff tensor JSON (default: shipped fixture)");
  auto* odd = oracle->add_subcommand("dd-exhaustive", "Exhaustive score tables for mini deals");
  std::string odd_deck = "mini16";
  int odd_n = 10;
  odd->add_option("--deck", odd_deck);
  odd->add_option("--n", odd_n);

  CLI11_PARSE(app, argc, argv);
  g.seed_set = seed_opt->count() > 0;
  if (g.deterministic) g.workers = 1;

  try {
    if (*gen) {
      const pbl::DeckSpec deck = deck_by_name(gen_deck);
      const pbl::RunConfig rc = load_run_config(g);
      pbl::DealSet set = pbl::gen_deals(deck, gen_n, rc.trainer.seed);
      pbl::save_dealset(set, out_path(g, "deals.bin").string());
      pbl::export_dealset_csv(set, out_path(g, "deals.csv").string());
      std::cout << "wrote " << set.size() << " deals\n";
    } else if (*score) {
      pbl::DealSet set = pbl::load_dealset(score_in);
      const pbl::ScoringRules rules = pbl::ScoringRules::for_deck(set.deck);
      if (!score_table.empty()) {
        pbl::score_deals_from_file(set, rules, score_table);
      } else {
        pbl::DDAConfig dda;
        dda.num_samples = score_samples;
        dda.exhaustive = score_exhaustive;
        const pbl::RunConfig rc = load_run_config(g);
        dda.seed = rc.trainer.seed;
        pbl::score_deals(set, rules, dda, g.workers);
      }
      pbl::save_dealset(set, out_path(g, "deals.bin").string());
      pbl::export_dealset_csv(set, out_path(g, "deals.csv").string());
      std::cout << "scored " << set.size() << " deals\n";
    } else if (*pre) {
      const pbl::RunConfig rc = load_run_config(g);
      if (rc.experiment != pbl::Experiment::kBridge)
        throw std::invalid_argument("pretrain applies to the bridge experiment");
      pbl::DealSet train_set = pbl::load_dealset(rc.train_deals);
      pbl::DealSet test_set = pbl::load_dealset(rc.test_deals);
      pbl::BridgeTrainer trainer(rc.deck_spec(), std::move(train_set), std::move(test_set),
                                 rc.trainer);
      trainer.pretrain();
      std::cout << "pretrain_eval_loss " << trainer.pretrain_eval_loss(100) << '\n';
    } else if (*train) {
      return cmd_train(g);
    } else if (*eval) {
      const pbl::DealSet set = pbl::load_dealset(eval_deals);
      const pbl::RunConfig rc = load_run_config(g);
      const BridgeBundle bundle =
          load_bundle(eval_ckpt, set.deck, rc.trainer.history_slots);
      const pbl::BridgeEnv env(set.deck, rc.trainer.history_slots);
      const pbl::EvalResult r = pbl::run_greedy_episodes(
          env, set,
          [&](const pbl::AuctionState& s, pbl::Seat seat, const std::vector<bool>& mask) {
            return bundle.greedy(s, seat, mask);
          },
          [&](const pbl::BiddingHistory& h, pbl::Seat v) { return bundle.belief_probs(h, v); },
          eval_n);
      nlohmann::json j;
      j["mean_score"] = r.mean_score;
      j["episodes"] = r.episodes.size();
      std::ofstream(out_path(g, "eval.json")) << j.dump(2) << '\n';
      std::cout << "mean_score " << r.mean_score << '\n';
    } else if (*hcp) {
      const pbl::DealSet set = pbl::load_dealset(hcp_deals);
      const pbl::RunConfig rc = load_run_config(g);
      const BridgeBundle bundle = load_bundle(hcp_ckpt, set.deck, rc.trainer.history_slots);
      const pbl::BridgeEnv env(set.deck, rc.trainer.history_slots);
      const pbl::EvalResult r = pbl::run_greedy_episodes(
          env, set,
          [&](const pbl::AuctionState& s, pbl::Seat seat, const std::vector<bool>& mask) {
            return bundle.greedy(s, seat, mask);
          },
          [&](const pbl::BiddingHistory& h, pbl::Seat v) { return bundle.belief_probs(h, v); },
          hcp_n);
      const pbl::HcpStage stage =
          hcp_stage == "response" ? pbl::HcpStage::kResponse : pbl::HcpStage::kOpening;
      pbl::HcpSource source = pbl::HcpSource::kOwn;
      if (hcp_source == "belief") source = pbl::HcpSource::kBelief;
      if (hcp_source == "own+belief") source = pbl::HcpSource::kOwnPlusBelief;
      const pbl::HcpTable table = pbl::hcp_table(set.deck, r.episodes, stage, source);
      const std::string csv = table.to_csv(set.deck);
      std::ofstream(out_path(g, "hcp_table.csv")) << csv;
      std::cout << csv;
    } else if (*trace) {
      const pbl::DealSet set = pbl::load_dealset(trace_deals);
      if (trace_index < 0 || static_cast<std::size_t>(trace_index) >= set.size())
        throw std::runtime_error("deal index out of range");
      const pbl::RunConfig rc = load_run_config(g);
      const BridgeBundle bundle = load_bundle(trace_ckpt, set.deck, rc.trainer.history_slots);
      const pbl::BridgeEnv env(set.deck, rc.trainer.history_slots);
      const pbl::BeliefTrace t = pbl::belief_trace(
          env, set.deals[trace_index],
          [&](const pbl::AuctionState& s, pbl::Seat seat, const std::vector<bool>& mask) {
            return bundle.greedy(s, seat, mask);
          },
          [&](const pbl::BiddingHistory& h, pbl::Seat v) { return bundle.belief_probs(h, v); });
      const std::string json = t.to_json(set.deck);
      std::ofstream(out_path(g, "belief_trace.json")) << json << '\n';
      std::cout << json << '\n';
    } else if (*gc) {
      const pbl::RunConfig rc = load_run_config(g);
      pbl::Rng rng = pbl::make_stream(rc.trainer.seed, "grad-check");
      double worst = 0.0;
      for (int i = 0; i < gc_configs; ++i) {
        const int in = pbl::uniform_int(rng, 2, 8);
        const int out = pbl::uniform_int(rng, 2, 6);
        const std::vector<int> hidden = {pbl::uniform_int(rng, 3, 10)};
        const pbl::Head head = static_cast<pbl::Head>(pbl::uniform_int(rng, 0, 2));
        pbl::Mlp net = pbl::Mlp::make(in, hidden, out, head, rng);
        std::vector<double> x(in), target(out);
        for (double& v : x) v = pbl::uniform01(rng) * 2 - 1;
        for (double& v : target) v = pbl::uniform01(rng);
        const auto loss = [&](const pbl::Mlp& m) {
          const std::vector<double> y = pbl::forward(m, x).output;
          double l = 0.0;
          for (int k = 0; k < out; ++k) l += (y[k] - target[k]) * (y[k] - target[k]);
          return 0.5 * l;
        };
        const pbl::ForwardCache cache = pbl::forward(net, x);
        std::vector<double> og(out);
        for (int k = 0; k < out; ++k) og[k] = cache.output[k] - target[k];
        pbl::Grads grads = pbl::zero_grads(net);
        pbl::backward(net, cache, og, grads);
        worst = std::max(worst, pbl::grad_check(net, loss, grads, rng));
      }
      std::cout << "max_relative_error " << worst << '\n';
      if (!(worst < 1e-4)) return kExitNumeric;
    } else if (*omx) {
      pbl::MatrixGameSpec spec = pbl::MatrixGameSpec::default_fixture();
      if (!omx_spec.empty()) {
        std::ifstream in(omx_spec);
        if (!in) throw std::runtime_error("cannot open " + omx_spec);
        std::ostringstream buf;
        buf << in.rdbuf();
        spec = pbl::MatrixGameSpec::from_json(buf.str());
      }
      const pbl::MatrixOptimum opt = pbl::matrix_optimum(spec);
      nlohmann::json j;
      j["expected_payoff"] = opt.expected_payoff;
      j["p1_strategy"] = opt.p1_strategy;
      j["p2_strategy"] = opt.p2_strategy;
      std::cout << j.dump(2) << '\n';
    } else if (*odd) {
      const pbl::DeckSpec deck = deck_by_name(odd_deck);
      const pbl::RunConfig rc = load_run_config(g);
      pbl::DealSet set = pbl::gen_deals(deck, odd_n, rc.trainer.seed);
      pbl::DDAConfig dda;
      dda.exhaustive = true;
      dda.seed = rc.trainer.seed;
      pbl::score_deals(set, pbl::ScoringRules::for_deck(deck), dda, g.workers);
      pbl::export_dealset_csv(set, out_path(g, "exhaustive_scores.csv").string());
      std::cout << "wrote exhaustive tables for " << set.size() << " deals\n";
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}
