#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "pbl/trainer.hpp"

namespace pbl {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

Mlp make_belief_net(const DeckSpec& deck, const TrainerConfig& cfg, Rng& rng) {
  return Mlp::make(bridge_belief_input_dim(deck, cfg.history_slots), cfg.hidden,
                   deck.deck_size(), Head::kSigmoid, rng);
}

}  // namespace

BridgeTrainer::BridgeTrainer(const DeckSpec& deck, DealSet train_set, DealSet test_set,
                             TrainerConfig cfg)
    : env_(deck, cfg.resolved().history_slots),
      train_set_(std::move(train_set)),
      test_set_(std::move(test_set)),
      cfg_(cfg.resolved()),
      learner_([&] {
        Rng rng = make_stream(cfg_.seed, "init-policy");
        Mlp policy = Mlp::make(deck.deck_size(), cfg_.hidden, deck.num_bid_actions(),
                               Head::kLinear, rng);
        Mlp value = Mlp::make(deck.deck_size(), cfg_.hidden, 1, Head::kLinear, rng);
        return PpoLearner(std::move(policy), std::move(value), cfg_.policy_adam, cfg_.value_adam);
      }()) {
  if (!train_set_.scored) throw std::invalid_argument("BridgeTrainer: train set not scored");
  if (!test_set_.scored) throw std::invalid_argument("BridgeTrainer: test set not scored");
  Rng rng = make_stream(cfg_.seed, "init-belief");
  beliefs_.push_back(make_belief_net(deck, cfg_, rng));
  if (cfg_.mode == TrainMode::kDistributed) beliefs_.push_back(make_belief_net(deck, cfg_, rng));
}

const Mlp& BridgeTrainer::belief(Seat seat) const {
  if (cfg_.mode == TrainMode::kCentralized) return beliefs_[0];
  return beliefs_[seat == Seat::kSouth ? 1 : 0];
}

std::vector<double> BridgeTrainer::belief_probs(const BiddingHistory& history, Seat viewer) const {
  const std::vector<double> input =
      bridge_belief_input(env_.deck(), history, cfg_.history_slots, viewer);
  return forward(belief(viewer), input).output;
}

std::vector<double> BridgeTrainer::policy_input(const Hand& own, const BiddingHistory& history,
                                                Seat viewer) const {
  // eta = x + b elementwise; b is zeroed for the IP input ablation.
  std::vector<double> eta = encode_hand(env_.deck(), own);
  if (!cfg_.zero_belief_input) {
    const std::vector<double> b = belief_probs(history, viewer);
    for (std::size_t i = 0; i < eta.size(); ++i) eta[i] += b[i];
  }
  return eta;
}

void BridgeTrainer::pretrain() {
  if (cfg_.pretrain_steps <= 0) return;
  Rng rng = make_stream(cfg_.seed, "pretrain");
  Mlp& policy = learner_.policy();
  AdamState adam = AdamState::init(policy);
  AdamConfig adam_cfg = cfg_.policy_adam;

  const int n_actions = env_.num_actions();
  for (int step = 0; step < cfg_.pretrain_steps; ++step) {
    Grads grads = zero_grads(policy);
    for (int b = 0; b < cfg_.pretrain_batch; ++b) {
      const int di = uniform_int(rng, 0, static_cast<int>(train_set_.size()) - 1);
      const bool north = uniform_int(rng, 0, 1) == 0;
      const Hand& own = north ? train_set_.deals[di].hand_n : train_set_.deals[di].hand_s;
      // PASS is scored with r_dp so the opening pass has a calibrated prior.
      std::vector<double> scores(n_actions);
      scores[0] = train_set_.scores[di].double_pass_reward;
      for (int c = 0; c < n_actions - 1; ++c)
        scores[c + 1] = train_set_.scores[di].contract_scores[c];

      // Inputs are built exactly like rollout inputs (hand plus the belief
      // for an empty history) so the pre-trained mapping is not evaluated
      // off-distribution once real episodes start.
      const std::vector<double> eta =
          policy_input(own, BiddingHistory{}, north ? Seat::kNorth : Seat::kSouth);
      const ForwardCache cache = forward(policy, eta);
      const std::vector<bool> all(cache.output.size(), true);
      const std::vector<double> probs = masked_softmax(cache.output, all);
      const std::vector<double> dlogits = pretrain_logit_grad(probs, scores, cfg_.pretrain_tau);
      backward(policy, cache, dlogits, grads);
    }
    scale_grads(grads, 1.0 / cfg_.pretrain_batch);
    adam_step(policy, grads, adam, adam_cfg);
  }
}

double BridgeTrainer::pretrain_eval_loss(int n_deals) const {
  Rng rng = make_stream(cfg_.seed, "pretrain-eval");
  const int n_actions = env_.num_actions();
  double total = 0.0;
  for (int i = 0; i < n_deals; ++i) {
    const int di = uniform_int(rng, 0, static_cast<int>(train_set_.size()) - 1);
    std::vector<double> scores(n_actions);
    scores[0] = train_set_.scores[di].double_pass_reward;
    for (int c = 0; c < n_actions - 1; ++c)
      scores[c + 1] = train_set_.scores[di].contract_scores[c];
    const std::vector<double> eta =
        policy_input(train_set_.deals[di].hand_n, BiddingHistory{}, Seat::kNorth);
    const ForwardCache cache = forward(learner_.policy(), eta);
    const std::vector<bool> all(cache.output.size(), true);
    total += pretrain_loss(masked_softmax(cache.output, all), scores, cfg_.pretrain_tau);
  }
  return total / n_deals;
}

namespace {

// Env reward for a finished auction, read from the precomputed table.
double terminal_reward(const DeckSpec& deck, const ScoreTable& table, const AuctionState& s) {
  if (s.double_pass) return table.double_pass_reward;
  const Bid bid = Bid::contract(s.final_contract->level, s.final_contract->trump);
  return table.contract_scores[bid_index(deck, bid) - 1];
}

}  // namespace

BridgeTrainResult BridgeTrainer::run() {
  const double t0 = now_seconds();
  pretrain();

  Rng rollout_rng = make_stream(cfg_.seed, "rollout");
  Rng minibatch_rng = make_stream(cfg_.seed, "minibatch");
  LearningLog log;
  double alpha = cfg_.alpha0;
  double belief_val_loss = 0.0;
  int global_update = 0;

  const auto act_sampling = [&](const AuctionState& s, Seat seat, const std::vector<bool>& mask,
                                Rng& rng) {
    const Hand& own = seat == Seat::kNorth ? s.hand_n : s.hand_s;
    return learner_.sample_action(policy_input(own, s.history, seat), mask, rng);
  };

  for (int k = 0; k < cfg_.pbl_iterations; ++k) {
    // Belief fit. NPBI freezes the belief after iteration 0 but keeps the
    // same number of policy updates.
    const bool fit_belief = cfg_.baseline != BaselineKind::kNpbi || k == 0;
    if (fit_belief && cfg_.belief_episodes > 0) {
      if (cfg_.mode == TrainMode::kCentralized) {
        Rng rng = make_stream(cfg_.seed, "belief-data", static_cast<std::uint64_t>(k));
        BeliefDataset ds =
            generate_bridge_dataset(env_, train_set_, cfg_.belief_episodes, act_sampling, rng);
        BeliefTrainConfig btc = cfg_.belief_train;
        btc.seed = hash_combine(cfg_.seed, static_cast<std::uint64_t>(k));
        belief_val_loss = train_belief(ds, beliefs_[0], btc).best_val_loss;
      } else {
        // Distributed: disjoint self-play shards per seat model.
        for (int m = 0; m < 2; ++m) {
          Rng rng = make_stream(cfg_.seed, m == 0 ? "belief-data-n" : "belief-data-s",
                                static_cast<std::uint64_t>(k));
          BeliefDataset ds = generate_bridge_dataset(env_, train_set_, cfg_.belief_episodes / 2,
                                                     act_sampling, rng);
          BeliefTrainConfig btc = cfg_.belief_train;
          btc.seed = hash_combine(hash_combine(cfg_.seed, static_cast<std::uint64_t>(k)),
                                  static_cast<std::uint64_t>(m));
          belief_val_loss = train_belief(ds, beliefs_[m], btc).best_val_loss;
        }
      }
    }

    for (int u = 0; u < cfg_.pg_updates_per_iter; ++u, ++global_update) {
      std::vector<PpoEpisode> pool;
      pool.reserve(static_cast<std::size_t>(cfg_.episodes_per_update) * 2);
      double env_sum = 0.0, comm_sum = 0.0;
      int comm_steps = 0;

      for (int e = 0; e < cfg_.episodes_per_update; ++e) {
        const int di = uniform_int(rollout_rng, 0, static_cast<int>(train_set_.size()) - 1);
        Rollout ro = rollout_episode(train_set_.deals[di], train_set_.scores[di], alpha,
                                           rollout_rng);
        env_sum += ro.env_reward;
        comm_sum += ro.comm_sum;
        comm_steps += ro.comm_steps;
        for (auto& ep : ro.episodes)
          if (!ep.steps.empty()) pool.push_back(std::move(ep));
      }

      for (int pe = 0; pe < cfg_.ppo_epochs; ++pe) {
        std::vector<const PpoEpisode*> batch;
        const int want = std::min<int>(cfg_.minibatch_episodes, static_cast<int>(pool.size()));
        for (int i = 0; i < want; ++i)
          batch.push_back(&pool[uniform_int(minibatch_rng, 0, static_cast<int>(pool.size()) - 1)]);
        learner_.update(batch, cfg_.gamma, cfg_.ppo_clip, cfg_.entropy_coef);
      }

      if (global_update % cfg_.eval_every == 0 || (k + 1 == cfg_.pbl_iterations &&
                                                   u + 1 == cfg_.pg_updates_per_iter)) {
        LogRow row;
        row.pbl_iter = k;
        row.pg_update = global_update;
        row.mean_env_score = evaluate(cfg_.eval_episodes);
        row.mean_comm_reward = comm_steps > 0 ? comm_sum / comm_steps : 0.0;
        row.belief_val_loss = belief_val_loss;
        row.wallclock = now_seconds() - t0;
        log.rows.push_back(row);
      }
    }
    alpha *= cfg_.alpha_decay;
  }

  BridgeTrainResult result;
  result.policy = learner_.policy();
  result.value = learner_.value();
  result.beliefs = beliefs_;
  result.log = std::move(log);
  result.final_eval = evaluate(cfg_.eval_episodes);
  return result;
}

BridgeTrainer::Rollout BridgeTrainer::rollout_episode(const Deal& deal, const ScoreTable& table,
                                             double alpha, Rng& rng) {
  Rollout ro;
  AuctionState s = env_.reset(deal.hand_n, deal.hand_s);
  const std::vector<double> x_n = encode_hand(env_.deck(), deal.hand_n);
  const std::vector<double> x_s = encode_hand(env_.deck(), deal.hand_s);

  // Best-so-far belief about each seat's hand, held by the partner's model
  // (centralized: the shared model; distributed: the acting seat's own model).
  auto belief_about = [&](Seat owner, const BiddingHistory& h) {
    const Seat viewer = partner_of(owner);
    const Mlp& net = cfg_.mode == TrainMode::kCentralized
                         ? beliefs_[0]
                         : beliefs_[owner == Seat::kSouth ? 1 : 0];
    return forward(net, bridge_belief_input(env_.deck(), h, cfg_.history_slots, viewer)).output;
  };
  BestBeliefTracker tracker[2] = {
      BestBeliefTracker::seeded(bernoulli_kl(x_n, belief_about(Seat::kNorth, s.history))),
      BestBeliefTracker::seeded(bernoulli_kl(x_s, belief_about(Seat::kSouth, s.history)))};

  while (!s.terminal) {
    const Seat seat = s.to_act;
    const int agent = seat == Seat::kNorth ? 0 : 1;
    const Hand& own = seat == Seat::kNorth ? s.hand_n : s.hand_s;
    const std::vector<bool> mask = env_.legal_actions(s);
    PpoStep step;
    step.input = policy_input(own, s.history, seat);
    step.mask = mask;
    step.action = learner_.sample_action(step.input, mask, rng, &step.logp_behavior);
    s = env_.step(s, step.action);

    // Communication reward on the actor's own step, measured after the
    // partner(-model) observes the new bid. The auction-ending action is not
    // shaped: no partner decision follows it, so rewarding what it "reveals"
    // only feeds the policy's own belief model back to itself.
    if (!s.terminal) {
      const std::vector<double>& x = agent == 0 ? x_n : x_s;
      const std::vector<double> b_next = belief_about(seat, s.history);
      const double r_c = comm_reward(x, tracker[agent], b_next);
      step.reward = alpha * r_c;
      ro.comm_sum += r_c;
      ro.comm_steps += 1;
    }
    ro.episodes[agent].steps.push_back(std::move(step));
  }

  ro.env_reward = terminal_reward(env_.deck(), table, s);
  for (auto& ep : ro.episodes)
    if (!ep.steps.empty()) ep.steps.back().reward += ro.env_reward;
  return ro;
}

double BridgeTrainer::evaluate(int n_episodes) const {
  const std::size_t n = n_episodes > 0
                            ? std::min<std::size_t>(n_episodes, test_set_.size())
                            : test_set_.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    AuctionState s = env_.reset(test_set_.deals[i].hand_n, test_set_.deals[i].hand_s);
    while (!s.terminal) {
      const Seat seat = s.to_act;
      const Hand& own = seat == Seat::kNorth ? s.hand_n : s.hand_s;
      const int a = learner_.greedy_action(policy_input(own, s.history, seat),
                                           env_.legal_actions(s));
      s = env_.step(s, a);
    }
    total += terminal_reward(env_.deck(), test_set_.scores[i], s);
  }
  return total / static_cast<double>(n);
}

}  // namespace pbl
