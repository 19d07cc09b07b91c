#include <algorithm>
#include <chrono>
#include <cmath>

#include "pbl/trainer.hpp"

namespace pbl {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// Belief input: [validity, one-hot of the partner's observed action, viewer].
// Width covers the larger action set; viewer = 0 for Player 1, 1 for Player 2.
std::vector<double> belief_input(const MatrixGameSpec& spec, int observed_action, int viewer) {
  const int width = std::max(spec.n_actions_p1, spec.n_actions_p2);
  std::vector<double> v(static_cast<std::size_t>(width) + 2, 0.0);
  if (observed_action >= 0) {
    v[0] = 1.0;
    v[1 + observed_action] = 1.0;
  }
  v[v.size() - 1] = viewer;
  return v;
}

std::vector<double> one_hot(int i, int n) {
  std::vector<double> v(n, 0.0);
  v[i] = 1.0;
  return v;
}

struct MatrixNets {
  PpoLearner p1;
  PpoLearner p2;
  Mlp belief;
};

std::vector<double> card_belief(const MatrixNets& nets, const MatrixGameSpec& spec,
                                int observed_action, int viewer) {
  return forward(nets.belief, belief_input(spec, observed_action, viewer)).output;
}

// Both cards live in the same small card space, so summing the own-card
// one-hot with the belief vector would collapse distinct (card, belief)
// combinations onto one point; concatenate the two blocks instead.
std::vector<double> policy_input_p1(const MatrixNets& nets, const MatrixGameSpec& spec, int c1,
                                    bool zero_belief) {
  std::vector<double> eta = one_hot(c1, spec.n_cards);
  eta.resize(2 * static_cast<std::size_t>(spec.n_cards), 0.0);
  if (!zero_belief) {
    const std::vector<double> b = card_belief(nets, spec, -1, 0);
    for (int i = 0; i < spec.n_cards; ++i) eta[spec.n_cards + i] = b[i];
  }
  return eta;
}

std::vector<double> policy_input_p2(const MatrixNets& nets, const MatrixGameSpec& spec, int c2,
                                    int a1, bool zero_belief) {
  std::vector<double> eta = one_hot(c2, spec.n_cards);
  eta.resize(2 * static_cast<std::size_t>(spec.n_cards), 0.0);
  if (!zero_belief) {
    // Player 1's action reaches Player 2 only through the belief channel.
    const std::vector<double> b = card_belief(nets, spec, a1, 1);
    for (int i = 0; i < spec.n_cards; ++i) eta[spec.n_cards + i] = b[i];
  }
  return eta;
}

double greedy_expected_payoff(const MatrixNets& nets, const MatrixGameSpec& spec,
                              bool zero_belief) {
  double total = 0.0;
  const std::vector<bool> no_mask;
  for (int c1 = 0; c1 < spec.n_cards; ++c1) {
    const int a1 = nets.p1.greedy_action(policy_input_p1(nets, spec, c1, zero_belief), no_mask);
    for (int c2 = 0; c2 < spec.n_cards; ++c2) {
      const int a2 =
          nets.p2.greedy_action(policy_input_p2(nets, spec, c2, a1, zero_belief), no_mask);
      total += spec.at(c1, c2, a1, a2);
    }
  }
  return total / (static_cast<double>(spec.n_cards) * spec.n_cards);
}

}  // namespace

MatrixTrainResult train_matrix(const MatrixGameSpec& spec, const TrainerConfig& raw_cfg) {
  spec.validate();
  const TrainerConfig cfg = raw_cfg.resolved();
  const double t0 = now_seconds();

  double payoff_norm = 1e-12;
  for (double v : spec.payoff) payoff_norm = std::max(payoff_norm, std::abs(v));

  Rng init_rng = make_stream(cfg.seed, "init");
  const int bwidth = static_cast<int>(belief_input(spec, -1, 0).size());
  MatrixNets nets{
      PpoLearner(
          Mlp::make(2 * spec.n_cards, cfg.hidden, spec.n_actions_p1, Head::kLinear, init_rng),
          Mlp::make(2 * spec.n_cards, cfg.hidden, 1, Head::kLinear, init_rng), cfg.policy_adam,
          cfg.value_adam),
      PpoLearner(
          Mlp::make(2 * spec.n_cards, cfg.hidden, spec.n_actions_p2, Head::kLinear, init_rng),
          Mlp::make(2 * spec.n_cards, cfg.hidden, 1, Head::kLinear, init_rng), cfg.policy_adam,
          cfg.value_adam),
      Mlp::make(bwidth, cfg.hidden, spec.n_cards, Head::kSoftmax, init_rng)};

  // Pre-train Player 1 toward Softmax(expected payoff / tau) under a uniform
  // random partner, so every baseline starts from the same sensible opening
  // policy. Deterministic (full batch, zero belief input) so ablations that
  // should coincide stay bitwise identical.
  if (cfg.pretrain_steps > 0) {
    // Expected payoff of each own action under a uniformly random partner.
    const auto mean_scores = [&](int player) {
      std::vector<std::vector<double>> scores(
          spec.n_cards,
          std::vector<double>(player == 0 ? spec.n_actions_p1 : spec.n_actions_p2, 0.0));
      for (int own = 0; own < spec.n_cards; ++own)
        for (int other = 0; other < spec.n_cards; ++other)
          for (int a1 = 0; a1 < spec.n_actions_p1; ++a1)
            for (int a2 = 0; a2 < spec.n_actions_p2; ++a2) {
              const double p = spec.at(player == 0 ? own : other, player == 0 ? other : own, a1,
                                       a2);
              const int act = player == 0 ? a1 : a2;
              const int br = player == 0 ? spec.n_actions_p2 : spec.n_actions_p1;
              scores[own][act] += p / (spec.n_cards * br * payoff_norm);
            }
      return scores;
    };
    const auto pretrain_player = [&](PpoLearner& learner, int player) {
      const std::vector<std::vector<double>> scores = mean_scores(player);
      const std::vector<bool> pre_mask(scores[0].size(), true);
      AdamState pre_state = AdamState::init(learner.policy());
      for (int step = 0; step < cfg.pretrain_steps; ++step) {
        Grads grads = zero_grads(learner.policy());
        for (int card = 0; card < spec.n_cards; ++card) {
          const std::vector<double> input =
              player == 0 ? policy_input_p1(nets, spec, card, /*zero_belief=*/true)
                          : policy_input_p2(nets, spec, card, 0, /*zero_belief=*/true);
          const ForwardCache cache = forward(learner.policy(), input);
          const std::vector<double> probs = masked_softmax(cache.output, pre_mask);
          std::vector<double> out_grad = pretrain_logit_grad(probs, scores[card],
                                                             cfg.pretrain_tau);
          for (double& g : out_grad) g /= spec.n_cards;
          backward(learner.policy(), cache, out_grad, grads);
        }
        adam_step(learner.policy(), grads, pre_state, cfg.policy_adam);
      }
    };
    pretrain_player(nets.p1, 0);
    pretrain_player(nets.p2, 1);
  }

  Rng rollout_rng = make_stream(cfg.seed, "rollout");
  Rng minibatch_rng = make_stream(cfg.seed, "minibatch");
  const std::vector<bool> no_mask;

  LearningLog log;
  double alpha = cfg.alpha0;
  double belief_val_loss = 0.0;
  int global_update = 0;

  for (int k = 0; k < cfg.pbl_iterations; ++k) {
    const bool fit_belief = cfg.baseline != BaselineKind::kNpbi || k == 0;
    if (fit_belief && cfg.belief_episodes > 0) {
      Rng rng = make_stream(cfg.seed, "belief-data", static_cast<std::uint64_t>(k));
      BeliefDataset ds;
      std::uint64_t pair_id = 0;
      for (int e = 0; e < cfg.belief_episodes; ++e) {
        const int c1 = uniform_int(rng, 0, spec.n_cards - 1);
        const int c2 = uniform_int(rng, 0, spec.n_cards - 1);
        const int a1 = nets.p1.sample_action(
            policy_input_p1(nets, spec, c1, cfg.zero_belief_input), no_mask, rng);
        const int a2 = nets.p2.sample_action(
            policy_input_p2(nets, spec, c2, a1, cfg.zero_belief_input), no_mask, rng);
        ds.pairs.push_back({belief_input(spec, -1, 0), one_hot(c2, spec.n_cards), pair_id++});
        ds.pairs.push_back({belief_input(spec, -1, 1), one_hot(c1, spec.n_cards), pair_id++});
        ds.pairs.push_back({belief_input(spec, a1, 1), one_hot(c1, spec.n_cards), pair_id++});
        ds.pairs.push_back({belief_input(spec, a2, 0), one_hot(c2, spec.n_cards), pair_id++});
      }
      BeliefTrainConfig btc = cfg.belief_train;
      btc.categorical = true;
      btc.seed = hash_combine(cfg.seed, static_cast<std::uint64_t>(k));
      belief_val_loss = train_belief(ds, nets.belief, btc).best_val_loss;
    }

    for (int u = 0; u < cfg.pg_updates_per_iter; ++u, ++global_update) {
      std::vector<PpoEpisode> pool_p1, pool_p2;
      double env_sum = 0.0, comm_sum = 0.0;
      for (int e = 0; e < cfg.episodes_per_update; ++e) {
        const int c1 = uniform_int(rollout_rng, 0, spec.n_cards - 1);
        const int c2 = uniform_int(rollout_rng, 0, spec.n_cards - 1);
        const std::vector<double> x1 = one_hot(c1, spec.n_cards);

        PpoStep s1;
        s1.input = policy_input_p1(nets, spec, c1, cfg.zero_belief_input);
        s1.action = nets.p1.sample_action(s1.input, no_mask, rollout_rng, &s1.logp_behavior);

        BestBeliefTracker tr1 =
            BestBeliefTracker::seeded(categorical_kl(x1, card_belief(nets, spec, -1, 1)));
        const double rc1 =
            comm_reward(x1, tr1, card_belief(nets, spec, s1.action, 1), /*categorical=*/true);

        PpoStep s2;
        s2.input = policy_input_p2(nets, spec, c2, s1.action, cfg.zero_belief_input);
        s2.action = nets.p2.sample_action(s2.input, no_mask, rollout_rng, &s2.logp_behavior);

        // Player 2 moves last: nobody acts on what its action might reveal, so
        // it receives no communication reward.
        const double r_env = spec.at(c1, c2, s1.action, s2.action) / payoff_norm;
        s1.reward = shaped_reward(r_env, rc1, alpha);
        s2.reward = r_env;
        env_sum += r_env;
        comm_sum += rc1;

        pool_p1.push_back(PpoEpisode{{std::move(s1)}});
        pool_p2.push_back(PpoEpisode{{std::move(s2)}});
      }

      for (int pe = 0; pe < cfg.ppo_epochs; ++pe) {
        std::vector<const PpoEpisode*> b1, b2;
        const int want = std::min<int>(cfg.minibatch_episodes, cfg.episodes_per_update);
        for (int i = 0; i < want; ++i) {
          b1.push_back(&pool_p1[uniform_int(minibatch_rng, 0, cfg.episodes_per_update - 1)]);
          b2.push_back(&pool_p2[uniform_int(minibatch_rng, 0, cfg.episodes_per_update - 1)]);
        }
        nets.p1.update(b1, cfg.gamma, cfg.ppo_clip, cfg.entropy_coef);
        nets.p2.update(b2, cfg.gamma, cfg.ppo_clip, cfg.entropy_coef);
      }

      if (global_update % cfg.eval_every == 0 || (k + 1 == cfg.pbl_iterations &&
                                                  u + 1 == cfg.pg_updates_per_iter)) {
        LogRow row;
        row.pbl_iter = k;
        row.pg_update = global_update;
        row.mean_env_score = greedy_expected_payoff(nets, spec, cfg.zero_belief_input);
        row.mean_comm_reward = comm_sum / cfg.episodes_per_update;
        row.belief_val_loss = belief_val_loss;
        row.wallclock = now_seconds() - t0;
        log.rows.push_back(row);
      }
    }
    alpha *= cfg.alpha_decay;
  }

  MatrixTrainResult result;
  result.final_eval = greedy_expected_payoff(nets, spec, cfg.zero_belief_input);
  result.log = std::move(log);
  return result;
}

}  // namespace pbl
