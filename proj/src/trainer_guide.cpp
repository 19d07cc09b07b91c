#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pbl/trainer.hpp"

namespace pbl {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// Belief nets see only the guide's motion: velocity plus displacements to the
// three landmarks (the first 8 entries of the guide observation).
std::vector<double> guide_motion_features(const GuideState& s) {
  const GuideObservations obs = guide_observations(s);
  return std::vector<double>(obs.guide.begin(), obs.guide.begin() + 8);
}

std::vector<double> goal_one_hot(int goal) {
  std::vector<double> v(3, 0.0);
  v[goal] = 1.0;
  return v;
}

// Picks the acceleration that most reduces the distance to the goal landmark
// after one integration step — a scripted goal-seeker used only to generate
// belief pre-training data.
int scripted_action(const GuideSpec& spec, Vec2 pos, Vec2 vel, Vec2 goal) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int a = 0; a < kGuideNumActions; ++a) {
    Vec2 acc{0.0, 0.0};
    if (a == 1) acc = {spec.accel, 0.0};
    if (a == 2) acc = {-spec.accel, 0.0};
    if (a == 3) acc = {0.0, spec.accel};
    if (a == 4) acc = {0.0, -spec.accel};
    const Vec2 v{spec.damping * (vel.x + acc.x * spec.dt), spec.damping * (vel.y + acc.y * spec.dt)};
    const Vec2 p{pos.x + v.x * spec.dt, pos.y + v.y * spec.dt};
    const double d = norm(goal - p);
    if (d < best_dist) {
      best_dist = d;
      best = a;
    }
  }
  return best;
}

BeliefDataset scripted_dataset(const GuideSpec& spec, int n_episodes, Rng& rng) {
  BeliefDataset ds;
  std::uint64_t pair_id = 0;
  for (int e = 0; e < n_episodes; ++e) {
    GuideState s = guide_reset(spec, rng);
    const std::vector<double> target = goal_one_hot(s.goal);
    // The initial state carries no motion information (zero velocity, random
    // position), so training on it teaches the net calibrated uncertainty for
    // uninformative starts rather than leaving them off-distribution.
    ds.pairs.push_back({guide_motion_features(s), target, pair_id++});
    bool done = false;
    int parked = 0;
    while (!done) {
      const int a = scripted_action(spec, s.guide_pos, s.guide_vel, s.landmarks[s.goal]);
      const GuideStepResult r = guide_step(spec, s, a, /*a_listener=*/0);
      s = r.state;
      done = r.terminal;
      // Post-step features: motion that already reflects the goal-seeking
      // action, matching how beliefs are queried during training.
      ds.pairs.push_back({guide_motion_features(s), target, pair_id++});
      // Once the seeker is hovering at the goal, further samples repeat the
      // same near-zero-velocity pattern. Keep a few so arrival is learnable,
      // then cut the episode short so in-transit motion dominates the data.
      if (norm(s.landmarks[s.goal] - s.guide_pos) < 0.1) {
        if (++parked >= 5) break;
      } else {
        parked = 0;
      }
    }
  }
  return ds;
}

}  // namespace

GuideTrainResult train_guide(const GuideSpec& spec, const TrainerConfig& raw_cfg) {
  const TrainerConfig cfg = raw_cfg.resolved();
  if (cfg.mode != TrainMode::kDistributed)
    throw std::invalid_argument("train_guide: only the distributed setting is supported");
  const double t0 = now_seconds();

  Rng init_rng = make_stream(cfg.seed, "init");
  const GuideObservations probe = guide_observations(GuideState{});
  const int guide_in = static_cast<int>(probe.guide.size());
  const int listener_in = static_cast<int>(probe.listener_base.size()) + 3;

  PpoLearner guide(Mlp::make(guide_in, cfg.hidden, kGuideNumActions, Head::kLinear, init_rng),
                   Mlp::make(guide_in, cfg.hidden, 1, Head::kLinear, init_rng), cfg.policy_adam,
                   cfg.value_adam);
  PpoLearner listener(
      Mlp::make(listener_in, cfg.hidden, kGuideNumActions, Head::kLinear, init_rng),
      Mlp::make(listener_in, cfg.hidden, 1, Head::kLinear, init_rng), cfg.policy_adam,
      cfg.value_adam);
  // Two belief nets: the guide's own model (drives its communication reward)
  // and the listener's model (feeds its policy input). Each is pre-trained on
  // a disjoint scripted dataset and then frozen.
  Mlp belief_guide = Mlp::make(8, cfg.hidden, 3, Head::kSoftmax, init_rng);
  Mlp belief_listener = Mlp::make(8, cfg.hidden, 3, Head::kSoftmax, init_rng);

  double belief_val_loss = 0.0;
  if (cfg.belief_episodes > 0) {
    BeliefTrainConfig btc = cfg.belief_train;
    btc.categorical = true;
    const int per_net = std::max(1, cfg.belief_episodes / 2);
    {
      Rng rng = make_stream(cfg.seed, "belief-data-guide");
      BeliefDataset ds = scripted_dataset(spec, per_net, rng);
      btc.seed = hash_combine(cfg.seed, std::uint64_t{0});
      belief_val_loss = train_belief(ds, belief_guide, btc).best_val_loss;
    }
    {
      Rng rng = make_stream(cfg.seed, "belief-data-listener");
      BeliefDataset ds = scripted_dataset(spec, per_net, rng);
      btc.seed = hash_combine(cfg.seed, std::uint64_t{1});
      train_belief(ds, belief_listener, btc);
    }
  }

  const auto listener_input = [&](const GuideState& s) {
    const GuideObservations obs = guide_observations(s);
    std::vector<double> in = obs.listener_base;
    std::vector<double> b(3, 0.0);
    if (!cfg.zero_belief_input) b = forward(belief_listener, guide_motion_features(s)).output;
    in.insert(in.end(), b.begin(), b.end());
    return in;
  };

  Rng rollout_rng = make_stream(cfg.seed, "rollout");
  Rng minibatch_rng = make_stream(cfg.seed, "minibatch");
  const std::vector<bool> no_mask;

  LearningLog log;
  double alpha = cfg.alpha0;
  int global_update = 0;

  for (int k = 0; k < cfg.pbl_iterations; ++k) {
    for (int u = 0; u < cfg.pg_updates_per_iter; ++u, ++global_update) {
      std::vector<PpoEpisode> pool_guide, pool_listener;
      double return_sum = 0.0, comm_sum = 0.0;
      long long comm_steps = 0;
      for (int e = 0; e < cfg.episodes_per_update; ++e) {
        GuideState s = guide_reset(spec, rollout_rng);
        const std::vector<double> x = goal_one_hot(s.goal);
        BestBeliefTracker tracker = BestBeliefTracker::seeded(
            categorical_kl(x, forward(belief_guide, guide_motion_features(s)).output));

        PpoEpisode ep_g, ep_l;
        bool done = false;
        while (!done) {
          PpoStep sg;
          sg.input = guide_observations(s).guide;
          sg.action = guide.sample_action(sg.input, no_mask, rollout_rng, &sg.logp_behavior);

          PpoStep sl;
          sl.input = listener_input(s);
          sl.action = listener.sample_action(sl.input, no_mask, rollout_rng, &sl.logp_behavior);

          const GuideStepResult r = guide_step(spec, s, sg.action, sl.action);
          s = r.state;
          done = r.terminal;

          const double rc =
              comm_reward(x, tracker, forward(belief_guide, guide_motion_features(s)).output,
                          /*categorical=*/true);
          sg.reward = shaped_reward(r.reward, rc, alpha);
          sl.reward = r.reward;
          return_sum += r.reward;
          comm_sum += rc;
          ++comm_steps;

          ep_g.steps.push_back(std::move(sg));
          ep_l.steps.push_back(std::move(sl));
        }
        pool_guide.push_back(std::move(ep_g));
        pool_listener.push_back(std::move(ep_l));
      }

      for (int pe = 0; pe < cfg.ppo_epochs; ++pe) {
        std::vector<const PpoEpisode*> bg, bl;
        const int want = std::min<int>(cfg.minibatch_episodes, cfg.episodes_per_update);
        for (int i = 0; i < want; ++i) {
          const int j = uniform_int(minibatch_rng, 0, cfg.episodes_per_update - 1);
          bg.push_back(&pool_guide[j]);
          bl.push_back(&pool_listener[j]);
        }
        guide.update(bg, cfg.gamma, cfg.ppo_clip, cfg.entropy_coef);
        listener.update(bl, cfg.gamma, cfg.ppo_clip, cfg.entropy_coef);
      }

      LogRow row;
      row.pbl_iter = k;
      row.pg_update = global_update;
      row.mean_env_score = return_sum / cfg.episodes_per_update;
      row.mean_comm_reward = comm_steps > 0 ? comm_sum / comm_steps : 0.0;
      row.belief_val_loss = belief_val_loss;
      row.wallclock = now_seconds() - t0;
      log.rows.push_back(row);
    }
    alpha *= cfg.alpha_decay;
  }

  GuideTrainResult result;
  const std::size_t n_rows = log.rows.size();
  const std::size_t tail = std::max<std::size_t>(1, n_rows / 10);
  double tail_sum = 0.0;
  for (std::size_t i = n_rows - tail; i < n_rows; ++i) tail_sum += log.rows[i].mean_env_score;
  result.final_mean_reward = tail_sum / static_cast<double>(tail);

  Rng eval_rng = make_stream(cfg.seed, "eval");
  const int eval_eps = cfg.eval_episodes > 0 ? cfg.eval_episodes : 20;
  double dist_sum = 0.0;
  for (int e = 0; e < eval_eps; ++e) {
    GuideState s = guide_reset(spec, eval_rng);
    bool done = false;
    while (!done) {
      const int ag = guide.greedy_action(guide_observations(s).guide, no_mask);
      const int al = listener.greedy_action(listener_input(s), no_mask);
      const GuideStepResult r = guide_step(spec, s, ag, al);
      s = r.state;
      done = r.terminal;
    }
    dist_sum += listener_goal_distance(s);
  }
  result.final_goal_distance = dist_sum / eval_eps;
  result.log = std::move(log);
  return result;
}

}  // namespace pbl
