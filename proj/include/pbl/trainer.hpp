#ifndef PBL_TRAINER_HPP_
#define PBL_TRAINER_HPP_

#include <optional>
#include <string>
#include <vector>

#include "pbl/belief.hpp"
#include "pbl/bridge_env.hpp"
#include "pbl/data.hpp"
#include "pbl/neural.hpp"
#include "pbl/toy_envs.hpp"

namespace pbl {

enum class TrainMode { kCentralized, kDistributed };
enum class BaselineKind { kPbl, kIp, kNcr, kNpbi };

struct TrainerConfig {
  double alpha0 = 5.0;          // initial communication weight
  double alpha_decay = 0.7;     // multiplier per PBL iteration
  double gamma = 1.0;
  double ppo_clip = 0.2;
  int pg_updates_per_iter = 200;
  int episodes_per_update = 5000;
  int minibatch_episodes = 2048;
  int ppo_epochs = 4;           // minibatch steps per rollout pool
  int pbl_iterations = 8;       // K
  TrainMode mode = TrainMode::kCentralized;
  BaselineKind baseline = BaselineKind::kPbl;
  double pretrain_tau = 0.1;
  int pretrain_steps = 2000;
  int pretrain_batch = 256;
  int belief_episodes = 300000;  // self-play episodes per belief fit
  int eval_every = 20;           // PG updates between evaluation points
  int eval_episodes = 0;         // 0 = full test set
  std::vector<int> hidden = {256, 256};
  int history_slots = 16;
  double entropy_coef = 0.01;
  AdamConfig policy_adam{.lr = 1e-4};
  AdamConfig value_adam{.lr = 1e-3};
  BeliefTrainConfig belief_train;
  std::uint64_t seed = 0;
  bool zero_belief_input = false;  // IP semantics; also settable directly

  // Shrunk constants for single-machine runs; --paper-scale restores the
  // published values (the struct defaults above).
  static TrainerConfig desk_scale();

  // Resolves baseline flags (IP -> zero belief input and alpha 0; NCR ->
  // alpha 0) and checks consistency. Throws std::invalid_argument on
  // contradictory settings (e.g. distributed IP).
  TrainerConfig resolved() const;
};

// Running best-so-far belief about one agent's private info within an episode.
struct BestBeliefTracker {
  double best_kl = 0.0;

  static BestBeliefTracker seeded(double initial_kl) { return BestBeliefTracker{initial_kl}; }
};

// KL(x || b) with each dimension an independent Bernoulli and x binary; the
// entropy of x is zero, so this is the summed cross entropy.
double bernoulli_kl(std::span<const double> x, std::span<const double> b);
double categorical_kl(std::span<const double> x, std::span<const double> b);

// r_c = KL(x||b*) - KL(x||b_next); tracker keeps the running minimum.
double comm_reward(std::span<const double> x, BestBeliefTracker& tracker,
                   std::span<const double> b_next, bool categorical = false);

inline double shaped_reward(double r_e, double r_c, double alpha) { return r_e + alpha * r_c; }

// KL(pi || Softmax(scores / tau)); throws std::domain_error for tau <= 0.
double pretrain_loss(std::span<const double> policy_probs, std::span<const double> scores,
                     double tau);
// dL/d(logits) of the pre-training loss for a full-softmax policy head.
std::vector<double> pretrain_logit_grad(std::span<const double> policy_probs,
                                        std::span<const double> scores, double tau);

struct LogRow {
  int pbl_iter = 0;
  int pg_update = 0;  // global update index
  double mean_env_score = 0.0;
  double mean_comm_reward = 0.0;
  double belief_val_loss = 0.0;
  double wallclock = 0.0;
};

struct LearningLog {
  std::vector<LogRow> rows;

  // deterministic=true writes wallclock as 0 so reruns are bit-identical.
  std::string to_csv(bool deterministic = false) const;
  void save_csv(const std::string& path, bool deterministic = false) const;
};

// --- PPO machinery ---------------------------------------------------------

struct PpoStep {
  std::vector<double> input;
  std::vector<bool> mask;  // empty = all actions legal
  int action = 0;
  double logp_behavior = 0.0;
  double reward = 0.0;  // shaped per-step reward
};

struct PpoEpisode {
  std::vector<PpoStep> steps;
};

struct PpoDiagnostics {
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double entropy = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
};

// Policy (linear head over action logits) plus value head for one actor type.
class PpoLearner {
 public:
  PpoLearner(Mlp policy, Mlp value, const AdamConfig& policy_adam, const AdamConfig& value_adam);

  // One clipped-surrogate update on a batch of episodes. Throws
  // std::runtime_error with diagnostics on non-finite loss.
  PpoDiagnostics update(const std::vector<const PpoEpisode*>& batch, double gamma, double clip,
                        double entropy_coef);

  std::vector<double> action_probs(std::span<const double> input,
                                   const std::vector<bool>& mask) const;
  int sample_action(std::span<const double> input, const std::vector<bool>& mask, Rng& rng,
                    double* logp = nullptr) const;
  int greedy_action(std::span<const double> input, const std::vector<bool>& mask) const;

  Mlp& policy() { return policy_; }
  const Mlp& policy() const { return policy_; }
  Mlp& value() { return value_; }
  const Mlp& value() const { return value_; }
  AdamState& policy_state() { return policy_state_; }

 private:
  Mlp policy_;
  Mlp value_;
  AdamState policy_state_;
  AdamState value_state_;
  AdamConfig policy_cfg_;
  AdamConfig value_cfg_;
};

std::vector<double> discounted_returns(const PpoEpisode& ep, double gamma);

// --- Bridge ---------------------------------------------------------------

struct BridgeTrainResult {
  Mlp policy;
  Mlp value;
  std::vector<Mlp> beliefs;  // 1 net centralized, 2 distributed (N, S)
  LearningLog log;
  double final_eval = 0.0;
};

class BridgeTrainer {
 public:
  BridgeTrainer(const DeckSpec& deck, DealSet train_set, DealSet test_set, TrainerConfig cfg);

  BridgeTrainResult run();

  // Greedy-policy mean normalized score on the test set (first n episodes,
  // 0 = all).
  double evaluate(int n_episodes = 0) const;
  void pretrain();

  const BridgeEnv& env() const { return env_; }
  const Mlp& policy() const { return learner_.policy(); }
  const Mlp& belief(Seat seat) const;
  double pretrain_eval_loss(int n_deals) const;

  std::vector<double> belief_probs(const BiddingHistory& history, Seat viewer) const;

 private:
  struct Rollout {
    PpoEpisode episodes[2];  // indexed 0 = N, 1 = S
    double env_reward = 0.0;
    double comm_sum = 0.0;
    int comm_steps = 0;
  };

  std::vector<double> policy_input(const Hand& own, const BiddingHistory& history,
                                   Seat viewer) const;
  Rollout rollout_episode(const Deal& deal, const ScoreTable& table, double alpha, Rng& rng);

  BridgeEnv env_;
  DealSet train_set_;
  DealSet test_set_;
  TrainerConfig cfg_;
  PpoLearner learner_;
  std::vector<Mlp> beliefs_;
};

// --- Matrix game ------------------------------------------------------------

struct MatrixTrainResult {
  LearningLog log;
  double final_eval = 0.0;  // greedy expected payoff, unnormalized
};

// PBL on the two-stage signaling game. Separate policy/value nets per player,
// one shared belief net in centralized mode.
MatrixTrainResult train_matrix(const MatrixGameSpec& spec, const TrainerConfig& cfg);

// --- Silent Guide -----------------------------------------------------------

struct GuideTrainResult {
  LearningLog log;                    // mean_env_score = mean episode return
  double final_mean_reward = 0.0;     // over the final 10% of updates
  double final_goal_distance = 0.0;   // greedy episodes after training
};

// Distributed setting: per-agent belief nets pre-trained on disjoint scripted
// datasets, then PPO for both policies; the guide's reward is shaped with the
// communication reward from its own belief model.
GuideTrainResult train_guide(const GuideSpec& spec, const TrainerConfig& cfg);

}  // namespace pbl

#endif  // PBL_TRAINER_HPP_
