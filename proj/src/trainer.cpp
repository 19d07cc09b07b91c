#include "pbl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pbl {

TrainerConfig TrainerConfig::desk_scale() {
  TrainerConfig cfg;
  // Normalized scores live in [-1, 1] while the KL-based communication
  // reward is measured in nats; the full-scale alpha0 of 5 drowns the
  // environment signal at this episode budget.
  cfg.alpha0 = 1.0;
  cfg.pg_updates_per_iter = 60;
  cfg.episodes_per_update = 512;
  cfg.minibatch_episodes = 256;
  cfg.pbl_iterations = 4;
  cfg.pretrain_steps = 400;
  cfg.belief_episodes = 4096;
  cfg.eval_every = 10;
  cfg.hidden = {64, 64};
  cfg.belief_train.batch_size = 1024;
  cfg.belief_train.max_epochs = 20;
  return cfg;
}

TrainerConfig TrainerConfig::resolved() const {
  TrainerConfig cfg = *this;
  if (cfg.alpha0 < 0.0) throw std::invalid_argument("TrainerConfig: alpha0 < 0");
  if (cfg.gamma <= 0.0 || cfg.gamma > 1.0) throw std::invalid_argument("TrainerConfig: gamma");
  if (cfg.pbl_iterations < 1) throw std::invalid_argument("TrainerConfig: K < 1");
  switch (cfg.baseline) {
    case BaselineKind::kIp:
      if (cfg.mode == TrainMode::kDistributed)
        throw std::invalid_argument("TrainerConfig: distributed mode with IP baseline");
      cfg.zero_belief_input = true;
      cfg.alpha0 = 0.0;
      break;
    case BaselineKind::kNcr:
      cfg.alpha0 = 0.0;
      break;
    case BaselineKind::kPbl:
    case BaselineKind::kNpbi:
      break;
  }
  return cfg;
}

double bernoulli_kl(std::span<const double> x, std::span<const double> b) {
  if (x.size() != b.size()) throw std::invalid_argument("bernoulli_kl: size mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double p = std::clamp(b[i], 1e-12, 1.0 - 1e-12);
    kl -= x[i] * std::log(p) + (1.0 - x[i]) * std::log(1.0 - p);
  }
  return kl;
}

double categorical_kl(std::span<const double> x, std::span<const double> b) {
  if (x.size() != b.size()) throw std::invalid_argument("categorical_kl: size mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0.0) kl += x[i] * (std::log(x[i]) - std::log(std::max(b[i], 1e-12)));
  return kl;
}

double comm_reward(std::span<const double> x, BestBeliefTracker& tracker,
                   std::span<const double> b_next, bool categorical) {
  const double kl = categorical ? categorical_kl(x, b_next) : bernoulli_kl(x, b_next);
  const double r_c = tracker.best_kl - kl;
  tracker.best_kl = std::min(tracker.best_kl, kl);
  return r_c;
}

double pretrain_loss(std::span<const double> policy_probs, std::span<const double> scores,
                     double tau) {
  if (tau <= 0.0) throw std::domain_error("pretrain_loss: tau <= 0");
  if (policy_probs.size() != scores.size())
    throw std::invalid_argument("pretrain_loss: size mismatch");
  // Softmax(scores / tau).
  double mx = scores[0] / tau;
  for (double s : scores) mx = std::max(mx, s / tau);
  double z = 0.0;
  for (double s : scores) z += std::exp(s / tau - mx);
  double loss = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double q = std::exp(scores[i] / tau - mx) / z;
    const double p = policy_probs[i];
    if (p > 0.0) loss += p * (std::log(p) - std::log(std::max(q, 1e-300)));
  }
  return loss;
}

std::vector<double> pretrain_logit_grad(std::span<const double> policy_probs,
                                        std::span<const double> scores, double tau) {
  const double kl = pretrain_loss(policy_probs, scores, tau);
  double mx = scores[0] / tau;
  for (double s : scores) mx = std::max(mx, s / tau);
  double z = 0.0;
  for (double s : scores) z += std::exp(s / tau - mx);
  std::vector<double> g(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double q = std::exp(scores[i] / tau - mx) / z;
    const double p = policy_probs[i];
    // d KL(pi||q) / d logit_i for pi = softmax(logits).
    g[i] = p > 0.0 ? p * (std::log(p) - std::log(std::max(q, 1e-300)) - kl) : 0.0;
  }
  return g;
}

std::string LearningLog::to_csv(bool deterministic) const {
  std::ostringstream os;
  os.precision(17);
  os << "pbl_iter,pg_update,mean_env_score,mean_comm_reward,belief_val_loss,wallclock\n";
  for (const LogRow& r : rows) {
    os << r.pbl_iter << "," << r.pg_update << "," << r.mean_env_score << ","
       << r.mean_comm_reward << "," << r.belief_val_loss << ","
       << (deterministic ? 0.0 : r.wallclock) << "\n";
  }
  return os.str();
}

void LearningLog::save_csv(const std::string& path, bool deterministic) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("LearningLog::save_csv: cannot open " + path);
  os << to_csv(deterministic);
}

std::vector<double> discounted_returns(const PpoEpisode& ep, double gamma) {
  std::vector<double> ret(ep.steps.size(), 0.0);
  double acc = 0.0;
  for (int t = static_cast<int>(ep.steps.size()) - 1; t >= 0; --t) {
    acc = ep.steps[t].reward + gamma * acc;
    ret[t] = acc;
  }
  return ret;
}

PpoLearner::PpoLearner(Mlp policy, Mlp value, const AdamConfig& policy_adam,
                       const AdamConfig& value_adam)
    : policy_(std::move(policy)),
      value_(std::move(value)),
      policy_state_(AdamState::init(policy_)),
      value_state_(AdamState::init(value_)),
      policy_cfg_(policy_adam),
      value_cfg_(value_adam) {}

std::vector<double> PpoLearner::action_probs(std::span<const double> input,
                                             const std::vector<bool>& mask) const {
  const ForwardCache cache = forward(policy_, input);
  if (mask.empty()) {
    const std::vector<bool> all(cache.output.size(), true);
    return masked_softmax(cache.output, all);
  }
  return masked_softmax(cache.output, mask);
}

int PpoLearner::sample_action(std::span<const double> input, const std::vector<bool>& mask,
                              Rng& rng, double* logp) const {
  const std::vector<double> probs = action_probs(input, mask);
  const double u = uniform01(rng);
  double acc = 0.0;
  int action = static_cast<int>(probs.size()) - 1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u <= acc) {
      action = static_cast<int>(i);
      break;
    }
  }
  if (logp != nullptr) *logp = std::log(std::max(probs[action], 1e-300));
  return action;
}

int PpoLearner::greedy_action(std::span<const double> input, const std::vector<bool>& mask) const {
  const std::vector<double> probs = action_probs(input, mask);
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

PpoDiagnostics PpoLearner::update(const std::vector<const PpoEpisode*>& batch, double gamma,
                                  double clip, double entropy_coef) {
  PpoDiagnostics diag;
  Grads policy_grads = zero_grads(policy_);
  Grads value_grads = zero_grads(value_);
  std::size_t n_steps = 0;

  for (const PpoEpisode* ep : batch) {
    const std::vector<double> returns = discounted_returns(*ep, gamma);
    for (std::size_t t = 0; t < ep->steps.size(); ++t) {
      const PpoStep& step = ep->steps[t];
      ++n_steps;

      const ForwardCache vcache = forward(value_, step.input);
      const double v = vcache.output[0];
      const double advantage = returns[t] - v;

      const ForwardCache pcache = forward(policy_, step.input);
      const std::vector<bool> all(pcache.output.size(), true);
      const std::vector<double> probs =
          masked_softmax(pcache.output, step.mask.empty() ? all : step.mask);

      const double pa = std::max(probs[step.action], 1e-300);
      const double ratio = std::exp(std::log(pa) - step.logp_behavior);
      const double lo = 1.0 - clip, hi = 1.0 + clip;
      const bool clipped = (advantage >= 0.0 && ratio > hi) || (advantage < 0.0 && ratio < lo);
      diag.mean_ratio += ratio;
      diag.clip_fraction += clipped ? 1.0 : 0.0;
      diag.policy_loss += -std::min(ratio * advantage, std::clamp(ratio, lo, hi) * advantage);

      double entropy = 0.0;
      for (double p : probs)
        if (p > 0.0) entropy -= p * std::log(p);
      diag.entropy += entropy;

      // dL/d(logits): clipped surrogate + entropy bonus.
      std::vector<double> dlogits(probs.size(), 0.0);
      if (!clipped) {
        const double coef = -ratio * advantage;  // d(-ratio*A)/dlogp_a scale
        for (std::size_t k = 0; k < probs.size(); ++k) {
          const double ind = static_cast<int>(k) == step.action ? 1.0 : 0.0;
          dlogits[k] += coef * (ind - probs[k]);
        }
      }
      if (entropy_coef > 0.0) {
        for (std::size_t k = 0; k < probs.size(); ++k) {
          if (probs[k] > 0.0)
            dlogits[k] += entropy_coef * probs[k] * (std::log(probs[k]) + entropy);
        }
      }
      backward(policy_, pcache, dlogits, policy_grads);

      const double verr = v - returns[t];
      diag.value_loss += 0.5 * verr * verr;
      const std::vector<double> dv = {verr};
      backward(value_, vcache, dv, value_grads);
    }
  }
  if (n_steps == 0) return diag;
  const double inv = 1.0 / static_cast<double>(n_steps);
  diag.mean_ratio *= inv;
  diag.clip_fraction *= inv;
  diag.entropy *= inv;
  diag.policy_loss *= inv;
  diag.value_loss *= inv;
  if (!std::isfinite(diag.policy_loss) || !std::isfinite(diag.value_loss)) {
    std::ostringstream os;
    os << "PpoLearner::update: non-finite loss (policy=" << diag.policy_loss
       << ", value=" << diag.value_loss << ", mean_ratio=" << diag.mean_ratio << ")";
    throw std::runtime_error(os.str());
  }
  scale_grads(policy_grads, inv);
  scale_grads(value_grads, inv);
  adam_step(policy_, policy_grads, policy_state_, policy_cfg_);
  adam_step(value_, value_grads, value_state_, value_cfg_);
  return diag;
}

}  // namespace pbl
