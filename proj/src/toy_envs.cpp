#include "pbl/toy_envs.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace pbl {

void MatrixGameSpec::validate() const {
  if (n_cards < 1 || n_actions_p1 < 1 || n_actions_p2 < 1)
    throw std::invalid_argument("MatrixGameSpec: empty card or action set");
  const std::size_t want = static_cast<std::size_t>(n_cards) * n_cards * n_actions_p1 *
                           n_actions_p2;
  if (payoff.size() != want) throw std::invalid_argument("MatrixGameSpec: payoff tensor size");
  for (double v : payoff)
    if (!std::isfinite(v)) throw std::invalid_argument("MatrixGameSpec: non-finite payoff");
}

MatrixGameSpec MatrixGameSpec::default_fixture() {
  MatrixGameSpec spec;
  spec.payoff.assign(static_cast<std::size_t>(spec.n_cards) * spec.n_cards * spec.n_actions_p1 *
                         spec.n_actions_p2,
                     0.0);
  constexpr int kA = 0, kB = 1, kC = 2;
  auto base = [&](int c1, int a1) {
    if (a1 == kB) return 9.0;               // safe pooling action
    if (a1 == kC) return c1 == 0 ? 10.0 : 0.0;
    return c1 == 1 ? 10.0 : 0.0;            // kA
  };
  auto target_a2 = [&](int c1, int c2) {
    if (c1 == c2) return kA;
    return c2 == 0 ? kB : kC;
  };
  for (int c1 = 0; c1 < spec.n_cards; ++c1)
    for (int c2 = 0; c2 < spec.n_cards; ++c2)
      for (int a1 = 0; a1 < spec.n_actions_p1; ++a1)
        for (int a2 = 0; a2 < spec.n_actions_p2; ++a2)
          spec.at(c1, c2, a1, a2) = base(c1, a1) + (a2 == target_a2(c1, c2) ? 10.0 : 0.0);
  return spec;
}

std::string MatrixGameSpec::to_json() const {
  nlohmann::json j;
  j["n_cards"] = n_cards;
  j["n_actions_p1"] = n_actions_p1;
  j["n_actions_p2"] = n_actions_p2;
  j["payoff"] = payoff;
  return j.dump(2);
}

MatrixGameSpec MatrixGameSpec::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  MatrixGameSpec spec;
  spec.n_cards = j.at("n_cards").get<int>();
  spec.n_actions_p1 = j.at("n_actions_p1").get<int>();
  spec.n_actions_p2 = j.at("n_actions_p2").get<int>();
  spec.payoff = j.at("payoff").get<std::vector<double>>();
  spec.validate();
  return spec;
}

MatrixObservation matrix_stage1(const MatrixGameSpec& spec, int c1, int c2, int a1) {
  if (c1 < 0 || c1 >= spec.n_cards || c2 < 0 || c2 >= spec.n_cards)
    throw std::domain_error("matrix_stage1: card out of range");
  if (a1 < 0 || a1 >= spec.n_actions_p1) throw std::domain_error("matrix_stage1: a1 out of range");
  return MatrixObservation{c2, a1};  // Player 2 never sees c1
}

double matrix_stage2(const MatrixGameSpec& spec, int c1, int c2, int a1, int a2) {
  if (a2 < 0 || a2 >= spec.n_actions_p2) throw std::domain_error("matrix_stage2: a2 out of range");
  matrix_stage1(spec, c1, c2, a1);
  return spec.at(c1, c2, a1, a2);
}

MatrixOptimum matrix_optimum(const MatrixGameSpec& spec, long long max_profiles) {
  spec.validate();
  auto ipow = [](long long b, int e) {
    long long r = 1;
    while (e-- > 0) {
      r *= b;
      if (r < 0 || r > (1LL << 62)) return (1LL << 62);
    }
    return r;
  };
  const long long n_p1 = ipow(spec.n_actions_p1, spec.n_cards);
  const long long n_p2 = ipow(spec.n_actions_p2, spec.n_actions_p1 * spec.n_cards);
  if (n_p1 > max_profiles || n_p2 > max_profiles / std::max(1LL, n_p1))
    throw std::domain_error("matrix_optimum: enumeration size guard exceeded");

  MatrixOptimum best;
  best.expected_payoff = -1e300;
  const double prob = 1.0 / (static_cast<double>(spec.n_cards) * spec.n_cards);

  std::vector<int> p1(spec.n_cards, 0);
  for (long long i = 0; i < n_p1; ++i) {
    {
      long long r = i;
      for (int c = 0; c < spec.n_cards; ++c) {
        p1[c] = static_cast<int>(r % spec.n_actions_p1);
        r /= spec.n_actions_p1;
      }
    }
    // Best response of Player 2 decomposes per (a1, c2) cell; no need to
    // enumerate its full strategy space.
    double expected = 0.0;
    std::vector<int> p2(static_cast<std::size_t>(spec.n_actions_p1) * spec.n_cards, 0);
    for (int a1 = 0; a1 < spec.n_actions_p1; ++a1) {
      for (int c2 = 0; c2 < spec.n_cards; ++c2) {
        double cell_best = -1e300;
        int cell_arg = 0;
        for (int a2 = 0; a2 < spec.n_actions_p2; ++a2) {
          double v = 0.0;
          for (int c1 = 0; c1 < spec.n_cards; ++c1)
            if (p1[c1] == a1) v += prob * spec.at(c1, c2, a1, a2);
          if (v > cell_best) {
            cell_best = v;
            cell_arg = a2;
          }
        }
        p2[static_cast<std::size_t>(a1) * spec.n_cards + c2] = cell_arg;
        expected += cell_best;
      }
    }
    if (expected > best.expected_payoff) {
      best.expected_payoff = expected;
      best.p1_strategy = p1;
      best.p2_strategy = p2;
    }
  }
  return best;
}

GuideState guide_reset(const GuideSpec& spec, Rng& rng) {
  (void)spec;
  GuideState s;
  auto u = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  for (auto& lm : s.landmarks) lm = {u(-1.0, 1.0), u(-1.0, 1.0)};
  s.goal = uniform_int(rng, 0, 2);
  s.guide_pos = {u(-0.25, 0.25), u(-0.25, 0.25)};
  s.listener_pos = {u(-0.25, 0.25), u(-0.25, 0.25)};
  return s;
}

namespace {
Vec2 action_accel(const GuideSpec& spec, int a) {
  switch (a) {
    case 0: return {0.0, 0.0};
    case 1: return {spec.accel, 0.0};
    case 2: return {-spec.accel, 0.0};
    case 3: return {0.0, spec.accel};
    case 4: return {0.0, -spec.accel};
    default: throw std::domain_error("guide_step: action out of range");
  }
}
}  // namespace

GuideStepResult guide_step(const GuideSpec& spec, const GuideState& s, int a_guide,
                           int a_listener) {
  if (s.step >= spec.horizon) throw std::logic_error("guide_step: terminal state");
  GuideStepResult res;
  res.state = s;
  auto integrate = [&](Vec2& pos, Vec2& vel, int action) {
    const Vec2 acc = action_accel(spec, action);
    vel.x = spec.damping * (vel.x + acc.x * spec.dt);
    vel.y = spec.damping * (vel.y + acc.y * spec.dt);
    pos.x += vel.x * spec.dt;
    pos.y += vel.y * spec.dt;
  };
  integrate(res.state.guide_pos, res.state.guide_vel, a_guide);
  integrate(res.state.listener_pos, res.state.listener_vel, a_listener);
  res.state.step = s.step + 1;
  res.reward = -listener_goal_distance(res.state);
  res.terminal = res.state.step >= spec.horizon;
  return res;
}

GuideObservations guide_observations(const GuideState& s) {
  GuideObservations obs;
  auto push_common = [&](std::vector<double>& v, Vec2 pos, Vec2 vel) {
    v.push_back(vel.x);
    v.push_back(vel.y);
    for (const Vec2& lm : s.landmarks) {
      const Vec2 d = lm - pos;  // landmark - agent
      v.push_back(d.x);
      v.push_back(d.y);
    }
  };
  push_common(obs.guide, s.guide_pos, s.guide_vel);
  for (int g = 0; g < 3; ++g) obs.guide.push_back(g == s.goal ? 1.0 : 0.0);
  push_common(obs.listener_base, s.listener_pos, s.listener_vel);
  return obs;
}

double listener_goal_distance(const GuideState& s) {
  return norm(s.landmarks[static_cast<std::size_t>(s.goal)] - s.listener_pos);
}

}  // namespace pbl
