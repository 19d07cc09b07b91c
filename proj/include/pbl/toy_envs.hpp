#ifndef PBL_TOY_ENVS_HPP_
#define PBL_TOY_ENVS_HPP_

#include <array>
#include <string>
#include <vector>

#include "pbl/rng.hpp"

namespace pbl {

// Two-stage signaling card game: both players draw a card i.i.d. uniform,
// Player 1 acts, Player 2 responds after seeing Player 1's action, and both
// receive payoff[c1][c2][a1][a2].
struct MatrixGameSpec {
  int n_cards = 2;
  int n_actions_p1 = 3;
  int n_actions_p2 = 3;
  std::vector<double> payoff;

  double& at(int c1, int c2, int a1, int a2) {
    return payoff[((c1 * n_cards + c2) * n_actions_p1 + a1) * n_actions_p2 + a2];
  }
  double at(int c1, int c2, int a1, int a2) const {
    return payoff[((c1 * n_cards + c2) * n_actions_p1 + a1) * n_actions_p2 + a2];
  }
  void validate() const;

  // Shipped fixture: action B is a safe pooling choice for Player 1 while the
  // optimum requires signaling with C on card 1 and A on card 2 so that
  // Player 2 can pick the matching response.
  static MatrixGameSpec default_fixture();

  std::string to_json() const;
  static MatrixGameSpec from_json(const std::string& text);
};

// Player 2's observation after stage 1: own card and Player 1's action.
struct MatrixObservation {
  int own_card = 0;
  int p1_action = 0;
};

MatrixObservation matrix_stage1(const MatrixGameSpec& spec, int c1, int c2, int a1);
double matrix_stage2(const MatrixGameSpec& spec, int c1, int c2, int a1, int a2);

struct MatrixOptimum {
  double expected_payoff = 0.0;
  std::vector<int> p1_strategy;  // card -> a1
  std::vector<int> p2_strategy;  // (a1 * n_cards + card) -> a2
};

// Exhaustive maximum over deterministic profiles. Throws std::domain_error
// when the profile count exceeds `max_profiles`.
MatrixOptimum matrix_optimum(const MatrixGameSpec& spec, long long max_profiles = 100000000);

// ---------------------------------------------------------------------------

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline double norm(Vec2 v) { return std::sqrt(v.x * v.x + v.y * v.y); }

struct GuideSpec {
  int horizon = 50;
  double dt = 0.1;
  double damping = 0.75;
  double accel = 5.0;  // magnitude of the discrete acceleration impulses
};

inline constexpr int kGuideNumActions = 5;  // noop, +x, -x, +y, -y

struct GuideState {
  Vec2 guide_pos, guide_vel;
  Vec2 listener_pos, listener_vel;
  std::array<Vec2, 3> landmarks;
  int goal = 0;
  int step = 0;
};

GuideState guide_reset(const GuideSpec& spec, Rng& rng);

struct GuideStepResult {
  GuideState state;
  double reward = 0.0;  // shared; negative listener-goal distance
  bool terminal = false;
};

GuideStepResult guide_step(const GuideSpec& spec, const GuideState& s, int a_guide,
                           int a_listener);

struct GuideObservations {
  std::vector<double> guide;          // vel(2) + landmark displacements(6) + goal one-hot(3)
  std::vector<double> listener_base;  // vel(2) + landmark displacements(6); no goal info
};

GuideObservations guide_observations(const GuideState& s);

double listener_goal_distance(const GuideState& s);

}  // namespace pbl

#endif  // PBL_TOY_ENVS_HPP_
