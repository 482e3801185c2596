#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rewardrig/rational.hpp"

namespace rewardrig::grid {

struct Cell {
  int x = 0;
  int y = 0;  // row 0 is the northern edge
  bool operator==(const Cell&) const = default;
};

enum class Move { north, south, east, west };
inline constexpr int kNumMoves = 4;
inline constexpr std::array<std::string_view, kNumMoves> kMoveNames{"north", "south", "east", "west"};

enum class Belief { reward_b, reward_d, uncertain };
inline constexpr int kNumBeliefs = 3;

enum class PriorTag { BD, DD, half, correlated };
enum class AgentKind { standard, counterfactual };

std::string_view to_string(PriorTag tag);
std::string_view to_string(AgentKind kind);
std::string_view to_string(Belief belief);
/// Accepts BD, DD, half (or xi2), correlated (or xi1). Throws std::invalid_argument.
PriorTag parse_prior_tag(std::string_view text);
AgentKind parse_agent_kind(std::string_view text);

/// The 4x3 career gridworld.
struct Layout {
  int width = 4;
  int height = 3;
  Cell start{1, 1};
  Cell father{0, 1};
  Cell mother{3, 1};
  Cell money{1, 0};
  Cell stethoscope{1, 2};
  int max_steps = 10;

  bool in_bounds(Cell c) const { return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height; }
  int cell_index(Cell c) const { return c.y * width + c.x; }
  Cell cell_at(int index) const { return {index % width, index / width}; }
  int cell_count() const { return width * height; }
};

inline const Rational kStepCost{-1, 10};
inline const Rational kMoneyBonus{10};
inline const Rational kStethoscopeBonus{1};

/// What the parents say in one environment.
struct Answers {
  bool mother_b = true;
  bool father_b = true;
  std::string name() const;  // "mu_BD": mother first
};

struct WeightedAnswers {
  Answers answers;
  Rational weight;
};

std::vector<WeightedAnswers> prior_environments(PriorTag tag);

struct BeliefState {
  int cell = 0;
  Belief belief = Belief::uncertain;
  bool operator==(const BeliefState&) const = default;
};

inline constexpr int kNumStates = 12 * kNumBeliefs;
inline int state_index(const BeliefState& s) { return s.cell * kNumBeliefs + static_cast<int>(s.belief); }
inline BeliefState state_from_index(int index) { return {index / kNumBeliefs, static_cast<Belief>(index % kNumBeliefs)}; }

/// Belief before any parent is asked.
Belief initial_belief(AgentKind agent, PriorTag tag);

/// Belief after the first informative visit to a parent. Only called while
/// the belief is uncertain; later answers are ignored by the caller.
Belief belief_update(AgentKind agent, PriorTag tag, bool asked_mother, bool answer_b);

/// Terminal bonus for a belief at a cell (0 off the bonus squares).
Rational nominal_bonus(const Layout& layout, Belief belief, Cell cell);
/// Bonus under the mother's answer.
Rational true_bonus(const Layout& layout, const Answers& answers, Cell cell);

enum class Ending { none, money, stethoscope, wall };

struct StepOutcome {
  BeliefState next;
  bool terminal = false;
  Ending ending = Ending::none;
  Rational step_reward = kStepCost;
  Rational nominal_bonus;
  Rational true_bonus;
};

StepOutcome episode_step(const Layout& layout, const BeliefState& state, Move move, const Answers& answers,
                         AgentKind agent, PriorTag tag);

/// A policy over belief states; used for rollouts.
using GreedyTable = std::array<int, kNumStates>;

struct RolloutValue {
  Rational nominal;
  Rational truth;
};

/// Exact prior-expected nominal and true return of a belief-state policy.
RolloutValue exact_rollout(const Layout& layout, const GreedyTable& policy, AgentKind agent, PriorTag tag);

struct PolicyValue {
  std::string description;
  Rational nominal;
  Rational truth;
};

/// North, south, ask-father-then-act, ask-mother-then-act, and the
/// belief-MDP optimum found by exact dynamic programming.
std::vector<PolicyValue> exact_policy_values(PriorTag tag, AgentKind agent, const Layout& layout = {});

struct QLearningConfig {
  double epsilon = 0.1;
  int episodes = 20000;
  /// Value of every Q cell before its first update (the first 1/n update
  /// overwrites it completely).
  double initial_q = 0;
};

struct RunStats {
  std::vector<double> nominal;  // greedy start-state value after each episode
  std::vector<double> truth;    // prior-expected true return of the greedy policy
  GreedyTable greedy{};
};

std::uint64_t run_seed(std::uint64_t base_seed, std::uint64_t run);

RunStats q_learning_run(PriorTag tag, AgentKind agent, std::uint64_t seed, const QLearningConfig& config,
                        const Layout& layout = {});

struct AggregateStats {
  int runs = 0;
  std::vector<double> nominal_mean, nominal_std, truth_mean, truth_std;
};

/// Runs are split into fixed blocks reduced in run order, so the result
/// does not depend on the thread count (capped by REWARD_RIG_THREADS).
AggregateStats aggregate_runs(PriorTag tag, AgentKind agent, int runs, std::uint64_t base_seed,
                              const QLearningConfig& config, const Layout& layout = {});

unsigned thread_budget();

}  // namespace rewardrig::grid
