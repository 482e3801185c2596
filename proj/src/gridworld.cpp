#include "rewardrig/gridworld.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <thread>

namespace rewardrig::grid {

std::string_view to_string(PriorTag tag) {
  switch (tag) {
    case PriorTag::BD: return "BD";
    case PriorTag::DD: return "DD";
    case PriorTag::half: return "half";
    case PriorTag::correlated: return "correlated";
  }
  return "?";
}

std::string_view to_string(AgentKind kind) {
  return kind == AgentKind::standard ? "standard" : "counterfactual";
}

std::string_view to_string(Belief belief) {
  switch (belief) {
    case Belief::reward_b: return "R_B";
    case Belief::reward_d: return "R_D";
    case Belief::uncertain: return "1/2 R_B + 1/2 R_D";
  }
  return "?";
}

PriorTag parse_prior_tag(std::string_view text) {
  if (text == "BD" || text == "xi3") return PriorTag::BD;
  if (text == "DD") return PriorTag::DD;
  if (text == "half" || text == "xi2") return PriorTag::half;
  if (text == "correlated" || text == "xi1") return PriorTag::correlated;
  throw std::invalid_argument("unknown prior '" + std::string(text) + "' (expected BD, DD, half, correlated)");
}

AgentKind parse_agent_kind(std::string_view text) {
  if (text == "standard") return AgentKind::standard;
  if (text == "counterfactual") return AgentKind::counterfactual;
  throw std::invalid_argument("unknown agent '" + std::string(text) + "' (expected standard, counterfactual)");
}

std::string Answers::name() const {
  return std::string("mu_") + (mother_b ? "B" : "D") + (father_b ? "B" : "D");
}

std::vector<WeightedAnswers> prior_environments(PriorTag tag) {
  switch (tag) {
    case PriorTag::BD: return {{{true, false}, 1}};
    case PriorTag::DD: return {{{false, false}, 1}};
    case PriorTag::half:
      return {{{true, true}, {1, 4}}, {{true, false}, {1, 4}}, {{false, true}, {1, 4}}, {{false, false}, {1, 4}}};
    case PriorTag::correlated: return {{{true, true}, {1, 2}}, {{false, false}, {1, 2}}};
  }
  throw std::logic_error("unhandled prior tag");
}

Belief initial_belief(AgentKind agent, PriorTag tag) {
  if (agent == AgentKind::standard) return Belief::uncertain;
  switch (tag) {
    case PriorTag::BD: return Belief::reward_b;
    case PriorTag::DD: return Belief::reward_d;
    default: return Belief::uncertain;
  }
}

Belief belief_update(AgentKind agent, PriorTag tag, bool asked_mother, bool answer_b) {
  const Belief told = answer_b ? Belief::reward_b : Belief::reward_d;
  if (agent == AgentKind::standard || asked_mother) return told;
  if (tag == PriorTag::correlated) return told;
  return initial_belief(agent, tag);
}

Rational nominal_bonus(const Layout& layout, Belief belief, Cell cell) {
  if (cell == layout.money) {
    if (belief == Belief::reward_b) return kMoneyBonus;
    if (belief == Belief::uncertain) return kMoneyBonus / 2;
  } else if (cell == layout.stethoscope) {
    if (belief == Belief::reward_d) return kStethoscopeBonus;
    if (belief == Belief::uncertain) return kStethoscopeBonus / 2;
  }
  return 0;
}

Rational true_bonus(const Layout& layout, const Answers& answers, Cell cell) {
  return nominal_bonus(layout, answers.mother_b ? Belief::reward_b : Belief::reward_d, cell);
}

StepOutcome episode_step(const Layout& layout, const BeliefState& state, Move move, const Answers& answers,
                         AgentKind agent, PriorTag tag) {
  Cell cell = layout.cell_at(state.cell);
  switch (move) {
    case Move::north: --cell.y; break;
    case Move::south: ++cell.y; break;
    case Move::east: ++cell.x; break;
    case Move::west: --cell.x; break;
  }
  StepOutcome out;
  out.next = state;
  if (!layout.in_bounds(cell)) {
    out.terminal = true;
    out.ending = Ending::wall;
    return out;
  }
  out.next.cell = layout.cell_index(cell);
  if (cell == layout.money || cell == layout.stethoscope) {
    out.terminal = true;
    out.ending = cell == layout.money ? Ending::money : Ending::stethoscope;
    out.nominal_bonus = nominal_bonus(layout, state.belief, cell);
    out.true_bonus = true_bonus(layout, answers, cell);
    return out;
  }
  if (state.belief == Belief::uncertain && (cell == layout.mother || cell == layout.father)) {
    const bool mother = cell == layout.mother;
    out.next.belief = belief_update(agent, tag, mother, mother ? answers.mother_b : answers.father_b);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

BeliefState start_state(const Layout& layout, AgentKind agent, PriorTag tag) {
  return {layout.cell_index(layout.start), initial_belief(agent, tag)};
}

template <typename Choose>
RolloutValue rollout(const Layout& layout, AgentKind agent, PriorTag tag, Choose&& choose) {
  RolloutValue total;
  for (const auto& [answers, weight] : prior_environments(tag)) {
    BeliefState s = start_state(layout, agent, tag);
    Rational nominal = 0, truth = 0;
    for (int step = 0; step < layout.max_steps; ++step) {
      const auto out = episode_step(layout, s, static_cast<Move>(choose(s, step)), answers, agent, tag);
      nominal += out.step_reward + out.nominal_bonus;
      truth += out.step_reward + out.true_bonus;
      if (out.terminal) break;
      s = out.next;
    }
    total.nominal += weight * nominal;
    total.truth += weight * truth;
  }
  return total;
}

// Scripted prefix, then north when R_B or uncertain and south when R_D.
RolloutValue scripted(const Layout& layout, AgentKind agent, PriorTag tag, const std::vector<Move>& prefix) {
  return rollout(layout, agent, tag, [&](const BeliefState& s, int step) {
    if (step < static_cast<int>(prefix.size())) return static_cast<int>(prefix[step]);
    return static_cast<int>(s.belief == Belief::reward_d ? Move::south : Move::north);
  });
}

Rational marginal_answer_b(PriorTag tag, bool mother) {
  Rational p = 0;
  for (const auto& [answers, weight] : prior_environments(tag)) {
    if (mother ? answers.mother_b : answers.father_b) p += weight;
  }
  return p;
}

}  // namespace

RolloutValue exact_rollout(const Layout& layout, const GreedyTable& policy, AgentKind agent, PriorTag tag) {
  return rollout(layout, agent, tag, [&](const BeliefState& s, int) { return policy[state_index(s)]; });
}

std::vector<PolicyValue> exact_policy_values(PriorTag tag, AgentKind agent, const Layout& layout) {
  std::vector<PolicyValue> out;
  const auto add = [&](std::string name, const RolloutValue& v) { out.push_back({std::move(name), v.nominal, v.truth}); };
  add("north", scripted(layout, agent, tag, {Move::north}));
  add("south", scripted(layout, agent, tag, {Move::south}));
  add("ask father then act", scripted(layout, agent, tag, {Move::west, Move::east}));
  add("ask mother then act", scripted(layout, agent, tag, {Move::east, Move::east, Move::west, Move::west}));

  // Belief-MDP dynamic programming over (state, steps remaining). Leaving
  // the uncertain belief at a parent draws that parent's prior marginal.
  const int horizon = layout.max_steps;
  std::vector<std::array<Rational, kNumStates>> value(horizon + 1);
  std::vector<std::array<int, kNumStates>> action(horizon + 1);
  for (int k = 1; k <= horizon; ++k) {
    for (int si = 0; si < kNumStates; ++si) {
      const BeliefState s = state_from_index(si);
      std::optional<Rational> best;
      for (int a = 0; a < kNumMoves; ++a) {
        Rational q = 0;
        for (bool answer_b : {true, false}) {
          const Answers answers{answer_b, answer_b};
          const auto step = episode_step(layout, s, static_cast<Move>(a), answers, agent, tag);
          Rational p = 1;
          const Cell dest = layout.cell_at(step.next.cell);
          const bool at_parent = !step.terminal && s.belief == Belief::uncertain &&
                                 (dest == layout.mother || dest == layout.father);
          if (at_parent) {
            const Rational pb = marginal_answer_b(tag, dest == layout.mother);
            p = answer_b ? pb : 1 - pb;
          } else if (!answer_b) {
            continue;  // answer irrelevant: count the outcome once
          }
          if (p == 0) continue;
          Rational r = step.step_reward + step.nominal_bonus;
          if (!step.terminal) r += value[k - 1][state_index(step.next)];
          q += p * r;
        }
        if (!best || q > *best) {
          best = q;
          action[k][si] = a;
        }
      }
      value[k][si] = *best;
    }
  }
  const auto dp = rollout(layout, agent, tag, [&](const BeliefState& s, int step) {
    return action[horizon - step][state_index(s)];
  });
  if (dp.nominal != value[horizon][state_index(start_state(layout, agent, tag))]) {
    throw std::logic_error("belief-MDP optimum disagrees with its own rollout");
  }
  add("optimal (belief-MDP dynamic programming)", dp);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t run_seed(std::uint64_t base_seed, std::uint64_t run) { return splitmix64(splitmix64(base_seed) + run); }

namespace {

struct Transition {
  int next = 0;
  bool terminal = false;
  double nominal = 0;  // step cost plus nominal bonus
  double truth = 0;    // step cost plus true bonus
};

// table[env][state][move]
using TransitionTable = std::vector<std::array<std::array<Transition, kNumMoves>, kNumStates>>;

TransitionTable build_transitions(const Layout& layout, AgentKind agent, PriorTag tag,
                                  const std::vector<WeightedAnswers>& envs) {
  TransitionTable table(envs.size());
  for (std::size_t e = 0; e < envs.size(); ++e) {
    for (int si = 0; si < kNumStates; ++si) {
      for (int a = 0; a < kNumMoves; ++a) {
        const auto out = episode_step(layout, state_from_index(si), static_cast<Move>(a), envs[e].answers, agent, tag);
        table[e][si][a] = {state_index(out.next), out.terminal, Rational(out.step_reward + out.nominal_bonus).get_d(),
                           Rational(out.step_reward + out.true_bonus).get_d()};
      }
    }
  }
  return table;
}

int argmax(const std::array<double, kNumMoves>& q) {
  int best = 0;
  for (int a = 1; a < kNumMoves; ++a) {
    if (q[a] > q[best]) best = a;
  }
  return best;
}

}  // namespace

RunStats q_learning_run(PriorTag tag, AgentKind agent, std::uint64_t seed, const QLearningConfig& config,
                        const Layout& layout) {
  if (config.episodes < 1) throw std::invalid_argument("episodes must be at least 1");
  const auto envs = prior_environments(tag);
  const auto table = build_transitions(layout, agent, tag, envs);
  std::vector<double> env_weight;
  for (const auto& e : envs) env_weight.push_back(e.weight.get_d());

  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick_env(env_weight.begin(), env_weight.end());
  std::bernoulli_distribution explore(config.epsilon);
  std::uniform_int_distribution<int> random_move(0, kNumMoves - 1);

  std::array<std::array<double, kNumMoves>, kNumStates> q;
  for (auto& row : q) row.fill(config.initial_q);
  std::array<std::array<std::uint64_t, kNumMoves>, kNumStates> visits{};
  RunStats stats;
  stats.greedy.fill(0);
  stats.nominal.reserve(config.episodes);
  stats.truth.reserve(config.episodes);
  const int s0 = state_index(start_state(layout, agent, tag));

  bool greedy_changed = true;
  double greedy_truth = 0;
  for (int episode = 0; episode < config.episodes; ++episode) {
    const auto& env = table[pick_env(rng)];
    int s = s0;
    for (int step = 0; step < layout.max_steps; ++step) {
      const int a = explore(rng) ? random_move(rng) : stats.greedy[s];
      const Transition& t = env[s][a];
      const bool last = t.terminal || step + 1 == layout.max_steps;
      double target = t.nominal;
      if (!last) target += q[t.next][stats.greedy[t.next]];
      const auto n = ++visits[s][a];
      q[s][a] += (target - q[s][a]) / static_cast<double>(n);
      const int best = argmax(q[s]);
      if (best != stats.greedy[s]) {
        stats.greedy[s] = best;
        greedy_changed = true;
      }
      if (t.terminal) break;
      s = t.next;
    }
    if (greedy_changed) {
      greedy_truth = 0;
      for (std::size_t e = 0; e < table.size(); ++e) {
        int g = s0;
        double total = 0;
        for (int step = 0; step < layout.max_steps; ++step) {
          const Transition& t = table[e][g][stats.greedy[g]];
          total += t.truth;
          if (t.terminal) break;
          g = t.next;
        }
        greedy_truth += env_weight[e] * total;
      }
      greedy_changed = false;
    }
    stats.nominal.push_back(q[s0][stats.greedy[s0]]);
    stats.truth.push_back(greedy_truth);
  }
  return stats;
}

unsigned thread_budget() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("REWARD_RIG_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(cap, &end, 10);
    if (end != cap && v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return n;
}

namespace {

struct Moments {
  double count = 0;
  std::vector<double> mean, m2;
};

void absorb(Moments& m, const std::vector<double>& x) {
  if (m.mean.empty()) {
    m.mean.assign(x.size(), 0.0);
    m.m2.assign(x.size(), 0.0);
  }
  m.count += 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double delta = x[i] - m.mean[i];
    m.mean[i] += delta / m.count;
    m.m2[i] += delta * (x[i] - m.mean[i]);
  }
}

void merge(Moments& into, const Moments& other) {
  if (other.count == 0) return;
  if (into.count == 0) {
    into = other;
    return;
  }
  const double n = into.count + other.count;
  for (std::size_t i = 0; i < into.mean.size(); ++i) {
    const double delta = other.mean[i] - into.mean[i];
    into.mean[i] += delta * other.count / n;
    into.m2[i] += other.m2[i] + delta * delta * into.count * other.count / n;
  }
  into.count = n;
}

std::vector<double> population_std(const Moments& m) {
  std::vector<double> out(m.m2.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(std::max(0.0, m.m2[i] / m.count));
  return out;
}

}  // namespace

AggregateStats aggregate_runs(PriorTag tag, AgentKind agent, int runs, std::uint64_t base_seed,
                              const QLearningConfig& config, const Layout& layout) {
  if (runs < 1) throw std::invalid_argument("runs must be at least 1");
  constexpr int kMaxBlocks = 16;
  const int blocks = std::min(runs, kMaxBlocks);
  std::vector<Moments> nominal(blocks), truth(blocks);
  std::atomic<int> next_block{0};
  const auto work = [&] {
    for (int b = next_block++; b < blocks; b = next_block++) {
      const int lo = static_cast<int>(static_cast<long long>(runs) * b / blocks);
      const int hi = static_cast<int>(static_cast<long long>(runs) * (b + 1) / blocks);
      for (int r = lo; r < hi; ++r) {
        const auto stats = q_learning_run(tag, agent, run_seed(base_seed, static_cast<std::uint64_t>(r)), config, layout);
        absorb(nominal[b], stats.nominal);
        absorb(truth[b], stats.truth);
      }
    }
  };
  const unsigned workers = std::min<unsigned>(thread_budget(), static_cast<unsigned>(blocks));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < workers; ++i) pool.emplace_back(work);
    work();
  }
  Moments total_nominal, total_truth;
  for (int b = 0; b < blocks; ++b) {
    merge(total_nominal, nominal[b]);
    merge(total_truth, truth[b]);
  }
  AggregateStats out;
  out.runs = runs;
  out.nominal_mean = total_nominal.mean;
  out.nominal_std = population_std(total_nominal);
  out.truth_mean = total_truth.mean;
  out.truth_std = population_std(total_truth);
  return out;
}

}  // namespace rewardrig::grid
