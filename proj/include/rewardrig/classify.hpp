#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rewardrig/reward.hpp"

namespace rewardrig {

/// A node h_m where two first actions lead to different expected learned
/// reward functions (pointwise unequal tables).
struct RiggingWitness {
  History history;
  int action = 0;
  int alternative = 0;
  RewardFunction under_action;
  RewardFunction under_alternative;
};

/// "at 'h': M and F lead to different expected reward functions".
std::string describe_witness(const RiggingWitness& witness, const HorizonSpec& spec);

struct UnrigVerdict {
  bool unriggable = false;
  std::optional<RiggingWitness> witness;
  /// The policy-independent extension of e_rho, when unriggable.
  std::optional<ExtendedExpectation> extended;
};

/// Backward induction over the possible-history tree: unriggable iff at
/// every possible interior node all actions give the same one-step
/// expectation. On failure the witness is the deepest failing node (first
/// in node order at that depth).
UnrigVerdict check_unriggable(const LearningProcess& rho, const Prior& prior);
UnrigVerdict check_unriggable(const LearningProcess& rho, const PredictiveModel& model);

/// Independent check: enumerate every deterministic policy and compare
/// sum_{h_n} P(h_n | h_m, pi, xi) e_rho(h_n) across them at every possible h_m.
/// Throws SizeError when the policy count exceeds `cap`.
UnrigVerdict check_unriggable_oracle(const LearningProcess& rho, const Prior& prior,
                                     std::size_t cap = kDefaultEnumerationCap);

/// eta: per-environment distribution over a pool of reward functions.
class EnvConditional {
 public:
  EnvConditional(std::vector<std::string> environment_names, std::vector<RewardFunction> pool,
                 std::vector<std::vector<WeightedReward>> dist);

  std::size_t size() const { return dist_.size(); }
  const std::string& environment_name(std::size_t env) const { return names_.at(env); }
  const std::vector<RewardFunction>& pool() const { return pool_; }
  const std::vector<WeightedReward>& distribution(std::size_t env) const { return dist_.at(env); }
  Rational probability(std::size_t env, std::size_t reward) const;
  /// e_eta(mu).
  RewardFunction expectation(std::size_t env) const;

 private:
  std::vector<std::string> names_;
  std::vector<RewardFunction> pool_;
  std::vector<std::vector<WeightedReward>> dist_;
};

/// The learning process eta induces through xi:
/// P(R | h_n) = sum_mu P(R | eta, mu) P(mu | h_n, xi). At histories that are
/// impossible under xi the prior weights stand in for the posterior.
LearningProcess induced_process(const EnvConditional& eta, const Prior& prior);

struct InfluenceVerdict {
  bool uninfluenceable = false;
  std::optional<EnvConditional> eta;
  std::optional<std::string> infeasibility_note;
};

/// Exact linear feasibility for an eta reproducing rho through the prior.
/// Variables are q[mu][R] for positive-prior mu and R in im(rho).
InfluenceVerdict check_uninfluenceable(const LearningProcess& rho, const Prior& prior);

enum class ImageScope { all, possible };

struct SacrificeCheck {
  bool sacrifices = false;
  /// When false: a reward function and completion pair breaking strict
  /// preference (R(good) <= R(bad)). Absent if a completion set is empty.
  std::optional<RewardFunction> counter_reward;
  std::optional<History> counter_bad;
  std::optional<History> counter_good;
};

/// Does `bad` sacrifice reward with certainty to `good` on h_m? Compares
/// every pair of positive-probability completions for every R in the image.
SacrificeCheck check_sacrifice(const Policy& bad, const Policy& good, const History& h_m, const LearningProcess& rho,
                               const Prior& prior, ImageScope scope = ImageScope::all);

struct SacrificeFinding {
  History history;
  Policy optimal;
  Policy better;
};

/// Search every possible h_m and every deterministic alternative for a
/// certain sacrifice by pi^rho. Uses the prior-restricted image.
std::optional<SacrificeFinding> find_sacrifice(const LearningProcess& rho, const Prior& prior,
                                               std::size_t cap = kDefaultEnumerationCap);

}  // namespace rewardrig
