#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rewardrig/histories.hpp"

namespace rewardrig {

/// Return function on complete histories, stored densely by complete index.
/// Identity is by table content; the label is only for display.
class RewardFunction {
 public:
  RewardFunction(SpecPtr spec, std::vector<Rational> values, std::string label = {});
  static RewardFunction constant(SpecPtr spec, const Rational& value, std::string label = {});
  static RewardFunction zero(SpecPtr spec) { return constant(std::move(spec), 0); }

  const HorizonSpec& spec() const { return *spec_; }
  const SpecPtr& spec_ptr() const { return spec_; }
  const std::string& label() const { return label_; }
  RewardFunction relabeled(std::string label) const;

  const Rational& at(std::size_t complete_index) const { return values_[complete_index]; }
  const Rational& operator()(const History& h) const { return values_[spec_->complete_index(h)]; }
  const std::vector<Rational>& values() const { return values_; }

  bool same_values(const RewardFunction& other) const { return values_ == other.values_; }

  RewardFunction& operator+=(const RewardFunction& other);
  RewardFunction& operator-=(const RewardFunction& other);
  RewardFunction& operator*=(const Rational& scale);
  friend RewardFunction operator+(RewardFunction a, const RewardFunction& b) { return a += b; }
  friend RewardFunction operator-(RewardFunction a, const RewardFunction& b) { return a -= b; }
  friend RewardFunction operator*(const Rational& s, RewardFunction a) { return a *= s; }

 private:
  SpecPtr spec_;
  std::vector<Rational> values_;
  std::string label_;
};

/// Pointwise sum of coefficient * reward. Coefficients need not sum to one
/// (internal linear algebra uses arbitrary sums). Throws DomainError on an
/// empty list or mismatched specs.
RewardFunction affine_combine(std::span<const std::pair<Rational, RewardFunction>> terms);

struct WeightedReward {
  std::size_t reward = 0;  // index into the owning pool
  Rational weight;
};

/// Per-complete-history distribution over a pool of reward functions.
/// Construction merges pool members with identical tables and drops zero
/// weights, so pool indices are stable identifiers of distinct functions.
class LearningProcess {
 public:
  LearningProcess(std::vector<RewardFunction> pool, std::vector<std::vector<WeightedReward>> dist);
  static LearningProcess point_mass(const RewardFunction& reward);

  const HorizonSpec& spec() const { return pool_.front().spec(); }
  const SpecPtr& spec_ptr() const { return pool_.front().spec_ptr(); }
  const std::vector<RewardFunction>& pool() const { return pool_; }
  const std::vector<WeightedReward>& distribution(std::size_t complete_index) const {
    return dist_.at(complete_index);
  }
  const std::vector<WeightedReward>& distribution(const History& h) const {
    return dist_.at(spec().complete_index(h));
  }
  /// P(R | h_n, rho) for a pool member.
  Rational probability(std::size_t complete_index, std::size_t reward) const;

 private:
  std::vector<RewardFunction> pool_;
  std::vector<std::vector<WeightedReward>> dist_;
};

/// e_rho(h_n): the pool mixed by P(R | h_n, rho).
RewardFunction expectation(const LearningProcess& rho, const History& h_n);
RewardFunction expectation_at(const LearningProcess& rho, std::size_t complete_index);

/// R^rho(h_n) = sum_R P(R | h_n, rho) R(h_n).
RewardFunction effective_reward(const LearningProcess& rho);

/// e_rho extended to every possible history under a fixed policy.
class ExtendedExpectation {
 public:
  ExtendedExpectation(SpecPtr spec, std::vector<std::optional<RewardFunction>> values, std::string policy_name);

  /// Throws UndefinedPosterior at impossible histories.
  const RewardFunction& at(std::size_t node) const;
  const RewardFunction& at(const History& h) const { return at(spec_->node_id(h)); }
  bool defined(std::size_t node) const { return values_.at(node).has_value(); }
  const std::string& policy_name() const { return policy_name_; }
  const HorizonSpec& spec() const { return *spec_; }

 private:
  SpecPtr spec_;
  std::vector<std::optional<RewardFunction>> values_;
  std::string policy_name_;
};

ExtendedExpectation extend_expectation(const LearningProcess& rho, const Prior& prior, const Policy& policy);
ExtendedExpectation extend_expectation(const LearningProcess& rho, const PredictiveModel& model, const Policy& policy);

/// P(h_n | h_m, pi, xi) for h_m a prefix of h_n. Throws if h_m is impossible.
Rational conditional_history_prob(const History& h_n, const History& h_m, const Policy& policy, const Prior& prior);

/// V(h_m, rho, pi, xi) by backward induction on R^rho.
Rational value(const History& h_m, const LearningProcess& rho, const Policy& policy, const Prior& prior);
/// V(h_m, rho, pi, xi) as the literal double sum over complete histories and
/// the pool. Independent of `value`; used to cross-check it.
Rational value_by_definition(const History& h_m, const LearningProcess& rho, const Policy& policy,
                             const Prior& prior);

/// Deterministic pi^rho by backward induction over the possible-history
/// tree; ties go to the lowest action index, impossible nodes take action 0.
Policy optimal_policy(const LearningProcess& rho, const Prior& prior);
/// Optimal V*(h) at every possible node (nullopt elsewhere).
std::vector<std::optional<Rational>> optimal_values(const LearningProcess& rho, const PredictiveModel& model);

/// im(rho), or im(rho, xi) when a prior is given. Pool order.
std::vector<RewardFunction> image(const LearningProcess& rho);
std::vector<RewardFunction> image(const LearningProcess& rho, const Prior& prior);
std::vector<std::size_t> image_indices(const LearningProcess& rho, const PredictiveModel* model = nullptr);

}  // namespace rewardrig
