#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rewardrig/errors.hpp"
#include "rewardrig/rational.hpp"

namespace rewardrig {

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

struct Step {
  int action = 0;
  int observation = 0;
  auto operator<=>(const Step&) const = default;
};

/// An action/observation sequence a1 o1 ... am om. Symbols are indices into
/// the alphabets of a HorizonSpec; a History on its own carries no spec.
class History {
 public:
  History() = default;
  explicit History(std::vector<Step> steps) : steps_(std::move(steps)) {}

  std::size_t length() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }
  const Step& operator[](std::size_t i) const { return steps_[i]; }
  std::span<const Step> steps() const { return steps_; }

  History prefix(std::size_t k) const;
  History extended(int action, int observation) const;
  bool is_prefix_of(const History& other) const;
  std::vector<int> actions() const;

  auto operator<=>(const History&) const = default;

 private:
  std::vector<Step> steps_;
};

/// Alphabets and episode length. Every history of length 0..n is interned
/// at construction and addressed by a dense node id: ids are laid out level
/// by level, and within a level in mixed radix with digit a*|O|+o.
class HorizonSpec {
 public:
  HorizonSpec(std::vector<std::string> actions, std::vector<std::string> observations, int horizon,
              std::size_t node_cap = kDefaultEnumerationCap);

  int num_actions() const { return static_cast<int>(actions_.size()); }
  int num_observations() const { return static_cast<int>(observations_.size()); }
  int horizon() const { return horizon_; }
  const std::vector<std::string>& actions() const { return actions_; }
  const std::vector<std::string>& observations() const { return observations_; }
  const std::string& action_name(int a) const { return actions_.at(a); }
  const std::string& observation_name(int o) const { return observations_.at(o); }
  int action_index(std::string_view name) const;
  int observation_index(std::string_view name) const;

  std::size_t level_size(int m) const { return level_sizes_.at(m); }
  std::size_t level_offset(int m) const { return level_offsets_.at(m); }
  std::size_t node_count() const { return nodes_.size(); }
  /// Histories of length < n (the decision nodes).
  std::size_t interior_count() const { return level_offsets_[horizon_]; }
  std::size_t complete_count() const { return level_sizes_[horizon_]; }

  std::size_t node_id(const History& h) const;
  std::size_t child_id(std::size_t node, int action, int observation) const;
  int node_length(std::size_t node) const;
  const History& node(std::size_t id) const { return nodes_.at(id); }

  std::size_t complete_index(const History& h) const;
  std::size_t complete_node_id(std::size_t complete_index) const { return interior_count() + complete_index; }
  const History& complete_history(std::size_t index) const { return nodes_.at(interior_count() + index); }
  /// Range of complete-history indices extending the given node.
  std::pair<std::size_t, std::size_t> completion_range(std::size_t node) const;

  /// Throws DomainError if a symbol is outside its alphabet or h is too long.
  void validate(const History& h) const;

  /// Space separated symbols, e.g. "M B F D"; the empty history is "".
  std::string format(const History& h) const;
  History parse_history(std::string_view text) const;

  /// Action sequences of length 1..n, ids ordered by length then mixed radix.
  std::size_t action_sequence_count() const { return action_seq_offsets_.back(); }
  std::size_t action_sequence_id(std::span<const int> actions) const;
  std::vector<int> action_sequence(std::size_t id) const;

  bool operator==(const HorizonSpec& other) const {
    return horizon_ == other.horizon_ && actions_ == other.actions_ && observations_ == other.observations_;
  }

 private:
  std::vector<std::string> actions_;
  std::vector<std::string> observations_;
  int horizon_;
  std::vector<std::size_t> level_sizes_;
  std::vector<std::size_t> level_offsets_;
  std::vector<std::size_t> action_seq_offsets_;
  std::vector<History> nodes_;
};

using SpecPtr = std::shared_ptr<const HorizonSpec>;

SpecPtr make_spec(std::vector<std::string> actions, std::vector<std::string> observations, int horizon);

/// Throws DomainError naming `what` if the two specs differ.
void require_same_spec(const HorizonSpec& a, const HorizonSpec& b, std::string_view what);

/// Stochastic policy: for each decision node a distribution over actions.
class Policy {
 public:
  static Policy deterministic(SpecPtr spec, std::vector<int> action_per_node, std::string name = {});
  static Policy constant(SpecPtr spec, int action, std::string name = {});
  /// Takes actions[m] at every history of length m (last entry repeats).
  static Policy by_step(SpecPtr spec, std::vector<int> actions, std::string name = {});
  static Policy from_function(SpecPtr spec, const std::function<std::vector<Rational>(const History&)>& choose,
                              std::string name = {});

  const HorizonSpec& spec() const { return *spec_; }
  const SpecPtr& spec_ptr() const { return spec_; }
  const std::string& name() const { return name_; }

  const Rational& prob(std::size_t node, int action) const { return choice_[node][action]; }
  Rational prob(const History& h, int action) const;
  std::optional<int> deterministic_action(std::size_t node) const;
  bool is_deterministic() const;
  Policy with_action_at(std::size_t node, int action) const;

 private:
  Policy(SpecPtr spec, std::vector<std::vector<Rational>> choice, std::string name);

  SpecPtr spec_;
  std::vector<std::vector<Rational>> choice_;
  std::string name_;
};

/// Observation kernel P(o | h a, mu), stored densely per (decision node, action).
class Environment {
 public:
  using Kernel = std::function<std::vector<Rational>(const History&, int action)>;
  using ObservationRule = std::function<int(std::span<const int> actions)>;

  static Environment from_kernel(SpecPtr spec, std::string name, const Kernel& kernel);
  /// Deterministic environment whose l-th observation depends only on the
  /// first l actions; prefix consistency holds by construction.
  static Environment deterministic(SpecPtr spec, std::string name, const ObservationRule& rule);
  /// Observation per action-sequence id (see HorizonSpec::action_sequence_id).
  static Environment from_action_table(SpecPtr spec, std::string name, std::vector<int> table);

  const HorizonSpec& spec() const { return *spec_; }
  const SpecPtr& spec_ptr() const { return spec_; }
  const std::string& name() const { return name_; }
  bool is_deterministic() const { return deterministic_; }
  /// Present for environments built from action sequences.
  const std::optional<std::vector<int>>& action_table() const { return action_table_; }

  const Rational& prob(std::size_t node, int action, int observation) const {
    return kernel_[(node * spec_->num_actions() + action) * spec_->num_observations() + observation];
  }
  Rational prob(const History& h, int action, int observation) const;

 private:
  Environment(SpecPtr spec, std::string name, std::vector<Rational> kernel);

  SpecPtr spec_;
  std::string name_;
  std::vector<Rational> kernel_;
  bool deterministic_ = false;
  std::optional<std::vector<int>> action_table_;
};

/// Rational mixture over a finite environment set sharing one spec.
class Prior {
 public:
  Prior(std::vector<Environment> environments, std::vector<Rational> weights);

  const HorizonSpec& spec() const { return *environments_.front().spec_ptr(); }
  const SpecPtr& spec_ptr() const { return environments_.front().spec_ptr(); }
  std::size_t size() const { return environments_.size(); }
  const Environment& environment(std::size_t i) const { return environments_.at(i); }
  const std::vector<Environment>& environments() const { return environments_; }
  const Rational& weight(std::size_t i) const { return weights_.at(i); }
  const std::vector<Rational>& weights() const { return weights_; }
  std::size_t index_of(std::string_view name) const;

 private:
  std::vector<Environment> environments_;
  std::vector<Rational> weights_;
};

Rational history_prob(const History& h, const Policy& policy, const Environment& env);
/// P(h | mu) with the point-mass policy a(h).
Rational history_prob_actions(const History& h, const Environment& env);
Rational prior_history_prob(const History& h, const Prior& prior);
/// Throws UndefinedPosterior when P(h | xi) = 0.
Rational posterior_env(std::size_t env, const History& h, const Prior& prior);
/// P(o | h a, xi). Throws UndefinedPosterior when P(h | xi) = 0.
Rational predictive(int observation, const History& h, int action, const Prior& prior);

mpz_class deterministic_policy_count(const HorizonSpec& spec);
mpz_class deterministic_environment_count(const HorizonSpec& spec);
std::vector<Policy> enumerate_deterministic_policies(const SpecPtr& spec, std::size_t cap = kDefaultEnumerationCap);
std::vector<Environment> enumerate_deterministic_environments(const SpecPtr& spec,
                                                              std::size_t cap = kDefaultEnumerationCap);

/// Cached P(h | mu) for every environment and node, and P(h | xi). All the
/// backward-induction algorithms run on top of this.
class PredictiveModel {
 public:
  explicit PredictiveModel(Prior prior);

  const Prior& prior() const { return prior_; }
  const HorizonSpec& spec() const { return prior_.spec(); }
  const Rational& prob(std::size_t node) const { return mixture_[node]; }
  bool possible(std::size_t node) const { return mixture_[node] > 0; }
  const Rational& env_prob(std::size_t env, std::size_t node) const { return per_env_[env][node]; }
  /// P(o | h a, xi) for a possible node; throws UndefinedPosterior otherwise.
  Rational predictive(std::size_t node, int action, int observation) const;
  Rational posterior(std::size_t env, std::size_t node) const;

 private:
  void require_possible(std::size_t node) const;

  Prior prior_;
  std::vector<std::vector<Rational>> per_env_;
  std::vector<Rational> mixture_;
};

}  // namespace rewardrig
