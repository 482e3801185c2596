#include "rewardrig/reward.hpp"

namespace rewardrig {

RewardFunction::RewardFunction(SpecPtr spec, std::vector<Rational> values, std::string label)
    : spec_(std::move(spec)), values_(std::move(values)), label_(std::move(label)) {
  if (values_.size() != spec_->complete_count()) {
    throw DomainError("reward function '" + label_ + "' must be defined on all " +
                      std::to_string(spec_->complete_count()) + " complete histories");
  }
}

RewardFunction RewardFunction::constant(SpecPtr spec, const Rational& value, std::string label) {
  std::vector<Rational> values(spec->complete_count(), value);
  return RewardFunction(std::move(spec), std::move(values), std::move(label));
}

RewardFunction RewardFunction::relabeled(std::string label) const {
  RewardFunction copy = *this;
  copy.label_ = std::move(label);
  return copy;
}

RewardFunction& RewardFunction::operator+=(const RewardFunction& other) {
  require_same_spec(*spec_, other.spec(), "reward addition");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

RewardFunction& RewardFunction::operator-=(const RewardFunction& other) {
  require_same_spec(*spec_, other.spec(), "reward subtraction");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

RewardFunction& RewardFunction::operator*=(const Rational& scale) {
  for (auto& v : values_) v *= scale;
  return *this;
}

RewardFunction affine_combine(std::span<const std::pair<Rational, RewardFunction>> terms) {
  if (terms.empty()) throw DomainError("affine_combine needs at least one term");
  RewardFunction out = RewardFunction::zero(terms.front().second.spec_ptr());
  std::vector<Rational> values(out.values().size());
  for (const auto& [coeff, reward] : terms) {
    require_same_spec(out.spec(), reward.spec(), "affine_combine");
    if (coeff == 0) continue;
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += coeff * reward.at(i);
  }
  return RewardFunction(out.spec_ptr(), std::move(values));
}

// ---------------------------------------------------------------------------

LearningProcess::LearningProcess(std::vector<RewardFunction> pool, std::vector<std::vector<WeightedReward>> dist) {
  if (pool.empty()) throw DomainError("learning process needs a non-empty reward pool");
  const auto& spec = pool.front().spec();
  if (dist.size() != spec.complete_count()) {
    throw DomainError("learning process must give a distribution at every complete history");
  }
  // Merge members with identical tables.
  std::vector<std::size_t> remap(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    require_same_spec(pool[i].spec(), spec, "learning process pool");
    std::size_t found = pool_.size();
    for (std::size_t j = 0; j < pool_.size(); ++j) {
      if (pool_[j].same_values(pool[i])) {
        found = j;
        break;
      }
    }
    if (found == pool_.size()) pool_.push_back(std::move(pool[i]));
    remap[i] = found;
  }
  dist_.resize(dist.size());
  for (std::size_t h = 0; h < dist.size(); ++h) {
    Rational total = 0;
    std::vector<Rational> merged(pool_.size());
    std::vector<bool> seen(pool_.size(), false);
    for (const auto& entry : dist[h]) {
      if (entry.reward >= remap.size()) throw DomainError("learning process references a reward outside its pool");
      if (entry.weight < 0) {
        throw DomainError("negative reward probability at '" + spec.format(spec.complete_history(h)) + "'");
      }
      merged[remap[entry.reward]] += entry.weight;
      seen[remap[entry.reward]] = true;
      total += entry.weight;
    }
    if (total != 1) {
      throw DomainError("reward distribution at '" + spec.format(spec.complete_history(h)) + "' sums to " +
                        format_rational(total));
    }
    for (std::size_t r = 0; r < pool_.size(); ++r) {
      if (seen[r] && merged[r] != 0) dist_[h].push_back({r, merged[r]});
    }
  }
}

LearningProcess LearningProcess::point_mass(const RewardFunction& reward) {
  std::vector<std::vector<WeightedReward>> dist(reward.spec().complete_count(), {{0, Rational(1)}});
  return LearningProcess({reward}, std::move(dist));
}

Rational LearningProcess::probability(std::size_t complete_index, std::size_t reward) const {
  for (const auto& entry : dist_.at(complete_index)) {
    if (entry.reward == reward) return entry.weight;
  }
  return 0;
}

RewardFunction expectation_at(const LearningProcess& rho, std::size_t complete_index) {
  std::vector<Rational> values(rho.spec().complete_count());
  for (const auto& entry : rho.distribution(complete_index)) {
    const auto& reward = rho.pool()[entry.reward];
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += entry.weight * reward.at(i);
  }
  return RewardFunction(rho.spec_ptr(), std::move(values));
}

RewardFunction expectation(const LearningProcess& rho, const History& h_n) {
  return expectation_at(rho, rho.spec().complete_index(h_n));
}

RewardFunction effective_reward(const LearningProcess& rho) {
  std::vector<Rational> values(rho.spec().complete_count());
  for (std::size_t h = 0; h < values.size(); ++h) {
    for (const auto& entry : rho.distribution(h)) values[h] += entry.weight * rho.pool()[entry.reward].at(h);
  }
  return RewardFunction(rho.spec_ptr(), std::move(values), "R^rho");
}

// ---------------------------------------------------------------------------

ExtendedExpectation::ExtendedExpectation(SpecPtr spec, std::vector<std::optional<RewardFunction>> values,
                                         std::string policy_name)
    : spec_(std::move(spec)), values_(std::move(values)), policy_name_(std::move(policy_name)) {}

const RewardFunction& ExtendedExpectation::at(std::size_t node) const {
  const auto& v = values_.at(node);
  if (!v) throw UndefinedPosterior("expectation undefined at impossible history '" + spec_->format(spec_->node(node)) + "'");
  return *v;
}

ExtendedExpectation extend_expectation(const LearningProcess& rho, const PredictiveModel& model, const Policy& policy) {
  const auto& spec = rho.spec();
  require_same_spec(spec, model.spec(), "extend_expectation");
  require_same_spec(spec, policy.spec(), "extend_expectation");
  std::vector<std::optional<RewardFunction>> values(spec.node_count());
  for (std::size_t node = spec.node_count(); node-- > 0;) {
    if (!model.possible(node)) continue;
    if (node >= spec.interior_count()) {
      values[node] = expectation_at(rho, node - spec.interior_count());
      continue;
    }
    std::vector<Rational> acc(spec.complete_count());
    for (int a = 0; a < spec.num_actions(); ++a) {
      const auto& pa = policy.prob(node, a);
      if (pa == 0) continue;
      for (int o = 0; o < spec.num_observations(); ++o) {
        const std::size_t child = spec.child_id(node, a, o);
        if (!model.possible(child)) continue;
        const Rational w = pa * model.predictive(node, a, o);
        const auto& v = values[child]->values();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * v[i];
      }
    }
    values[node] = RewardFunction(rho.spec_ptr(), std::move(acc));
  }
  return ExtendedExpectation(rho.spec_ptr(), std::move(values), policy.name());
}

ExtendedExpectation extend_expectation(const LearningProcess& rho, const Prior& prior, const Policy& policy) {
  return extend_expectation(rho, PredictiveModel(prior), policy);
}

Rational conditional_history_prob(const History& h_n, const History& h_m, const Policy& policy, const Prior& prior) {
  const Rational evidence = prior_history_prob(h_m, prior);
  if (evidence == 0) throw UndefinedPosterior("conditioning on impossible history '" + prior.spec().format(h_m) + "'");
  if (!h_m.is_prefix_of(h_n)) return 0;
  Rational p = prior_history_prob(h_n, prior) / evidence;
  for (std::size_t i = h_m.length(); i < h_n.length() && p != 0; ++i) p *= policy.prob(h_n.prefix(i), h_n[i].action);
  return p;
}

namespace {

Rational value_from(std::size_t node, const RewardFunction& effective, const Policy& policy,
                    const PredictiveModel& model) {
  const auto& spec = model.spec();
  if (node >= spec.interior_count()) return effective.at(node - spec.interior_count());
  Rational total = 0;
  for (int a = 0; a < spec.num_actions(); ++a) {
    const auto& pa = policy.prob(node, a);
    if (pa == 0) continue;
    for (int o = 0; o < spec.num_observations(); ++o) {
      const std::size_t child = spec.child_id(node, a, o);
      if (!model.possible(child)) continue;
      total += pa * model.predictive(node, a, o) * value_from(child, effective, policy, model);
    }
  }
  return total;
}

}  // namespace

Rational value(const History& h_m, const LearningProcess& rho, const Policy& policy, const Prior& prior) {
  PredictiveModel model(prior);
  const std::size_t node = rho.spec().node_id(h_m);
  if (!model.possible(node)) throw UndefinedPosterior("value undefined at impossible history '" + rho.spec().format(h_m) + "'");
  return value_from(node, effective_reward(rho), policy, model);
}

Rational value_by_definition(const History& h_m, const LearningProcess& rho, const Policy& policy,
                             const Prior& prior) {
  const auto& spec = rho.spec();
  Rational total = 0;
  for (std::size_t h = 0; h < spec.complete_count(); ++h) {
    const auto& h_n = spec.complete_history(h);
    const Rational p = conditional_history_prob(h_n, h_m, policy, prior);
    if (p == 0) continue;
    Rational inner = 0;
    for (std::size_t r = 0; r < rho.pool().size(); ++r) inner += rho.probability(h, r) * rho.pool()[r](h_n);
    total += p * inner;
  }
  return total;
}

std::vector<std::optional<Rational>> optimal_values(const LearningProcess& rho, const PredictiveModel& model) {
  const auto& spec = rho.spec();
  const RewardFunction effective = effective_reward(rho);
  std::vector<std::optional<Rational>> values(spec.node_count());
  for (std::size_t node = spec.node_count(); node-- > 0;) {
    if (!model.possible(node)) continue;
    if (node >= spec.interior_count()) {
      values[node] = effective.at(node - spec.interior_count());
      continue;
    }
    std::optional<Rational> best;
    for (int a = 0; a < spec.num_actions(); ++a) {
      Rational q = 0;
      for (int o = 0; o < spec.num_observations(); ++o) {
        const std::size_t child = spec.child_id(node, a, o);
        if (model.possible(child)) q += model.predictive(node, a, o) * *values[child];
      }
      if (!best || q > *best) best = q;
    }
    values[node] = best;
  }
  return values;
}

Policy optimal_policy(const LearningProcess& rho, const Prior& prior) {
  const auto& spec = rho.spec();
  PredictiveModel model(prior);
  const auto values = optimal_values(rho, model);
  std::vector<int> choice(spec.interior_count(), 0);
  for (std::size_t node = 0; node < spec.interior_count(); ++node) {
    if (!model.possible(node)) continue;
    std::optional<Rational> best;
    for (int a = 0; a < spec.num_actions(); ++a) {
      Rational q = 0;
      for (int o = 0; o < spec.num_observations(); ++o) {
        const std::size_t child = spec.child_id(node, a, o);
        if (model.possible(child)) q += model.predictive(node, a, o) * *values[child];
      }
      if (!best || q > *best) {
        best = q;
        choice[node] = a;
      }
    }
  }
  return Policy::deterministic(rho.spec_ptr(), std::move(choice), "pi^rho");
}

std::vector<std::size_t> image_indices(const LearningProcess& rho, const PredictiveModel* model) {
  const auto& spec = rho.spec();
  std::vector<bool> used(rho.pool().size(), false);
  for (std::size_t h = 0; h < spec.complete_count(); ++h) {
    if (model && !model->possible(spec.complete_node_id(h))) continue;
    for (const auto& entry : rho.distribution(h)) used[entry.reward] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < used.size(); ++r) {
    if (used[r]) out.push_back(r);
  }
  return out;
}

std::vector<RewardFunction> image(const LearningProcess& rho) {
  std::vector<RewardFunction> out;
  for (auto r : image_indices(rho)) out.push_back(rho.pool()[r]);
  return out;
}

std::vector<RewardFunction> image(const LearningProcess& rho, const Prior& prior) {
  require_same_spec(rho.spec(), prior.spec(), "image");
  PredictiveModel model(prior);
  std::vector<RewardFunction> out;
  for (auto r : image_indices(rho, &model)) out.push_back(rho.pool()[r]);
  return out;
}

}  // namespace rewardrig
