#include "rewardrig/classify.hpp"

#include <sstream>

#include "rewardrig/exact_lp.hpp"

namespace rewardrig {
namespace {

// One-step expectation sum_o P(o | h a, xi) E(h a o) over possible children.
RewardFunction one_step(std::size_t node, int action, const PredictiveModel& model,
                        const std::vector<std::optional<RewardFunction>>& values, const SpecPtr& spec) {
  std::vector<Rational> acc(spec->complete_count());
  for (int o = 0; o < spec->num_observations(); ++o) {
    const std::size_t child = spec->child_id(node, action, o);
    if (!model.possible(child)) continue;
    const Rational w = model.predictive(node, action, o);
    const auto& v = values[child]->values();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * v[i];
  }
  return RewardFunction(spec, std::move(acc));
}

void collect_completions(std::size_t node, const Policy& policy, const PredictiveModel& model,
                         std::vector<std::size_t>& out) {
  const auto& spec = model.spec();
  if (node >= spec.interior_count()) {
    out.push_back(node - spec.interior_count());
    return;
  }
  for (int a = 0; a < spec.num_actions(); ++a) {
    if (policy.prob(node, a) == 0) continue;
    for (int o = 0; o < spec.num_observations(); ++o) {
      const std::size_t child = spec.child_id(node, a, o);
      if (model.possible(child)) collect_completions(child, policy, model, out);
    }
  }
}

}  // namespace

std::string describe_witness(const RiggingWitness& witness, const HorizonSpec& spec) {
  return "at '" + spec.format(witness.history) + "': actions " + spec.action_name(witness.action) + " and " +
         spec.action_name(witness.alternative) + " lead to different expected reward functions";
}

UnrigVerdict check_unriggable(const LearningProcess& rho, const PredictiveModel& model) {
  const auto& spec = rho.spec();
  require_same_spec(spec, model.spec(), "check_unriggable");
  std::vector<std::optional<RewardFunction>> values(spec.node_count());
  for (std::size_t h = 0; h < spec.complete_count(); ++h) {
    if (model.possible(spec.complete_node_id(h))) values[spec.complete_node_id(h)] = expectation_at(rho, h);
  }
  for (int m = spec.horizon() - 1; m >= 0; --m) {
    const std::size_t begin = spec.level_offset(m);
    const std::size_t end = begin + spec.level_size(m);
    for (std::size_t node = begin; node < end; ++node) {
      if (!model.possible(node)) continue;
      RewardFunction first = one_step(node, 0, model, values, rho.spec_ptr());
      for (int a = 1; a < spec.num_actions(); ++a) {
        RewardFunction other = one_step(node, a, model, values, rho.spec_ptr());
        if (!other.same_values(first)) {
          UnrigVerdict verdict;
          verdict.witness = RiggingWitness{spec.node(node), 0, a, std::move(first), std::move(other)};
          return verdict;
        }
      }
      values[node] = std::move(first);
    }
  }
  UnrigVerdict verdict;
  verdict.unriggable = true;
  verdict.extended.emplace(rho.spec_ptr(), std::move(values), "any");
  return verdict;
}

UnrigVerdict check_unriggable(const LearningProcess& rho, const Prior& prior) {
  return check_unriggable(rho, PredictiveModel(prior));
}

UnrigVerdict check_unriggable_oracle(const LearningProcess& rho, const Prior& prior, std::size_t cap) {
  const auto& spec = rho.spec();
  require_same_spec(spec, prior.spec(), "check_unriggable_oracle");
  const auto policies = enumerate_deterministic_policies(rho.spec_ptr(), cap);

  // Probabilities straight from the defining sums, not the cached model.
  std::vector<Rational> node_prob(spec.node_count());
  for (std::size_t node = 0; node < spec.node_count(); ++node) node_prob[node] = prior_history_prob(spec.node(node), prior);
  std::vector<RewardFunction> e_rho;
  for (std::size_t h = 0; h < spec.complete_count(); ++h) e_rho.push_back(expectation_at(rho, h));

  std::vector<std::optional<RewardFunction>> extended(spec.node_count());
  for (std::size_t node = 0; node < spec.node_count(); ++node) {
    if (node_prob[node] == 0) continue;
    const History& h_m = spec.node(node);
    const auto [lo, hi] = spec.completion_range(node);
    std::optional<RewardFunction> reference;
    int reference_action = 0;
    for (const auto& pi : policies) {
      std::vector<Rational> acc(spec.complete_count());
      for (std::size_t h = lo; h < hi; ++h) {
        const History& h_n = spec.complete_history(h);
        Rational p = node_prob[spec.complete_node_id(h)] / node_prob[node];
        for (std::size_t i = h_m.length(); i < h_n.length() && p != 0; ++i) {
          p *= pi.prob(spec.node_id(h_n.prefix(i)), h_n[i].action);
        }
        if (p == 0) continue;
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p * e_rho[h].at(i);
      }
      RewardFunction x(rho.spec_ptr(), std::move(acc));
      const int action = node < spec.interior_count() ? *pi.deterministic_action(node) : 0;
      if (!reference) {
        reference = std::move(x);
        reference_action = action;
      } else if (!reference->same_values(x)) {
        UnrigVerdict verdict;
        verdict.witness = RiggingWitness{h_m, reference_action, action, std::move(*reference), std::move(x)};
        return verdict;
      }
    }
    extended[node] = std::move(reference);
  }
  UnrigVerdict verdict;
  verdict.unriggable = true;
  verdict.extended.emplace(rho.spec_ptr(), std::move(extended), "any");
  return verdict;
}

// ---------------------------------------------------------------------------

EnvConditional::EnvConditional(std::vector<std::string> environment_names, std::vector<RewardFunction> pool,
                               std::vector<std::vector<WeightedReward>> dist)
    : names_(std::move(environment_names)), pool_(std::move(pool)), dist_(std::move(dist)) {
  if (names_.size() != dist_.size()) throw DomainError("eta needs one distribution per environment");
  if (pool_.empty()) throw DomainError("eta needs a non-empty reward pool");
  for (std::size_t e = 0; e < dist_.size(); ++e) {
    Rational total = 0;
    for (const auto& entry : dist_[e]) {
      if (entry.reward >= pool_.size()) throw DomainError("eta references a reward outside its pool");
      if (entry.weight < 0) throw DomainError("eta has a negative weight at '" + names_[e] + "'");
      total += entry.weight;
    }
    if (total != 1) throw DomainError("eta at '" + names_[e] + "' sums to " + format_rational(total));
  }
}

Rational EnvConditional::probability(std::size_t env, std::size_t reward) const {
  Rational total = 0;
  for (const auto& entry : dist_.at(env)) {
    if (entry.reward == reward) total += entry.weight;
  }
  return total;
}

RewardFunction EnvConditional::expectation(std::size_t env) const {
  std::vector<Rational> acc(pool_.front().values().size());
  for (const auto& entry : dist_.at(env)) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += entry.weight * pool_[entry.reward].at(i);
  }
  return RewardFunction(pool_.front().spec_ptr(), std::move(acc));
}

LearningProcess induced_process(const EnvConditional& eta, const Prior& prior) {
  if (eta.size() != prior.size()) throw DomainError("eta and prior cover different environment sets");
  const auto& spec = prior.spec();
  require_same_spec(spec, eta.pool().front().spec(), "induced_process");
  PredictiveModel model(prior);
  std::vector<std::vector<WeightedReward>> dist(spec.complete_count());
  for (std::size_t h = 0; h < spec.complete_count(); ++h) {
    const std::size_t node = spec.complete_node_id(h);
    std::vector<Rational> weights(eta.pool().size());
    for (std::size_t e = 0; e < prior.size(); ++e) {
      const Rational w = model.possible(node) ? model.posterior(e, node) : prior.weight(e);
      if (w == 0) continue;
      for (const auto& entry : eta.distribution(e)) weights[entry.reward] += w * entry.weight;
    }
    for (std::size_t r = 0; r < weights.size(); ++r) {
      if (weights[r] != 0) dist[h].push_back({r, weights[r]});
    }
  }
  return LearningProcess(eta.pool(), std::move(dist));
}

InfluenceVerdict check_uninfluenceable(const LearningProcess& rho, const Prior& prior) {
  const auto& spec = rho.spec();
  require_same_spec(spec, prior.spec(), "check_uninfluenceable");
  PredictiveModel model(prior);
  const auto image = image_indices(rho);

  std::vector<std::size_t> envs;
  for (std::size_t e = 0; e < prior.size(); ++e) {
    if (prior.weight(e) > 0) envs.push_back(e);
  }
  const std::size_t k = image.size();
  const auto var = [k](std::size_t env_slot, std::size_t image_slot) { return env_slot * k + image_slot; };

  lp::Matrix a;
  std::vector<Rational> b;
  std::vector<std::string> row_names;
  for (std::size_t s = 0; s < envs.size(); ++s) {
    std::vector<Rational> row(envs.size() * k);
    for (std::size_t r = 0; r < k; ++r) row[var(s, r)] = 1;
    a.push_back(std::move(row));
    b.push_back(1);
    row_names.push_back("sum_R P(R | eta, " + prior.environment(envs[s]).name() + ") = 1");
  }
  for (std::size_t h = 0; h < spec.complete_count(); ++h) {
    const std::size_t node = spec.complete_node_id(h);
    if (!model.possible(node)) continue;
    for (std::size_t r = 0; r < k; ++r) {
      std::vector<Rational> row(envs.size() * k);
      for (std::size_t s = 0; s < envs.size(); ++s) row[var(s, r)] = model.posterior(envs[s], node);
      a.push_back(std::move(row));
      b.push_back(rho.probability(h, image[r]));
      const auto& label = rho.pool()[image[r]].label();
      row_names.push_back("P(" + (label.empty() ? "R#" + std::to_string(image[r]) : label) + " | " +
                          spec.format(spec.complete_history(h)) + ") = " + format_rational(b.back()));
    }
  }

  const auto solved = lp::find_feasible_point(a, b);
  InfluenceVerdict verdict;
  if (!solved.feasible) {
    std::ostringstream note;
    note << "no eta exists; these constraints are jointly infeasible (Farkas multipliers):";
    for (std::size_t i = 0; i < solved.farkas.size(); ++i) {
      if (solved.farkas[i] != 0) note << "\n  [" << format_rational(solved.farkas[i]) << "] " << row_names[i];
    }
    verdict.infeasibility_note = note.str();
    return verdict;
  }

  std::vector<RewardFunction> pool;
  for (auto r : image) pool.push_back(rho.pool()[r]);
  std::vector<std::vector<WeightedReward>> dist(prior.size());
  std::vector<std::string> names;
  for (const auto& env : prior.environments()) names.push_back(env.name());
  for (std::size_t s = 0; s < envs.size(); ++s) {
    for (std::size_t r = 0; r < k; ++r) {
      const auto& q = solved.solution[var(s, r)];
      if (q != 0) dist[envs[s]].push_back({r, q});
    }
  }
  // Zero-weight environments never enter the inference equation; give them
  // the first image element.
  for (std::size_t e = 0; e < prior.size(); ++e) {
    if (prior.weight(e) == 0) dist[e].push_back({0, Rational(1)});
  }
  verdict.uninfluenceable = true;
  verdict.eta.emplace(std::move(names), std::move(pool), std::move(dist));
  return verdict;
}

// ---------------------------------------------------------------------------

namespace {

SacrificeCheck sacrifice_at(const Policy& bad, const Policy& good, std::size_t node, const LearningProcess& rho,
                            const PredictiveModel& model, const std::vector<std::size_t>& image) {
  const auto& spec = rho.spec();
  std::vector<std::size_t> bad_completions, good_completions;
  collect_completions(node, bad, model, bad_completions);
  collect_completions(node, good, model, good_completions);

  SacrificeCheck check;
  if (bad_completions.empty() || good_completions.empty()) return check;
  for (auto r : image) {
    const auto& reward = rho.pool()[r];
    for (auto hb : bad_completions) {
      for (auto hg : good_completions) {
        if (!(reward.at(hg) > reward.at(hb))) {
          check.counter_reward = reward;
          check.counter_bad = spec.complete_history(hb);
          check.counter_good = spec.complete_history(hg);
          return check;
        }
      }
    }
  }
  check.sacrifices = true;
  return check;
}

}  // namespace

SacrificeCheck check_sacrifice(const Policy& bad, const Policy& good, const History& h_m, const LearningProcess& rho,
                               const Prior& prior, ImageScope scope) {
  const auto& spec = rho.spec();
  require_same_spec(spec, prior.spec(), "check_sacrifice");
  require_same_spec(spec, bad.spec(), "check_sacrifice");
  require_same_spec(spec, good.spec(), "check_sacrifice");
  PredictiveModel model(prior);
  const std::size_t node = spec.node_id(h_m);
  if (!model.possible(node)) {
    throw UndefinedPosterior("sacrifice undefined at impossible history '" + spec.format(h_m) + "'");
  }
  return sacrifice_at(bad, good, node, rho, model, image_indices(rho, scope == ImageScope::possible ? &model : nullptr));
}

std::optional<SacrificeFinding> find_sacrifice(const LearningProcess& rho, const Prior& prior, std::size_t cap) {
  const auto& spec = rho.spec();
  const auto policies = enumerate_deterministic_policies(rho.spec_ptr(), cap);
  const Policy optimal = optimal_policy(rho, prior);
  PredictiveModel model(prior);
  const auto image = image_indices(rho, &model);
  for (std::size_t node = 0; node < spec.interior_count(); ++node) {
    if (!model.possible(node)) continue;
    for (const auto& candidate : policies) {
      if (sacrifice_at(optimal, candidate, node, rho, model, image).sacrifices) {
        return SacrificeFinding{spec.node(node), optimal, candidate};
      }
    }
  }
  return std::nullopt;
}

}  // namespace rewardrig
