#include "rewardrig/constructions.hpp"

#include <algorithm>
#include <sstream>

#include "rewardrig/exact_lp.hpp"

namespace rewardrig {
namespace {

Rational max_abs_diff(const RewardFunction& a, const RewardFunction& b) {
  Rational worst = 0;
  for (std::size_t i = 0; i < a.values().size(); ++i) worst = std::max(worst, abs_value(a.at(i) - b.at(i)));
  return worst;
}

Rational dot(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != 0 && b[i] != 0) s += a[i] * b[i];
  }
  return s;
}

// Is target a convex combination of pool?
bool in_convex_hull(const RewardFunction& target, const std::vector<RewardFunction>& pool) {
  const std::size_t k = target.values().size();
  lp::Matrix a(k + 1, std::vector<Rational>(pool.size()));
  std::vector<Rational> b(k + 1);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < pool.size(); ++j) a[i][j] = pool[j].at(i);
    b[i] = target.at(i);
  }
  for (std::size_t j = 0; j < pool.size(); ++j) a[k][j] = 1;
  b[k] = 1;
  return lp::find_feasible_point(a, b).feasible;
}

}  // namespace

bool ConstructionReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerificationCheck& c) { return c.passed; });
}

void ConstructionReport::add(std::string name, bool passed, Rational residual, std::string detail) {
  checks.push_back({std::move(name), passed, std::move(residual), std::move(detail)});
}

std::optional<std::vector<Rational>> affine_coefficients(const RewardFunction& target,
                                                         const std::vector<RewardFunction>& pool) {
  if (pool.empty()) return std::nullopt;
  const std::size_t k = target.values().size();
  lp::Matrix a(k + 1, std::vector<Rational>(pool.size()));
  std::vector<Rational> b(k + 1);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < pool.size(); ++j) a[i][j] = pool[j].at(i);
    b[i] = target.at(i);
  }
  for (std::size_t j = 0; j < pool.size(); ++j) a[k][j] = 1;
  b[k] = 1;
  return lp::solve_linear_system(a, b);
}

std::string affine_label(const std::vector<Rational>& coefficients, const std::vector<RewardFunction>& pool) {
  std::ostringstream out;
  bool first = true;
  for (std::size_t j = 0; j < coefficients.size(); ++j) {
    const Rational& c = coefficients[j];
    if (c == 0) continue;
    if (pool[j].label().empty()) return {};
    if (first) {
      if (c < 0) out << "-";
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    const Rational mag = abs_value(c);
    if (mag != 1) out << format_rational(mag) << "*";
    out << pool[j].label();
    first = false;
  }
  return first ? std::string("0") : out.str();
}

std::string describe_in_terms_of(const RewardFunction& target, const std::vector<RewardFunction>& pool) {
  for (const auto& r : pool) {
    if (r.same_values(target) && !r.label().empty()) return r.label();
  }
  const auto coeffs = affine_coefficients(target, pool);
  return coeffs ? affine_label(*coeffs, pool) : std::string{};
}

// ---------------------------------------------------------------------------

EnvConditional counterfactual_eta(const LearningProcess& rho, const Policy& default_policy,
                                  const std::vector<Environment>& environments) {
  const auto& spec = rho.spec();
  require_same_spec(spec, default_policy.spec(), "counterfactual_eta");
  std::vector<std::string> names;
  std::vector<std::vector<WeightedReward>> dist;
  for (const auto& env : environments) {
    require_same_spec(spec, env.spec(), "counterfactual_eta");
    names.push_back(env.name());
    std::vector<Rational> weights(rho.pool().size());
    // Forward pass of P(h | pi, mu) over the node tree.
    std::vector<Rational> reach(spec.node_count());
    reach[0] = 1;
    for (std::size_t node = 0; node < spec.interior_count(); ++node) {
      if (reach[node] == 0) continue;
      for (int a = 0; a < spec.num_actions(); ++a) {
        const Rational& pa = default_policy.prob(node, a);
        if (pa == 0) continue;
        for (int o = 0; o < spec.num_observations(); ++o) {
          const Rational& po = env.prob(node, a, o);
          if (po != 0) reach[spec.child_id(node, a, o)] += reach[node] * pa * po;
        }
      }
    }
    for (std::size_t h = 0; h < spec.complete_count(); ++h) {
      const Rational& p = reach[spec.complete_node_id(h)];
      if (p == 0) continue;
      for (const auto& entry : rho.distribution(h)) weights[entry.reward] += p * entry.weight;
    }
    std::vector<WeightedReward> row;
    for (std::size_t r = 0; r < weights.size(); ++r) {
      if (weights[r] != 0) row.push_back({r, weights[r]});
    }
    dist.push_back(std::move(row));
  }
  return EnvConditional(std::move(names), rho.pool(), std::move(dist));
}

// ---------------------------------------------------------------------------

UnriggableConstruction make_unriggable(const LearningProcess& rho, const Prior& prior, const Policy& default_policy) {
  const auto& spec = rho.spec();
  const auto& spec_ptr = rho.spec_ptr();
  require_same_spec(spec, prior.spec(), "make_unriggable");
  require_same_spec(spec, default_policy.spec(), "make_unriggable");
  const PredictiveModel model(prior);
  const ExtendedExpectation e_pi = extend_expectation(rho, model, default_policy);

  // offset[node] = T accumulated along the edges leading to node.
  std::vector<RewardFunction> offset(spec.node_count(), RewardFunction::zero(spec_ptr));
  for (std::size_t node = 0; node < spec.interior_count(); ++node) {
    for (int a = 0; a < spec.num_actions(); ++a) {
      RewardFunction step = offset[node];
      if (model.possible(node)) {
        step += e_pi.at(node);
        for (int o = 0; o < spec.num_observations(); ++o) {
          const std::size_t child = spec.child_id(node, a, o);
          if (model.possible(child)) step -= model.predictive(node, a, o) * e_pi.at(child);
        }
      }
      for (int o = 0; o < spec.num_observations(); ++o) offset[spec.child_id(node, a, o)] = step;
    }
  }

  const auto original_image = image(rho);
  std::vector<RewardFunction> pool;
  std::vector<std::vector<WeightedReward>> dist(spec.complete_count());
  for (std::size_t h = 0; h < spec.complete_count(); ++h) {
    const auto& shift = offset[spec.complete_node_id(h)];
    for (const auto& entry : rho.distribution(h)) {
      RewardFunction moved = rho.pool()[entry.reward] + shift;
      std::size_t slot = pool.size();
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].same_values(moved)) {
          slot = i;
          break;
        }
      }
      if (slot == pool.size()) pool.push_back(std::move(moved));
      dist[h].push_back({slot, entry.weight});
    }
  }
  for (auto& r : pool) r = r.relabeled(describe_in_terms_of(r, original_image));

  UnriggableConstruction out{LearningProcess(std::move(pool), std::move(dist)), {}, false, {}};
  auto& report = out.report;

  const auto verdict = check_unriggable(out.process, model);
  report.add("output is unriggable", verdict.unriggable, 0,
             verdict.witness ? describe_witness(*verdict.witness, spec) : std::string{});

  const auto e_new = extend_expectation(out.process, model, default_policy);
  const Rational drift = max_abs_diff(e_new.at(std::size_t{0}), e_pi.at(std::size_t{0}));
  report.add("expectation at the empty history preserved under " + default_policy.name(), drift == 0, drift);

  bool all_affine = true;
  std::string outside;
  for (const auto& r : out.process.pool()) {
    const auto coeffs = affine_coefficients(r, original_image);
    if (!coeffs) {
      all_affine = false;
      out.hull_coefficients.emplace_back();
      continue;
    }
    out.hull_coefficients.push_back(*coeffs);
    if (!in_convex_hull(r, original_image)) {
      out.leaves_convex_hull = true;
      if (!outside.empty()) outside += ", ";
      outside += r.label().empty() ? "unlabelled member" : r.label();
    }
  }
  report.add("image within the affine hull of the original image", all_affine);
  if (out.leaves_convex_hull) {
    report.add("outside the convex hull of the original image (informational)", true, 0, outside);
  }
  return out;
}

// ---------------------------------------------------------------------------

UninfluenceableConstruction unriggable_to_uninfluenceable(const LearningProcess& rho, const Prior& prior,
                                                          std::size_t cap) {
  const auto& spec = rho.spec();
  const auto& spec_ptr = rho.spec_ptr();
  require_same_spec(spec, prior.spec(), "unriggable_to_uninfluenceable");
  const PredictiveModel model(prior);
  const auto verdict = check_unriggable(rho, model);
  if (!verdict.unriggable) {
    throw PreconditionError("learning process is riggable " + describe_witness(*verdict.witness, spec));
  }
  const ExtendedExpectation& e = *verdict.extended;
  auto environments = enumerate_deterministic_environments(spec_ptr, cap);

  // Transition kernel of xi, with the prior mixture standing in at
  // impossible histories.
  const std::size_t A = spec.num_actions(), O = spec.num_observations();
  std::vector<Rational> kernel(spec.interior_count() * A * O);
  for (std::size_t node = 0; node < spec.interior_count(); ++node) {
    for (int a = 0; a < spec.num_actions(); ++a) {
      for (int o = 0; o < spec.num_observations(); ++o) {
        Rational p;
        if (model.possible(node)) {
          p = model.predictive(node, a, o);
        } else {
          for (std::size_t env = 0; env < prior.size(); ++env) {
            p += prior.weight(env) * prior.environment(env).prob(node, a, o);
          }
        }
        kernel[(node * A + a) * O + o] = p;
      }
    }
  }

  const auto original_image = image(rho);
  std::vector<Rational> weights;
  std::vector<RewardFunction> eta_pool;
  std::vector<std::vector<WeightedReward>> eta_dist;
  std::vector<std::string> names;
  const RewardFunction& e0 = e.at(std::size_t{0});
  for (const auto& env : environments) {
    const auto& table = *env.action_table();
    Rational weight = 1;
    RewardFunction eta = e0;
    for (std::size_t seq = 0; seq < spec.action_sequence_count(); ++seq) {
      const auto actions = spec.action_sequence(seq);
      std::size_t node = 0;
      for (std::size_t i = 0; i + 1 < actions.size(); ++i) {
        const std::size_t prefix_id = spec.action_sequence_id(std::span(actions.data(), i + 1));
        node = spec.child_id(node, actions[i], table[prefix_id]);
      }
      const int a = actions.back();
      const int o = table[seq];
      if (weight != 0) weight *= kernel[(node * A + a) * O + o];
      const std::size_t child = spec.child_id(node, a, o);
      if (model.possible(child)) {
        eta += e.at(child);
        eta -= e.at(node);
      }
    }
    weights.push_back(weight);
    names.push_back(env.name());
    std::size_t slot = eta_pool.size();
    for (std::size_t i = 0; i < eta_pool.size(); ++i) {
      if (eta_pool[i].same_values(eta)) {
        slot = i;
        break;
      }
    }
    if (slot == eta_pool.size()) eta_pool.push_back(std::move(eta));
    eta_dist.push_back({WeightedReward{slot, Rational(1)}});
  }
  for (auto& r : eta_pool) r = r.relabeled(describe_in_terms_of(r, original_image));

  Prior extended_prior(std::move(environments), std::move(weights));
  EnvConditional eta(std::move(names), std::move(eta_pool), std::move(eta_dist));
  LearningProcess induced = induced_process(eta, extended_prior);
  UninfluenceableConstruction out{extended_prior, eta, induced, {}};
  auto& report = out.report;

  const PredictiveModel extended_model(out.prior);
  Rational worst = 0;
  bool equivalent = true;
  std::string first_failure;
  for (std::size_t node = 0; node < spec.interior_count(); ++node) {
    if (!model.possible(node)) continue;
    if (!extended_model.possible(node)) {
      equivalent = false;
      if (first_failure.empty()) first_failure = "'" + spec.format(spec.node(node)) + "' impossible under xi'";
      continue;
    }
    for (int a = 0; a < spec.num_actions(); ++a) {
      for (int o = 0; o < spec.num_observations(); ++o) {
        const Rational diff = abs_value(model.predictive(node, a, o) - extended_model.predictive(node, a, o));
        if (diff != 0) {
          equivalent = false;
          worst = std::max(worst, diff);
          if (first_failure.empty()) first_failure = "'" + spec.format(spec.node(node).extended(a, o)) + "'";
        }
      }
    }
  }
  report.add("xi' and xi share transition probabilities at every possible history", equivalent, worst,
             first_failure);

  worst = 0;
  bool same_expectation = true;
  for (std::size_t h = 0; h < spec.complete_count(); ++h) {
    if (!model.possible(spec.complete_node_id(h))) continue;
    const Rational diff = max_abs_diff(expectation_at(out.process, h), expectation_at(rho, h));
    if (diff != 0) same_expectation = false;
    worst = std::max(worst, diff);
  }
  report.add("e_rho' equals e_rho at every possible complete history", same_expectation, worst);

  // eta' reproduces rho' through the posterior of xi', recomputed from the
  // defining sums.
  worst = 0;
  bool reproduces = true;
  for (std::size_t h = 0; h < spec.complete_count(); ++h) {
    const History& h_n = spec.complete_history(h);
    if (prior_history_prob(h_n, out.prior) == 0) continue;
    for (std::size_t r = 0; r < out.eta.pool().size(); ++r) {
      Rational p = 0;
      for (std::size_t env = 0; env < out.prior.size(); ++env) {
        const Rational q = out.eta.probability(env, r);
        if (q != 0) p += q * posterior_env(env, h_n, out.prior);
      }
      const Rational diff = abs_value(p - out.process.probability(h, r));
      if (diff != 0) reproduces = false;
      worst = std::max(worst, diff);
    }
  }
  report.add("eta' witnesses rho' as uninfluenceable under xi'", reproduces, worst);

  const auto closure = check_unriggable(out.process, extended_model);
  report.add("rho' is unriggable under xi'", closure.unriggable, 0,
             closure.witness ? describe_witness(*closure.witness, spec) : std::string{});
  return out;
}

// ---------------------------------------------------------------------------

AffineRelabeling::AffineRelabeling(RewardFunction base, LinearPart linear, std::vector<RewardFunction> domain)
    : base_(std::move(base)), linear_(std::move(linear)), domain_(std::move(domain)) {
  const std::size_t k = base_.values().size();
  for (const auto& [u, v] : linear_.rank_one) {
    if (u.size() != k || v.size() != k) throw DomainError("relabeling linear part has the wrong dimension");
  }
  for (const auto& r : domain_) require_same_spec(base_.spec(), r.spec(), "relabeling domain");
}

AffineRelabeling AffineRelabeling::identity(std::vector<RewardFunction> domain) {
  if (domain.empty()) throw DomainError("relabeling needs a non-empty domain pool");
  RewardFunction zero = RewardFunction::zero(domain.front().spec_ptr());
  return AffineRelabeling(std::move(zero), LinearPart{}, std::move(domain));
}

RewardFunction AffineRelabeling::apply_unchecked(const RewardFunction& reward) const {
  require_same_spec(base_.spec(), reward.spec(), "relabeling");
  std::vector<Rational> out = base_.values();
  if (linear_.scale != 0) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += linear_.scale * reward.at(i);
  }
  for (const auto& [u, v] : linear_.rank_one) {
    const Rational s = dot(v, reward.values());
    if (s == 0) continue;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (u[i] != 0) out[i] += s * u[i];
    }
  }
  return RewardFunction(base_.spec_ptr(), std::move(out));
}

bool AffineRelabeling::in_domain(const RewardFunction& reward) const {
  return affine_coefficients(reward, domain_).has_value();
}

RewardFunction AffineRelabeling::apply(const RewardFunction& reward) const {
  if (!in_domain(reward)) {
    throw DomainError("reward function '" + reward.label() + "' is outside the relabeling's domain");
  }
  return apply_unchecked(reward);
}

LearningProcess apply_relabeling(const AffineRelabeling& sigma, const LearningProcess& rho) {
  std::vector<RewardFunction> pool;
  for (const auto& r : rho.pool()) {
    pool.push_back(sigma.apply(r));
    if (!r.label().empty()) pool.back() = pool.back().relabeled("sigma(" + r.label() + ")");
  }
  std::vector<std::vector<WeightedReward>> dist;
  for (std::size_t h = 0; h < rho.spec().complete_count(); ++h) dist.push_back(rho.distribution(h));
  return LearningProcess(std::move(pool), std::move(dist));
}

// ---------------------------------------------------------------------------

SacrificeDemonstration sacrifice_relabeling(const LearningProcess& rho, const Prior& prior) {
  const auto& spec = rho.spec();
  const auto& spec_ptr = rho.spec_ptr();
  require_same_spec(spec, prior.spec(), "sacrifice_relabeling");
  const PredictiveModel model(prior);
  const auto verdict = check_unriggable(rho, model);
  if (verdict.unriggable) throw PreconditionError("learning process is unriggable; no relabeling sacrifices reward");
  const RiggingWitness witness = *verdict.witness;
  const std::size_t node = spec.node_id(witness.history);

  // f(R) = <w, R> + c with f(R_1) = 1 and f(R_2) = -1, w of minimum norm.
  const RewardFunction diff = witness.under_action - witness.under_alternative;
  const Rational norm2 = dot(diff.values(), diff.values());
  std::vector<Rational> w = diff.values();
  for (auto& x : w) x *= Rational(2) / norm2;
  const Rational c = 1 - dot(w, witness.under_action.values());

  std::vector<Rational> both(spec.complete_count()), alt_branch(spec.complete_count());
  for (int o = 0; o < spec.num_observations(); ++o) {
    for (int a : {witness.action, witness.alternative}) {
      const auto [lo, hi] = spec.completion_range(spec.child_id(node, a, o));
      for (std::size_t h = lo; h < hi; ++h) {
        both[h] = 1;
        if (a == witness.alternative) alt_branch[h] = 1;
      }
    }
  }
  std::vector<Rational> base(spec.complete_count());
  for (std::size_t h = 0; h < base.size(); ++h) base[h] = c * both[h] + alt_branch[h];
  LinearPart linear{0, {{both, w}}};

  std::vector<RewardFunction> domain = image(rho);
  AffineRelabeling sigma(RewardFunction(spec_ptr, std::move(base)), std::move(linear), domain);
  LearningProcess relabeled = apply_relabeling(sigma, rho);
  Policy optimal = optimal_policy(relabeled, prior);
  Policy better = optimal.with_action_at(node, witness.alternative);

  SacrificeDemonstration out{sigma, witness, relabeled, optimal, better, {}};
  auto& report = out.report;
  const Rational f1 = dot(w, witness.under_action.values()) + c;
  const Rational f2 = dot(w, witness.under_alternative.values()) + c;
  report.add("f(R_1) = 1 and f(R_2) = -1", f1 == 1 && f2 == -1, abs_value(f1 - 1) + abs_value(f2 + 1));

  const auto chosen = optimal.deterministic_action(node);
  report.add("optimal policy of the relabeled process takes " + spec.action_name(witness.action) + " at '" +
                 spec.format(witness.history) + "'",
             chosen && *chosen == witness.action);

  const auto check = check_sacrifice(optimal, better, witness.history, relabeled, prior, ImageScope::all);
  std::string detail;
  if (!check.sacrifices && check.counter_bad) {
    detail = "counterexample " + spec.format(*check.counter_bad) + " vs " + spec.format(*check.counter_good);
  }
  report.add("optimal policy sacrifices reward with certainty to the alternative", check.sacrifices, 0, detail);

  Rational worst = 0;
  for (std::size_t h = 0; h < spec.complete_count(); ++h) {
    worst = std::max(worst, max_abs_diff(expectation_at(relabeled, h), sigma.apply_unchecked(expectation_at(rho, h))));
  }
  report.add("relabeling commutes with expectation", worst == 0, worst);
  return out;
}

}  // namespace rewardrig
