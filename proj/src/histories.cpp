#include "rewardrig/histories.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace rewardrig {
namespace {

void require_unique(const std::vector<std::string>& names, const char* what) {
  if (names.empty()) throw DomainError(std::string(what) + " alphabet is empty");
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty() || n.find_first_of(" \t\n") != std::string::npos) {
      throw DomainError(std::string(what) + " symbol '" + n + "' is empty or contains whitespace");
    }
    if (!seen.insert(n).second) throw DomainError(std::string("duplicate ") + what + " symbol '" + n + "'");
  }
}

bool sums_to_one(const std::vector<Rational>& dist) {
  Rational total = 0;
  for (const auto& p : dist) {
    if (p < 0) return false;
    total += p;
  }
  return total == 1;
}

mpz_class ipow(std::size_t base, std::size_t exp) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), base, exp);
  return r;
}

void check_cap(const mpz_class& count, std::size_t cap, const std::string& what) {
  if (count > mpz_class(std::to_string(cap))) {
    throw SizeError(what + " exceeds the enumeration cap of " + std::to_string(cap), count.get_str());
  }
}

}  // namespace

History History::prefix(std::size_t k) const {
  if (k > steps_.size()) throw DomainError("prefix longer than history");
  return History(std::vector<Step>(steps_.begin(), steps_.begin() + static_cast<std::ptrdiff_t>(k)));
}

History History::extended(int action, int observation) const {
  auto steps = steps_;
  steps.push_back({action, observation});
  return History(std::move(steps));
}

bool History::is_prefix_of(const History& other) const {
  return steps_.size() <= other.steps_.size() && std::equal(steps_.begin(), steps_.end(), other.steps_.begin());
}

std::vector<int> History::actions() const {
  std::vector<int> out;
  out.reserve(steps_.size());
  for (const auto& s : steps_) out.push_back(s.action);
  return out;
}

HorizonSpec::HorizonSpec(std::vector<std::string> actions, std::vector<std::string> observations, int horizon,
                         std::size_t node_cap)
    : actions_(std::move(actions)), observations_(std::move(observations)), horizon_(horizon) {
  require_unique(actions_, "action");
  require_unique(observations_, "observation");
  if (horizon_ < 1) throw DomainError("horizon must be at least 1");

  const std::size_t branching = actions_.size() * observations_.size();
  mpz_class total = 0;
  for (int m = 0; m <= horizon_; ++m) total += ipow(branching, static_cast<std::size_t>(m));
  check_cap(total, node_cap, "history tree");

  std::size_t size = 1;
  std::size_t offset = 0;
  for (int m = 0; m <= horizon_; ++m) {
    level_sizes_.push_back(size);
    level_offsets_.push_back(offset);
    offset += size;
    size *= branching;
  }
  action_seq_offsets_.push_back(0);
  std::size_t seq = 1;
  for (int l = 1; l <= horizon_; ++l) {
    seq *= actions_.size();
    action_seq_offsets_.push_back(action_seq_offsets_.back() + seq);
  }

  nodes_.reserve(offset);
  nodes_.emplace_back();
  for (std::size_t id = 0; id < level_offsets_[horizon_]; ++id) {
    for (int a = 0; a < num_actions(); ++a) {
      for (int o = 0; o < num_observations(); ++o) nodes_.push_back(nodes_[id].extended(a, o));
    }
  }
}

int HorizonSpec::action_index(std::string_view name) const {
  auto it = std::find(actions_.begin(), actions_.end(), name);
  if (it == actions_.end()) throw DomainError("unknown action '" + std::string(name) + "'");
  return static_cast<int>(it - actions_.begin());
}

int HorizonSpec::observation_index(std::string_view name) const {
  auto it = std::find(observations_.begin(), observations_.end(), name);
  if (it == observations_.end()) throw DomainError("unknown observation '" + std::string(name) + "'");
  return static_cast<int>(it - observations_.begin());
}

void HorizonSpec::validate(const History& h) const {
  if (h.length() > static_cast<std::size_t>(horizon_)) {
    throw DomainError("history of length " + std::to_string(h.length()) + " exceeds horizon " +
                      std::to_string(horizon_));
  }
  for (const auto& s : h.steps()) {
    if (s.action < 0 || s.action >= num_actions()) throw DomainError("action index outside alphabet");
    if (s.observation < 0 || s.observation >= num_observations()) {
      throw DomainError("observation index outside alphabet");
    }
  }
}

std::size_t HorizonSpec::node_id(const History& h) const {
  validate(h);
  std::size_t index = 0;
  for (const auto& s : h.steps()) {
    index = index * actions_.size() * observations_.size() +
            static_cast<std::size_t>(s.action) * observations_.size() + static_cast<std::size_t>(s.observation);
  }
  return level_offsets_[h.length()] + index;
}

std::size_t HorizonSpec::child_id(std::size_t node, int action, int observation) const {
  const int m = node_length(node);
  if (m >= horizon_) throw DomainError("complete histories have no children");
  const std::size_t index = node - level_offsets_[m];
  const std::size_t branching = actions_.size() * observations_.size();
  return level_offsets_[m + 1] + index * branching + static_cast<std::size_t>(action) * observations_.size() +
         static_cast<std::size_t>(observation);
}

int HorizonSpec::node_length(std::size_t node) const {
  if (node >= nodes_.size()) throw DomainError("node id out of range");
  auto it = std::upper_bound(level_offsets_.begin(), level_offsets_.end(), node);
  return static_cast<int>(it - level_offsets_.begin()) - 1;
}

std::size_t HorizonSpec::complete_index(const History& h) const {
  if (h.length() != static_cast<std::size_t>(horizon_)) {
    throw DomainError("history '" + format(h) + "' is not complete");
  }
  return node_id(h) - interior_count();
}

std::pair<std::size_t, std::size_t> HorizonSpec::completion_range(std::size_t node) const {
  const int m = node_length(node);
  const std::size_t span = level_sizes_[horizon_] / level_sizes_[m];
  const std::size_t index = node - level_offsets_[m];
  return {index * span, (index + 1) * span};
}

std::string HorizonSpec::format(const History& h) const {
  std::string out;
  for (const auto& s : h.steps()) {
    if (!out.empty()) out += ' ';
    out += action_name(s.action);
    out += ' ';
    out += observation_name(s.observation);
  }
  return out;
}

History HorizonSpec::parse_history(std::string_view text) const {
  std::istringstream in{std::string(text)};
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) tokens.push_back(t);
  if (tokens.size() % 2 != 0) throw DomainError("history '" + std::string(text) + "' has an odd number of symbols");
  std::vector<Step> steps;
  for (std::size_t i = 0; i < tokens.size(); i += 2) {
    steps.push_back({action_index(tokens[i]), observation_index(tokens[i + 1])});
  }
  History h(std::move(steps));
  validate(h);
  return h;
}

std::size_t HorizonSpec::action_sequence_id(std::span<const int> actions) const {
  if (actions.empty() || actions.size() > static_cast<std::size_t>(horizon_)) {
    throw DomainError("action sequence length out of range");
  }
  std::size_t index = 0;
  for (int a : actions) {
    if (a < 0 || a >= num_actions()) throw DomainError("action index outside alphabet");
    index = index * actions_.size() + static_cast<std::size_t>(a);
  }
  return action_seq_offsets_[actions.size() - 1] + index;
}

std::vector<int> HorizonSpec::action_sequence(std::size_t id) const {
  auto it = std::upper_bound(action_seq_offsets_.begin(), action_seq_offsets_.end(), id);
  if (it == action_seq_offsets_.end()) throw DomainError("action sequence id out of range");
  const std::size_t length = static_cast<std::size_t>(it - action_seq_offsets_.begin());
  std::size_t index = id - action_seq_offsets_[length - 1];
  std::vector<int> seq(length);
  for (std::size_t i = length; i-- > 0;) {
    seq[i] = static_cast<int>(index % actions_.size());
    index /= actions_.size();
  }
  return seq;
}

SpecPtr make_spec(std::vector<std::string> actions, std::vector<std::string> observations, int horizon) {
  return std::make_shared<const HorizonSpec>(std::move(actions), std::move(observations), horizon);
}

void require_same_spec(const HorizonSpec& a, const HorizonSpec& b, std::string_view what) {
  if (&a != &b && !(a == b)) throw DomainError(std::string(what) + ": horizon specs differ");
}

// ---------------------------------------------------------------------------

Policy::Policy(SpecPtr spec, std::vector<std::vector<Rational>> choice, std::string name)
    : spec_(std::move(spec)), choice_(std::move(choice)), name_(std::move(name)) {
  if (choice_.size() != spec_->interior_count()) throw DomainError("policy must cover every decision node");
  for (std::size_t node = 0; node < choice_.size(); ++node) {
    if (choice_[node].size() != static_cast<std::size_t>(spec_->num_actions()) || !sums_to_one(choice_[node])) {
      throw DomainError("policy distribution at '" + spec_->format(spec_->node(node)) +
                        "' is not a distribution over actions");
    }
  }
}

Policy Policy::deterministic(SpecPtr spec, std::vector<int> action_per_node, std::string name) {
  if (action_per_node.size() != spec->interior_count()) throw DomainError("policy must cover every decision node");
  std::vector<std::vector<Rational>> choice(action_per_node.size(),
                                            std::vector<Rational>(static_cast<std::size_t>(spec->num_actions())));
  for (std::size_t node = 0; node < action_per_node.size(); ++node) {
    const int a = action_per_node[node];
    if (a < 0 || a >= spec->num_actions()) throw DomainError("policy action outside alphabet");
    choice[node][static_cast<std::size_t>(a)] = 1;
  }
  return Policy(std::move(spec), std::move(choice), std::move(name));
}

Policy Policy::constant(SpecPtr spec, int action, std::string name) {
  std::vector<int> actions(spec->interior_count(), action);
  return deterministic(std::move(spec), std::move(actions), std::move(name));
}

Policy Policy::by_step(SpecPtr spec, std::vector<int> actions, std::string name) {
  if (actions.empty()) throw DomainError("step policy needs at least one action");
  std::vector<int> per_node(spec->interior_count());
  for (std::size_t node = 0; node < per_node.size(); ++node) {
    const auto m = static_cast<std::size_t>(spec->node_length(node));
    per_node[node] = actions[std::min(m, actions.size() - 1)];
  }
  return deterministic(std::move(spec), std::move(per_node), std::move(name));
}

Policy Policy::from_function(SpecPtr spec, const std::function<std::vector<Rational>(const History&)>& choose,
                             std::string name) {
  std::vector<std::vector<Rational>> choice;
  choice.reserve(spec->interior_count());
  for (std::size_t node = 0; node < spec->interior_count(); ++node) choice.push_back(choose(spec->node(node)));
  return Policy(std::move(spec), std::move(choice), std::move(name));
}

Rational Policy::prob(const History& h, int action) const {
  if (h.length() >= static_cast<std::size_t>(spec_->horizon())) throw DomainError("no decision at a complete history");
  if (action < 0 || action >= spec_->num_actions()) throw DomainError("action index outside alphabet");
  return choice_[spec_->node_id(h)][static_cast<std::size_t>(action)];
}

std::optional<int> Policy::deterministic_action(std::size_t node) const {
  const auto& dist = choice_.at(node);
  for (std::size_t a = 0; a < dist.size(); ++a) {
    if (dist[a] == 1) return static_cast<int>(a);
  }
  return std::nullopt;
}

bool Policy::is_deterministic() const {
  for (std::size_t node = 0; node < choice_.size(); ++node) {
    if (!deterministic_action(node)) return false;
  }
  return true;
}

Policy Policy::with_action_at(std::size_t node, int action) const {
  Policy copy = *this;
  auto& dist = copy.choice_.at(node);
  for (auto& p : dist) p = 0;
  dist.at(static_cast<std::size_t>(action)) = 1;
  return copy;
}

// ---------------------------------------------------------------------------

Environment::Environment(SpecPtr spec, std::string name, std::vector<Rational> kernel)
    : spec_(std::move(spec)), name_(std::move(name)), kernel_(std::move(kernel)) {
  const auto nA = static_cast<std::size_t>(spec_->num_actions());
  const auto nO = static_cast<std::size_t>(spec_->num_observations());
  if (kernel_.size() != spec_->interior_count() * nA * nO) throw DomainError("environment kernel has wrong size");
  deterministic_ = true;
  for (std::size_t base = 0; base < kernel_.size(); base += nO) {
    Rational total = 0;
    bool point = false;
    for (std::size_t o = 0; o < nO; ++o) {
      const auto& p = kernel_[base + o];
      if (p < 0) throw DomainError("environment '" + name_ + "' has a negative probability");
      total += p;
      point = point || p == 1;
    }
    if (total != 1) {
      const std::size_t node = base / (nA * nO);
      const int a = static_cast<int>((base / nO) % nA);
      throw DomainError("environment '" + name_ + "' kernel at '" + spec_->format(spec_->node(node)) + "' action " +
                        spec_->action_name(a) + " sums to " + format_rational(total));
    }
    deterministic_ = deterministic_ && point;
  }
}

Environment Environment::from_kernel(SpecPtr spec, std::string name, const Kernel& kernel) {
  const auto nO = static_cast<std::size_t>(spec->num_observations());
  std::vector<Rational> table;
  table.reserve(spec->interior_count() * static_cast<std::size_t>(spec->num_actions()) * nO);
  for (std::size_t node = 0; node < spec->interior_count(); ++node) {
    for (int a = 0; a < spec->num_actions(); ++a) {
      auto dist = kernel(spec->node(node), a);
      if (dist.size() != nO) throw DomainError("environment '" + name + "' kernel returned wrong arity");
      for (auto& p : dist) table.push_back(std::move(p));
    }
  }
  return Environment(std::move(spec), std::move(name), std::move(table));
}

Environment Environment::deterministic(SpecPtr spec, std::string name, const ObservationRule& rule) {
  std::vector<int> table(spec->action_sequence_count());
  for (std::size_t id = 0; id < table.size(); ++id) table[id] = rule(spec->action_sequence(id));
  return from_action_table(std::move(spec), std::move(name), std::move(table));
}

Environment Environment::from_action_table(SpecPtr spec, std::string name, std::vector<int> table) {
  if (table.size() != spec->action_sequence_count()) throw DomainError("action table has wrong size");
  for (int o : table) {
    if (o < 0 || o >= spec->num_observations()) {
      throw DomainError("environment '" + name + "' maps to an observation outside the alphabet");
    }
  }
  const auto nO = static_cast<std::size_t>(spec->num_observations());
  std::vector<Rational> kernel(spec->interior_count() * static_cast<std::size_t>(spec->num_actions()) * nO);
  for (std::size_t node = 0; node < spec->interior_count(); ++node) {
    auto actions = spec->node(node).actions();
    actions.push_back(0);
    for (int a = 0; a < spec->num_actions(); ++a) {
      actions.back() = a;
      const int o = table[spec->action_sequence_id(actions)];
      kernel[(node * static_cast<std::size_t>(spec->num_actions()) + static_cast<std::size_t>(a)) * nO +
             static_cast<std::size_t>(o)] = 1;
    }
  }
  Environment env(std::move(spec), std::move(name), std::move(kernel));
  env.action_table_ = std::move(table);
  return env;
}

Rational Environment::prob(const History& h, int action, int observation) const {
  if (h.length() >= static_cast<std::size_t>(spec_->horizon())) throw DomainError("no transition at a complete history");
  if (action < 0 || action >= spec_->num_actions() || observation < 0 || observation >= spec_->num_observations()) {
    throw DomainError("symbol outside alphabet");
  }
  return prob(spec_->node_id(h), action, observation);
}

// ---------------------------------------------------------------------------

Prior::Prior(std::vector<Environment> environments, std::vector<Rational> weights)
    : environments_(std::move(environments)), weights_(std::move(weights)) {
  if (environments_.empty()) throw DomainError("prior needs at least one environment");
  if (environments_.size() != weights_.size()) throw DomainError("prior weights and environments differ in count");
  std::set<std::string> names;
  Rational total = 0;
  for (std::size_t i = 0; i < environments_.size(); ++i) {
    require_same_spec(environments_[i].spec(), environments_.front().spec(), "prior environments");
    if (!names.insert(environments_[i].name()).second) {
      throw DomainError("duplicate environment name '" + environments_[i].name() + "'");
    }
    if (weights_[i] < 0) throw DomainError("negative prior weight on '" + environments_[i].name() + "'");
    total += weights_[i];
  }
  if (total != 1) throw DomainError("prior weights sum to " + format_rational(total) + ", not 1");
}

std::size_t Prior::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < environments_.size(); ++i) {
    if (environments_[i].name() == name) return i;
  }
  throw DomainError("unknown environment '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

Rational history_prob(const History& h, const Policy& policy, const Environment& env) {
  require_same_spec(policy.spec(), env.spec(), "history_prob");
  const auto& spec = env.spec();
  spec.validate(h);
  Rational p = 1;
  for (std::size_t i = 0; i < h.length() && p != 0; ++i) {
    const std::size_t node = spec.node_id(h.prefix(i));
    p *= policy.prob(node, h[i].action) * env.prob(node, h[i].action, h[i].observation);
  }
  return p;
}

Rational history_prob_actions(const History& h, const Environment& env) {
  const auto& spec = env.spec();
  spec.validate(h);
  Rational p = 1;
  for (std::size_t i = 0; i < h.length() && p != 0; ++i) {
    p *= env.prob(spec.node_id(h.prefix(i)), h[i].action, h[i].observation);
  }
  return p;
}

Rational prior_history_prob(const History& h, const Prior& prior) {
  Rational total = 0;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (prior.weight(i) != 0) total += prior.weight(i) * history_prob_actions(h, prior.environment(i));
  }
  return total;
}

Rational posterior_env(std::size_t env, const History& h, const Prior& prior) {
  const Rational evidence = prior_history_prob(h, prior);
  if (evidence == 0) throw UndefinedPosterior("posterior undefined: history '" + prior.spec().format(h) + "' is impossible");
  return history_prob_actions(h, prior.environment(env)) * prior.weight(env) / evidence;
}

Rational predictive(int observation, const History& h, int action, const Prior& prior) {
  const Rational evidence = prior_history_prob(h, prior);
  if (evidence == 0) {
    throw UndefinedPosterior("predictive undefined: history '" + prior.spec().format(h) + "' is impossible");
  }
  Rational total = 0;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (prior.weight(i) == 0) continue;
    total += history_prob_actions(h, prior.environment(i)) * prior.weight(i) / evidence *
             prior.environment(i).prob(h, action, observation);
  }
  return total;
}

mpz_class deterministic_policy_count(const HorizonSpec& spec) {
  return ipow(static_cast<std::size_t>(spec.num_actions()), spec.interior_count());
}

mpz_class deterministic_environment_count(const HorizonSpec& spec) {
  return ipow(static_cast<std::size_t>(spec.num_observations()), spec.action_sequence_count());
}

namespace {

// Odometer over `positions` digits each in [0, radix).
template <typename Emit>
void for_each_assignment(std::size_t positions, int radix, Emit&& emit) {
  std::vector<int> digits(positions, 0);
  while (true) {
    emit(digits);
    std::size_t i = positions;
    while (i > 0) {
      --i;
      if (++digits[i] < radix) break;
      digits[i] = 0;
      if (i == 0) return;
    }
    if (positions == 0) return;
  }
}

}  // namespace

std::vector<Policy> enumerate_deterministic_policies(const SpecPtr& spec, std::size_t cap) {
  check_cap(deterministic_policy_count(*spec), cap, "deterministic policy count");
  std::vector<Policy> out;
  for_each_assignment(spec->interior_count(), spec->num_actions(), [&](const std::vector<int>& digits) {
    out.push_back(Policy::deterministic(spec, digits, "pi" + std::to_string(out.size())));
  });
  return out;
}

std::vector<Environment> enumerate_deterministic_environments(const SpecPtr& spec, std::size_t cap) {
  check_cap(deterministic_environment_count(*spec), cap, "deterministic environment count");
  std::vector<Environment> out;
  for_each_assignment(spec->action_sequence_count(), spec->num_observations(), [&](const std::vector<int>& digits) {
    std::string name = "mu";
    for (std::size_t id = 0; id < digits.size(); ++id) {
      name += id == 0 ? "[" : ",";
      name += spec->observation_name(digits[id]);
    }
    name += "]";
    out.push_back(Environment::from_action_table(spec, std::move(name), digits));
  });
  return out;
}

// ---------------------------------------------------------------------------

PredictiveModel::PredictiveModel(Prior prior) : prior_(std::move(prior)) {
  const auto& spec = prior_.spec();
  per_env_.assign(prior_.size(), std::vector<Rational>(spec.node_count()));
  mixture_.assign(spec.node_count(), 0);
  for (std::size_t e = 0; e < prior_.size(); ++e) {
    auto& probs = per_env_[e];
    const auto& env = prior_.environment(e);
    probs[0] = 1;
    for (std::size_t node = 0; node < spec.interior_count(); ++node) {
      if (probs[node] == 0) continue;
      for (int a = 0; a < spec.num_actions(); ++a) {
        for (int o = 0; o < spec.num_observations(); ++o) {
          const auto& p = env.prob(node, a, o);
          if (p != 0) probs[spec.child_id(node, a, o)] = probs[node] * p;
        }
      }
    }
    if (prior_.weight(e) == 0) continue;
    for (std::size_t node = 0; node < spec.node_count(); ++node) {
      if (probs[node] != 0) mixture_[node] += prior_.weight(e) * probs[node];
    }
  }
}

void PredictiveModel::require_possible(std::size_t node) const {
  if (mixture_.at(node) == 0) {
    throw UndefinedPosterior("history '" + spec().format(spec().node(node)) + "' is impossible under the prior");
  }
}

Rational PredictiveModel::predictive(std::size_t node, int action, int observation) const {
  require_possible(node);
  return mixture_[spec().child_id(node, action, observation)] / mixture_[node];
}

Rational PredictiveModel::posterior(std::size_t env, std::size_t node) const {
  require_possible(node);
  return prior_.weight(env) * per_env_.at(env)[node] / mixture_[node];
}

}  // namespace rewardrig
