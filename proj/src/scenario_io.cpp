#include "rewardrig/scenario_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace rewardrig {

namespace {

std::vector<std::string_view> tokens(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

bool match_from(const std::vector<std::string_view>& pat, std::size_t p, const std::vector<std::string_view>& txt,
                std::size_t t) {
  if (p == pat.size()) return t == txt.size();
  if (pat[p] == "**") {
    for (std::size_t k = t; k <= txt.size(); ++k)
      if (match_from(pat, p + 1, txt, k)) return true;
    return false;
  }
  if (t == txt.size()) return false;
  if (pat[p] != "*" && pat[p] != txt[t]) return false;
  return match_from(pat, p + 1, txt, t + 1);
}

bool plain_key(const std::string& key) {
  if (key.empty()) return false;
  return std::all_of(key.begin(), key.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string child(const std::string& path, const std::string& key) {
  if (plain_key(key)) return path + "." + key;
  return path + "[" + Json(key).dump() + "]";
}

std::string child(const std::string& path, std::size_t index) { return path + "[" + std::to_string(index) + "]"; }

const Json& require(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(child(path, key), "missing field");
  return *it;
}

Rational parse_fraction(const Json& value, const std::string& path) {
  if (value.is_number_integer()) return Rational(value.dump());
  if (value.is_number()) throw ParseError(path, "inexact number; write it as a fraction string such as \"1/10\"");
  if (!value.is_string()) throw ParseError(path, "expected a fraction string");
  try {
    return parse_rational(value.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ParseError(path, e.what());
  }
}

std::vector<std::string> string_list(const Json& value, const std::string& path) {
  if (!value.is_array() || value.empty()) throw ParseError(path, "expected a non-empty array of names");
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (!value[i].is_string()) throw ParseError(child(path, i), "expected a string");
    auto name = value[i].get<std::string>();
    if (name.empty() || name.find(' ') != std::string::npos || name == "*" || name == "**")
      throw ParseError(child(path, i), "names must be non-empty, without spaces, and not a wildcard");
    if (!seen.insert(name).second) throw ParseError(child(path, i), "duplicate name '" + name + "'");
    out.push_back(std::move(name));
  }
  return out;
}

/// An ordered pattern table resolved by first match; remembers which keys
/// were used so typos surface as errors.
class PatternTable {
 public:
  PatternTable(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ParseError(path_, "expected an object of patterns");
    for (auto it = obj_.begin(); it != obj_.end(); ++it) keys_.push_back(it.key());
    used_.assign(keys_.size(), false);
  }

  /// Index of the first key matching `text`; throws naming `what` if none.
  std::size_t lookup(const std::string& text, const std::string& what) {
    for (std::size_t k = 0; k < keys_.size(); ++k) {
      if (pattern_matches(keys_[k], text)) {
        used_[k] = true;
        return k;
      }
    }
    throw ParseError(path_, "no entry matches " + what + " '" + text + "'");
  }

  const Json& value(std::size_t k) const { return obj_.at(keys_[k]); }
  std::string key_path(std::size_t k) const { return child(path_, keys_[k]); }

  void require_all_used() const {
    for (std::size_t k = 0; k < keys_.size(); ++k)
      if (!used_[k]) throw ParseError(key_path(k), "pattern matches nothing");
  }

 private:
  const Json& obj_;
  std::string path_;
  std::vector<std::string> keys_;
  std::vector<bool> used_;
};

std::string join_actions(const HorizonSpec& spec, const std::vector<int>& actions) {
  std::string out;
  for (int a : actions) {
    if (!out.empty()) out += ' ';
    out += spec.action_name(a);
  }
  return out;
}

std::string kernel_key(const HorizonSpec& spec, std::size_t node, int action) {
  std::string h = spec.format(spec.node(node));
  return h.empty() ? spec.action_name(action) : h + " " + spec.action_name(action);
}

/// Observation distribution: a bare observation name is a point mass.
std::vector<Rational> parse_observation_dist(const Json& value, const HorizonSpec& spec, const std::string& path) {
  std::vector<Rational> probs(spec.num_observations());
  auto index_of = [&](const std::string& name, const std::string& at) {
    try {
      return spec.observation_index(name);
    } catch (const std::exception&) {
      throw ParseError(at, "unknown observation '" + name + "'");
    }
  };
  if (value.is_string()) {
    probs[index_of(value.get<std::string>(), path)] = 1;
    return probs;
  }
  if (!value.is_object()) throw ParseError(path, "expected an observation name or {observation: probability}");
  Rational total;
  for (auto it = value.begin(); it != value.end(); ++it) {
    auto at = child(path, it.key());
    Rational p = parse_fraction(it.value(), at);
    if (p < 0) throw ParseError(at, "negative probability");
    probs[index_of(it.key(), at)] += p;
    total += p;
  }
  if (total != 1) throw ParseError(path, "probabilities sum to " + format_rational(total) + ", not 1");
  return probs;
}

Environment parse_environment(const Json& value, const SpecPtr& spec, const std::string& path) {
  const auto& name_json = require(value, "name", path);
  if (!name_json.is_string()) throw ParseError(child(path, "name"), "expected a string");
  std::string name = name_json.get<std::string>();
  bool has_obs = value.contains("observations");
  bool has_kernel = value.contains("kernel");
  if (has_obs == has_kernel) throw ParseError(path, "give exactly one of \"observations\" or \"kernel\"");

  if (has_obs) {
    PatternTable table(value.at("observations"), child(path, "observations"));
    std::vector<int> obs(spec->action_sequence_count());
    for (std::size_t id = 0; id < obs.size(); ++id) {
      auto k = table.lookup(join_actions(*spec, spec->action_sequence(id)), "action sequence");
      const auto& v = table.value(k);
      if (!v.is_string()) throw ParseError(table.key_path(k), "expected an observation name");
      try {
        obs[id] = spec->observation_index(v.get<std::string>());
      } catch (const std::exception&) {
        throw ParseError(table.key_path(k), "unknown observation '" + v.get<std::string>() + "'");
      }
    }
    table.require_all_used();
    return Environment::from_action_table(spec, std::move(name), std::move(obs));
  }

  PatternTable table(value.at("kernel"), child(path, "kernel"));
  std::map<std::size_t, std::vector<Rational>> parsed;
  std::vector<std::vector<Rational>> rows(spec->interior_count() * spec->num_actions());
  for (std::size_t node = 0; node < spec->interior_count(); ++node) {
    for (int a = 0; a < spec->num_actions(); ++a) {
      auto k = table.lookup(kernel_key(*spec, node, a), "history and action");
      auto it = parsed.find(k);
      if (it == parsed.end()) it = parsed.emplace(k, parse_observation_dist(table.value(k), *spec, table.key_path(k))).first;
      rows[node * spec->num_actions() + a] = it->second;
    }
  }
  table.require_all_used();
  return Environment::from_kernel(spec, std::move(name), [&](const History& h, int a) {
    return rows[spec->node_id(h) * spec->num_actions() + a];
  });
}

RewardFunction parse_reward(const Json& value, const SpecPtr& spec, const std::string& label, const std::string& path) {
  if (!value.is_object()) return RewardFunction::constant(spec, parse_fraction(value, path), label);
  PatternTable table(value, path);
  std::vector<Rational> values(spec->complete_count());
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto k = table.lookup(spec->format(spec->complete_history(i)), "complete history");
    values[i] = parse_fraction(table.value(k), table.key_path(k));
  }
  table.require_all_used();
  return RewardFunction(spec, std::move(values), label);
}

std::vector<WeightedReward> parse_reward_dist(const Json& value, const std::map<std::string, std::size_t>& labels,
                                              const std::string& path) {
  auto index_of = [&](const std::string& label, const std::string& at) {
    auto it = labels.find(label);
    if (it == labels.end()) throw ParseError(at, "unknown reward label '" + label + "'");
    return it->second;
  };
  if (value.is_string()) return {{index_of(value.get<std::string>(), path), Rational(1)}};
  if (!value.is_object()) throw ParseError(path, "expected a reward label or {label: probability}");
  std::vector<WeightedReward> out;
  Rational total;
  for (auto it = value.begin(); it != value.end(); ++it) {
    auto at = child(path, it.key());
    Rational p = parse_fraction(it.value(), at);
    if (p < 0) throw ParseError(at, "negative probability");
    out.push_back({index_of(it.key(), at), p});
    total += p;
  }
  if (total != 1) throw ParseError(path, "probabilities sum to " + format_rational(total) + ", not 1");
  return out;
}

/// Emits values keyed by text, folding the most common value into a
/// trailing "**" entry.
Json compact_table(const std::vector<std::pair<std::string, Json>>& entries) {
  std::map<std::string, std::size_t> counts;
  for (const auto& [key, v] : entries) ++counts[v.dump()];
  std::string common;
  std::size_t best = 0;
  for (const auto& [key, v] : entries) {
    auto c = counts[v.dump()];
    if (c > best) best = c, common = v.dump();
  }
  Json out = Json::object();
  if (best < 2) {
    for (const auto& [key, v] : entries) out[key] = v;
    return out;
  }
  for (const auto& [key, v] : entries)
    if (v.dump() != common) out[key] = v;
  out["**"] = Json::parse(common);
  return out;
}

Json observation_dist_json(const std::vector<Rational>& probs, const HorizonSpec& spec) {
  for (int o = 0; o < spec.num_observations(); ++o)
    if (probs[o] == 1) return spec.observation_name(o);
  Json out = Json::object();
  for (int o = 0; o < spec.num_observations(); ++o)
    if (probs[o] != 0) out[spec.observation_name(o)] = format_rational(probs[o]);
  return out;
}

Json environment_json(const Environment& env) {
  const auto& spec = env.spec();
  Json out = Json::object();
  out["name"] = env.name();
  std::vector<std::pair<std::string, Json>> entries;
  if (env.action_table()) {
    const auto& table = *env.action_table();
    for (std::size_t id = 0; id < table.size(); ++id)
      entries.emplace_back(join_actions(spec, spec.action_sequence(id)), spec.observation_name(table[id]));
    out["observations"] = compact_table(entries);
    return out;
  }
  for (std::size_t node = 0; node < spec.interior_count(); ++node) {
    for (int a = 0; a < spec.num_actions(); ++a) {
      std::vector<Rational> probs(spec.num_observations());
      for (int o = 0; o < spec.num_observations(); ++o) probs[o] = env.prob(node, a, o);
      entries.emplace_back(kernel_key(spec, node, a), observation_dist_json(probs, spec));
    }
  }
  out["kernel"] = compact_table(entries);
  return out;
}

}  // namespace

bool pattern_matches(std::string_view pattern, std::string_view text) {
  return match_from(tokens(pattern), 0, tokens(text), 0);
}

Scenario scenario_from_json(const Json& doc) {
  std::string root = "$";
  const Json* body = &doc;
  if (doc.is_object() && doc.contains("scenario") && !doc.contains("actions")) {
    body = &doc.at("scenario");
    root = "$.scenario";
  }
  const Json& s = *body;
  if (!s.is_object()) throw ParseError(root, "expected a scenario object");

  std::string name;
  if (s.contains("name")) {
    if (!s.at("name").is_string()) throw ParseError(child(root, "name"), "expected a string");
    name = s.at("name").get<std::string>();
  }
  SpecPtr spec;
  auto actions = string_list(require(s, "actions", root), child(root, "actions"));
  auto observations = string_list(require(s, "observations", root), child(root, "observations"));
  const auto& horizon = require(s, "horizon", root);
  if (!horizon.is_number_integer() || horizon.get<long long>() < 1)
    throw ParseError(child(root, "horizon"), "expected a positive integer");
  try {
    spec = make_spec(std::move(actions), std::move(observations), horizon.get<int>());
  } catch (const std::exception& e) {
    throw ParseError(child(root, "horizon"), e.what());
  }

  auto env_path = child(root, "environments");
  const auto& envs_json = require(s, "environments", root);
  if (!envs_json.is_array() || envs_json.empty()) throw ParseError(env_path, "expected a non-empty array");
  std::vector<Environment> envs;
  std::map<std::string, std::size_t> env_index;
  for (std::size_t i = 0; i < envs_json.size(); ++i) {
    envs.push_back(parse_environment(envs_json[i], spec, child(env_path, i)));
    if (!env_index.emplace(envs.back().name(), i).second)
      throw ParseError(child(child(env_path, i), "name"), "duplicate environment '" + envs.back().name() + "'");
  }

  auto prior_path = child(root, "prior");
  const auto& prior_json = require(s, "prior", root);
  if (!prior_json.is_object()) throw ParseError(prior_path, "expected {environment: weight}");
  std::vector<Rational> weights(envs.size());
  std::vector<bool> given(envs.size(), false);
  Rational total;
  for (auto it = prior_json.begin(); it != prior_json.end(); ++it) {
    auto at = child(prior_path, it.key());
    auto e = env_index.find(it.key());
    if (e == env_index.end()) throw ParseError(at, "unknown environment '" + it.key() + "'");
    weights[e->second] = parse_fraction(it.value(), at);
    if (weights[e->second] < 0) throw ParseError(at, "negative weight");
    given[e->second] = true;
    total += weights[e->second];
  }
  for (std::size_t i = 0; i < envs.size(); ++i)
    if (!given[i]) throw ParseError(prior_path, "no weight for environment '" + envs[i].name() + "'");
  if (total != 1) throw ParseError(prior_path, "weights sum to " + format_rational(total) + ", not 1");
  Prior prior(std::move(envs), std::move(weights));

  auto reward_path = child(root, "rewards");
  const auto& rewards_json = require(s, "rewards", root);
  if (!rewards_json.is_object() || rewards_json.empty()) throw ParseError(reward_path, "expected {label: table}");
  std::vector<RewardFunction> pool;
  std::map<std::string, std::size_t> labels;
  for (auto it = rewards_json.begin(); it != rewards_json.end(); ++it) {
    labels[it.key()] = pool.size();
    pool.push_back(parse_reward(it.value(), spec, it.key(), child(reward_path, it.key())));
  }

  PatternTable process(require(s, "process", root), child(root, "process"));
  std::vector<std::vector<WeightedReward>> dist(spec->complete_count());
  std::map<std::size_t, std::vector<WeightedReward>> parsed;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    auto k = process.lookup(spec->format(spec->complete_history(i)), "complete history");
    auto it = parsed.find(k);
    if (it == parsed.end()) it = parsed.emplace(k, parse_reward_dist(process.value(k), labels, process.key_path(k))).first;
    dist[i] = it->second;
  }
  process.require_all_used();
  return {std::move(name), spec, std::move(prior), LearningProcess(std::move(pool), std::move(dist))};
}

Scenario parse_scenario(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("$", e.what());
  }
  return scenario_from_json(doc);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << contents;
  if (!out.flush()) throw IoError("cannot write '" + path + "'");
}

Scenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

std::vector<std::string> pool_labels(const std::vector<RewardFunction>& pool) {
  std::map<std::string, int> counts;
  for (const auto& r : pool) ++counts[r.label()];
  std::vector<std::string> out;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const auto& label = pool[k].label();
    out.push_back(!label.empty() && counts[label] == 1 ? label : "R#" + std::to_string(k));
  }
  return out;
}

Json reward_table_json(const RewardFunction& reward) {
  const auto& spec = reward.spec();
  bool constant = std::all_of(reward.values().begin(), reward.values().end(),
                              [&](const Rational& v) { return v == reward.values().front(); });
  if (constant) return format_rational(reward.values().front());
  std::vector<std::pair<std::string, Json>> entries;
  for (std::size_t i = 0; i < spec.complete_count(); ++i)
    entries.emplace_back(spec.format(spec.complete_history(i)), format_rational(reward.at(i)));
  return compact_table(entries);
}

Json distribution_json(const std::vector<WeightedReward>& dist, const std::vector<std::string>& labels) {
  if (dist.size() == 1 && dist.front().weight == 1) return labels.at(dist.front().reward);
  Json out = Json::object();
  for (const auto& w : dist) out[labels.at(w.reward)] = format_rational(w.weight);
  return out;
}

Json eta_json(const EnvConditional& eta) {
  auto labels = pool_labels(eta.pool());
  Json out = Json::object();
  for (std::size_t e = 0; e < eta.size(); ++e) out[eta.environment_name(e)] = distribution_json(eta.distribution(e), labels);
  return out;
}

Json scenario_to_json(const Scenario& scenario) {
  const auto& spec = *scenario.spec;
  Json out = Json::object();
  out["name"] = scenario.name;
  out["actions"] = spec.actions();
  out["observations"] = spec.observations();
  out["horizon"] = spec.horizon();
  Json envs = Json::array();
  for (const auto& env : scenario.prior.environments()) envs.push_back(environment_json(env));
  out["environments"] = std::move(envs);
  Json prior = Json::object();
  for (std::size_t i = 0; i < scenario.prior.size(); ++i)
    prior[scenario.prior.environment(i).name()] = format_rational(scenario.prior.weight(i));
  out["prior"] = std::move(prior);

  const auto& pool = scenario.process.pool();
  auto labels = pool_labels(pool);
  Json rewards = Json::object();
  for (std::size_t k = 0; k < pool.size(); ++k) rewards[labels[k]] = reward_table_json(pool[k]);
  out["rewards"] = std::move(rewards);
  std::vector<std::pair<std::string, Json>> entries;
  for (std::size_t i = 0; i < spec.complete_count(); ++i)
    entries.emplace_back(spec.format(spec.complete_history(i)),
                         distribution_json(scenario.process.distribution(i), labels));
  out["process"] = compact_table(entries);
  return out;
}

}  // namespace rewardrig
