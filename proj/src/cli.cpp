#include "rewardrig/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "rewardrig/constructions.hpp"
#include "rewardrig/experiment_report.hpp"
#include "rewardrig/scenario_io.hpp"

namespace rewardrig::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string quoted(const HorizonSpec& spec, const History& h) { return "'" + spec.format(h) + "'"; }

Json witness_json(const RiggingWitness& w, const HorizonSpec& spec) {
  Json out = Json::object();
  out["history"] = spec.format(w.history);
  out["action"] = spec.action_name(w.action);
  out["alternative"] = spec.action_name(w.alternative);
  out["expectation_under_action"] = reward_table_json(w.under_action);
  out["expectation_under_alternative"] = reward_table_json(w.under_alternative);
  return out;
}

Json checks_json(const ConstructionReport& report) {
  Json out = Json::array();
  for (const auto& c : report.checks) {
    Json j = Json::object();
    j["name"] = c.name;
    j["passed"] = c.passed;
    j["residual"] = format_rational(c.residual);
    if (!c.detail.empty()) j["detail"] = c.detail;
    out.push_back(std::move(j));
  }
  return out;
}

std::string checks_text(const ConstructionReport& report) {
  std::string out = "checks:\n";
  for (const auto& c : report.checks) {
    out += std::string(c.passed ? "  PASS  " : "  FAIL  ") + c.name;
    if (c.residual != 0) out += " (residual " + format_rational(c.residual) + ")";
    if (!c.detail.empty()) out += ": " + c.detail;
    out += '\n';
  }
  return out;
}

/// "R_B" when the table is a labelled combination of the pool, else the table.
std::string reward_text(const RewardFunction& r, const std::vector<RewardFunction>& pool) {
  if (!r.label().empty()) return r.label();
  auto name = describe_in_terms_of(r, pool);
  return name.empty() ? reward_table_json(r).dump() : name;
}

std::string eta_text(const EnvConditional& eta, const Prior* prior = nullptr) {
  auto labels = pool_labels(eta.pool());
  std::string out;
  for (std::size_t e = 0; e < eta.size(); ++e) {
    out += "  " + eta.environment_name(e) + " -> ";
    const auto& dist = eta.distribution(e);
    for (std::size_t k = 0; k < dist.size(); ++k) {
      if (k > 0) out += " + ";
      if (dist.size() > 1 || dist[k].weight != 1) out += format_rational(dist[k].weight) + " ";
      out += labels[dist[k].reward];
    }
    if (prior && prior->weight(prior->index_of(eta.environment_name(e))) == 0) out += "  (prior weight 0)";
    out += '\n';
  }
  return out;
}

/// The first `max_lines` lines, then a count of the rest.
std::string abbreviated(const std::string& text, std::size_t max_lines) {
  std::istringstream in(text);
  std::string line, out;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (n++ < max_lines) out += line + "\n";
  }
  if (n > max_lines) out += "  ... " + std::to_string(n - max_lines) + " more (full certificate in the --json document)\n";
  return out;
}

Policy parse_policy(const std::string& text, const SpecPtr& spec) {
  if (text.empty()) return Policy::constant(spec, 0, spec->action_name(0));
  std::vector<int> actions;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      actions.push_back(spec->action_index(item));
    } catch (const std::exception&) {
      throw UsageError("--policy: unknown action '" + item + "'");
    }
  }
  if (actions.empty()) throw UsageError("--policy: no actions given");
  return Policy::by_step(spec, std::move(actions), text);
}

struct Output {
  Json doc;
  std::string summary;
  int code = ok;
};

void emit(const Output& result, const std::string& out_path, bool json, std::ostream& out) {
  Json doc = result.doc;
  doc["summary"] = result.summary;
  if (!out_path.empty()) write_file(out_path, doc.dump(2) + "\n");
  if (json) out << doc.dump(2) << "\n";
  else out << result.summary;
}

Output classify(const Scenario& s) {
  const auto& spec = *s.spec;
  Output r;
  r.doc["command"] = "classify";
  r.doc["input"] = s.name;
  std::string summary = "scenario " + (s.name.empty() ? std::string("(unnamed)") : s.name) + ": ";
  const PredictiveModel model(s.prior);
  auto unrig = check_unriggable(s.process, model);
  r.doc["unriggable"] = unrig.unriggable;
  if (!unrig.unriggable) {
    const auto& w = *unrig.witness;
    r.doc["verdict"] = "riggable";
    r.doc["uninfluenceable"] = false;
    r.doc["witness"] = witness_json(w, spec);
    summary += "riggable\n";
    summary += "witness: " + describe_witness(w, spec) + "\n";
    summary += "  expectation after " + spec.action_name(w.action) + ": " +
               reward_text(w.under_action, s.process.pool()) + "\n";
    summary += "  expectation after " + spec.action_name(w.alternative) + ": " +
               reward_text(w.under_alternative, s.process.pool()) + "\n";
    r.summary = summary;
    return r;
  }
  auto infl = check_uninfluenceable(s.process, s.prior);
  r.doc["uninfluenceable"] = infl.uninfluenceable;
  if (infl.uninfluenceable) {
    r.doc["verdict"] = "uninfluenceable";
    r.doc["eta"] = eta_json(*infl.eta);
    summary += "uninfluenceable\neta:\n" + eta_text(*infl.eta, &s.prior);
  } else {
    r.doc["verdict"] = "unriggable, influenceable";
    if (infl.infeasibility_note) r.doc["infeasibility"] = *infl.infeasibility_note;
    summary += "unriggable, influenceable\n";
    if (infl.infeasibility_note) summary += abbreviated(*infl.infeasibility_note, 8);
  }
  r.summary = summary;
  return r;
}

Scenario derived(const Scenario& s, const std::string& suffix, Prior prior, LearningProcess process) {
  return {s.name.empty() ? suffix : s.name + "_" + suffix, prior.spec_ptr(), std::move(prior), std::move(process)};
}

Output construct(const std::string& kind, const Scenario& s, const std::string& policy_text) {
  const auto& spec = *s.spec;
  Output r;
  r.doc["command"] = "construct";
  r.doc["construction"] = kind;
  r.doc["input"] = s.name;
  std::string summary;
  ConstructionReport report;

  if (kind == "counterfactual") {
    Policy pi = parse_policy(policy_text, s.spec);
    auto eta = counterfactual_eta(s.process, pi, s.prior.environments());
    auto process = induced_process(eta, s.prior);
    auto infl = check_uninfluenceable(process, s.prior);
    report.add("counterfactual process is uninfluenceable", infl.uninfluenceable);
    report.add("counterfactual process is unriggable", check_unriggable(process, s.prior).unriggable);
    r.doc["policy"] = pi.name();
    r.doc["eta"] = eta_json(eta);
    r.doc["scenario"] = scenario_to_json(derived(s, "counterfactual", s.prior, process));
    summary = "counterfactual process under default policy " + pi.name() + "\neta:\n" + eta_text(eta);
  } else if (kind == "unriggable") {
    Policy pi = parse_policy(policy_text, s.spec);
    auto c = make_unriggable(s.process, s.prior, pi);
    report = c.report;
    auto labels = pool_labels(c.process.pool());
    auto original = image(s.process);
    auto original_labels = pool_labels(original);
    Json hull = Json::object();
    for (std::size_t k = 0; k < c.hull_coefficients.size(); ++k) {
      Json coeffs = Json::object();
      for (std::size_t i = 0; i < c.hull_coefficients[k].size(); ++i)
        coeffs[original_labels[i]] = format_rational(c.hull_coefficients[k][i]);
      hull[labels[k]] = std::move(coeffs);
    }
    r.doc["policy"] = pi.name();
    r.doc["hull_coefficients"] = std::move(hull);
    r.doc["leaves_convex_hull"] = c.leaves_convex_hull;
    r.doc["scenario"] = scenario_to_json(derived(s, "unriggable", s.prior, c.process));
    summary = "unriggable process under default policy " + pi.name() + "\n";
    for (std::size_t h = 0; h < spec.complete_count(); ++h) {
      summary += "  " + quoted(spec, spec.complete_history(h)) + " -> " +
                 distribution_json(c.process.distribution(h), labels).dump() + "\n";
    }
    if (c.leaves_convex_hull) summary += "some reward function lies outside the convex hull of the original image\n";
  } else if (kind == "uninfluenceable") {
    auto c = unriggable_to_uninfluenceable(s.process, s.prior);
    report = c.report;
    r.doc["environments"] = c.prior.size();
    r.doc["eta"] = eta_json(c.eta);
    r.doc["scenario"] = scenario_to_json(derived(s, "uninfluenceable", c.prior, c.process));
    summary = "uninfluenceable process over " + std::to_string(c.prior.size()) + " deterministic environments\neta':\n";
    auto labels = pool_labels(c.eta.pool());
    for (std::size_t e = 0; e < c.prior.size(); ++e) {
      summary += "  " + c.eta.environment_name(e) + " (weight " + format_rational(c.prior.weight(e)) + ") -> " +
                 distribution_json(c.eta.distribution(e), labels).dump() + "\n";
    }
  } else if (kind == "sacrifice") {
    auto d = sacrifice_relabeling(s.process, s.prior);
    report = d.report;
    auto node = spec.node_id(d.witness.history);
    Json sigma = Json::object();
    for (const auto& rw : image(s.process)) sigma[rw.label().empty() ? reward_table_json(rw).dump() : rw.label()] = reward_table_json(d.sigma.apply(rw));
    r.doc["witness"] = witness_json(d.witness, spec);
    r.doc["sigma"] = std::move(sigma);
    r.doc["optimal_action"] = spec.action_name(*d.optimal.deterministic_action(node));
    r.doc["better_action"] = spec.action_name(*d.better.deterministic_action(node));
    r.doc["scenario"] = scenario_to_json(derived(s, "relabeled", s.prior, d.relabeled));
    summary = "relabeling at " + quoted(spec, d.witness.history) + ": the optimal policy takes " +
              spec.action_name(*d.optimal.deterministic_action(node)) + " and loses with certainty to taking " +
              spec.action_name(*d.better.deterministic_action(node)) + "\n";
  } else {
    throw UsageError("unknown construction '" + kind + "'");
  }
  r.doc["all_passed"] = report.all_passed();
  r.doc["checks"] = checks_json(report);
  r.summary = summary + checks_text(report);
  r.code = report.all_passed() ? ok : verification_failure;
  return r;
}

struct ExperimentOptions {
  std::string prior, agent = "both", csv, svg;
  int runs = 1000, episodes = 20000;
  std::uint64_t seed = 1;
  double epsilon = 0.1;
};

int experiment(const ExperimentOptions& o, std::ostream& out) {
  auto tag = grid::parse_prior_tag(o.prior);
  std::vector<grid::AgentKind> agents;
  if (o.agent == "both") agents = {grid::AgentKind::standard, grid::AgentKind::counterfactual};
  else agents = {grid::parse_agent_kind(o.agent)};
  grid::QLearningConfig config;
  config.episodes = o.episodes;
  config.epsilon = o.epsilon;
  std::vector<ExperimentSeries> series;
  for (auto agent : agents) series.push_back({agent, grid::aggregate_runs(tag, agent, o.runs, o.seed, config)});
  auto csv = experiment_csv(series);
  if (o.csv.empty()) out << csv;
  else write_file(o.csv, csv);
  if (!o.svg.empty()) {
    auto title = "prior " + std::string(grid::to_string(tag)) + ", " + std::to_string(o.runs) + " runs";
    write_file(o.svg, experiment_svg(series, title));
  }
  if (!o.csv.empty()) {
    for (const auto& s : series) {
      out << grid::to_string(s.agent) << ": nominal " << fixed6(s.stats.nominal_mean.back()) << " (sd "
          << fixed6(s.stats.nominal_std.back()) << "), true " << fixed6(s.stats.truth_mean.back()) << " (sd "
          << fixed6(s.stats.truth_std.back()) << ")\n";
    }
  }
  return ok;
}

int exact(const std::string& prior, const std::string& agent, std::ostream& out) {
  auto tag = grid::parse_prior_tag(prior);
  std::vector<grid::AgentKind> agents;
  if (agent == "both") agents = {grid::AgentKind::standard, grid::AgentKind::counterfactual};
  else agents = {grid::parse_agent_kind(agent)};
  for (auto a : agents) {
    out << grid::to_string(a) << " agent, prior " << grid::to_string(tag) << ":\n";
    for (const auto& v : grid::exact_policy_values(tag, a)) {
      out << "  " << v.description << ": nominal " << format_rational(v.nominal) << ", true "
          << format_rational(v.truth) << "\n";
    }
  }
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Classify, repair, and experiment with reward-learning processes", "rewardrig"};
  app.require_subcommand(1);

  std::string file, kind, policy, out_path, scenario_name;
  bool json = false, list = false;

  auto* cls = app.add_subcommand("classify", "Classify a scenario as riggable, unriggable, or uninfluenceable");
  cls->add_option("file", file, "Scenario JSON file")->required();
  cls->add_option("--out", out_path, "Write the result document to this file");
  cls->add_flag("--json", json, "Print the result document instead of the summary");

  auto* con = app.add_subcommand("construct", "Build a corrected learning process and verify it");
  con->add_option("kind", kind, "counterfactual, unriggable, uninfluenceable, or sacrifice")
      ->required()
      ->check(CLI::IsMember({"counterfactual", "unriggable", "uninfluenceable", "sacrifice"}));
  con->add_option("file", file, "Scenario JSON file")->required();
  con->add_option("--policy", policy, "Default policy as actions per step, e.g. M or a,b (last repeats)");
  con->add_option("--out", out_path, "Write the result document to this file");
  con->add_flag("--json", json, "Print the result document instead of the summary");

  ExperimentOptions eo;
  auto* exp = app.add_subcommand("experiment", "Run the Q-learning gridworld experiment");
  exp->add_option("--prior", eo.prior, "BD, DD, half, or correlated")
      ->required()
      ->check(CLI::IsMember({"BD", "DD", "half", "correlated", "xi1", "xi2"}));
  exp->add_option("--agent", eo.agent, "standard, counterfactual, or both")
      ->check(CLI::IsMember({"standard", "counterfactual", "both"}));
  exp->add_option("--runs", eo.runs, "Independent runs")->check(CLI::PositiveNumber);
  exp->add_option("--episodes", eo.episodes, "Episodes per run")->check(CLI::PositiveNumber);
  exp->add_option("--seed", eo.seed, "Base seed");
  exp->add_option("--epsilon", eo.epsilon, "Exploration rate")->check(CLI::Range(0.0, 1.0));
  exp->add_option("--csv", eo.csv, "CSV output path (stdout when omitted)");
  exp->add_option("--svg", eo.svg, "SVG chart output path");

  std::string exact_prior, exact_agent = "both";
  auto* ex = app.add_subcommand("exact", "Exact values of reference gridworld policies");
  ex->add_option("--prior", exact_prior, "BD, DD, half, or correlated")
      ->required()
      ->check(CLI::IsMember({"BD", "DD", "half", "correlated", "xi1", "xi2"}));
  ex->add_option("--agent", exact_agent, "standard, counterfactual, or both")
      ->check(CLI::IsMember({"standard", "counterfactual", "both"}));

  auto* sc = app.add_subcommand("scenario", "Print a built-in scenario as JSON");
  sc->add_option("name", scenario_name, "Built-in scenario name");
  sc->add_flag("--list", list, "List built-in scenario names");
  sc->add_option("--out", out_path, "Write to this file instead of stdout");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? ok : parse_error;
  }

  try {
    if (cls->parsed()) {
      auto result = classify(load_scenario(file));
      emit(result, out_path, json, out);
      return result.code;
    }
    if (con->parsed()) {
      auto result = construct(kind, load_scenario(file), policy);
      emit(result, out_path, json, out);
      return result.code;
    }
    if (exp->parsed()) return experiment(eo, out);
    if (ex->parsed()) return exact(exact_prior, exact_agent, out);
    if (sc->parsed()) {
      if (list) {
        for (const auto& n : builtin_scenario_names()) out << n << "\n";
        return ok;
      }
      if (scenario_name.empty()) throw UsageError("scenario: give a name or --list");
      std::string text;
      try {
        text = scenario_to_json(builtin_scenario(scenario_name)).dump(2) + "\n";
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      if (out_path.empty()) out << text;
      else write_file(out_path, text);
      return ok;
    }
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return parse_error;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return parse_error;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return io_error;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << "\n";
    return verification_failure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return verification_failure;
  }
  return ok;
}

}  // namespace rewardrig::cli
