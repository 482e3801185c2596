#include <doctest.h>

#include <filesystem>
#include <map>

#include "oracle.hpp"
#include "rewardrig/scenario_io.hpp"

using namespace rewardrig;

namespace {

const std::string kDir = REWARDRIG_SCENARIO_DIR;

/// Same alphabets, priors, kernels, and reward distributions (pool order may differ).
void check_equivalent(const Scenario& a, const Scenario& b) {
  REQUIRE(*a.spec == *b.spec);
  const auto& spec = *a.spec;
  REQUIRE(a.prior.size() == b.prior.size());
  for (std::size_t e = 0; e < a.prior.size(); ++e) {
    const auto& ea = a.prior.environment(e);
    const auto j = b.prior.index_of(ea.name());
    CHECK(a.prior.weight(e) == b.prior.weight(j));
    const auto& eb = b.prior.environment(j);
    for (std::size_t node = 0; node < spec.interior_count(); ++node)
      for (int act = 0; act < spec.num_actions(); ++act)
        for (int o = 0; o < spec.num_observations(); ++o) CHECK(ea.prob(node, act, o) == eb.prob(node, act, o));
  }
  auto as_map = [](const LearningProcess& rho, std::size_t i) {
    std::map<std::vector<Rational>, Rational> m;
    for (const auto& w : rho.distribution(i)) m[rho.pool()[w.reward].values()] += w.weight;
    return m;
  };
  for (std::size_t i = 0; i < spec.complete_count(); ++i) CHECK(as_map(a.process, i) == as_map(b.process, i));
}

std::string error_path(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ParseError& e) {
    return e.path();
  }
  return "<no error>";
}

const char* kMinimal = R"({
  "name": "tiny",
  "actions": ["a", "b"],
  "observations": ["x", "y"],
  "horizon": 1,
  "environments": [
    {"name": "mu", "observations": {"a": "x", "b": "y"}},
    {"name": "nu", "kernel": {"**": {"x": "1/3", "y": "2/3"}}}
  ],
  "prior": {"mu": "1/2", "nu": "1/2"},
  "rewards": {"R": {"* x": "1", "**": "0"}, "Z": "0"},
  "process": {"a *": "R", "**": {"R": "1/4", "Z": "3/4"}}
})";

}  // namespace

TEST_CASE("token patterns") {
  CHECK(pattern_matches("**", ""));
  CHECK(pattern_matches("**", "a x b y"));
  CHECK(pattern_matches("* x", "a x"));
  CHECK_FALSE(pattern_matches("* x", "a y"));
  CHECK_FALSE(pattern_matches("*", ""));
  CHECK(pattern_matches("a ** y", "a x b y"));
  CHECK(pattern_matches("a ** y", "a y"));
  CHECK_FALSE(pattern_matches("a ** y", "b x a y"));
  CHECK(pattern_matches("** b *", "a x b y"));
  CHECK_FALSE(pattern_matches("a", "ab"));
}

TEST_CASE("a minimal document parses") {
  auto s = parse_scenario(kMinimal);
  CHECK(s.name == "tiny");
  const auto& spec = *s.spec;
  CHECK(spec.horizon() == 1);
  const auto& nu = s.prior.environment(s.prior.index_of("nu"));
  CHECK(nu.prob(spec.parse_history(""), 0, 1) == Rational(2, 3));
  CHECK(history_prob_actions(spec.parse_history("b y"), s.prior.environment(0)) == 1);
  CHECK(expectation(s.process, spec.parse_history("a x")).values() == std::vector<Rational>{1, 0, 1, 0});
  CHECK(expectation(s.process, spec.parse_history("b x")).values() ==
        std::vector<Rational>{Rational(1, 4), 0, Rational(1, 4), 0});
}

TEST_CASE("parse errors name the offending field") {
  Json doc = Json::parse(kMinimal);
  auto with = [&](auto edit) {
    Json d = doc;
    edit(d);
    return error_path(d.dump());
  };
  CHECK(with([](Json& d) { d["environments"][0]["observations"]["a"] = "q"; }) == "$.environments[0].observations.a");
  CHECK(with([](Json& d) { d["prior"]["mu"] = 0.5; }) == "$.prior.mu");
  CHECK(with([](Json& d) { d["prior"]["mu"] = "1/3"; }) == "$.prior");
  CHECK(with([](Json& d) { d["prior"].erase("nu"); }) == "$.prior");
  CHECK(with([](Json& d) { d["horizon"] = 0; }) == "$.horizon");
  CHECK(with([](Json& d) { d.erase("rewards"); }) == "$.rewards");
  CHECK(with([](Json& d) { d["process"] = Json::object({{"**", "R"}, {"a x", "Z"}}); }) == "$.process[\"a x\"]");
  CHECK(with([](Json& d) { d["process"] = Json::object({{"a *", "R"}}); }) == "$.process");
  CHECK(with([](Json& d) { d["actions"] = Json::array({"a", "a"}); }) == "$.actions[1]");
  CHECK(with([](Json& d) { d["environments"][1]["kernel"]["**"]["x"] = "1/2"; }) == "$.environments[1].kernel[\"**\"]");
  CHECK(error_path("{not json") == "$");
}

TEST_CASE("every built-in survives a JSON round trip") {
  for (const auto& name : builtin_scenario_names()) {
    CAPTURE(name);
    auto s = builtin_scenario(name);
    auto text = scenario_to_json(s).dump(2);
    auto back = parse_scenario(text);
    CHECK(back.name == s.name);
    check_equivalent(s, back);
    CHECK(scenario_to_json(back).dump(2) == text);
  }
}

TEST_CASE("bundled scenario files match the built-ins") {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kDir)) {
    if (entry.path().extension() != ".json") continue;
    const auto stem = entry.path().stem().string();
    CAPTURE(stem);
    check_equivalent(load_scenario(entry.path().string()), builtin_scenario(stem));
    ++seen;
  }
  CHECK(seen >= 8);
}

TEST_CASE("result documents carrying a scenario load it") {
  Json doc;
  doc["command"] = "construct";
  doc["scenario"] = Json::parse(kMinimal);
  CHECK(scenario_from_json(doc).name == "tiny");
}

TEST_CASE("missing files are io errors") {
  CHECK_THROWS_AS(load_scenario(kDir + "/does_not_exist.json"), IoError);
  CHECK_THROWS_AS(write_file("/nonexistent-dir/x.json", "{}"), IoError);
}

TEST_CASE("pool labels") {
  auto spec = make_spec({"a"}, {"x"}, 1);
  RewardFunction r(spec, {1}, "R"), s(spec, {2}, "R"), t(spec, {3}, "T"), u(spec, {4});
  CHECK(pool_labels({r, s, t, u}) == std::vector<std::string>{"R#0", "R#1", "T", "R#3"});
}
