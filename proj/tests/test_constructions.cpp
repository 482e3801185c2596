#include <doctest.h>

#include <map>

#include "oracle.hpp"
#include "rewardrig/scenarios.hpp"

using namespace rewardrig;

namespace {

RewardFunction combo(const Rational& a, const RewardFunction& x, const Rational& b, const RewardFunction& y) {
  return a * x + b * y;
}

/// eta' expectation for the environment with the given name.
RewardFunction eta_of(const EnvConditional& eta, const std::string& name) {
  for (std::size_t e = 0; e < eta.size(); ++e)
    if (eta.environment_name(e) == name) return eta.expectation(e);
  FAIL("no environment " << name);
  return eta.pool().front();
}

}  // namespace

TEST_CASE("affine coefficients and labels") {
  auto s = affine_hull_example();
  const auto& r = s.process.pool()[0];
  const auto& rp = s.process.pool()[1];
  auto target = combo(Rational(3, 2), r, Rational(-1, 2), rp);
  auto coeffs = affine_coefficients(target, {r, rp});
  REQUIRE(coeffs.has_value());
  CHECK(*coeffs == std::vector<Rational>{Rational(3, 2), Rational(-1, 2)});
  CHECK(affine_label(*coeffs, {r, rp}) == "3/2*R - 1/2*R'");
  CHECK(describe_in_terms_of(target, {r, rp}) == "3/2*R - 1/2*R'");

  auto spec = make_spec({"a"}, {"x", "y"}, 1);
  RewardFunction e1(spec, {1, 0}), e2(spec, {0, 1}), off(spec, {1, 1});
  CHECK_FALSE(affine_coefficients(off, {e1, e2}).has_value());
}

TEST_CASE("make_unriggable on the affine-hull example leaves the convex hull") {
  auto s = affine_hull_example();
  auto pi = Policy::constant(s.spec, s.spec->action_index("a"));
  auto c = make_unriggable(s.process, s.prior, pi);
  CHECK(c.report.all_passed());
  CHECK(c.leaves_convex_hull);

  const auto& r = s.process.pool()[0];
  const auto& rp = s.process.pool()[1];
  auto expect_point = [&](const char* h, const RewardFunction& want) {
    const auto& dist = c.process.distribution(s.spec->parse_history(h));
    REQUIRE(dist.size() == 1);
    CHECK(dist[0].weight == 1);
    CHECK(c.process.pool()[dist[0].reward].same_values(want));
  };
  expect_point("a o", r);
  expect_point("a o'", r);
  expect_point("a' o", combo(Rational(3, 2), r, Rational(-1, 2), rp));
  expect_point("a' o'", combo(Rational(1, 2), r, Rational(1, 2), rp));
  CHECK(oracle::unriggable(c.process, s.prior));

  // Expectation at the empty history is that of rho under pi.
  oracle::DetPolicy take_a = [](const History&) { return 0; };
  CHECK(oracle::conditional_expectation(c.process, s.prior, take_a, History()) ==
        oracle::conditional_expectation(s.process, s.prior, take_a, History()));
}

TEST_CASE("make_unriggable fixes riggable parental processes") {
  for (auto s : {parental(ParentalPrior::BD), parental_penalty(), parental_with_no_ask(ParentalPrior::DD)}) {
    CAPTURE(s.name);
    auto c = make_unriggable(s.process, s.prior, Policy::constant(s.spec, 0));
    CHECK(c.report.all_passed());
    CHECK(oracle::unriggable(c.process, s.prior));
  }
}

TEST_CASE("xi2 to uninfluenceable reproduces the worked eta'") {
  auto s = parental(ParentalPrior::xi2);
  auto c = unriggable_to_uninfluenceable(s.process, s.prior);
  CHECK(c.report.all_passed());
  REQUIRE(c.prior.size() == 4);
  const auto& rb = s.process.pool()[0];
  const auto& rd = s.process.pool()[1];
  CHECK(eta_of(c.eta, "mu[B,B]").same_values(combo(Rational(3, 2), rb, Rational(-1, 2), rd)));
  CHECK(eta_of(c.eta, "mu[B,D]").same_values(combo(Rational(1, 2), rb, Rational(1, 2), rd)));
  CHECK(eta_of(c.eta, "mu[D,B]").same_values(combo(Rational(1, 2), rb, Rational(1, 2), rd)));
  CHECK(eta_of(c.eta, "mu[D,D]").same_values(combo(Rational(-1, 2), rb, Rational(3, 2), rd)));

  // Transition equivalence and matching expectations, checked by path sums.
  const auto& spec = *s.spec;
  for (std::size_t node = 0; node < spec.interior_count(); ++node) {
    const auto& h = spec.node(node);
    const Rational ph = oracle::mixture_path(h, s.prior);
    if (ph == 0) continue;
    for (int a = 0; a < spec.num_actions(); ++a)
      for (int o = 0; o < spec.num_observations(); ++o) {
        auto hao = h.extended(a, o);
        CHECK(oracle::mixture_path(hao, s.prior) / ph ==
              oracle::mixture_path(hao, c.prior) / oracle::mixture_path(h, c.prior));
      }
  }
  for (std::size_t i = 0; i < spec.complete_count(); ++i) {
    const auto& h = spec.complete_history(i);
    if (oracle::mixture_path(h, s.prior) == 0) continue;
    CHECK(*oracle::induced_expectation(c.eta, c.prior, h) == oracle::expectation_of(s.process, h).values());
  }
  CHECK(oracle::unriggable(c.process, c.prior));
}

TEST_CASE("total information needs sixteen environments") {
  auto s = total_information();
  auto c = unriggable_to_uninfluenceable(s.process, s.prior);
  CHECK(c.report.all_passed());
  REQUIRE(c.prior.size() == 16);
  for (std::size_t e = 0; e < 16; ++e) CHECK(c.prior.weight(e) == Rational(1, 16));

  const auto& rb = s.process.pool()[0];
  const auto& rd = s.process.pool()[1];
  auto high_b = combo(Rational(3, 2), rb, Rational(-1, 2), rd);
  auto high_d = combo(Rational(-1, 2), rb, Rational(3, 2), rd);
  auto middle = combo(Rational(1, 2), rb, Rational(1, 2), rd);
  std::map<std::string, RewardFunction> want;
  for (const char* n : {"mu[BB,BB]", "mu[BB,DB]", "mu[BD,DB]", "mu[BD,BB]"}) want.emplace(n, high_b);
  for (const char* n : {"mu[DD,DD]", "mu[DD,BD]", "mu[DB,BD]", "mu[DB,DD]"}) want.emplace(n, high_d);
  int middles = 0;
  for (std::size_t e = 0; e < c.eta.size(); ++e) {
    const auto& name = c.eta.environment_name(e);
    CAPTURE(name);
    auto it = want.find(name);
    if (it != want.end()) {
      CHECK(c.eta.expectation(e).same_values(it->second));
    } else {
      CHECK(c.eta.expectation(e).same_values(middle));
      ++middles;
    }
  }
  CHECK(middles == 8);
}

TEST_CASE("construction preconditions") {
  auto x3 = parental(ParentalPrior::BD);
  CHECK_THROWS_AS(unriggable_to_uninfluenceable(x3.process, x3.prior), PreconditionError);
  auto x2 = parental(ParentalPrior::xi2);
  CHECK_THROWS_AS(sacrifice_relabeling(x2.process, x2.prior), PreconditionError);
  CHECK_THROWS_AS(unriggable_to_uninfluenceable(x2.process, x2.prior, 3), SizeError);
}

TEST_CASE("sacrifice relabeling on xi3 and the penalty variant") {
  for (auto s : {parental(ParentalPrior::BD), parental_penalty(), parental_with_no_ask(ParentalPrior::DD)}) {
    CAPTURE(s.name);
    auto d = sacrifice_relabeling(s.process, s.prior);
    CHECK(d.report.all_passed());
    CHECK(d.optimal.deterministic_action(0) == d.witness.action);
    CHECK(d.better.deterministic_action(0) == d.witness.alternative);
    CHECK(oracle::sacrifices(d.optimal, d.better, d.witness.history, image(d.relabeled), s.prior));
    // sigma maps the two witness expectations to +1 and -1 on the shared branch.
    auto f1 = d.sigma.apply(d.witness.under_action);
    const auto [lo, hi] = s.spec->completion_range(s.spec->child_id(0, d.witness.action, 0));
    CHECK(f1.at(lo) == 1);
    CHECK(lo < hi);
  }
}

TEST_CASE("affine relabelings") {
  auto s = parental(ParentalPrior::xi2);
  auto id = AffineRelabeling::identity(s.process.pool());
  CHECK(id.apply(s.process.pool()[0]).same_values(s.process.pool()[0]));
  auto spec = make_spec({"a"}, {"x", "y", "z"}, 1);
  RewardFunction e1(spec, {1, 0, 0}), e2(spec, {0, 1, 0}), e3(spec, {0, 0, 1});
  AffineRelabeling sigma(RewardFunction(spec, {1, 1, 1}), LinearPart{2, {}}, {e1, e2});
  CHECK(sigma.apply(e1).values() == std::vector<Rational>{3, 1, 1});
  CHECK(sigma.in_domain(combo(Rational(2), e1, Rational(-1), e2)));
  CHECK_FALSE(sigma.in_domain(e3));
  CHECK_THROWS_AS(sigma.apply(e3), DomainError);
}

TEST_CASE("counterfactual eta follows the default policy") {
  auto s = parental(ParentalPrior::xi2);
  auto ask_mother = Policy::constant(s.spec, s.spec->action_index("M"));
  auto eta = counterfactual_eta(s.process, ask_mother, s.prior.environments());
  const auto& rb = s.process.pool()[0];
  const auto& rd = s.process.pool()[1];
  CHECK(eta.expectation(s.prior.index_of("mu_BD")).same_values(rb));
  CHECK(eta.expectation(s.prior.index_of("mu_DB")).same_values(rd));
  auto rho_pi = induced_process(eta, s.prior);
  CHECK(check_uninfluenceable(rho_pi, s.prior).uninfluenceable);

  auto grid = builtin_scenario("gridworld_half");
  auto east = Policy::constant(grid.spec, grid.spec->action_index("E"));
  auto geta = counterfactual_eta(grid.process, east, grid.prior.environments());
  for (std::size_t e = 0; e < grid.prior.size(); ++e) {
    const auto& name = grid.prior.environment(e).name();
    CAPTURE(name);
    const bool mother_b = name[3] == 'B';
    CHECK(geta.expectation(e).same_values(grid.process.pool()[mother_b ? 0 : 1]));
  }
}
