#include <doctest.h>

#include "oracle.hpp"
#include "random_scenarios.hpp"

using namespace rewardrig;

namespace {

constexpr int kScenarios = 240;
constexpr gen::Kind kKinds[] = {gen::Kind::arbitrary, gen::Kind::induced, gen::Kind::repaired,
                                gen::Kind::counterfactual};

std::vector<gen::Generated> corpus() {
  std::mt19937_64 rng(20240601);
  std::vector<gen::Generated> out;
  for (int i = 0; i < kScenarios; ++i) out.push_back(gen::random_scenario(rng, kKinds[i % 4]));
  return out;
}

const std::vector<gen::Generated>& shared_corpus() {
  static const auto c = corpus();
  return c;
}

RewardFunction mix(const std::vector<RewardFunction>& pool, const std::vector<WeightedReward>& dist) {
  std::vector<Rational> v(pool.front().values().size());
  for (const auto& w : dist)
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += w.weight * pool[w.reward].values()[i];
  return RewardFunction(pool.front().spec_ptr(), std::move(v));
}

}  // namespace

TEST_CASE("the corpus covers every verdict") {
  int riggable = 0, unrig_only = 0, uninfluenceable = 0;
  for (const auto& g : shared_corpus()) {
    const auto& s = g.scenario;
    if (!check_unriggable(s.process, s.prior).unriggable)
      ++riggable;
    else if (check_uninfluenceable(s.process, s.prior).uninfluenceable)
      ++uninfluenceable;
    else
      ++unrig_only;
  }
  CHECK(riggable > 10);
  CHECK(unrig_only > 10);
  CHECK(uninfluenceable > 10);
}

TEST_CASE("backward induction agrees with policy enumeration") {
  for (const auto& g : shared_corpus()) {
    const auto& s = g.scenario;
    const bool fast = check_unriggable(s.process, s.prior).unriggable;
    CHECK(fast == oracle::unriggable(s.process, s.prior));
    CHECK(fast == check_unriggable_oracle(s.process, s.prior).unriggable);
  }
}

TEST_CASE("uninfluenceable implies unriggable, and eta reproduces rho") {
  for (const auto& g : shared_corpus()) {
    const auto& s = g.scenario;
    auto v = check_uninfluenceable(s.process, s.prior);
    if (g.kind == gen::Kind::induced || g.kind == gen::Kind::counterfactual) CHECK(v.uninfluenceable);
    if (!v.uninfluenceable) continue;
    CHECK(check_unriggable(s.process, s.prior).unriggable);
    for (std::size_t i = 0; i < s.spec->complete_count(); ++i) {
      const auto& h = s.spec->complete_history(i);
      auto induced = oracle::induced_expectation(*v.eta, s.prior, h);
      if (induced) CHECK(*induced == oracle::expectation_of(s.process, h).values());
    }
  }
}

TEST_CASE("repaired processes are unriggable") {
  for (const auto& g : shared_corpus())
    if (g.kind == gen::Kind::repaired) CHECK(check_unriggable(g.scenario.process, g.scenario.prior).unriggable);
}

TEST_CASE("the extended expectation is a martingale") {
  for (const auto& g : shared_corpus()) {
    const auto& s = g.scenario;
    const auto v = check_unriggable(s.process, s.prior);
    if (!v.unriggable) continue;
    const auto& spec = *s.spec;
    const auto& ext = *v.extended;
    for (std::size_t node = 0; node < spec.node_count(); ++node) {
      const auto& h = spec.node(node);
      const Rational ph = oracle::mixture_path(h, s.prior);
      if (ph == 0) continue;
      REQUIRE(ext.defined(node));
      if (node >= spec.interior_count()) {
        CHECK(ext.at(node).values() == oracle::expectation_of(s.process, h).values());
        continue;
      }
      for (int a = 0; a < spec.num_actions(); ++a) {
        std::vector<Rational> next(spec.complete_count());
        for (int o = 0; o < spec.num_observations(); ++o) {
          auto hao = h.extended(a, o);
          const Rational p = oracle::mixture_path(hao, s.prior) / ph;
          if (p == 0) continue;
          const auto& child = ext.at(hao).values();
          for (std::size_t i = 0; i < next.size(); ++i) next[i] += p * child[i];
        }
        CHECK(next == ext.at(node).values());
      }
    }
  }
}

TEST_CASE("unriggable processes never sacrifice reward with certainty") {
  for (const auto& g : shared_corpus()) {
    const auto& s = g.scenario;
    if (!check_unriggable(s.process, s.prior).unriggable) continue;
    CHECK_FALSE(find_sacrifice(s.process, s.prior).has_value());
  }
}

TEST_CASE("sacrifices found by the search are confirmed by brute force") {
  int found = 0;
  for (const auto& g : shared_corpus()) {
    const auto& s = g.scenario;
    auto f = find_sacrifice(s.process, s.prior);
    if (!f) continue;
    ++found;
    CHECK(oracle::sacrifices(f->optimal, f->better, f->history, image(s.process), s.prior));
  }
  CHECK(found > 0);
}

TEST_CASE("unriggable processes extend to uninfluenceable ones") {
  int built = 0;
  for (const auto& g : shared_corpus()) {
    const auto& s = g.scenario;
    if (!check_unriggable(s.process, s.prior).unriggable) continue;
    auto c = unriggable_to_uninfluenceable(s.process, s.prior);
    CHECK(c.report.all_passed());
    CHECK(check_uninfluenceable(c.process, c.prior).uninfluenceable);
    ++built;
  }
  CHECK(built > 20);
}

TEST_CASE("expectation commutes with affine relabeling") {
  std::mt19937_64 rng(77);
  for (const auto& g : shared_corpus()) {
    const auto& s = g.scenario;
    const auto& pool = s.process.pool();
    const auto n = s.spec->complete_count();
    std::vector<Rational> base(n), u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      base[i] = gen::small_fraction(rng, -2, 2);
      u[i] = gen::small_fraction(rng, -2, 2);
      v[i] = gen::small_fraction(rng, -2, 2);
    }
    LinearPart linear{gen::small_fraction(rng, 1, 3), {{u, v}}};
    AffineRelabeling sigma(RewardFunction(s.spec, base), linear, pool);
    auto relabeled = apply_relabeling(sigma, s.process);
    for (std::size_t i = 0; i < n; ++i) {
      const auto want = sigma.apply(mix(pool, s.process.distribution(i)));
      CHECK(expectation_at(relabeled, i).values() == want.values());
    }
  }
}
