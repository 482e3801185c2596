// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "random_scenarios.hpp"
#include "rewardrig/gridworld.hpp"

using namespace rewardrig;

namespace {

/// Collects failed expectations for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++count_;
    if (!ok) failures_.push_back(what);
  }
  bool passed() const { return failures_.empty(); }
  int count() const { return count_; }
  const std::vector<std::string>& failures() const { return failures_; }
  std::ostringstream note;

 private:
  int count_ = 0;
  std::vector<std::string> failures_;
};

RewardFunction combo(const Rational& a, const RewardFunction& x, const Rational& b, const RewardFunction& y) {
  return a * x + b * y;
}

void classification(Check& c) {
  auto x1 = parental(ParentalPrior::xi1);
  auto v1 = check_uninfluenceable(x1.process, x1.prior);
  c.expect(v1.uninfluenceable, "xi1 uninfluenceable");
  if (v1.eta) {
    c.expect(v1.eta->expectation(x1.prior.index_of("mu_BB")).same_values(x1.process.pool()[0]), "eta(mu_BB) = R_B");
    c.expect(v1.eta->expectation(x1.prior.index_of("mu_DD")).same_values(x1.process.pool()[1]), "eta(mu_DD) = R_D");
  }
  auto x2 = parental(ParentalPrior::xi2);
  c.expect(check_unriggable(x2.process, x2.prior).unriggable, "xi2 unriggable");
  auto v2 = check_uninfluenceable(x2.process, x2.prior);
  c.expect(!v2.uninfluenceable && v2.infeasibility_note.has_value(), "xi2 infeasible eta");
  for (auto s : {parental(ParentalPrior::BD), parental_with_no_ask(ParentalPrior::DD)}) {
    auto v = check_unriggable(s.process, s.prior);
    c.expect(!v.unriggable && v.witness && v.witness->history.empty(), s.name + " riggable at the empty history");
  }
  auto ch = chess();
  c.expect(check_unriggable(ch.process, ch.prior).unriggable, "chess unriggable");
}

void uninfluenceable_construction(Check& c) {
  auto s = parental(ParentalPrior::xi2);
  auto k = unriggable_to_uninfluenceable(s.process, s.prior);
  c.expect(k.report.all_passed(), "construction self-checks");
  const auto& rb = s.process.pool()[0];
  const auto& rd = s.process.pool()[1];
  auto eta_at = [&](const std::string& name) {
    for (std::size_t e = 0; e < k.eta.size(); ++e)
      if (k.eta.environment_name(e) == name) return k.eta.expectation(e);
    return RewardFunction(s.spec, std::vector<Rational>(s.spec->complete_count()));
  };
  const Rational h(1, 2), up(3, 2), down(-1, 2);
  c.expect(eta_at("mu[B,B]").same_values(combo(up, rb, down, rd)), "eta'(mu[B,B])");
  c.expect(eta_at("mu[B,D]").same_values(combo(h, rb, h, rd)), "eta'(mu[B,D])");
  c.expect(eta_at("mu[D,B]").same_values(combo(h, rb, h, rd)), "eta'(mu[D,B])");
  c.expect(eta_at("mu[D,D]").same_values(combo(down, rb, up, rd)), "eta'(mu[D,D])");

  const auto& spec = *s.spec;
  bool transitions = true, expectations = true;
  for (std::size_t node = 0; node < spec.interior_count(); ++node) {
    const auto& hist = spec.node(node);
    const Rational p = oracle::mixture_path(hist, s.prior);
    if (p == 0) continue;
    const Rational q = oracle::mixture_path(hist, k.prior);
    for (int a = 0; a < spec.num_actions(); ++a)
      for (int o = 0; o < spec.num_observations(); ++o) {
        auto next = hist.extended(a, o);
        transitions &= oracle::mixture_path(next, s.prior) / p == oracle::mixture_path(next, k.prior) / q;
      }
  }
  for (std::size_t i = 0; i < spec.complete_count(); ++i) {
    const auto& hist = spec.complete_history(i);
    if (oracle::mixture_path(hist, s.prior) == 0) continue;
    expectations &= expectation(k.process, hist).same_values(expectation(s.process, hist));
  }
  c.expect(transitions, "transition equivalence");
  c.expect(expectations, "matching expectations");

  auto t = total_information();
  auto kt = unriggable_to_uninfluenceable(t.process, t.prior);
  bool uniform = kt.prior.size() == 16;
  for (std::size_t e = 0; e < kt.prior.size(); ++e) uniform &= kt.prior.weight(e) == Rational(1, 16);
  c.expect(uniform, "sixteen environments, uniform prior");
}

void unriggable_construction(Check& c) {
  auto s = affine_hull_example();
  auto k = make_unriggable(s.process, s.prior, Policy::constant(s.spec, s.spec->action_index("a")));
  const auto& r = s.process.pool()[0];
  const auto& rp = s.process.pool()[1];
  auto point = [&](const char* h, const RewardFunction& want) {
    const auto& d = k.process.distribution(s.spec->parse_history(h));
    return d.size() == 1 && d[0].weight == 1 && k.process.pool()[d[0].reward].same_values(want);
  };
  c.expect(point("a' o", combo(Rational(3, 2), r, Rational(-1, 2), rp)), "point mass 3/2 R - 1/2 R'");
  c.expect(point("a' o'", combo(Rational(1, 2), r, Rational(1, 2), rp)), "point mass 1/2 R + 1/2 R'");
  c.expect(check_unriggable(k.process, s.prior).unriggable, "output unriggable");
  c.expect(k.leaves_convex_hull, "negative coefficient detected");
}

void sacrifice_demonstration(Check& c) {
  for (auto s : {parental(ParentalPrior::BD), parental_penalty()}) {
    auto d = sacrifice_relabeling(s.process, s.prior);
    c.expect(d.report.all_passed(), s.name + " self-checks");
    c.expect(oracle::sacrifices(d.optimal, d.better, d.witness.history, image(d.relabeled), s.prior),
             s.name + " brute-force sacrifice");
  }
}

void property_suite(Check& c) {
  std::mt19937_64 rng(5);
  std::mt19937_64 sigma_rng(6);
  const gen::Kind kinds[] = {gen::Kind::arbitrary, gen::Kind::induced, gen::Kind::repaired, gen::Kind::counterfactual};
  const int total = 200;
  int unriggable_count = 0;
  for (int i = 0; i < total; ++i) {
    const auto g = gen::random_scenario(rng, kinds[i % 4]);
    const auto& s = g.scenario;
    const auto& spec = *s.spec;
    const std::string tag = "scenario " + std::to_string(i) + ": ";
    auto unrig = check_unriggable(s.process, s.prior);
    c.expect(unrig.unriggable == oracle::unriggable(s.process, s.prior), tag + "(a) oracle agreement");
    auto infl = check_uninfluenceable(s.process, s.prior);
    c.expect(!infl.uninfluenceable || unrig.unriggable, tag + "(b) uninfluenceable implies unriggable");
    if (g.kind == gen::Kind::counterfactual) c.expect(infl.uninfluenceable, tag + "(e) counterfactual certified");

    if (unrig.unriggable) {
      ++unriggable_count;
      bool martingale = true;
      for (std::size_t node = 0; node < spec.interior_count(); ++node) {
        const auto& h = spec.node(node);
        const Rational ph = oracle::mixture_path(h, s.prior);
        if (ph == 0) continue;
        for (int a = 0; a < spec.num_actions(); ++a) {
          std::vector<Rational> next(spec.complete_count());
          for (int o = 0; o < spec.num_observations(); ++o) {
            auto hao = h.extended(a, o);
            const Rational p = oracle::mixture_path(hao, s.prior) / ph;
            if (p == 0) continue;
            const auto& child = unrig.extended->at(hao).values();
            for (std::size_t j = 0; j < next.size(); ++j) next[j] += p * child[j];
          }
          martingale &= next == unrig.extended->at(node).values();
        }
      }
      c.expect(martingale, tag + "(c) martingale");
      c.expect(!find_sacrifice(s.process, s.prior).has_value(), tag + "(d) no sacrifice");
    }

    const auto n = spec.complete_count();
    std::vector<Rational> base(n), u(n), v(n);
    for (std::size_t j = 0; j < n; ++j) {
      base[j] = gen::small_fraction(sigma_rng, -2, 2);
      u[j] = gen::small_fraction(sigma_rng, -2, 2);
      v[j] = gen::small_fraction(sigma_rng, -2, 2);
    }
    AffineRelabeling sigma(RewardFunction(s.spec, base), LinearPart{gen::small_fraction(sigma_rng, 1, 3), {{u, v}}},
                           s.process.pool());
    auto relabeled = apply_relabeling(sigma, s.process);
    bool commutes = true;
    for (std::size_t j = 0; j < n; ++j)
      commutes &= expectation_at(relabeled, j).same_values(sigma.apply(expectation_at(s.process, j)));
    c.expect(commutes, tag + "(f) relabeling commutes");
  }
  c.note << total << " scenarios, " << unriggable_count << " unriggable";
}

void experiment(Check& c) {
  using namespace grid;
  const auto exact = [&](PriorTag tag, AgentKind agent, const std::string& prefix, bool truth) {
    for (const auto& v : exact_policy_values(tag, agent))
      if (v.description.rfind(prefix, 0) == 0) return truth ? v.truth : v.nominal;
    return Rational(-1000);
  };
  const auto std_ = AgentKind::standard;
  const auto cf = AgentKind::counterfactual;
  c.expect(exact(PriorTag::BD, cf, "optimal", false) == Rational(99, 10), "exact 9.9");
  c.expect(exact(PriorTag::BD, std_, "optimal", false) == Rational(19, 2), "exact 9.5");
  c.expect(exact(PriorTag::DD, cf, "optimal", false) == Rational(9, 10), "exact 0.9");
  c.expect(exact(PriorTag::DD, std_, "optimal", false) == Rational(49, 10), "exact 4.9");
  c.expect(exact(PriorTag::DD, std_, "optimal", true) == Rational(-1, 10), "exact -0.1");
  c.expect(exact(PriorTag::BD, cf, "ask father", false) == Rational(97, 10), "exact 9.7");
  c.expect(exact(PriorTag::DD, std_, "ask father", false) == Rational(7, 10), "exact 0.7");
  c.expect(exact(PriorTag::half, std_, "optimal", false) == Rational(26, 5), "exact 5.2");
  c.expect(exact(PriorTag::half, cf, "optimal", false) == Rational(5), "exact 5.0");
  c.expect(exact(PriorTag::half, std_, "optimal", true) == Rational(49, 20), "exact 2.45");
  c.expect(exact(PriorTag::correlated, std_, "optimal", false) == Rational(26, 5), "exact 5.2 (correlated)");

  QLearningConfig config;
  const int runs = 1000;
  struct Target {
    PriorTag tag;
    AgentKind agent;
    double nominal;
    double truth;
    double truth_tol;
  };
  const double skip = NAN;
  const Target targets[] = {
      {PriorTag::BD, cf, 9.9, skip, 0},        {PriorTag::BD, std_, 9.5, skip, 0},
      {PriorTag::DD, cf, 0.9, skip, 0},        {PriorTag::DD, std_, 4.9, -0.1, 0.2},
      {PriorTag::half, std_, 5.2, 2.45, 0.3},  {PriorTag::half, cf, 5.0, skip, 0},
      {PriorTag::correlated, std_, 5.2, skip, 0}, {PriorTag::correlated, cf, 5.2, skip, 0},
  };
  std::vector<double> final_truth;
  for (const auto& t : targets) {
    auto stats = aggregate_runs(t.tag, t.agent, runs, 1, config);
    const double nominal = stats.nominal_mean.back();
    const double truth = stats.truth_mean.back();
    final_truth.push_back(truth);
    char label[160];
    std::snprintf(label, sizeof label, "%s/%s nominal %.3f (target %.2f)", std::string(to_string(t.tag)).c_str(),
                  std::string(to_string(t.agent)).c_str(), nominal, t.nominal);
    c.expect(std::abs(nominal - t.nominal) <= 0.2, label);
    if (!std::isnan(t.truth)) {
      std::snprintf(label, sizeof label, "%s/%s true %.3f (target %.2f)", std::string(to_string(t.tag)).c_str(),
                    std::string(to_string(t.agent)).c_str(), truth, t.truth);
      c.expect(std::abs(truth - t.truth) <= t.truth_tol, label);
    }
    c.note << to_string(t.tag) << "/" << to_string(t.agent) << " " << nominal << "/" << truth << "  ";
  }
  // Counterfactual above standard in true reward on BD and DD.
  c.expect(final_truth[0] > final_truth[1] - 1e-9, "BD: counterfactual true reward at least standard");
  c.expect(final_truth[2] > final_truth[3], "DD: counterfactual true reward above standard");
}

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<void(Check&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "classification golden set", 1, classification},
      {2, "unriggable to uninfluenceable construction", 10, uninfluenceable_construction},
      {3, "unriggable construction with convex-hull exit", 1, unriggable_construction},
      {4, "sacrifice relabeling demonstration", 5, sacrifice_demonstration},
      {5, "randomized property suite", 60, property_suite},
      {6, "gridworld experiment reproduction", 600, experiment},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    const auto t0 = std::chrono::steady_clock::now();
    std::string error;
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= cr.limit_seconds;
    const bool ok = check.passed() && error.empty() && in_time;
    failed += !ok;
    std::printf("%s criterion %d: %s (%d checks, %.2fs, limit %.0fs)\n", ok ? "PASS" : "FAIL", cr.id, cr.name.c_str(),
                check.count(), secs, cr.limit_seconds);
    if (!check.note.str().empty()) std::printf("    %s\n", check.note.str().c_str());
    for (const auto& f : check.failures()) std::printf("    failed: %s\n", f.c_str());
    if (!error.empty()) std::printf("    exception: %s\n", error.c_str());
    if (!in_time) std::printf("    exceeded time limit\n");
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
