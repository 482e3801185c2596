#pragma once

// Slow reference computations used only by the tests. They touch nothing in
// the library beyond alphabets, kernels, and stored tables.

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "rewardrig/classify.hpp"
#include "rewardrig/constructions.hpp"
#include "rewardrig/scenarios.hpp"

namespace oracle {

using rewardrig::Environment;
using rewardrig::History;
using rewardrig::HorizonSpec;
using rewardrig::LearningProcess;
using rewardrig::Prior;
using rewardrig::Rational;
using rewardrig::RewardFunction;

/// All histories of length m, built by direct recursion.
inline std::vector<History> histories_of_length(const HorizonSpec& spec, int m) {
  std::vector<History> out{History()};
  for (int k = 0; k < m; ++k) {
    std::vector<History> next;
    for (const auto& h : out)
      for (int a = 0; a < spec.num_actions(); ++a)
        for (int o = 0; o < spec.num_observations(); ++o) next.push_back(h.extended(a, o));
    out = std::move(next);
  }
  return out;
}

/// Product of observation probabilities along h in one environment.
inline Rational observation_path(const History& h, const Environment& env) {
  Rational p = 1;
  for (std::size_t k = 0; k < h.length() && p != 0; ++k)
    p *= env.prob(h.prefix(k), h[k].action, h[k].observation);
  return p;
}

inline Rational mixture_path(const History& h, const Prior& prior) {
  Rational p = 0;
  for (std::size_t i = 0; i < prior.size(); ++i) p += prior.weight(i) * observation_path(h, prior.environment(i));
  return p;
}

/// A deterministic policy as a function from histories to actions.
using DetPolicy = std::function<int(const History&)>;

/// Every deterministic policy over the interior nodes, as lookup tables.
inline std::vector<DetPolicy> all_policies(const HorizonSpec& spec) {
  std::vector<History> interior;
  for (int m = 0; m < spec.horizon(); ++m)
    for (auto& h : histories_of_length(spec, m)) interior.push_back(h);
  std::vector<DetPolicy> out;
  std::vector<int> digits(interior.size(), 0);
  while (true) {
    auto table = std::make_shared<std::vector<std::pair<History, int>>>();
    for (std::size_t i = 0; i < interior.size(); ++i) table->emplace_back(interior[i], digits[i]);
    out.push_back([table](const History& h) {
      for (const auto& [k, a] : *table)
        if (k == h) return a;
      return 0;
    });
    std::size_t i = 0;
    while (i < digits.size() && ++digits[i] == spec.num_actions()) digits[i++] = 0;
    if (i == digits.size()) break;
  }
  return out;
}

inline RewardFunction expectation_of(const LearningProcess& rho, const History& h_n) {
  const auto& spec = rho.spec();
  std::vector<Rational> values(spec.complete_count());
  for (std::size_t k = 0; k < rho.pool().size(); ++k) {
    Rational w = rho.probability(spec.complete_index(h_n), k);
    if (w == 0) continue;
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += w * rho.pool()[k].at(i);
  }
  return RewardFunction(rho.spec_ptr(), std::move(values));
}

/// sum_{h_n extending h_m} P(h_n | h_m, pi, xi) e_rho(h_n); h_m must be possible.
inline std::vector<Rational> conditional_expectation(const LearningProcess& rho, const Prior& prior,
                                                     const DetPolicy& pi, const History& h_m) {
  const auto& spec = rho.spec();
  const Rational base = mixture_path(h_m, prior);
  std::vector<Rational> out(spec.complete_count());
  std::function<void(const History&)> walk = [&](const History& h) {
    if (static_cast<int>(h.length()) == spec.horizon()) {
      Rational p = mixture_path(h, prior) / base;
      if (p == 0) return;
      auto e = expectation_of(rho, h);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += p * e.at(i);
      return;
    }
    const int a = pi(h);
    for (int o = 0; o < spec.num_observations(); ++o) walk(h.extended(a, o));
  };
  walk(h_m);
  return out;
}

/// Unriggable iff every deterministic policy yields the same conditional
/// expectation at every possible interior history.
inline bool unriggable(const LearningProcess& rho, const Prior& prior) {
  const auto& spec = rho.spec();
  auto policies = all_policies(spec);
  for (int m = 0; m < spec.horizon(); ++m) {
    for (const auto& h : histories_of_length(spec, m)) {
      if (mixture_path(h, prior) == 0) continue;
      auto first = conditional_expectation(rho, prior, policies.front(), h);
      for (std::size_t p = 1; p < policies.size(); ++p)
        if (conditional_expectation(rho, prior, policies[p], h) != first) return false;
    }
  }
  return true;
}

/// P(R | h_n) induced by eta through xi, with the posterior computed from
/// path products; nullopt at impossible histories.
inline std::optional<std::vector<Rational>> induced_distribution(const rewardrig::EnvConditional& eta,
                                                                 const Prior& prior, const History& h_n) {
  const Rational total = mixture_path(h_n, prior);
  if (total == 0) return std::nullopt;
  std::vector<Rational> out(eta.pool().size());
  for (std::size_t e = 0; e < prior.size(); ++e) {
    Rational post = prior.weight(e) * observation_path(h_n, prior.environment(e)) / total;
    if (post == 0) continue;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += post * eta.probability(e, k);
  }
  return out;
}

/// e_eta pushed through the posterior at h_n.
inline std::optional<std::vector<Rational>> induced_expectation(const rewardrig::EnvConditional& eta,
                                                                const Prior& prior, const History& h_n) {
  auto dist = induced_distribution(eta, prior, h_n);
  if (!dist) return std::nullopt;
  std::vector<Rational> out(eta.pool().front().values().size());
  for (std::size_t k = 0; k < dist->size(); ++k)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += (*dist)[k] * eta.pool()[k].at(i);
  return out;
}

/// Complete histories reachable with positive probability from h_m under
/// a deterministic rewardrig::Policy.
inline std::vector<History> reachable_completions(const rewardrig::Policy& pi, const Prior& prior, const History& h_m) {
  const auto& spec = prior.spec();
  std::vector<History> out;
  std::function<void(const History&)> walk = [&](const History& h) {
    if (mixture_path(h, prior) == 0) return;
    if (static_cast<int>(h.length()) == spec.horizon()) {
      out.push_back(h);
      return;
    }
    for (int a = 0; a < spec.num_actions(); ++a) {
      if (pi.prob(h, a) == 0) continue;
      for (int o = 0; o < spec.num_observations(); ++o) walk(h.extended(a, o));
    }
  };
  walk(h_m);
  return out;
}

/// Brute-force sacrifice check: every reward in the image strictly prefers
/// every completion of `good` to every completion of `bad`.
inline bool sacrifices(const rewardrig::Policy& bad, const rewardrig::Policy& good, const History& h_m,
                       const std::vector<RewardFunction>& image, const Prior& prior) {
  auto bad_h = reachable_completions(bad, prior, h_m);
  auto good_h = reachable_completions(good, prior, h_m);
  if (bad_h.empty() || good_h.empty()) return false;
  for (const auto& r : image)
    for (const auto& b : bad_h)
      for (const auto& g : good_h)
        if (!(r(g) > r(b))) return false;
  return true;
}

}  // namespace oracle
