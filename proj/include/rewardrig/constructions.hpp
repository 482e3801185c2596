#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rewardrig/classify.hpp"

namespace rewardrig {

struct VerificationCheck {
  std::string name;
  bool passed = false;
  /// Largest absolute deviation found (0 for a clean exact check).
  Rational residual;
  std::string detail;
};

struct ConstructionReport {
  std::vector<VerificationCheck> checks;
  bool all_passed() const;
  void add(std::string name, bool passed, Rational residual = 0, std::string detail = {});
};

/// Affine coefficients alpha (summing to 1) with sum alpha_i pool_i == target,
/// or nullopt when target is outside the affine hull.
std::optional<std::vector<Rational>> affine_coefficients(const RewardFunction& target,
                                                         const std::vector<RewardFunction>& pool);

/// "3/2*R_B - 1/2*R_D" style name for an affine combination of labelled
/// rewards; empty if any label is missing.
std::string affine_label(const std::vector<Rational>& coefficients, const std::vector<RewardFunction>& pool);

/// Label for target as an affine combination of pool, if one exists.
std::string describe_in_terms_of(const RewardFunction& target, const std::vector<RewardFunction>& pool);

/// eta_pi(mu)(R) = sum_{h_n} P(h_n | pi, mu) P(R | h_n, rho).
EnvConditional counterfactual_eta(const LearningProcess& rho, const Policy& default_policy,
                                  const std::vector<Environment>& environments);

struct UnriggableConstruction {
  LearningProcess process;
  /// Affine coefficients of each output pool member over image(rho).
  std::vector<std::vector<Rational>> hull_coefficients;
  /// Some output pool member is outside the convex hull of image(rho).
  bool leaves_convex_hull = false;
  ConstructionReport report;
};

/// Translate each complete history's distribution by the cumulative offset
/// T(h_{n-1} a_n) so the policy-pi extension of e_rho becomes a martingale.
/// The report certifies the output with check_unriggable and records the
/// affine-hull membership of its image.
UnriggableConstruction make_unriggable(const LearningProcess& rho, const Prior& prior, const Policy& default_policy);

struct UninfluenceableConstruction {
  Prior prior;          // xi' over every deterministic environment
  EnvConditional eta;   // point mass per environment
  LearningProcess process;  // rho' induced by eta through xi'
  ConstructionReport report;
};

/// Enlarge the environment class to all deterministic environments and
/// build xi' and a deterministic eta' so rho' is uninfluenceable with the
/// same expectation as rho. Throws PreconditionError (carrying the witness
/// text) on riggable input and SizeError when the environment count exceeds cap.
UninfluenceableConstruction unriggable_to_uninfluenceable(const LearningProcess& rho, const Prior& prior,
                                                          std::size_t cap = kDefaultEnumerationCap);

/// Linear map scale * I + sum_k u_k v_k^T on reward tables.
struct LinearPart {
  Rational scale = 1;
  std::vector<std::pair<std::vector<Rational>, std::vector<Rational>>> rank_one;
};

/// sigma(R) = base + L R, meaningful on the affine span of `domain`.
class AffineRelabeling {
 public:
  AffineRelabeling(RewardFunction base, LinearPart linear, std::vector<RewardFunction> domain);
  static AffineRelabeling identity(std::vector<RewardFunction> domain);

  /// Throws DomainError if R is outside the affine span of the domain pool.
  RewardFunction apply(const RewardFunction& reward) const;
  RewardFunction apply_unchecked(const RewardFunction& reward) const;
  bool in_domain(const RewardFunction& reward) const;

  const RewardFunction& base() const { return base_; }
  const LinearPart& linear() const { return linear_; }
  const std::vector<RewardFunction>& domain() const { return domain_; }

 private:
  RewardFunction base_;
  LinearPart linear_;
  std::vector<RewardFunction> domain_;
};

/// Pushforward P(R | h_n, sigma o rho) = sum_{R': sigma(R') = R} P(R' | h_n, rho).
LearningProcess apply_relabeling(const AffineRelabeling& sigma, const LearningProcess& rho);

struct SacrificeDemonstration {
  AffineRelabeling sigma;
  RiggingWitness witness;
  LearningProcess relabeled;
  Policy optimal;      // pi^{sigma o rho}
  Policy better;       // optimal with the alternative action at the witness node
  ConstructionReport report;
};

/// For a riggable rho: relabel so the optimal policy sacrifices reward with
/// certainty at the deepest rigging node. Throws PreconditionError when rho
/// is unriggable.
SacrificeDemonstration sacrifice_relabeling(const LearningProcess& rho, const Prior& prior);

}  // namespace rewardrig
