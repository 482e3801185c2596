#pragma once

#include <string>
#include <vector>

#include "rewardrig/gridworld.hpp"
#include "rewardrig/reward.hpp"

namespace rewardrig {

/// A complete classification input: alphabets, prior, and learning process.
struct Scenario {
  std::string name;
  SpecPtr spec;
  Prior prior;
  LearningProcess process;
};

enum class ParentalPrior {
  xi1,  // 1/2 on mu_BB, 1/2 on mu_DD
  xi2,  // uniform over the four environments
  BD,   // point mass on mu_BD (also called xi3)
  DD,   // point mass on mu_DD
};

/// One question (n = 1): ask the mother (M) or the father (F), hear B or D.
/// Environments mu_xy: the mother says x, the father says y. R_B = 10 and
/// R_D = 1 everywhere; the answer heard selects the reward.
Scenario parental(ParentalPrior prior);

/// As `parental`, plus a third action N (do not ask) that is answered with
/// the observation "none" and leaves the reward at 1/2 R_B + 1/2 R_D.
Scenario parental_with_no_ask(ParentalPrior prior);

/// Parental question under mu_BD where asking the mother costs one unit:
/// R_B(M.) = 9, R_B(F.) = 10, R_D(M.) = 0, R_D(F.) = 1.
Scenario parental_penalty();

/// Two steps: a coin (H/T) picks the side, then the game is won by white
/// (W) or black (Bk). Action inv before the coin swaps R_W and R_B; at the
/// second step "win" succeeds with probability 1/10 and "lose" always does.
Scenario chess();

/// n = 1, actions a and a', fair coin over o and o'. Action a fixes R;
/// action a' lets the coin choose between R and R'.
Scenario affine_hull_example();

/// n = 1, observations carry both parents' written answers (mother first);
/// M reads the mother's, F the father's. Uniform prior over four environments.
Scenario total_information();

/// Gridworld episodes of `horizon` moves as histories: actions N/S/E/W,
/// observations none/B/D (a parent's answer on entering their square).
/// The learning process adopts the first answer heard, else 1/2 R_B + 1/2 R_D.
Scenario gridworld_histories(grid::PriorTag prior, int horizon = 3);

/// Names accepted by `builtin_scenario`, in listing order.
std::vector<std::string> builtin_scenario_names();
/// Throws std::invalid_argument for unknown names.
Scenario builtin_scenario(const std::string& name);

}  // namespace rewardrig
