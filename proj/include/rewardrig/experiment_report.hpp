#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rewardrig/gridworld.hpp"

namespace rewardrig {

struct ExperimentSeries {
  grid::AgentKind agent = grid::AgentKind::standard;
  grid::AggregateStats stats;
};

/// One block per series: a "# agent=..." line, the header
/// episode,nominal_mean,nominal_std,true_mean,true_std, then one row per
/// episode with six decimals. Blocks are separated by a blank line.
std::string experiment_csv(const std::vector<ExperimentSeries>& series);

/// Learning curves with one-standard-deviation bands: nominal solid, true
/// dashed, one colour per agent.
std::string experiment_svg(const std::vector<ExperimentSeries>& series, std::string_view title);

/// Fixed six-decimal text; negative zero prints as zero.
std::string fixed6(double value);

}  // namespace rewardrig
