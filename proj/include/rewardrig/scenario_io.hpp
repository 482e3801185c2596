#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"
#include "rewardrig/classify.hpp"
#include "rewardrig/scenarios.hpp"

namespace rewardrig {

using Json = nlohmann::ordered_json;

/// Malformed or inconsistent scenario document. `path` locates the field,
/// e.g. "$.environments[1].kernel[\"* H win\"]".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Space-separated token patterns: "*" matches one token, "**" any run.
bool pattern_matches(std::string_view pattern, std::string_view text);

/// Accepts a scenario object, or a result document carrying one under "scenario".
Scenario scenario_from_json(const Json& doc);
Scenario parse_scenario(std::string_view text);
/// Throws IoError when the file cannot be read.
Scenario load_scenario(const std::string& path);

Json scenario_to_json(const Scenario& scenario);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// Building blocks shared by the CLI's result documents.
Json reward_table_json(const RewardFunction& reward);
Json distribution_json(const std::vector<WeightedReward>& dist, const std::vector<std::string>& labels);
Json eta_json(const EnvConditional& eta);
/// Display labels for a pool: the reward's own label when present and
/// unique, otherwise "R#k".
std::vector<std::string> pool_labels(const std::vector<RewardFunction>& pool);

}  // namespace rewardrig
