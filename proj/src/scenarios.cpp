#include "rewardrig/scenarios.hpp"

#include <array>
#include <stdexcept>

namespace rewardrig {
namespace {

struct ParentPair {
  bool mother_b;
  bool father_b;
  const char* name;
};

constexpr std::array<ParentPair, 4> kPairs{{
    {true, true, "mu_BB"},
    {true, false, "mu_BD"},
    {false, true, "mu_DB"},
    {false, false, "mu_DD"},
}};

std::vector<Rational> parental_weights(ParentalPrior prior) {
  switch (prior) {
    case ParentalPrior::xi1: return {Rational(1, 2), 0, 0, Rational(1, 2)};
    case ParentalPrior::xi2: return {Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4)};
    case ParentalPrior::BD: return {0, 1, 0, 0};
    case ParentalPrior::DD: return {0, 0, 0, 1};
  }
  throw std::logic_error("unhandled parental prior");
}

std::string prior_suffix(ParentalPrior prior) {
  switch (prior) {
    case ParentalPrior::xi1: return "xi1";
    case ParentalPrior::xi2: return "xi2";
    case ParentalPrior::BD: return "xi3";
    case ParentalPrior::DD: return "xiDD";
  }
  return "?";
}

WeightedReward certain(std::size_t reward) { return {reward, Rational(1)}; }

}  // namespace

Scenario parental(ParentalPrior prior) {
  auto spec = make_spec({"M", "F"}, {"B", "D"}, 1);
  std::vector<Environment> envs;
  for (const auto& p : kPairs) envs.push_back(Environment::from_action_table(spec, p.name, {p.mother_b ? 0 : 1, p.father_b ? 0 : 1}));
  std::vector<RewardFunction> pool{RewardFunction::constant(spec, 10, "R_B"), RewardFunction::constant(spec, 1, "R_D")};
  std::vector<std::vector<WeightedReward>> dist(spec->complete_count());
  for (std::size_t h = 0; h < dist.size(); ++h) dist[h] = {certain(spec->complete_history(h)[0].observation == 0 ? 0 : 1)};
  return {"parental_" + prior_suffix(prior), spec, Prior(std::move(envs), parental_weights(prior)),
          LearningProcess(std::move(pool), std::move(dist))};
}

Scenario parental_with_no_ask(ParentalPrior prior) {
  auto spec = make_spec({"M", "F", "N"}, {"B", "D", "none"}, 1);
  std::vector<Environment> envs;
  for (const auto& p : kPairs) {
    envs.push_back(Environment::from_action_table(spec, p.name, {p.mother_b ? 0 : 1, p.father_b ? 0 : 1, 2}));
  }
  std::vector<RewardFunction> pool{RewardFunction::constant(spec, 10, "R_B"), RewardFunction::constant(spec, 1, "R_D")};
  std::vector<std::vector<WeightedReward>> dist(spec->complete_count());
  for (std::size_t h = 0; h < dist.size(); ++h) {
    const int o = spec->complete_history(h)[0].observation;
    if (o == 2) {
      dist[h] = {{0, Rational(1, 2)}, {1, Rational(1, 2)}};
    } else {
      dist[h] = {certain(o == 0 ? 0 : 1)};
    }
  }
  return {"parental_no_ask_" + prior_suffix(prior), spec, Prior(std::move(envs), parental_weights(prior)),
          LearningProcess(std::move(pool), std::move(dist))};
}

Scenario parental_penalty() {
  Scenario base = parental(ParentalPrior::BD);
  const auto& spec = base.spec;
  std::vector<Rational> rb(spec->complete_count()), rd(spec->complete_count());
  for (std::size_t h = 0; h < rb.size(); ++h) {
    const bool mother = spec->complete_history(h)[0].action == 0;
    rb[h] = mother ? 9 : 10;
    rd[h] = mother ? 0 : 1;
  }
  std::vector<RewardFunction> pool{RewardFunction(spec, rb, "R_B"), RewardFunction(spec, rd, "R_D")};
  std::vector<std::vector<WeightedReward>> dist;
  for (std::size_t h = 0; h < spec->complete_count(); ++h) dist.push_back(base.process.distribution(h));
  return {"penalty", spec, base.prior, LearningProcess(std::move(pool), std::move(dist))};
}

Scenario chess() {
  auto spec = make_spec({"zero", "inv", "win", "lose"}, {"H", "T", "W", "Bk"}, 2);
  constexpr int kH = 0, kT = 1, kW = 2, kBk = 3, kInv = 1, kWin = 2, kLose = 3;
  auto env = Environment::from_kernel(spec, "chess", [](const History& h, int action) {
    std::vector<Rational> p(4);
    if (h.empty()) {
      p[kH] = p[kT] = Rational(1, 2);
      return p;
    }
    const int side = h[0].observation;
    if (side != kH && side != kT) {
      p[kW] = p[kBk] = Rational(1, 2);
      return p;
    }
    const int ours = side == kH ? kW : kBk;
    const int theirs = side == kH ? kBk : kW;
    if (action == kWin) {
      p[ours] = Rational(1, 10);
      p[theirs] = Rational(9, 10);
    } else if (action == kLose) {
      p[theirs] = 1;
    } else {
      p[ours] = p[theirs] = Rational(1, 2);
    }
    return p;
  });
  std::vector<Rational> white(spec->complete_count()), black(spec->complete_count());
  for (std::size_t h = 0; h < white.size(); ++h) {
    const bool white_won = spec->complete_history(h)[1].observation == kW;
    white[h] = white_won ? 1 : 0;
    black[h] = white_won ? 0 : 1;
  }
  std::vector<RewardFunction> pool{RewardFunction(spec, white, "R_W"), RewardFunction(spec, black, "R_B")};
  std::vector<std::vector<WeightedReward>> dist(spec->complete_count());
  for (std::size_t h = 0; h < dist.size(); ++h) {
    const History& hist = spec->complete_history(h);
    const bool heads = hist[0].observation != kT;
    const bool inverted = hist[0].action == kInv;
    dist[h] = {certain(heads != inverted ? 0 : 1)};
  }
  return {"chess", spec, Prior({env}, {Rational(1)}), LearningProcess(std::move(pool), std::move(dist))};
}

Scenario affine_hull_example() {
  auto spec = make_spec({"a", "a'"}, {"o", "o'"}, 1);
  auto env = Environment::from_kernel(spec, "fair_coin", [](const History&, int) {
    return std::vector<Rational>{Rational(1, 2), Rational(1, 2)};
  });
  std::vector<RewardFunction> pool{RewardFunction::constant(spec, 1, "R"), RewardFunction::constant(spec, 0, "R'")};
  std::vector<std::vector<WeightedReward>> dist(spec->complete_count());
  for (std::size_t h = 0; h < dist.size(); ++h) {
    const Step& s = spec->complete_history(h)[0];
    dist[h] = {certain(s.action == 1 && s.observation == 1 ? 1 : 0)};
  }
  return {"affine_hull", spec, Prior({env}, {Rational(1)}), LearningProcess(std::move(pool), std::move(dist))};
}

Scenario total_information() {
  auto spec = make_spec({"M", "F"}, {"BB", "BD", "DB", "DD"}, 1);
  std::vector<Environment> envs;
  for (int o = 0; o < 4; ++o) envs.push_back(Environment::from_action_table(spec, "mu_" + spec->observation_name(o), {o, o}));
  std::vector<RewardFunction> pool{RewardFunction::constant(spec, 10, "R_B"), RewardFunction::constant(spec, 1, "R_D")};
  std::vector<std::vector<WeightedReward>> dist(spec->complete_count());
  for (std::size_t h = 0; h < dist.size(); ++h) {
    const Step& s = spec->complete_history(h)[0];
    const bool mother_b = s.observation < 2;
    const bool father_b = s.observation % 2 == 0;
    dist[h] = {certain((s.action == 0 ? mother_b : father_b) ? 0 : 1)};
  }
  std::vector<Rational> weights(4, Rational(1, 4));
  return {"total_information", spec, Prior(std::move(envs), std::move(weights)),
          LearningProcess(std::move(pool), std::move(dist))};
}

// ---------------------------------------------------------------------------

namespace {

struct GridTrace {
  std::vector<int> observations;  // 0 none, 1 B, 2 D
  int steps = 0;                  // moves taken before the episode ended
  grid::Ending ending = grid::Ending::none;
};

GridTrace trace_grid(std::span<const int> moves, const grid::Answers& answers) {
  const grid::Layout layout;
  GridTrace t;
  grid::Cell cell = layout.start;
  for (int move : moves) {
    if (t.ending != grid::Ending::none) {
      t.observations.push_back(0);
      continue;
    }
    ++t.steps;
    grid::Cell next = cell;
    switch (static_cast<grid::Move>(move)) {
      case grid::Move::north: --next.y; break;
      case grid::Move::south: ++next.y; break;
      case grid::Move::east: ++next.x; break;
      case grid::Move::west: --next.x; break;
    }
    int obs = 0;
    if (!layout.in_bounds(next)) {
      t.ending = grid::Ending::wall;
    } else {
      cell = next;
      if (cell == layout.money) t.ending = grid::Ending::money;
      if (cell == layout.stethoscope) t.ending = grid::Ending::stethoscope;
      if (cell == layout.mother) obs = answers.mother_b ? 1 : 2;
      if (cell == layout.father) obs = answers.father_b ? 1 : 2;
    }
    t.observations.push_back(obs);
  }
  return t;
}

}  // namespace

Scenario gridworld_histories(grid::PriorTag prior, int horizon) {
  auto spec = make_spec({"N", "S", "E", "W"}, {"none", "B", "D"}, horizon);
  std::vector<Environment> envs;
  std::vector<Rational> weights;
  const auto listed = grid::prior_environments(prior);
  for (const auto& p : kPairs) {
    const grid::Answers answers{p.mother_b, p.father_b};
    envs.push_back(Environment::deterministic(spec, p.name, [answers](std::span<const int> actions) {
      return trace_grid(actions, answers).observations.back();
    }));
    Rational w = 0;
    for (const auto& l : listed) {
      if (l.answers.mother_b == p.mother_b && l.answers.father_b == p.father_b) w = l.weight;
    }
    weights.push_back(w);
  }
  std::vector<Rational> rb(spec->complete_count()), rd(spec->complete_count());
  std::vector<std::vector<WeightedReward>> dist(spec->complete_count());
  for (std::size_t h = 0; h < dist.size(); ++h) {
    const History& hist = spec->complete_history(h);
    const auto t = trace_grid(hist.actions(), {});
    const Rational cost = grid::kStepCost * t.steps;
    rb[h] = cost + (t.ending == grid::Ending::money ? grid::kMoneyBonus : Rational(0));
    rd[h] = cost + (t.ending == grid::Ending::stethoscope ? grid::kStethoscopeBonus : Rational(0));
    int heard = 0;
    for (std::size_t i = 0; i < hist.length() && heard == 0; ++i) heard = hist[i].observation;
    if (heard == 0) {
      dist[h] = {{0, Rational(1, 2)}, {1, Rational(1, 2)}};
    } else {
      dist[h] = {certain(heard == 1 ? 0 : 1)};
    }
  }
  std::vector<RewardFunction> pool{RewardFunction(spec, rb, "R_B"), RewardFunction(spec, rd, "R_D")};
  return {"gridworld_" + std::string(grid::to_string(prior)), spec, Prior(std::move(envs), std::move(weights)),
          LearningProcess(std::move(pool), std::move(dist))};
}

// ---------------------------------------------------------------------------

std::vector<std::string> builtin_scenario_names() {
  return {"parental_xi1",  "parental_xi2",  "parental_xi3", "parental_xiDD",        "parental_xiDD_two_action",
          "penalty",       "chess",         "affine_hull",   "total_information",    "gridworld_BD",
          "gridworld_DD",  "gridworld_half", "gridworld_correlated"};
}

Scenario builtin_scenario(const std::string& name) {
  Scenario s = [&]() -> Scenario {
    if (name == "parental_xi1") return parental(ParentalPrior::xi1);
    if (name == "parental_xi2") return parental(ParentalPrior::xi2);
    if (name == "parental_xi3") return parental(ParentalPrior::BD);
    if (name == "parental_xiDD") return parental_with_no_ask(ParentalPrior::DD);
    if (name == "parental_xiDD_two_action") return parental(ParentalPrior::DD);
    if (name == "penalty") return parental_penalty();
    if (name == "chess") return chess();
    if (name == "affine_hull") return affine_hull_example();
    if (name == "total_information") return total_information();
    if (name.rfind("gridworld_", 0) == 0) return gridworld_histories(grid::parse_prior_tag(name.substr(10)));
    throw std::invalid_argument("unknown built-in scenario '" + name + "'");
  }();
  s.name = name;
  return s;
}

}  // namespace rewardrig
