// Regenerates the golden trajectory fixtures used by the environment tests.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

#include "sgmmq/env.hpp"
#include "sgmmq/rng.hpp"

namespace {

// Cartpole needs feedback to survive 100 steps; acrobot just gets a
// seeded torque stream.  The chosen actions are stored in the fixture,
// so replay never re-runs this.
std::size_t pick_action(const sgmmq::Vector& state, const std::string& env, sgmmq::Rng& rng) {
  if (env == "cartpole")
    return 0.02 * state[0] + 0.05 * state[1] + state[2] + 0.5 * state[3] > 0.0 ? 1 : 0;
  return rng.uniform_index(3);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 5) {
    std::cerr << "usage: make_golden <env> <seed> <steps> <out.json>\n";
    return 2;
  }
  const std::string env_name = argv[1];
  const std::uint64_t seed = std::stoull(argv[2]);
  const int steps = std::stoi(argv[3]);

  auto env = sgmmq::make_environment(env_name);
  sgmmq::Rng rng(seed ^ 0x6a09e667f3bcc908ull);

  nlohmann::json out;
  out["env"] = env_name;
  out["seed"] = seed;
  sgmmq::Vector state = env->reset(seed);
  out["reset"] = state;
  auto actions = nlohmann::json::array();
  auto states = nlohmann::json::array();
  auto rewards = nlohmann::json::array();
  for (int i = 0; i < steps; ++i) {
    const std::size_t a = pick_action(state, env_name, rng);
    const sgmmq::StepResult r = env->step(a);
    if (r.terminated || r.truncated) {
      std::cerr << "episode ended early at step " << i << "\n";
      return 1;
    }
    actions.push_back(a);
    states.push_back(r.next_state);
    rewards.push_back(r.reward);
    state = r.next_state;
  }
  out["actions"] = actions;
  out["states"] = states;
  out["rewards"] = rewards;

  std::ofstream f(argv[4]);
  f << out.dump(2) << "\n";
  return f.good() ? 0 : 1;
}
