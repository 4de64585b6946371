#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgmmq/env.hpp"
#include "sgmmq/loss.hpp"
#include "sgmmq/model.hpp"
#include "sgmmq/rng.hpp"

namespace sgmmq::bench {

// Model sized like the named environment's benchmark configuration.
inline ParameterPoint sized_point(const std::string& env_name, std::size_t K,
                                  std::uint64_t seed = 11) {
  const auto env = make_environment(env_name);
  ModelConfig cfg;
  cfg.K = K;
  cfg.state_dim = env->spec().state_dim;
  cfg.action_count = env->spec().action_count;
  cfg.init_seed = seed;
  return init_parameters(cfg, env->spec().state_low, env->spec().state_high);
}

// Transitions gathered from a uniformly random policy, so kernels see
// realistic state magnitudes rather than synthetic noise.
inline MiniBatch rollout_batch(const std::string& env_name, std::size_t size,
                               std::uint64_t seed = 7) {
  const auto env = make_environment(env_name);
  Rng rng(seed);
  MiniBatch batch;
  Vector state = env->reset(rng.next_u64());
  while (batch.size() < size) {
    const std::size_t action = rng.uniform_index(env->spec().action_count);
    const StepResult step = env->step(action);
    Transition t;
    t.state = state;
    t.action = action;
    t.reward = step.reward;
    t.next_state = step.next_state;
    t.terminal = step.terminated;
    batch.push_back(t);
    state = (step.terminated || step.truncated) ? env->reset(rng.next_u64()) : step.next_state;
  }
  return batch;
}

}  // namespace sgmmq::bench
