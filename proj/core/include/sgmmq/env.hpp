#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "sgmmq/matrix.hpp"

namespace sgmmq {

struct EnvSpec {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t action_count = 0;
  std::size_t max_steps = 500;
  // Box the initializer can draw means from; unbounded physical coordinates
  // are clipped to the ranges trajectories actually visit.
  Vector state_low;
  Vector state_high;
};

struct StepResult {
  Vector next_state;
  double reward = 0.0;
  bool terminated = false;  // goal reached / limits violated
  bool truncated = false;   // step cap hit; still bootstrapped
};

// Pure dynamics kernels. Both take and return raw dynamical coordinates and
// never truncate; the Environment wrapper adds the 500-step cap and, for
// acrobot, the trigonometric observation encoding.

// state = (x, xdot, theta, thetadot); semi-implicit Euler, dt = 0.02,
// force +-10. Reward 1 every step; terminated when |x| > 2.4 or
// |theta| > 12 degrees after the step.
StepResult cartpole_step(const Vector& state, std::size_t action);

// state = (theta1, theta2, theta1dot, theta2dot), angles measured from the
// hanging position; one RK4 step of the two-link dynamics with dt = 0.2 and
// torque (action - 1) on the elbow. Angles wrap to [-pi, pi], velocities
// clamp to 4*pi and 9*pi. Reward -1, or 0 on the step that first satisfies
// -cos(theta1) - cos(theta1 + theta2) > 1.
StepResult acrobot_step(const Vector& state, std::size_t action);

// (cos t1, sin t1, cos t2, sin t2, t1dot, t2dot)
Vector acrobot_observe(const Vector& state);

class Environment {
 public:
  virtual ~Environment() = default;
  virtual const EnvSpec& spec() const = 0;
  // Starts an episode; deterministic in the seed.
  virtual Vector reset(std::uint64_t seed) = 0;
  // Advances one step. Throws ContractViolation before the first reset,
  // after the episode has ended, or for an out-of-range action.
  virtual StepResult step(std::size_t action) = 0;
};

// "cartpole" or "acrobot"; anything else is a ContractViolation.
std::unique_ptr<Environment> make_environment(const std::string& name);

}  // namespace sgmmq
