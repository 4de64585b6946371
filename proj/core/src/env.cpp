#include "sgmmq/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sgmmq/errors.hpp"
#include "sgmmq/rng.hpp"

namespace sgmmq {

namespace {

constexpr double kPi = std::numbers::pi;

// cartpole
constexpr double kGravity = 9.8;
constexpr double kMassCart = 1.0;
constexpr double kMassPole = 0.1;
constexpr double kTotalMass = kMassCart + kMassPole;
constexpr double kHalfLength = 0.5;
constexpr double kPoleMassLength = kMassPole * kHalfLength;
constexpr double kForceMag = 10.0;
constexpr double kCartDt = 0.02;
constexpr double kXLimit = 2.4;
const double kThetaLimit = 12.0 * kPi / 180.0;

// acrobot
constexpr double kM1 = 1.0, kM2 = 1.0;
constexpr double kL1 = 1.0;
constexpr double kLc1 = 0.5, kLc2 = 0.5;
constexpr double kI1 = 1.0, kI2 = 1.0;
constexpr double kAcroDt = 0.2;
const double kMaxVel1 = 4.0 * kPi;
const double kMaxVel2 = 9.0 * kPi;

double wrap(double x, double lo, double hi) {
  const double width = hi - lo;
  while (x > hi) x -= width;
  while (x < lo) x += width;
  return x;
}

// (theta1, theta2, theta1dot, theta2dot) -> time derivatives, elbow torque a.
void acrobot_deriv(const double* s, double torque, double* ds) {
  const double t1 = s[0], t2 = s[1], v1 = s[2], v2 = s[3];
  const double d1 =
      kM1 * kLc1 * kLc1 + kM2 * (kL1 * kL1 + kLc2 * kLc2 + 2.0 * kL1 * kLc2 * std::cos(t2)) + kI1 +
      kI2;
  const double d2 = kM2 * (kLc2 * kLc2 + kL1 * kLc2 * std::cos(t2)) + kI2;
  const double phi2 = kM2 * kLc2 * kGravity * std::cos(t1 + t2 - kPi / 2.0);
  const double phi1 = -kM2 * kL1 * kLc2 * v2 * v2 * std::sin(t2) -
                      2.0 * kM2 * kL1 * kLc2 * v2 * v1 * std::sin(t2) +
                      (kM1 * kLc1 + kM2 * kL1) * kGravity * std::cos(t1 - kPi / 2.0) + phi2;
  const double a2 =
      (torque + d2 / d1 * phi1 - kM2 * kL1 * kLc2 * v1 * v1 * std::sin(t2) - phi2) /
      (kM2 * kLc2 * kLc2 + kI2 - d2 * d2 / d1);
  const double a1 = -(d2 * a2 + phi1) / d1;
  ds[0] = v1;
  ds[1] = v2;
  ds[2] = a1;
  ds[3] = a2;
}

}  // namespace

StepResult cartpole_step(const Vector& state, std::size_t action) {
  if (state.size() != 4) throw ContractViolation("cartpole_step: state must have dimension 4");
  if (action >= 2) throw ContractViolation("cartpole_step: action out of range");
  const double force = action == 1 ? kForceMag : -kForceMag;
  const double x = state[0], xdot = state[1], theta = state[2], thetadot = state[3];
  const double costh = std::cos(theta), sinth = std::sin(theta);

  const double temp = (force + kPoleMassLength * thetadot * thetadot * sinth) / kTotalMass;
  const double thetaacc = (kGravity * sinth - costh * temp) /
                          (kHalfLength * (4.0 / 3.0 - kMassPole * costh * costh / kTotalMass));
  const double xacc = temp - kPoleMassLength * thetaacc * costh / kTotalMass;

  StepResult r;
  r.next_state.resize(4);
  r.next_state[1] = xdot + kCartDt * xacc;
  r.next_state[0] = x + kCartDt * r.next_state[1];
  r.next_state[3] = thetadot + kCartDt * thetaacc;
  r.next_state[2] = theta + kCartDt * r.next_state[3];
  r.reward = 1.0;
  r.terminated = std::abs(r.next_state[0]) > kXLimit || std::abs(r.next_state[2]) > kThetaLimit;
  return r;
}

StepResult acrobot_step(const Vector& state, std::size_t action) {
  if (state.size() != 4) throw ContractViolation("acrobot_step: state must have dimension 4");
  if (action >= 3) throw ContractViolation("acrobot_step: action out of range");
  const double torque = static_cast<double>(action) - 1.0;

  double k1[4], k2[4], k3[4], k4[4], tmp[4], y[4];
  for (int i = 0; i < 4; ++i) y[i] = state[i];
  acrobot_deriv(y, torque, k1);
  for (int i = 0; i < 4; ++i) tmp[i] = y[i] + 0.5 * kAcroDt * k1[i];
  acrobot_deriv(tmp, torque, k2);
  for (int i = 0; i < 4; ++i) tmp[i] = y[i] + 0.5 * kAcroDt * k2[i];
  acrobot_deriv(tmp, torque, k3);
  for (int i = 0; i < 4; ++i) tmp[i] = y[i] + kAcroDt * k3[i];
  acrobot_deriv(tmp, torque, k4);

  StepResult r;
  r.next_state.resize(4);
  for (int i = 0; i < 4; ++i)
    r.next_state[i] = y[i] + kAcroDt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  r.next_state[0] = wrap(r.next_state[0], -kPi, kPi);
  r.next_state[1] = wrap(r.next_state[1], -kPi, kPi);
  r.next_state[2] = std::clamp(r.next_state[2], -kMaxVel1, kMaxVel1);
  r.next_state[3] = std::clamp(r.next_state[3], -kMaxVel2, kMaxVel2);
  r.terminated = -std::cos(r.next_state[0]) - std::cos(r.next_state[1] + r.next_state[0]) > 1.0;
  r.reward = r.terminated ? 0.0 : -1.0;
  return r;
}

Vector acrobot_observe(const Vector& state) {
  if (state.size() != 4) throw ContractViolation("acrobot_observe: state must have dimension 4");
  return {std::cos(state[0]), std::sin(state[0]), std::cos(state[1]),
          std::sin(state[1]), state[2],           state[3]};
}

namespace {

class CartpoleEnv final : public Environment {
 public:
  CartpoleEnv() {
    spec_.name = "cartpole";
    spec_.state_dim = 4;
    spec_.action_count = 2;
    spec_.max_steps = 500;
    spec_.state_low = {-kXLimit, -4.0, -kThetaLimit, -4.0};
    spec_.state_high = {kXLimit, 4.0, kThetaLimit, 4.0};
  }

  const EnvSpec& spec() const override { return spec_; }

  Vector reset(std::uint64_t seed) override {
    Rng r(seed);
    state_.resize(4);
    for (double& v : state_) v = r.uniform(-0.05, 0.05);
    steps_ = 0;
    done_ = false;
    return state_;
  }

  StepResult step(std::size_t action) override {
    if (done_) throw ContractViolation("cartpole: step on a finished episode");
    StepResult r = cartpole_step(state_, action);
    state_ = r.next_state;
    ++steps_;
    r.truncated = steps_ >= spec_.max_steps;
    done_ = r.terminated || r.truncated;
    return r;
  }

 private:
  EnvSpec spec_;
  Vector state_;
  std::size_t steps_ = 0;
  bool done_ = true;
};

class AcrobotEnv final : public Environment {
 public:
  AcrobotEnv() {
    spec_.name = "acrobot";
    spec_.state_dim = 6;
    spec_.action_count = 3;
    spec_.max_steps = 500;
    spec_.state_low = {-1.0, -1.0, -1.0, -1.0, -kMaxVel1, -kMaxVel2};
    spec_.state_high = {1.0, 1.0, 1.0, 1.0, kMaxVel1, kMaxVel2};
  }

  const EnvSpec& spec() const override { return spec_; }

  Vector reset(std::uint64_t seed) override {
    Rng r(seed);
    internal_.resize(4);
    for (double& v : internal_) v = r.uniform(-0.1, 0.1);
    steps_ = 0;
    done_ = false;
    return acrobot_observe(internal_);
  }

  StepResult step(std::size_t action) override {
    if (done_) throw ContractViolation("acrobot: step on a finished episode");
    StepResult r = acrobot_step(internal_, action);
    internal_ = r.next_state;
    r.next_state = acrobot_observe(internal_);
    ++steps_;
    r.truncated = steps_ >= spec_.max_steps;
    done_ = r.terminated || r.truncated;
    return r;
  }

 private:
  EnvSpec spec_;
  Vector internal_;
  std::size_t steps_ = 0;
  bool done_ = true;
};

}  // namespace

std::unique_ptr<Environment> make_environment(const std::string& name) {
  if (name == "cartpole") return std::make_unique<CartpoleEnv>();
  if (name == "acrobot") return std::make_unique<AcrobotEnv>();
  throw ContractViolation("make_environment: unknown environment '" + name + "'");
}

}  // namespace sgmmq
