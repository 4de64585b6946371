#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sgmmq/loss.hpp"
#include "sgmmq/model.hpp"
#include "sgmmq/radam.hpp"
#include "sgmmq/replay.hpp"

namespace sgmmq {

struct AgentConfig {
  // state_dim, action_count, and init_seed are filled in by train() from
  // the environment and the root seed; values set here are ignored.
  ModelConfig model;
  LossConfig loss;
  RAdamConfig optim;
  RegGradMode reg_grad = RegGradMode::Analytic;
  std::size_t buffer_capacity = 10000;
  std::size_t batch_size = 64;
  std::size_t total_steps = 100000;
  std::size_t eval_every = 10000;
  std::size_t eval_episodes = 20;
  std::size_t updates_per_step = 1;
  // Records are kept every record_every steps; evaluation steps and the
  // final step are always kept.
  std::size_t record_every = 1;
  double epsilon_explore = 0.0;
  double sparsity_tau = 1e-4;
  std::uint64_t seed = 0;
};

struct TrainRecord {
  std::size_t step = 0;  // environment steps completed when recorded
  double loss = 0.0;     // objective of the last minibatch update
  bool evaluated = false;
  double eval_mean = 0.0;
  double eval_std = 0.0;
  double nonzero_frac = 1.0;
  double wall_ms = 0.0;  // elapsed since train() entry
};

// Test instrumentation; any member may be left empty.
struct TrainHooks {
  // After each minibatch is drawn, before the gradient step: the tuple
  // pushed this environment step and the batch it must appear in.
  std::function<void(const Transition&, const MiniBatch&)> on_update;
  std::function<void(const TrainRecord&)> on_record;
  // Checked after each environment step; return true to stop early.
  std::function<bool(std::size_t)> should_stop;
};

struct TrainResult {
  std::vector<TrainRecord> records;
  ParameterPoint final_point;  // last valid parameters, even on divergence
  ParameterPoint best_point;   // highest eval mean seen (initial if never evaluated)
  double best_eval = 0.0;
  bool ever_evaluated = false;
  std::size_t steps_completed = 0;
  bool diverged = false;
  std::string divergence_message;
};

// One greedy (epsilon-greedy if configured) environment step per loop
// iteration: push the observed tuple, sample a batch with the fresh tuple
// forced in, freeze the bootstrap target at the current parameters, take
// one optimizer step per configured update. All randomness derives from
// cfg.seed, so equal configs give bit-identical results.
TrainResult train(const AgentConfig& cfg, const std::string& env_name,
                  const TrainHooks* hooks = nullptr);

// Mean and sample standard deviation of undiscounted returns over
// greedy-policy episodes with per-episode reset seeds derived from seed.
std::pair<double, double> evaluate(const ParameterPoint& omega, const std::string& env_name,
                                   std::size_t episodes, std::uint64_t seed);

}  // namespace sgmmq
