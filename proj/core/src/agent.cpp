#include "sgmmq/agent.hpp"

#include <chrono>
#include <cmath>
#include <utility>

#include "sgmmq/env.hpp"
#include "sgmmq/errors.hpp"
#include "sgmmq/rng.hpp"

namespace sgmmq {

namespace {

// Stream tags for deriving independent RNG seeds from the root seed.
enum : std::uint64_t {
  kInitStream = 1,
  kResetStream = 2,
  kExploreStream = 3,
  kReplayStream = 4,
  kEvalStream = 5,
};

void check_config(const AgentConfig& cfg) {
  if (cfg.buffer_capacity == 0) throw ContractViolation("train: buffer capacity must be positive");
  if (cfg.batch_size == 0) throw ContractViolation("train: batch size must be positive");
  if (cfg.eval_every == 0) throw ContractViolation("train: eval_every must be positive");
  if (cfg.eval_episodes == 0) throw ContractViolation("train: eval_episodes must be positive");
  if (cfg.updates_per_step == 0)
    throw ContractViolation("train: updates_per_step must be positive");
  if (cfg.record_every == 0) throw ContractViolation("train: record_every must be positive");
  if (!(cfg.epsilon_explore >= 0.0 && cfg.epsilon_explore <= 1.0))
    throw ContractViolation("train: epsilon_explore must be in [0, 1]");
  if (!(cfg.sparsity_tau >= 0.0)) throw ContractViolation("train: sparsity_tau must be >= 0");
}

}  // namespace

TrainResult train(const AgentConfig& cfg, const std::string& env_name, const TrainHooks* hooks) {
  check_config(cfg);
  auto env = make_environment(env_name);
  const EnvSpec& es = env->spec();

  ModelConfig mc = cfg.model;
  mc.state_dim = es.state_dim;
  mc.action_count = es.action_count;
  mc.init_seed = mix64(cfg.seed, kInitStream);

  TrainResult out;
  ParameterPoint omega = init_parameters(mc, es.state_low, es.state_high);
  OptimizerState opt = OptimizerState::initial(omega);
  ReplayBuffer buffer(cfg.buffer_capacity, mix64(cfg.seed, kReplayStream));
  Rng reset_seeds(mix64(cfg.seed, kResetStream));
  Rng explore(mix64(cfg.seed, kExploreStream));
  Rng eval_seeds(mix64(cfg.seed, kEvalStream));

  out.best_point = omega;
  const auto t0 = std::chrono::steady_clock::now();

  Vector state = env->reset(reset_seeds.next_u64());
  std::size_t n = 0;
  for (; n < cfg.total_steps; ++n) {
    std::size_t action;
    if (cfg.epsilon_explore > 0.0 && explore.uniform01() < cfg.epsilon_explore)
      action = explore.uniform_index(es.action_count);
    else
      action = greedy_action(omega, state);
    const StepResult sr = env->step(action);

    Transition tuple;
    tuple.state = std::move(state);
    tuple.action = action;
    tuple.reward = sr.reward;
    tuple.next_state = sr.next_state;
    tuple.terminal = sr.terminated;
    buffer.push(tuple);

    double loss_value = 0.0;
    for (std::size_t u = 0; u < cfg.updates_per_step && !out.diverged; ++u) {
      const MiniBatch batch = buffer.sample(cfg.batch_size);
      if (hooks && hooks->on_update) hooks->on_update(tuple, batch);
      const ParameterPoint target = omega;  // frozen bootstrap source
      const LossAndGradient lg = loss_and_gradient(omega, target, batch, cfg.loss, cfg.reg_grad);
      loss_value = lg.value;
      try {
        RAdamStep stepped = radam_step(omega, lg.gradient, opt, cfg.optim);
        omega = std::move(stepped.point);
        opt = std::move(stepped.state);
      } catch (const OptimizerDivergence& e) {
        out.diverged = true;
        out.divergence_message = e.what();
      }
    }

    if (sr.terminated || sr.truncated)
      state = env->reset(reset_seeds.next_u64());
    else
      state = sr.next_state;

    const std::size_t step = n + 1;
    const bool atEval = !out.diverged && step % cfg.eval_every == 0;
    if (atEval || out.diverged || step % cfg.record_every == 0 || step == cfg.total_steps) {
      TrainRecord rec;
      rec.step = step;
      rec.loss = loss_value;
      rec.nonzero_frac = nonzero_fraction(omega, cfg.sparsity_tau);
      if (atEval) {
        const auto [mean, sd] = evaluate(omega, env_name, cfg.eval_episodes,
                                         eval_seeds.next_u64());
        rec.evaluated = true;
        rec.eval_mean = mean;
        rec.eval_std = sd;
        if (!out.ever_evaluated || mean > out.best_eval) {
          out.best_eval = mean;
          out.best_point = omega;
          out.ever_evaluated = true;
        }
      }
      rec.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
      out.records.push_back(rec);
      if (hooks && hooks->on_record) hooks->on_record(rec);
    }

    if (out.diverged) {
      ++n;
      break;
    }
    if (hooks && hooks->should_stop && hooks->should_stop(step)) {
      ++n;
      break;
    }
  }

  out.steps_completed = n;
  out.final_point = std::move(omega);
  return out;
}

std::pair<double, double> evaluate(const ParameterPoint& omega, const std::string& env_name,
                                   std::size_t episodes, std::uint64_t seed) {
  if (episodes == 0) throw ContractViolation("evaluate: episodes must be positive");
  auto env = make_environment(env_name);
  Rng seeds(seed);
  std::vector<double> returns(episodes, 0.0);
  for (std::size_t e = 0; e < episodes; ++e) {
    Vector state = env->reset(seeds.next_u64());
    while (true) {
      const StepResult r = env->step(greedy_action(omega, state));
      returns[e] += r.reward;
      if (r.terminated || r.truncated) break;
      state = r.next_state;
    }
  }
  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= static_cast<double>(episodes);
  double var = 0.0;
  for (double r : returns) var += (r - mean) * (r - mean);
  const double sd =
      episodes > 1 ? std::sqrt(var / static_cast<double>(episodes - 1)) : 0.0;
  return {mean, sd};
}

}  // namespace sgmmq
