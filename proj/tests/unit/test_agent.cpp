#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <doctest.h>

#include "sgmmq/agent.hpp"
#include "sgmmq/env.hpp"
#include "sgmmq/errors.hpp"
#include "sgmmq/model.hpp"
#include "sgmmq/rng.hpp"

using namespace sgmmq;

namespace {

bool points_equal(const ParameterPoint& a, const ParameterPoint& b) {
  if (a.upsilon.size() != b.upsilon.size() || a.covs.size() != b.covs.size()) return false;
  for (std::size_t j = 0; j < a.upsilon.size(); ++j)
    if (!(a.upsilon[j] == b.upsilon[j])) return false;
  if (!(a.means == b.means)) return false;
  for (std::size_t k = 0; k < a.covs.size(); ++k)
    if (!(a.covs[k] == b.covs[k])) return false;
  return true;
}

AgentConfig small_config() {
  AgentConfig cfg;
  cfg.model.K = 8;
  cfg.model.J = 3;
  cfg.optim.variant = AdamVariant::Standard;
  cfg.buffer_capacity = 500;
  cfg.batch_size = 16;
  cfg.total_steps = 400;
  cfg.eval_every = 100;
  cfg.eval_episodes = 3;
  cfg.seed = 21;
  return cfg;
}

bool records_equal_ignoring_wall(const TrainRecord& a, const TrainRecord& b) {
  return a.step == b.step && a.loss == b.loss && a.evaluated == b.evaluated &&
         a.eval_mean == b.eval_mean && a.eval_std == b.eval_std &&
         a.nonzero_frac == b.nonzero_frac;
}

// All-zero factor matrices make every Q-value exactly zero, so the greedy
// policy constantly picks action 0.
ParameterPoint zero_weight_point(const std::string& env_name, std::uint64_t seed) {
  auto env = make_environment(env_name);
  ModelConfig mc;
  mc.K = 4;
  mc.J = 2;
  mc.state_dim = env->spec().state_dim;
  mc.action_count = env->spec().action_count;
  mc.init_seed = seed;
  ParameterPoint p = init_parameters(mc, env->spec().state_low, env->spec().state_high);
  for (Matrix& u : p.upsilon)
    for (std::size_t i = 0; i < u.rows(); ++i)
      for (std::size_t j = 0; j < u.cols(); ++j) u(i, j) = 0.0;
  return p;
}

}  // namespace

TEST_CASE("zero training steps leave the initialization untouched") {
  AgentConfig cfg = small_config();
  cfg.total_steps = 0;
  const TrainResult r = train(cfg, "cartpole");
  CHECK(r.records.empty());
  CHECK(r.steps_completed == 0);
  CHECK_FALSE(r.diverged);
  CHECK_FALSE(r.ever_evaluated);
  CHECK(points_equal(r.final_point, r.best_point));
  CHECK(r.final_point.component_count() == 8);
  CHECK(r.final_point.state_dim() == 4);
  CHECK(r.final_point.action_count() == 2);
  CHECK(nonzero_fraction(r.final_point, 1e-4) == 1.0);
  const auto low = make_environment("cartpole")->spec().state_low;
  const auto high = make_environment("cartpole")->spec().state_high;
  SymMatrix c0(4);
  for (std::size_t d = 0; d < 4; ++d) {
    const double bw = 0.25 * (high[d] - low[d]);
    c0.set(d, d, bw * bw);
  }
  for (const SpdMatrix& c : r.final_point.covs) CHECK(c == SpdMatrix(c0));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 8; ++k) {
      CHECK(r.final_point.means(i, k) >= low[i]);
      CHECK(r.final_point.means(i, k) <= high[i]);
    }
}

TEST_CASE("training is bit-deterministic per seed") {
  const AgentConfig cfg = small_config();
  const TrainResult a = train(cfg, "cartpole");
  const TrainResult b = train(cfg, "cartpole");
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i)
    CHECK(records_equal_ignoring_wall(a.records[i], b.records[i]));
  CHECK(points_equal(a.final_point, b.final_point));
  CHECK(points_equal(a.best_point, b.best_point));
  CHECK(a.best_eval == b.best_eval);

  AgentConfig other = cfg;
  other.seed = 22;
  const TrainResult c = train(other, "cartpole");
  CHECK_FALSE(points_equal(a.final_point, c.final_point));
}

TEST_CASE("records advance monotonically and evaluations land on schedule") {
  AgentConfig cfg = small_config();
  cfg.total_steps = 1000;
  cfg.eval_every = 250;
  const TrainResult r = train(cfg, "cartpole");
  REQUIRE(r.steps_completed == 1000);
  REQUIRE(r.records.size() == 1000);
  std::size_t evals = 0;
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    CHECK(r.records[i].step == i + 1);
    if (r.records[i].evaluated) {
      ++evals;
      CHECK(r.records[i].step % 250 == 0);
      CHECK(r.records[i].eval_mean >= 0.0);
      CHECK(r.records[i].eval_mean <= 500.0);
    }
    if (i > 0) CHECK(r.records[i].wall_ms >= r.records[i - 1].wall_ms);
  }
  CHECK(evals == 4);
  CHECK(r.ever_evaluated);

  cfg.total_steps = 999;
  const TrainResult s = train(cfg, "cartpole");
  std::size_t evals2 = 0;
  for (const TrainRecord& rec : s.records) evals2 += rec.evaluated ? 1 : 0;
  CHECK(evals2 == 3);
}

TEST_CASE("record thinning always keeps evaluation rows and the last step") {
  AgentConfig cfg = small_config();
  cfg.total_steps = 1000;
  cfg.eval_every = 333;
  cfg.record_every = 100;
  const TrainResult r = train(cfg, "cartpole");
  std::vector<std::size_t> steps;
  for (const TrainRecord& rec : r.records) steps.push_back(rec.step);
  CHECK(std::is_sorted(steps.begin(), steps.end()));
  for (std::size_t want : {333u, 666u, 999u}) {
    const auto it = std::find(steps.begin(), steps.end(), want);
    REQUIRE(it != steps.end());
    CHECK(r.records[static_cast<std::size_t>(it - steps.begin())].evaluated);
  }
  CHECK(steps.back() == 1000);
  CHECK(r.records.size() == 13);  // 10 thinned + 3 eval rows
}

TEST_CASE("every minibatch contains the transition just observed") {
  AgentConfig cfg = small_config();
  cfg.total_steps = 120;
  std::size_t updates = 0;
  TrainHooks hooks;
  hooks.on_update = [&](const Transition& pushed, const MiniBatch& batch) {
    ++updates;
    REQUIRE_FALSE(batch.empty());
    const Transition& last = batch.back();
    CHECK(last.state == pushed.state);
    CHECK(last.action == pushed.action);
    CHECK(last.reward == pushed.reward);
    CHECK(last.next_state == pushed.next_state);
    CHECK(last.terminal == pushed.terminal);
    CHECK(batch.size() <= 16);
  };
  train(cfg, "cartpole", &hooks);
  CHECK(updates == 120);
}

TEST_CASE("multiple updates per step run and stay deterministic") {
  AgentConfig cfg = small_config();
  cfg.total_steps = 60;
  cfg.updates_per_step = 3;
  std::size_t updates = 0;
  TrainHooks hooks;
  hooks.on_update = [&](const Transition&, const MiniBatch&) { ++updates; };
  const TrainResult a = train(cfg, "cartpole", &hooks);
  CHECK(updates == 180);
  const TrainResult b = train(cfg, "cartpole");
  CHECK(points_equal(a.final_point, b.final_point));
}

TEST_CASE("early stop hook halts training at the requested step") {
  AgentConfig cfg = small_config();
  cfg.total_steps = 1000;
  TrainHooks hooks;
  hooks.should_stop = [](std::size_t step) { return step >= 137; };
  const TrainResult r = train(cfg, "cartpole", &hooks);
  CHECK(r.steps_completed == 137);
  CHECK(r.records.back().step == 137);
}

TEST_CASE("full exploration draws every action") {
  AgentConfig cfg = small_config();
  cfg.total_steps = 200;
  cfg.epsilon_explore = 1.0;
  std::vector<std::size_t> counts(2, 0);
  TrainHooks hooks;
  hooks.on_update = [&](const Transition& t, const MiniBatch&) { ++counts[t.action]; };
  train(cfg, "cartpole", &hooks);
  CHECK(counts[0] + counts[1] == 200);
  CHECK(counts[0] > 40);
  CHECK(counts[1] > 40);
}

TEST_CASE("a non-finite gradient aborts with the last valid parameters") {
  AgentConfig cfg = small_config();
  cfg.total_steps = 50;
  cfg.loss.rho = 1e308;  // regularizer gradient overflows immediately
  const TrainResult r = train(cfg, "cartpole");
  CHECK(r.diverged);
  CHECK_FALSE(r.divergence_message.empty());
  CHECK(r.steps_completed == 1);
  REQUIRE_FALSE(r.records.empty());
  CHECK(r.records.back().step == 1);
  for (const Matrix& u : r.final_point.upsilon) CHECK(all_finite(u));
  CHECK(all_finite(r.final_point.means));
}

TEST_CASE("evaluation of a zero-weight policy matches a constant-action rollout") {
  const ParameterPoint p = zero_weight_point("cartpole", 5);
  const std::uint64_t seed = 99;
  const auto [mean, sd] = evaluate(p, "cartpole", 4, seed);

  Rng seeds(seed);
  std::vector<double> want;
  auto env = make_environment("cartpole");
  for (int e = 0; e < 4; ++e) {
    env->reset(seeds.next_u64());
    double ret = 0.0;
    StepResult r;
    do {
      r = env->step(0);
      ret += r.reward;
    } while (!r.terminated && !r.truncated);
    want.push_back(ret);
  }
  double wmean = 0.0;
  for (double w : want) wmean += w;
  wmean /= 4.0;
  double wvar = 0.0;
  for (double w : want) wvar += (w - wmean) * (w - wmean);
  CHECK(mean == wmean);
  CHECK(sd == doctest::Approx(std::sqrt(wvar / 3.0)).epsilon(1e-15));

  const auto [m1, s1] = evaluate(p, "cartpole", 1, seed);
  CHECK(s1 == 0.0);
  CHECK(m1 == want[0]);
}

TEST_CASE("evaluation is repeatable and leaves its inputs untouched") {
  const ParameterPoint p = zero_weight_point("acrobot", 6);
  const ParameterPoint copy = p;
  const auto [m1, s1] = evaluate(p, "acrobot", 2, 7);
  const auto [m2, s2] = evaluate(p, "acrobot", 2, 7);
  CHECK(m1 == m2);
  CHECK(s1 == s2);
  CHECK(points_equal(p, copy));
  CHECK(m1 >= -500.0);
  CHECK(m1 <= 0.0);
}

TEST_CASE("training rejects invalid configurations") {
  const AgentConfig base = small_config();
  auto expect_throw = [&](auto mutate) {
    AgentConfig cfg = base;
    mutate(cfg);
    CHECK_THROWS_AS(train(cfg, "cartpole"), ContractViolation);
  };
  expect_throw([](AgentConfig& c) { c.buffer_capacity = 0; });
  expect_throw([](AgentConfig& c) { c.batch_size = 0; });
  expect_throw([](AgentConfig& c) { c.eval_every = 0; });
  expect_throw([](AgentConfig& c) { c.eval_episodes = 0; });
  expect_throw([](AgentConfig& c) { c.updates_per_step = 0; });
  expect_throw([](AgentConfig& c) { c.record_every = 0; });
  expect_throw([](AgentConfig& c) { c.epsilon_explore = 1.5; });
  expect_throw([](AgentConfig& c) { c.epsilon_explore = -0.1; });
  expect_throw([](AgentConfig& c) { c.sparsity_tau = -1.0; });
  CHECK_THROWS_AS(train(base, "pendulum"), ContractViolation);
  CHECK_THROWS_AS(evaluate(zero_weight_point("cartpole", 1), "cartpole", 0, 1),
                  ContractViolation);
}

TEST_CASE("a short training run improves the evaluation return") {
  AgentConfig cfg;
  cfg.model.K = 16;
  cfg.model.J = 3;
  cfg.optim.variant = AdamVariant::Standard;
  cfg.optim.learning_rate = 3e-3;
  cfg.buffer_capacity = 10000;
  cfg.batch_size = 32;
  cfg.total_steps = 20000;
  cfg.eval_every = 2000;
  cfg.eval_episodes = 5;
  cfg.epsilon_explore = 0.1;
  cfg.record_every = 500;
  cfg.seed = 3;
  const TrainResult r = train(cfg, "cartpole");
  REQUIRE(r.ever_evaluated);
  REQUIRE_FALSE(r.diverged);
  double first_eval = -1.0;
  for (const TrainRecord& rec : r.records)
    if (rec.evaluated) {
      first_eval = rec.eval_mean;
      break;
    }
  CHECK(r.best_eval >= first_eval + 50.0);
}
