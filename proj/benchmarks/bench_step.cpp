#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "sgmmq/env.hpp"
#include "sgmmq/loss.hpp"
#include "sgmmq/manifold.hpp"
#include "sgmmq/radam.hpp"

namespace {

using namespace sgmmq;

void BM_env_step(benchmark::State& state) {
  const char* name = state.range(0) == 0 ? "cartpole" : "acrobot";
  const auto env = make_environment(name);
  std::size_t episode_seed = 0;
  env->reset(episode_seed);
  Rng rng(3);
  for (auto _ : state) {
    const StepResult r = env->step(rng.uniform_index(env->spec().action_count));
    benchmark::DoNotOptimize(r.next_state[0]);
    if (r.terminated || r.truncated) env->reset(++episode_seed);
  }
}
BENCHMARK(BM_env_step)->Arg(0)->Arg(1);

void BM_retract(benchmark::State& state) {
  const char* name = state.range(0) == 0 ? "cartpole" : "acrobot";
  const std::size_t K = state.range(0) == 0 ? 50 : 500;
  const ParameterPoint omega = bench::sized_point(name, K);
  const MiniBatch batch = bench::rollout_batch(name, 64);
  const LossAndGradient lg = loss_and_gradient(omega, omega, batch, LossConfig{});
  const TangentVector step = tangent_scale(-1e-3, lg.gradient);
  for (auto _ : state) benchmark::DoNotOptimize(retract(omega, step));
}
BENCHMARK(BM_retract)->Arg(0)->Arg(1);

// One full optimizer update at the benchmark sizes: transport, blend,
// retract, plus the moment bookkeeping.
void BM_radam_step(benchmark::State& state) {
  const char* name = state.range(0) == 0 ? "cartpole" : "acrobot";
  const std::size_t K = state.range(0) == 0 ? 50 : 500;
  const ParameterPoint omega = bench::sized_point(name, K);
  const MiniBatch batch = bench::rollout_batch(name, 64);
  const LossAndGradient lg = loss_and_gradient(omega, omega, batch, LossConfig{});
  RAdamConfig cfg;
  cfg.variant = AdamVariant::Standard;
  const OptimizerState warm = [&] {
    RAdamStep first = radam_step(omega, lg.gradient, OptimizerState::initial(omega), cfg);
    return first.state;
  }();
  for (auto _ : state) benchmark::DoNotOptimize(radam_step(omega, lg.gradient, warm, cfg));
}
BENCHMARK(BM_radam_step)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
