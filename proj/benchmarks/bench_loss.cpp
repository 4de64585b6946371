#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "sgmmq/loss.hpp"
#include "sgmmq/model.hpp"

namespace {

using namespace sgmmq;

// Cartpole-sized: K=50, d=4, two actions. Acrobot-sized: K=500, d=6, three.
struct Sizes {
  const char* env;
  std::size_t K;
};
constexpr Sizes kSmall{"cartpole", 50};
constexpr Sizes kLarge{"acrobot", 500};

void run_loss(benchmark::State& state, const Sizes& sz, RegGradMode reg, double rho) {
  const ParameterPoint omega = bench::sized_point(sz.env, sz.K);
  const ParameterPoint target = bench::sized_point(sz.env, sz.K, 13);
  const MiniBatch batch = bench::rollout_batch(sz.env, 64);
  LossConfig cfg;
  cfg.rho = rho;
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_gradient(omega, target, batch, cfg, reg));
}

void BM_loss_grad_cartpole(benchmark::State& state) {
  run_loss(state, kSmall, RegGradMode::Analytic, 1e-3);
}
BENCHMARK(BM_loss_grad_cartpole);

void BM_loss_grad_acrobot(benchmark::State& state) {
  run_loss(state, kLarge, RegGradMode::Analytic, 1e-3);
}
BENCHMARK(BM_loss_grad_acrobot);

void BM_loss_grad_acrobot_paper_reg(benchmark::State& state) {
  run_loss(state, kLarge, RegGradMode::PaperLiteral, 1e-3);
}
BENCHMARK(BM_loss_grad_acrobot_paper_reg);

void BM_q_values(benchmark::State& state) {
  const Sizes sz = state.range(0) == 0 ? kSmall : kLarge;
  const ParameterPoint omega = bench::sized_point(sz.env, sz.K);
  const MiniBatch batch = bench::rollout_batch(sz.env, 64);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(q_values(omega, batch[i].state));
    i = (i + 1) % batch.size();
  }
}
BENCHMARK(BM_q_values)->Arg(0)->Arg(1);

void BM_greedy_action(benchmark::State& state) {
  const Sizes sz = state.range(0) == 0 ? kSmall : kLarge;
  const ParameterPoint omega = bench::sized_point(sz.env, sz.K);
  const MiniBatch batch = bench::rollout_batch(sz.env, 64);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(greedy_action(omega, batch[i].state));
    i = (i + 1) % batch.size();
  }
}
BENCHMARK(BM_greedy_action)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
