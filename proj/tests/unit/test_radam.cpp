#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <doctest.h>

#include "sgmmq/errors.hpp"
#include "sgmmq/loss.hpp"
#include "sgmmq/manifold.hpp"
#include "sgmmq/model.hpp"
#include "sgmmq/radam.hpp"
#include "sgmmq/rng.hpp"
#include "test_helpers.hpp"

using namespace sgmmq;
using namespace sgmmq::testing;

namespace {

ParameterPoint make_point(std::uint64_t seed, std::size_t kc, std::size_t jc, std::size_t ds,
                          std::size_t na, double cov_scale = 0.6) {
  ModelConfig mc;
  mc.K = kc;
  mc.J = jc;
  mc.state_dim = ds;
  mc.action_count = na;
  mc.init_seed = seed;
  const Vector lo(ds, -1.0), hi(ds, 1.0);
  ParameterPoint p = init_parameters(mc, lo, hi);
  Rng r(mix64(seed, 0x517c));
  TangentVector tv = zero_tangent(p);
  for (std::size_t k = 0; k < kc; ++k)
    for (std::size_t i = 0; i < ds; ++i)
      for (std::size_t l = i; l < ds; ++l) tv.d_covs[k].set(i, l, r.uniform(-cov_scale, cov_scale));
  return retract(p, tv);
}

TangentVector random_tangent(Rng& r, const ParameterPoint& p, double scale) {
  TangentVector x = zero_tangent(p);
  for (Matrix& u : x.d_upsilon)
    for (std::size_t i = 0; i < u.size(); ++i) u.data()[i] = r.uniform(-scale, scale);
  for (std::size_t i = 0; i < x.d_means.size(); ++i) x.d_means.data()[i] = r.uniform(-scale, scale);
  for (SymMatrix& c : x.d_covs)
    for (std::size_t i = 0; i < c.dim(); ++i)
      for (std::size_t l = i; l < c.dim(); ++l) c.set(i, l, r.uniform(-scale, scale));
  return x;
}

bool points_equal(const ParameterPoint& a, const ParameterPoint& b) {
  if (a.upsilon.size() != b.upsilon.size() || a.covs.size() != b.covs.size()) return false;
  for (std::size_t j = 0; j < a.upsilon.size(); ++j)
    if (!(a.upsilon[j] == b.upsilon[j])) return false;
  if (!(a.means == b.means)) return false;
  for (std::size_t k = 0; k < a.covs.size(); ++k)
    if (!(a.covs[k] == b.covs[k])) return false;
  return true;
}

// Minimal flat fixture: one component, one factor, identity covariance.
ParameterPoint flat_point() {
  ParameterPoint p;
  p.upsilon = {Matrix(1, 2)};
  p.upsilon[0](0, 0) = 0.8;
  p.upsilon[0](0, 1) = -0.3;
  p.means = Matrix(1, 1);
  p.covs = {SpdMatrix::identity(1)};
  return p;
}

TangentVector flat_grad(const ParameterPoint& p, double g) {
  TangentVector x = zero_tangent(p);
  x.d_upsilon[0](0, 0) = g;
  return x;
}

}  // namespace

TEST_CASE("initial state: zero momentum anchored at the start point") {
  const ParameterPoint om = make_point(1, 3, 2, 2, 2);
  const OptimizerState st = OptimizerState::initial(om);
  CHECK(st.sigma == 0.0);
  CHECK(st.step_count == 0);
  CHECK(points_equal(st.prev_point, om));
  CHECK(max_abs(st.momentum.d_means) == 0.0);
  for (const Matrix& u : st.momentum.d_upsilon) CHECK(max_abs(u) == 0.0);
  for (const SymMatrix& c : st.momentum.d_covs) CHECK(max_abs(c.full()) == 0.0);
}

TEST_CASE("zero gradient never moves the point, even with epsilon == 0") {
  const ParameterPoint om = make_point(2, 3, 2, 2, 2);
  RAdamConfig cfg;
  cfg.epsilon = 0.0;
  OptimizerState st = OptimizerState::initial(om);
  const TangentVector zg = zero_tangent(om);

  for (int i = 1; i <= 3; ++i) {
    const RAdamStep r = radam_step(om, zg, st, cfg);
    CHECK(points_equal(r.point, om));
    CHECK(r.state.sigma == 0.0);
    CHECK(r.state.step_count == static_cast<std::uint64_t>(i));
    st = r.state;
  }
}

TEST_CASE("first step blends the gradient with weight 1 - beta1") {
  const ParameterPoint om = make_point(3, 3, 2, 2, 2);
  RAdamConfig cfg;
  OptimizerState st = OptimizerState::initial(om);
  Rng r(33);
  TangentVector g = zero_tangent(om);
  for (Matrix& u : g.d_upsilon)
    for (std::size_t i = 0; i < u.size(); ++i) u.data()[i] = r.uniform(-1.0, 1.0);

  const RAdamStep out = radam_step(om, g, st, cfg);
  const double w = 1.0 - cfg.beta1;
  for (std::size_t j = 0; j < g.d_upsilon.size(); ++j)
    for (std::size_t i = 0; i < g.d_upsilon[j].size(); ++i)
      CHECK(rel_err(out.state.momentum.d_upsilon[j].data()[i], w * g.d_upsilon[j].data()[i]) <
            1e-15);
  const double gn2 = metric(om, g, g);
  CHECK(out.state.sigma == gn2);  // paper-literal accumulator, empty history

  RAdamConfig std_cfg;
  std_cfg.variant = AdamVariant::Standard;
  const RAdamStep out2 = radam_step(om, g, st, std_cfg);
  CHECK(out2.state.sigma == (1.0 - std_cfg.beta2) * gn2);
}

TEST_CASE("two steps on a flat slot reproduce the scalar recursion, both variants") {
  const double lr = 3e-4, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double g1 = 0.7, g2 = -0.4;

  for (const AdamVariant variant : {AdamVariant::PaperLiteral, AdamVariant::Standard}) {
    const ParameterPoint om = flat_point();
    RAdamConfig cfg;
    cfg.variant = variant;

    const RAdamStep s1 = radam_step(om, flat_grad(om, g1), OptimizerState::initial(om), cfg);
    const RAdamStep s2 = radam_step(s1.point, flat_grad(s1.point, g2), s1.state, cfg);

    // scalar oracle
    double pi = (1.0 - b1) * g1;
    double sigma, scale;
    if (variant == AdamVariant::PaperLiteral) {
      sigma = g1 * g1;
      scale = lr * (1.0 - b2) / ((sigma + eps) * (1.0 - b1));
    } else {
      sigma = (1.0 - b2) * (g1 * g1);
      scale = lr / ((1.0 - b1) * (std::sqrt(sigma / (1.0 - b2)) + eps));
    }
    double u = 0.8 - scale * pi;
    pi = b1 * pi + (1.0 - b1) * g2;
    if (variant == AdamVariant::PaperLiteral) {
      sigma = b2 * sigma + g2 * g2;
      scale = lr * (1.0 - b2 * b2) / ((sigma + eps) * (1.0 - b1 * b1));
    } else {
      sigma = b2 * sigma + (1.0 - b2) * (g2 * g2);
      scale = lr / ((1.0 - b1 * b1) * (std::sqrt(sigma / (1.0 - b2 * b2)) + eps));
    }
    u -= scale * pi;

    CHECK(rel_err(s2.state.sigma, sigma) < 1e-14);
    CHECK(rel_err(s2.state.momentum.d_upsilon[0](0, 0), pi) < 1e-14);
    CHECK(rel_err(s2.point.upsilon[0](0, 0), u) < 1e-13);
    CHECK(s2.point.upsilon[0](0, 1) == -0.3);
    CHECK(s2.state.step_count == 2);
  }
}

TEST_CASE("one step decomposes into the public transport/blend/retract operations") {
  const ParameterPoint om = make_point(7, 3, 2, 2, 2);
  Rng r(77);
  const TangentVector grad = random_tangent(r, om, 0.5);
  OptimizerState st = OptimizerState::initial(om);
  st.momentum = random_tangent(r, om, 0.3);
  st.sigma = 0.3;
  st.step_count = 3;

  for (const TransportMode mode : {TransportMode::Standard, TransportMode::PaperLiteral}) {
    RAdamConfig cfg;
    cfg.transport_mode = mode;
    const RAdamStep out = radam_step(om, grad, st, cfg);

    TangentVector pi = transport(om, om, st.momentum, mode);
    pi = tangent_axpy(cfg.beta1, pi, tangent_scale(1.0 - cfg.beta1, grad));
    const double gnorm2 = metric(om, grad, grad);
    const double n = 4.0;
    const double bc1 = 1.0 - std::pow(cfg.beta1, n);
    const double bc2 = 1.0 - std::pow(cfg.beta2, n);
    const double sigma = cfg.beta2 * st.sigma + gnorm2;
    const double scale = cfg.learning_rate * bc2 / ((sigma + cfg.epsilon) * bc1);
    const ParameterPoint want_pt = retract(om, tangent_scale(-scale, pi));
    const TangentVector want_mom = transport(om, want_pt, pi, mode);

    REQUIRE(points_equal(out.point, want_pt));
    CHECK(out.state.sigma == sigma);
    CHECK(out.state.step_count == 4);
    REQUIRE(points_equal(out.state.prev_point, out.point));
    for (std::size_t j = 0; j < want_mom.d_upsilon.size(); ++j)
      CHECK(out.state.momentum.d_upsilon[j] == want_mom.d_upsilon[j]);
    CHECK(out.state.momentum.d_means == want_mom.d_means);
    for (std::size_t k = 0; k < want_mom.d_covs.size(); ++k)
      CHECK(out.state.momentum.d_covs[k] == want_mom.d_covs[k]);
  }
}

TEST_CASE("momentum norm never exceeds the largest gradient norm seen") {
  ParameterPoint cur = make_point(9, 3, 2, 2, 2);
  RAdamConfig cfg;
  cfg.learning_rate = 1e-2;
  OptimizerState st = OptimizerState::initial(cur);
  Rng r(99);
  double maxg = 0.0;
  for (int i = 0; i < 25; ++i) {
    const TangentVector g = random_tangent(r, cur, 1.0);
    maxg = std::max(maxg, std::sqrt(metric(cur, g, g)));
    const RAdamStep out = radam_step(cur, g, st, cfg);
    const double pn = std::sqrt(metric(out.point, out.state.momentum, out.state.momentum));
    CHECK(pn <= maxg + 1e-8);
    CHECK(out.state.sigma >= 0.0);
    cur = out.point;
    st = out.state;
  }
}

TEST_CASE("with beta1 == 0 the flat update is a positive multiple of -grad") {
  const ParameterPoint om = make_point(13, 3, 2, 2, 2);
  RAdamConfig cfg;
  cfg.beta1 = 0.0;
  cfg.variant = AdamVariant::Standard;
  Rng r(131);
  TangentVector g = zero_tangent(om);
  for (Matrix& u : g.d_upsilon)
    for (std::size_t i = 0; i < u.size(); ++i) u.data()[i] = r.uniform(0.2, 1.0);

  const RAdamStep out = radam_step(om, g, OptimizerState::initial(om), cfg);
  const double ratio0 =
      (out.point.upsilon[0].data()[0] - om.upsilon[0].data()[0]) / g.d_upsilon[0].data()[0];
  CHECK(ratio0 < 0.0);
  for (std::size_t j = 0; j < g.d_upsilon.size(); ++j)
    for (std::size_t i = 0; i < g.d_upsilon[j].size(); ++i) {
      const double ratio =
          (out.point.upsilon[j].data()[i] - om.upsilon[j].data()[i]) / g.d_upsilon[j].data()[i];
      CHECK(rel_err(ratio, ratio0) < 1e-12);
    }
}

TEST_CASE("optimizing a fixed Bellman-residual objective reduces it, deterministically") {
  ParameterPoint cur = make_point(17, 4, 2, 2, 2);
  const ParameterPoint target = cur;
  Rng r(171);
  MiniBatch batch(24);
  for (Transition& tr : batch) {
    tr.state = random_vector(r, 2, 1.2);
    tr.next_state = random_vector(r, 2, 1.2);
    tr.action = r.uniform_index(2);
    tr.reward = r.uniform(-1.0, 1.0);
    tr.terminal = r.uniform01() < 0.15;
  }
  LossConfig lcfg;
  lcfg.alpha = 0.9;
  lcfg.rho = 0.005;
  RAdamConfig cfg;
  cfg.variant = AdamVariant::Standard;
  cfg.learning_rate = 5e-3;

  const auto run = [&] {
    ParameterPoint p = cur;
    OptimizerState st = OptimizerState::initial(p);
    for (int i = 0; i < 100; ++i) {
      const LossAndGradient lg = loss_and_gradient(p, target, batch, lcfg);
      const RAdamStep out = radam_step(p, lg.gradient, st, cfg);
      p = out.point;
      st = out.state;
    }
    return std::pair<ParameterPoint, double>(p, st.sigma);
  };

  const double before = loss_and_gradient(cur, target, batch, lcfg).value;
  const auto [p1, sig1] = run();
  const double after = loss_and_gradient(p1, target, batch, lcfg).value;
  CHECK(after < before);

  const auto [p2, sig2] = run();
  CHECK(points_equal(p1, p2));
  CHECK(sig1 == sig2);
}

TEST_CASE("paper-literal scaling stalls under a constant gradient while standard does not") {
  const double g = 0.5;
  const auto cfg_free_expected = [](double gc) {
    const RAdamConfig d;
    return d.learning_rate * (1.0 - d.beta2) / gc;
  };
  auto step_sizes = [&](AdamVariant variant) {
    ParameterPoint p = flat_point();
    RAdamConfig cfg;
    cfg.variant = variant;
    OptimizerState st = OptimizerState::initial(p);
    std::vector<double> deltas;
    for (int i = 0; i < 10; ++i) {
      const RAdamStep out = radam_step(p, flat_grad(p, g), st, cfg);
      deltas.push_back(std::abs(out.point.upsilon[0](0, 0) - p.upsilon[0](0, 0)));
      p = out.point;
      st = out.state;
    }
    return deltas;
  };

  // Under a constant gradient the non-EMA accumulator cancels its own bias
  // correction and the step settles near lr * (1 - beta2) / g, orders of
  // magnitude below the standard variant's lr-sized steps.
  const std::vector<double> lit = step_sizes(AdamVariant::PaperLiteral);
  const std::vector<double> std_ = step_sizes(AdamVariant::Standard);
  CHECK(lit[9] < 0.01 * std_[9]);
  CHECK(std_[9] > 0.5 * std_[1]);
  CHECK(rel_err(lit[9], cfg_free_expected(g)) < 0.05);
}

TEST_CASE("non-finite gradients and runaway updates raise OptimizerDivergence") {
  const ParameterPoint om = make_point(19, 3, 2, 2, 2);
  const OptimizerState st = OptimizerState::initial(om);
  RAdamConfig cfg;

  TangentVector g = zero_tangent(om);
  g.d_means(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(radam_step(om, g, st, cfg), OptimizerDivergence);
  g.d_means(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(radam_step(om, g, st, cfg), OptimizerDivergence);

  // A huge stored momentum on a covariance slot overflows the retraction.
  OptimizerState big = st;
  big.momentum.d_covs[0].set(0, 0, 1e300);
  big.sigma = 1.0;
  big.step_count = 1;
  CHECK_THROWS_AS(radam_step(om, zero_tangent(om), big, cfg), OptimizerDivergence);

  // Nonzero momentum with no gradient history and epsilon == 0: the scale
  // is 1/0. This is exactly what the epsilon guard exists for.
  OptimizerState bare = st;
  bare.momentum.d_means(0, 0) = 0.5;
  RAdamConfig noeps;
  noeps.epsilon = 0.0;
  CHECK_THROWS_AS(radam_step(om, zero_tangent(om), bare, noeps), OptimizerDivergence);
  CHECK_NOTHROW(radam_step(om, zero_tangent(om), bare, cfg));

  // After a throw the inputs are untouched and still usable.
  const RAdamStep ok = radam_step(om, zero_tangent(om), st, cfg);
  CHECK(points_equal(ok.point, om));
}

TEST_CASE("configuration and shape violations are rejected") {
  const ParameterPoint om = make_point(23, 3, 2, 2, 2);
  const OptimizerState st = OptimizerState::initial(om);
  const TangentVector g = zero_tangent(om);

  RAdamConfig bad;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(radam_step(om, g, st, bad), ContractViolation);
  bad = RAdamConfig{};
  bad.beta1 = 1.0;
  CHECK_THROWS_AS(radam_step(om, g, st, bad), ContractViolation);
  bad = RAdamConfig{};
  bad.beta2 = -0.1;
  CHECK_THROWS_AS(radam_step(om, g, st, bad), ContractViolation);
  bad = RAdamConfig{};
  bad.epsilon = -1e-9;
  CHECK_THROWS_AS(radam_step(om, g, st, bad), ContractViolation);

  OptimizerState neg = st;
  neg.sigma = -1.0;
  CHECK_THROWS_AS(radam_step(om, g, neg, RAdamConfig{}), ContractViolation);

  const ParameterPoint other = make_point(24, 4, 2, 2, 2);
  CHECK_THROWS_AS(radam_step(other, zero_tangent(other), st, RAdamConfig{}), ContractViolation);
}
