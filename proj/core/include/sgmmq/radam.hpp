#pragma once

#include <cstdint>

#include "sgmmq/manifold.hpp"

namespace sgmmq {

enum class AdamVariant {
  // sigma_n = beta2 sigma_{n-1} + |grad|^2, step scale
  // lr (1 - beta2^n) / ((sigma_n + eps)(1 - beta1^n)). The accumulator is not
  // an EMA, so the effective rate decays like lr (1 - beta2) / |grad|^2 once
  // n is large; kept selectable for side-by-side runs.
  PaperLiteral,
  // sigma_n = beta2 sigma_{n-1} + (1 - beta2) |grad|^2 with the usual
  // bias-corrected step -lr Pi_hat / (sqrt(sigma_hat) + eps).
  Standard,
};

struct RAdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  AdamVariant variant = AdamVariant::PaperLiteral;
  TransportMode transport_mode = TransportMode::Standard;
};

// Momentum lives in the tangent space at prev_point; sigma is a single
// scalar accumulating squared gradient norms across the whole product
// manifold rather than a per-coordinate table.
struct OptimizerState {
  TangentVector momentum;
  double sigma = 0.0;
  std::uint64_t step_count = 0;
  ParameterPoint prev_point;

  static OptimizerState initial(const ParameterPoint& at);
};

struct RAdamStep {
  ParameterPoint point;
  OptimizerState state;
};

// One optimizer step at omega. The stored momentum is first transported from
// state.prev_point to omega (a bitwise no-op on slots whose covariance did
// not move under the standard transport), blended with the gradient, and the
// step is taken through the retraction. The returned momentum is expressed
// at the returned point, which is also recorded as prev_point.
//
// Throws OptimizerDivergence if the gradient, the step scale, or the updated
// parameters are non-finite; the caller's state is never modified.
RAdamStep radam_step(const ParameterPoint& omega, const TangentVector& grad,
                     const OptimizerState& state, const RAdamConfig& cfg);

}  // namespace sgmmq
