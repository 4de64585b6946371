#pragma once

#include <functional>
#include <vector>

#include "sgmmq/manifold.hpp"
#include "sgmmq/model.hpp"

namespace sgmmq {

struct Transition {
  Vector state;
  std::size_t action = 0;
  double reward = 0.0;
  Vector next_state;
  bool terminal = false;  // true only on genuine termination, not truncation
};

using MiniBatch = std::vector<Transition>;

struct LossConfig {
  double alpha = 0.99;  // discount
  double rho = 0.0;     // factor regularization coefficient
};

enum class RegGradMode {
  Analytic,      // d/dU of rho*sum_j ||U_j||_F^2, i.e. 2*rho*U_j
  PaperLiteral,  // rho * (entrywise product over the other factors)
};

using Policy = std::function<std::size_t(const Vector&)>;

// delta = q_eval(omega, s, a) - r - alpha * q_eval(target, s', mu(s'));
// the bootstrap term is masked to zero on terminal transitions.
double td_residual(const ParameterPoint& omega, const ParameterPoint& target, const Policy& mu,
                   const Transition& t, const LossConfig& cfg);

// (1/T) * sum_t delta_t^2 + rho * sum_j ||U_j||_F^2
double loss(const ParameterPoint& omega, const ParameterPoint& target, const Policy& mu,
            const MiniBatch& batch, const LossConfig& cfg);

// Riemannian gradient of the loss at omega. Flat slots carry the Euclidean
// partials; covariance slots carry the affine-invariant gradient
// C_k * G_euc * C_k, which reduces to the closed form
// (1/T) sum_t 2 delta_t xi_k(a_t) G_k(s_t) (s_t - m_k)(s_t - m_k)^T.
TangentVector riemannian_gradient(const ParameterPoint& omega, const ParameterPoint& target,
                                  const Policy& mu, const MiniBatch& batch, const LossConfig& cfg,
                                  RegGradMode reg_mode = RegGradMode::Analytic);

struct LossAndGradient {
  double value = 0.0;
  TangentVector gradient;
};

// Fused evaluation for the policy-evaluation configuration of the training
// loop, where the bootstrap policy is greedy with respect to `target`. Bit
// identical to calling loss/riemannian_gradient with that greedy policy,
// while evaluating the target's Gaussians once per transition instead of
// three times.
LossAndGradient loss_and_gradient(const ParameterPoint& omega, const ParameterPoint& target,
                                  const MiniBatch& batch, const LossConfig& cfg,
                                  RegGradMode reg_mode = RegGradMode::Analytic);

}  // namespace sgmmq
