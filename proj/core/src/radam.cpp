#include "sgmmq/radam.hpp"

#include <cmath>
#include <string>

#include "sgmmq/errors.hpp"

namespace sgmmq {

namespace {

void check_config(const RAdamConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
    throw ContractViolation("radam_step: learning_rate must be positive and finite");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0))
    throw ContractViolation("radam_step: beta1 must lie in [0, 1)");
  if (!(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
    throw ContractViolation("radam_step: beta2 must lie in [0, 1)");
  if (!(cfg.epsilon >= 0.0) || !std::isfinite(cfg.epsilon))
    throw ContractViolation("radam_step: epsilon must be >= 0 and finite");
}

bool same_shape(const ParameterPoint& a, const ParameterPoint& b) {
  return a.factor_count() == b.factor_count() && a.component_count() == b.component_count() &&
         a.state_dim() == b.state_dim() && a.action_count() == b.action_count();
}

bool tangent_is_zero(const TangentVector& x) {
  for (const Matrix& u : x.d_upsilon)
    if (max_abs(u) != 0.0) return false;
  if (max_abs(x.d_means) != 0.0) return false;
  for (const SymMatrix& c : x.d_covs)
    if (max_abs(c.full()) != 0.0) return false;
  return true;
}

bool slot_is_zero(const SymMatrix& x) {
  const double* d = x.full().data();
  for (std::size_t i = 0; i < x.full().size(); ++i)
    if (d[i] != 0.0) return false;
  return true;
}

}  // namespace

OptimizerState OptimizerState::initial(const ParameterPoint& at) {
  check_point(at);
  OptimizerState st;
  st.momentum = zero_tangent(at);
  st.sigma = 0.0;
  st.step_count = 0;
  st.prev_point = at;
  return st;
}

RAdamStep radam_step(const ParameterPoint& omega, const TangentVector& grad,
                     const OptimizerState& state, const RAdamConfig& cfg) {
  check_config(cfg);
  check_point(omega);
  check_pair(omega, grad);
  check_pair(state.prev_point, state.momentum);
  if (!same_shape(state.prev_point, omega))
    throw ContractViolation("radam_step: state was created for a different model shape");
  if (!(state.sigma >= 0.0) || !std::isfinite(state.sigma))
    throw ContractViolation("radam_step: state.sigma must be >= 0 and finite");

  if (!tangent_finite(grad)) throw OptimizerDivergence("radam_step: gradient is not finite");
  const double gnorm2 = metric(omega, grad, grad);
  if (!std::isfinite(gnorm2)) throw OptimizerDivergence("radam_step: gradient norm overflowed");

  TangentVector pi = transport(state.prev_point, omega, state.momentum, cfg.transport_mode);
  pi = tangent_axpy(cfg.beta1, pi, tangent_scale(1.0 - cfg.beta1, grad));
  if (!tangent_finite(pi)) throw OptimizerDivergence("radam_step: momentum is not finite");

  const std::uint64_t n = state.step_count + 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(n));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(n));
  double sigma;
  double scale = 0.0;
  if (cfg.variant == AdamVariant::PaperLiteral) {
    sigma = cfg.beta2 * state.sigma + gnorm2;
    scale = cfg.learning_rate * bc2 / ((sigma + cfg.epsilon) * bc1);
  } else {
    sigma = cfg.beta2 * state.sigma + (1.0 - cfg.beta2) * gnorm2;
    scale = cfg.learning_rate / (bc1 * (std::sqrt(sigma / bc2) + cfg.epsilon));
  }

  RAdamStep out;
  if (tangent_is_zero(pi)) {
    // No movement; skips the scale entirely, which stays well defined even
    // with epsilon == 0 and an empty history.
    out.point = omega;
    out.state.momentum = pi;
    out.state.sigma = sigma;
    out.state.step_count = n;
    out.state.prev_point = omega;
    return out;
  }
  if (!std::isfinite(scale)) throw OptimizerDivergence("radam_step: step scale is not finite");

  const TangentVector step = tangent_scale(-scale, pi);
  if (!tangent_finite(step)) throw OptimizerDivergence("radam_step: update is not finite");

  // Retraction and the momentum transport to the new point share one
  // eigendecomposition per covariance slot; the results are bit-identical
  // to the point-level retract/transport, which run the same kernels.
  ParameterPoint next;
  next.upsilon.reserve(omega.upsilon.size());
  for (std::size_t j = 0; j < omega.upsilon.size(); ++j) {
    next.upsilon.push_back(omega.upsilon[j] + step.d_upsilon[j]);
    if (!all_finite(next.upsilon[j]))
      throw OptimizerDivergence("radam_step: factor slot diverged");
  }
  next.means = omega.means + step.d_means;
  if (!all_finite(next.means)) throw OptimizerDivergence("radam_step: mean slot diverged");

  TangentVector moved = pi;
  next.covs.reserve(omega.covs.size());
  const bool literal = cfg.transport_mode == TransportMode::PaperLiteral;
  try {
    for (std::size_t k = 0; k < omega.covs.size(); ++k) {
      const bool zero_step = slot_is_zero(step.d_covs[k]);
      if (zero_step && !literal) {
        next.covs.push_back(omega.covs[k]);
        continue;
      }
      const detail::CovEig ce = detail::cov_eig(omega.covs[k]);
      next.covs.push_back(zero_step ? omega.covs[k]
                                    : detail::retract_cov(omega.covs[k], ce, step.d_covs[k]));
      if (literal || !slot_is_zero(pi.d_covs[k]))
        moved.d_covs[k] =
            detail::transport_cov(omega.covs[k], ce, next.covs[k], pi.d_covs[k], cfg.transport_mode);
    }
  } catch (const NumericalError& e) {
    throw OptimizerDivergence(std::string("radam_step: covariance update diverged: ") + e.what());
  }

  out.point = next;
  out.state.momentum = std::move(moved);
  out.state.sigma = sigma;
  out.state.step_count = n;
  out.state.prev_point = std::move(next);
  return out;
}

}  // namespace sgmmq
