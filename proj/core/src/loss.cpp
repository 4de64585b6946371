#include "sgmmq/loss.hpp"

#include "sgmmq/errors.hpp"
#include "sgmmq/spd.hpp"

namespace sgmmq {

namespace {

void check_config(const LossConfig& cfg) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0))
    throw ContractViolation("loss: alpha must lie in [0, 1]");
  if (!(cfg.rho >= 0.0)) throw ContractViolation("loss: rho must be >= 0");
}

void check_inputs(const ParameterPoint& omega, const ParameterPoint& target,
                  const MiniBatch& batch, const LossConfig& cfg) {
  check_config(cfg);
  check_point(omega);
  check_point(target);
  if (omega.component_count() != target.component_count() ||
      omega.factor_count() != target.factor_count() ||
      omega.state_dim() != target.state_dim() ||
      omega.action_count() != target.action_count())
    throw ContractViolation("loss: omega and target have different shapes");
  if (batch.empty()) throw ContractViolation("loss: batch is empty");
  const std::size_t ds = omega.state_dim();
  const std::size_t na = omega.action_count();
  for (const Transition& t : batch) {
    if (t.state.size() != ds || t.next_state.size() != ds)
      throw ContractViolation("loss: transition state dimension mismatch");
    if (t.action >= na) throw ContractViolation("loss: transition action out of range");
  }
}

// Residuals for the whole batch. `mu` selects the bootstrap action; when it
// is null the greedy action under `target` is used directly, which matches
// passing greedy_action(target, .) bit for bit since q_values and q_eval
// accumulate identical sums. When `gout` is non-null it receives the T x K
// table of Gaussian activations at omega, reused by the gradient pass.
std::vector<double> residuals(const ParameterPoint& omega, const ParameterPoint& target,
                              const Policy* mu, const MiniBatch& batch, const LossConfig& cfg,
                              Matrix* gout) {
  const std::size_t tc = batch.size();
  const std::size_t kc = omega.component_count();
  const std::size_t jc = omega.factor_count();
  const std::size_t ds = omega.state_dim();
  std::vector<double> delta(tc);
  Vector d(ds);
  for (std::size_t t = 0; t < tc; ++t) {
    const Transition& tr = batch[t];
    double qsa = 0.0;
    for (std::size_t k = 0; k < kc; ++k) {
      for (std::size_t i = 0; i < ds; ++i) d[i] = tr.state[i] - omega.means(i, k);
      const double g = detail::gauss_from_quad(quad_form(omega.covs[k], d));
      if (gout) (*gout)(t, k) = g;
      if (g == 0.0) continue;
      double xi = omega.upsilon[0](k, tr.action);
      for (std::size_t j = 1; j < jc; ++j) xi *= omega.upsilon[j](k, tr.action);
      qsa += xi * g;
    }
    double boot = 0.0;
    if (!tr.terminal) {
      if (mu) {
        const std::size_t ap = (*mu)(tr.next_state);
        if (ap >= omega.action_count())
          throw ContractViolation("loss: policy returned an out-of-range action");
        boot = cfg.alpha * q_eval(target, tr.next_state, ap);
      } else {
        const Vector qv = q_values(target, tr.next_state);
        std::size_t best = 0;
        for (std::size_t a = 1; a < qv.size(); ++a)
          if (qv[a] > qv[best]) best = a;
        boot = cfg.alpha * qv[best];
      }
    }
    delta[t] = qsa - tr.reward - boot;
  }
  return delta;
}

double loss_from_residuals(const std::vector<double>& delta, const ParameterPoint& omega,
                           const LossConfig& cfg) {
  double sq = 0.0;
  for (double dl : delta) sq += dl * dl;
  double value = sq / static_cast<double>(delta.size());
  double reg = 0.0;
  for (const Matrix& u : omega.upsilon) reg += frobenius_inner(u, u);
  value += cfg.rho * reg;
  return value;
}

// Entrywise products over all factors but one, for every leave-one-out slot.
std::vector<Matrix> leave_one_out_products(const ParameterPoint& omega) {
  const std::size_t jc = omega.factor_count();
  const std::size_t kc = omega.component_count();
  const std::size_t na = omega.action_count();
  std::vector<Matrix> prods(jc, Matrix(kc, na));
  for (std::size_t k = 0; k < kc; ++k) {
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t j = 0; j < jc; ++j) {
        double p = 1.0;
        for (std::size_t jj = 0; jj < jc; ++jj)
          if (jj != j) p *= omega.upsilon[jj](k, a);
        prods[j](k, a) = p;
      }
    }
  }
  return prods;
}

TangentVector gradient_from_residuals(const ParameterPoint& omega, const MiniBatch& batch,
                                      const std::vector<double>& delta, const Matrix& gauss,
                                      const LossConfig& cfg, RegGradMode reg_mode) {
  const std::size_t tc = batch.size();
  const std::size_t kc = omega.component_count();
  const std::size_t jc = omega.factor_count();
  const std::size_t ds = omega.state_dim();
  const double tcount = static_cast<double>(tc);

  const Matrix xi = effective_weights(omega);
  const std::vector<Matrix> prods = leave_one_out_products(omega);

  TangentVector grad = zero_tangent(omega);
  Vector d(ds);
  for (std::size_t t = 0; t < tc; ++t) {
    const Transition& tr = batch[t];
    const double c2 = 2.0 * delta[t] / tcount;
    const double c4 = 4.0 * delta[t] / tcount;
    for (std::size_t k = 0; k < kc; ++k) {
      const double g = gauss(t, k);
      if (g == 0.0) continue;
      for (std::size_t j = 0; j < jc; ++j)
        grad.d_upsilon[j](k, tr.action) += c2 * prods[j](k, tr.action) * g;
      const double xika = xi(k, tr.action);
      if (xika == 0.0) continue;
      for (std::size_t i = 0; i < ds; ++i) d[i] = tr.state[i] - omega.means(i, k);
      const Vector w = omega.covs[k].solve(d);
      const double cm = c4 * xika * g;
      for (std::size_t i = 0; i < ds; ++i) grad.d_means(i, k) += cm * w[i];
      const double cc = c2 * xika * g;
      SymMatrix& dc = grad.d_covs[k];
      for (std::size_t i = 0; i < ds; ++i) {
        const double cdi = cc * d[i];
        for (std::size_t l = i; l < ds; ++l) dc.set(i, l, dc(i, l) + cdi * d[l]);
      }
    }
  }

  if (cfg.rho != 0.0) {
    if (reg_mode == RegGradMode::Analytic) {
      const double c = 2.0 * cfg.rho;
      for (std::size_t j = 0; j < jc; ++j) {
        double* out = grad.d_upsilon[j].data();
        const double* u = omega.upsilon[j].data();
        for (std::size_t i = 0; i < omega.upsilon[j].size(); ++i) out[i] += c * u[i];
      }
    } else {
      for (std::size_t j = 0; j < jc; ++j) {
        double* out = grad.d_upsilon[j].data();
        const double* p = prods[j].data();
        for (std::size_t i = 0; i < prods[j].size(); ++i) out[i] += cfg.rho * p[i];
      }
    }
  }
  return grad;
}

}  // namespace

double td_residual(const ParameterPoint& omega, const ParameterPoint& target, const Policy& mu,
                   const Transition& t, const LossConfig& cfg) {
  const MiniBatch batch{t};
  check_inputs(omega, target, batch, cfg);
  return residuals(omega, target, &mu, batch, cfg, nullptr)[0];
}

double loss(const ParameterPoint& omega, const ParameterPoint& target, const Policy& mu,
            const MiniBatch& batch, const LossConfig& cfg) {
  check_inputs(omega, target, batch, cfg);
  const std::vector<double> delta = residuals(omega, target, &mu, batch, cfg, nullptr);
  return loss_from_residuals(delta, omega, cfg);
}

TangentVector riemannian_gradient(const ParameterPoint& omega, const ParameterPoint& target,
                                  const Policy& mu, const MiniBatch& batch, const LossConfig& cfg,
                                  RegGradMode reg_mode) {
  check_inputs(omega, target, batch, cfg);
  Matrix gauss(batch.size(), omega.component_count());
  const std::vector<double> delta = residuals(omega, target, &mu, batch, cfg, &gauss);
  return gradient_from_residuals(omega, batch, delta, gauss, cfg, reg_mode);
}

LossAndGradient loss_and_gradient(const ParameterPoint& omega, const ParameterPoint& target,
                                  const MiniBatch& batch, const LossConfig& cfg,
                                  RegGradMode reg_mode) {
  check_inputs(omega, target, batch, cfg);
  Matrix gauss(batch.size(), omega.component_count());
  const std::vector<double> delta = residuals(omega, target, nullptr, batch, cfg, &gauss);
  LossAndGradient out;
  out.value = loss_from_residuals(delta, omega, cfg);
  out.gradient = gradient_from_residuals(omega, batch, delta, gauss, cfg, reg_mode);
  return out;
}

}  // namespace sgmmq
