#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "sgmmq/manifold.hpp"

namespace sgmmq {

struct ModelConfig {
  std::size_t K = 50;            // mixture components
  std::size_t J = 3;             // Hadamard factors
  std::size_t state_dim = 0;     // D_s
  std::size_t action_count = 0;  // N_a
  std::uint64_t init_seed = 0;
};

// exp[-(s - m_k)^T C_k^{-1} (s - m_k)], unnormalized: no (2pi) factor.
double gaussian_eval(const ParameterPoint& p, std::size_t k, const Vector& s);

// Entrywise product of the J factor matrices, K x N_a.
Matrix effective_weights(const ParameterPoint& p);

double q_eval(const ParameterPoint& p, const Vector& s, std::size_t a);
Vector q_values(const ParameterPoint& p, const Vector& s);
// Smallest action index attaining the maximum Q-value.
std::size_t greedy_action(const ParameterPoint& p, const Vector& s);

// Fraction of effective-weight entries with |xi| > tau, over K*N_a entries.
double nonzero_fraction(const ParameterPoint& p, double tau);

// Full-model size accounting: xi entries (K*N_a) plus mean entries (K*D_s)
// plus covariance entries (K*D_s^2). An effective weight with |xi| <= tau is
// removable; a component whose entire xi row is below tau additionally frees
// its mean and covariance entries.
std::size_t total_parameter_count(const ParameterPoint& p);
std::size_t active_parameter_count(const ParameterPoint& p, double tau);

// Means uniform per coordinate within [state_low, state_high]; covariances
// identity; factor entries uniform in sign with magnitude in [u/2, u] for
// u = K^{-1/(2J)}, which keeps initial Q-values O(1) while bounding every
// initial |xi| well above the sparsity threshold.
ParameterPoint init_parameters(const ModelConfig& cfg, const Vector& state_low,
                               const Vector& state_high);

void save_checkpoint(const ParameterPoint& p, const std::string& path);
ParameterPoint load_checkpoint(const std::string& path);

namespace detail {

// All Gaussian evaluations in the library funnel through this so that the
// underflow short-circuit (exp(-x) == 0.0 exactly for x >= 750) never
// changes a result bit relative to calling std::exp directly.
inline double gauss_from_quad(double q2) { return q2 >= 750.0 ? 0.0 : std::exp(-q2); }

}  // namespace detail

}  // namespace sgmmq
