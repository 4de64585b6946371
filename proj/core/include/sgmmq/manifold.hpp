#pragma once

#include <vector>

#include "sgmmq/matrix.hpp"
#include "sgmmq/spd.hpp"

namespace sgmmq {

// A point on the product manifold: J factor matrices (K x N_a) and the
// Gaussian means (columns of a D_s x K matrix) live on flat Euclidean
// slots; the K covariances live on the SPD manifold with the
// affine-invariant metric.
struct ParameterPoint {
  std::vector<Matrix> upsilon;
  Matrix means;
  std::vector<SpdMatrix> covs;

  std::size_t factor_count() const { return upsilon.size(); }
  std::size_t component_count() const { return means.cols(); }
  std::size_t state_dim() const { return means.rows(); }
  std::size_t action_count() const { return upsilon.empty() ? 0 : upsilon[0].cols(); }
};

// Tangent vector at a ParameterPoint, slot for slot. Covariance slots are
// symmetric matrices.
struct TangentVector {
  std::vector<Matrix> d_upsilon;
  Matrix d_means;
  std::vector<SymMatrix> d_covs;
};

enum class TransportMode { Standard, PaperLiteral };

// Shape consistency; throws ContractViolation on violation.
void check_point(const ParameterPoint& p);
void check_pair(const ParameterPoint& p, const TangentVector& t);

TangentVector zero_tangent(const ParameterPoint& p);
TangentVector tangent_scale(double a, const TangentVector& x);
// a*x + y
TangentVector tangent_axpy(double a, const TangentVector& x, const TangentVector& y);
bool tangent_finite(const TangentVector& x);

// Riemannian inner product at `at`: Frobenius on the flat slots plus
// tr(C^{-1} X C^{-1} Y) on each covariance slot.
double metric(const ParameterPoint& at, const TangentVector& x, const TangentVector& y);

// Flat slots move by addition; covariance slots move along the exponential
// map C^{1/2} Exp[C^{-1/2} X C^{-1/2}] C^{1/2}.
ParameterPoint retract(const ParameterPoint& base, const TangentVector& step);

// Parallel-style transport of a tangent vector between points: identity on
// the flat slots; on covariance slots X -> E X E^T with
// E = (B A^{-1})^{1/2} in Standard mode. PaperLiteral instead uses the
// one-sided factor A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2}, which is not the
// identity even when the endpoints coincide; it is kept behind this switch
// for side-by-side comparison.
TangentVector transport(const ParameterPoint& from, const ParameterPoint& to,
                        const TangentVector& x, TransportMode mode = TransportMode::Standard);

namespace detail {

// Slot-level kernels. The optimizer calls these directly so it can reuse
// cached eigendecompositions; the point-level functions above go through
// the same code, so both paths produce bit-identical results.
struct CovEig {
  Matrix vectors;
  Vector values;
};

CovEig cov_eig(const SpdMatrix& c);
SpdMatrix retract_cov(const SpdMatrix& c, const CovEig& ce, const SymMatrix& x);
SymMatrix transport_cov(const SpdMatrix& a, const CovEig& ae, const SpdMatrix& b,
                        const SymMatrix& x, TransportMode mode);
double metric_cov(const SpdMatrix& c, const SymMatrix& x, const SymMatrix& y);

}  // namespace detail

}  // namespace sgmmq
