#include "sgmmq/manifold.hpp"

#include <cmath>

#include "sgmmq/errors.hpp"

namespace sgmmq {

void check_point(const ParameterPoint& p) {
  if (p.upsilon.empty()) throw ContractViolation("ParameterPoint: needs at least one factor matrix");
  const std::size_t k = p.upsilon[0].rows();
  const std::size_t na = p.upsilon[0].cols();
  if (k == 0 || na == 0) throw ContractViolation("ParameterPoint: empty factor matrix");
  for (const Matrix& u : p.upsilon)
    if (u.rows() != k || u.cols() != na)
      throw ContractViolation("ParameterPoint: factor matrices disagree in shape");
  if (p.means.cols() != k) throw ContractViolation("ParameterPoint: means column count != K");
  if (p.means.rows() == 0) throw ContractViolation("ParameterPoint: zero state dimension");
  if (p.covs.size() != k) throw ContractViolation("ParameterPoint: covariance count != K");
  for (const SpdMatrix& c : p.covs)
    if (c.dim() != p.means.rows())
      throw ContractViolation("ParameterPoint: covariance dimension != state dimension");
}

void check_pair(const ParameterPoint& p, const TangentVector& t) {
  if (t.d_upsilon.size() != p.upsilon.size())
    throw ContractViolation("TangentVector: factor slot count mismatch");
  for (std::size_t j = 0; j < t.d_upsilon.size(); ++j)
    if (!t.d_upsilon[j].same_shape(p.upsilon[j]))
      throw ContractViolation("TangentVector: factor slot shape mismatch");
  if (!t.d_means.same_shape(p.means)) throw ContractViolation("TangentVector: means slot shape mismatch");
  if (t.d_covs.size() != p.covs.size())
    throw ContractViolation("TangentVector: covariance slot count mismatch");
  for (std::size_t k = 0; k < t.d_covs.size(); ++k)
    if (t.d_covs[k].dim() != p.covs[k].dim())
      throw ContractViolation("TangentVector: covariance slot dimension mismatch");
}

TangentVector zero_tangent(const ParameterPoint& p) {
  TangentVector t;
  t.d_upsilon.reserve(p.upsilon.size());
  for (const Matrix& u : p.upsilon) t.d_upsilon.emplace_back(u.rows(), u.cols());
  t.d_means = Matrix(p.means.rows(), p.means.cols());
  t.d_covs.reserve(p.covs.size());
  for (const SpdMatrix& c : p.covs) t.d_covs.emplace_back(c.dim());
  return t;
}

TangentVector tangent_scale(double a, const TangentVector& x) {
  TangentVector r;
  r.d_upsilon.reserve(x.d_upsilon.size());
  for (const Matrix& u : x.d_upsilon) r.d_upsilon.push_back(a * u);
  r.d_means = a * x.d_means;
  r.d_covs.reserve(x.d_covs.size());
  for (const SymMatrix& c : x.d_covs) r.d_covs.push_back(a * c);
  return r;
}

TangentVector tangent_axpy(double a, const TangentVector& x, const TangentVector& y) {
  if (x.d_upsilon.size() != y.d_upsilon.size() || x.d_covs.size() != y.d_covs.size())
    throw ContractViolation("tangent_axpy: slot count mismatch");
  TangentVector r;
  r.d_upsilon.reserve(x.d_upsilon.size());
  for (std::size_t j = 0; j < x.d_upsilon.size(); ++j) {
    if (!x.d_upsilon[j].same_shape(y.d_upsilon[j]))
      throw ContractViolation("tangent_axpy: factor slot shape mismatch");
    Matrix m(x.d_upsilon[j].rows(), x.d_upsilon[j].cols());
    for (std::size_t i = 0; i < m.size(); ++i)
      m.data()[i] = a * x.d_upsilon[j].data()[i] + y.d_upsilon[j].data()[i];
    r.d_upsilon.push_back(std::move(m));
  }
  if (!x.d_means.same_shape(y.d_means)) throw ContractViolation("tangent_axpy: means slot shape mismatch");
  r.d_means = Matrix(x.d_means.rows(), x.d_means.cols());
  for (std::size_t i = 0; i < r.d_means.size(); ++i)
    r.d_means.data()[i] = a * x.d_means.data()[i] + y.d_means.data()[i];
  r.d_covs.reserve(x.d_covs.size());
  for (std::size_t k = 0; k < x.d_covs.size(); ++k) {
    if (x.d_covs[k].dim() != y.d_covs[k].dim())
      throw ContractViolation("tangent_axpy: covariance slot dimension mismatch");
    SymMatrix m(x.d_covs[k].dim());
    for (std::size_t i = 0; i < m.dim(); ++i)
      for (std::size_t j = 0; j <= i; ++j) m.set(i, j, a * x.d_covs[k](i, j) + y.d_covs[k](i, j));
    r.d_covs.push_back(std::move(m));
  }
  return r;
}

bool tangent_finite(const TangentVector& x) {
  for (const Matrix& u : x.d_upsilon)
    if (!all_finite(u)) return false;
  if (!all_finite(x.d_means)) return false;
  for (const SymMatrix& c : x.d_covs)
    if (!all_finite(c.full())) return false;
  return true;
}

namespace detail {

namespace {

bool all_zero(const SymMatrix& x) {
  const double* d = x.full().data();
  for (std::size_t i = 0; i < x.full().size(); ++i)
    if (d[i] != 0.0) return false;
  return true;
}

bool same_entries(const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != b.dim()) return false;
  const double* pa = a.full().data();
  const double* pb = b.full().data();
  for (std::size_t i = 0; i < a.full().size(); ++i)
    if (pa[i] != pb[i]) return false;
  return true;
}

// w_ij = (V^T X V)_ij / sqrt(l_i l_j): the matrix X expressed in the
// eigenbasis of C and whitened by C^{-1/2} on both sides.
Matrix whiten_in_basis(const CovEig& ce, const Matrix& x, const char* who) {
  const std::size_t n = ce.values.size();
  Matrix w = transpose(ce.vectors) * x * ce.vectors;
  Vector root(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(ce.values[i] > 0.0)) throw NumericalError(std::string(who) + ": base matrix is not SPD");
    root[i] = std::sqrt(ce.values[i]);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w(i, j) /= root[i] * root[j];
  return w;
}

}  // namespace

CovEig cov_eig(const SpdMatrix& c) {
  EigDecomposition e = sym_eig(c.sym());
  return CovEig{std::move(e.vectors), std::move(e.values)};
}

SpdMatrix retract_cov(const SpdMatrix& c, const CovEig& ce, const SymMatrix& x) {
  if (all_zero(x)) return c;
  const std::size_t n = c.dim();
  Matrix w = whiten_in_basis(ce, x.full(), "retract");
  // Exact symmetry for the inner eigensolve.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double v = 0.5 * (w(i, j) + w(j, i));
      w(i, j) = v;
      w(j, i) = v;
    }
  Matrix u(n, n);
  Vector mu(n);
  jacobi_eig_inplace(w.data(), u.data(), mu.data(), n);
  // G = V diag(sqrt(l)) U; result = G diag(exp(mu)) G^T.
  Vector base_roots(n);
  for (std::size_t j = 0; j < n; ++j) base_roots[j] = std::sqrt(ce.values[j]);
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += ce.vectors(i, j) * base_roots[j] * u(j, k);
      g(i, k) = s;
    }
  Vector e(n);
  for (std::size_t k = 0; k < n; ++k) e[k] = std::exp(mu[k]);
  SymMatrix r(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += g(i, k) * e[k] * g(j, k);
      r.set(i, j, s);
    }
  return SpdMatrix(r);
}

SymMatrix transport_cov(const SpdMatrix& a, const CovEig& ae, const SpdMatrix& b,
                        const SymMatrix& x, TransportMode mode) {
  if (mode == TransportMode::Standard && same_entries(a, b)) return x;
  const std::size_t n = a.dim();
  Matrix w = whiten_in_basis(ae, b.full(), "transport");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double v = 0.5 * (w(i, j) + w(j, i));
      w(i, j) = v;
      w(j, i) = v;
    }
  Matrix u(n, n);
  Vector s(n);
  jacobi_eig_inplace(w.data(), u.data(), s.data(), n);
  Vector roots(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(s[k] > 0.0)) throw NumericalError("transport: target matrix is not SPD");
    roots[k] = std::sqrt(s[k]);
  }
  // P = V diag(sqrt(l)) U, Q = V diag(1/sqrt(l)) U.
  Vector base_roots(n);
  for (std::size_t j = 0; j < n; ++j) base_roots[j] = std::sqrt(ae.values[j]);
  Matrix p(n, n), q(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      double sp = 0.0, sq = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        sp += ae.vectors(i, j) * base_roots[j] * u(j, k);
        sq += ae.vectors(i, j) / base_roots[j] * u(j, k);
      }
      p(i, k) = sp;
      q(i, k) = sq;
    }
  // Standard: E = P diag(sqrt(s)) Q^T  (= (B A^{-1})^{1/2}).
  // PaperLiteral: Phi = P diag(sqrt(s)) (V U)^T  (= A^{1/2} S^{1/2}).
  Matrix f(n, n);
  if (mode == TransportMode::Standard) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += p(i, k) * roots[k] * q(j, k);
        f(i, j) = acc;
      }
  } else {
    Matrix vu = ae.vectors * u;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += p(i, k) * roots[k] * vu(j, k);
        f(i, j) = acc;
      }
  }
  Matrix t1 = f * x.full();
  SymMatrix r(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += t1(i, k) * f(j, k);
      r.set(i, j, acc);
    }
  return r;
}

double metric_cov(const SpdMatrix& c, const SymMatrix& x, const SymMatrix& y) {
  const std::size_t n = c.dim();
  // W1 = C^{-1} X, W2 = C^{-1} Y column by column; tr(W1 W2).
  Matrix w1(n, n), w2(n, n);
  Vector col(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = x(i, j);
    Vector sx = c.solve(col);
    for (std::size_t i = 0; i < n; ++i) w1(i, j) = sx[i];
    for (std::size_t i = 0; i < n; ++i) col[i] = y(i, j);
    Vector sy = c.solve(col);
    for (std::size_t i = 0; i < n; ++i) w2(i, j) = sy[i];
  }
  // Accumulated in argument-order-invariant groups so that
  // metric_cov(c, x, y) == metric_cov(c, y, x) holds bit for bit.
  double tr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    tr += w1(i, i) * w2(i, i);
    for (std::size_t j = i + 1; j < n; ++j) tr += w1(i, j) * w2(j, i) + w1(j, i) * w2(i, j);
  }
  return tr;
}

}  // namespace detail

double metric(const ParameterPoint& at, const TangentVector& x, const TangentVector& y) {
  check_point(at);
  check_pair(at, x);
  check_pair(at, y);
  double s = 0.0;
  for (std::size_t j = 0; j < x.d_upsilon.size(); ++j)
    s += frobenius_inner(x.d_upsilon[j], y.d_upsilon[j]);
  s += frobenius_inner(x.d_means, y.d_means);
  for (std::size_t k = 0; k < x.d_covs.size(); ++k)
    s += detail::metric_cov(at.covs[k], x.d_covs[k], y.d_covs[k]);
  return s;
}

ParameterPoint retract(const ParameterPoint& base, const TangentVector& step) {
  check_point(base);
  check_pair(base, step);
  ParameterPoint r;
  r.upsilon.reserve(base.upsilon.size());
  for (std::size_t j = 0; j < base.upsilon.size(); ++j)
    r.upsilon.push_back(base.upsilon[j] + step.d_upsilon[j]);
  r.means = base.means + step.d_means;
  r.covs.reserve(base.covs.size());
  for (std::size_t k = 0; k < base.covs.size(); ++k) {
    bool zero = true;
    const double* d = step.d_covs[k].full().data();
    for (std::size_t i = 0; i < step.d_covs[k].full().size() && zero; ++i) zero = (d[i] == 0.0);
    if (zero) {
      r.covs.push_back(base.covs[k]);
    } else {
      detail::CovEig ce = detail::cov_eig(base.covs[k]);
      r.covs.push_back(detail::retract_cov(base.covs[k], ce, step.d_covs[k]));
    }
  }
  return r;
}

TangentVector transport(const ParameterPoint& from, const ParameterPoint& to,
                        const TangentVector& x, TransportMode mode) {
  check_point(from);
  check_point(to);
  check_pair(from, x);
  if (from.upsilon.size() != to.upsilon.size() || from.covs.size() != to.covs.size() ||
      !from.means.same_shape(to.means))
    throw ContractViolation("transport: endpoint shapes disagree");
  TangentVector r;
  r.d_upsilon = x.d_upsilon;
  r.d_means = x.d_means;
  r.d_covs.reserve(x.d_covs.size());
  for (std::size_t k = 0; k < x.d_covs.size(); ++k) {
    if (mode == TransportMode::Standard && from.covs[k] == to.covs[k]) {
      r.d_covs.push_back(x.d_covs[k]);
      continue;
    }
    detail::CovEig ae = detail::cov_eig(from.covs[k]);
    r.d_covs.push_back(detail::transport_cov(from.covs[k], ae, to.covs[k], x.d_covs[k], mode));
  }
  return r;
}

}  // namespace sgmmq
