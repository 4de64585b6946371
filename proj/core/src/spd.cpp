#include "sgmmq/spd.hpp"

#include <algorithm>
#include <cmath>

#include "sgmmq/errors.hpp"

namespace sgmmq {

namespace detail {

void jacobi_eig_inplace(double* a, double* v, double* lam, std::size_t n) {
  for (std::size_t i = 0; i < n * n; ++i) v[i] = 0.0;
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  if (n == 0) return;
  if (n == 1) {
    lam[0] = a[0];
    return;
  }

  double fro2 = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) fro2 += a[i] * a[i];
  const double tol2 = fro2 * 1e-30;

  const int max_sweeps = 64;
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double off2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off2 += a[i * n + j] * a[i * n + j];
    if (off2 <= tol2) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = ((theta >= 0.0) ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        a[p * n + p] = app - t * apq;
        a[q * n + q] = aqq + t * apq;
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[p * n + k] = a[k * n + p];
          a[k * n + q] = s * akp + c * akq;
          a[q * n + k] = a[k * n + q];
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    double off2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off2 += a[i * n + j] * a[i * n + j];
    if (!(off2 <= tol2)) throw NumericalError("jacobi_eig: sweep cap exhausted without convergence");
  }

  for (std::size_t i = 0; i < n; ++i) lam[i] = a[i * n + i];

  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t m = i;
    for (std::size_t j = i + 1; j < n; ++j)
      if (lam[j] < lam[m]) m = j;
    if (m != i) {
      std::swap(lam[i], lam[m]);
      for (std::size_t k = 0; k < n; ++k) std::swap(v[k * n + i], v[k * n + m]);
    }
  }

  for (std::size_t j = 0; j < n; ++j) {
    std::size_t kk = 0;
    double best = std::abs(v[j]);
    for (std::size_t k = 1; k < n; ++k) {
      const double cand = std::abs(v[k * n + j]);
      if (cand > best) {
        best = cand;
        kk = k;
      }
    }
    if (v[kk * n + j] < 0.0)
      for (std::size_t k = 0; k < n; ++k) v[k * n + j] = -v[k * n + j];
  }
}

bool cholesky_lower(const double* a, double* l, std::size_t n) {
  for (std::size_t i = 0; i < n * n; ++i) l[i] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      if (i == j) {
        if (!(s > 0.0) || !std::isfinite(s)) return false;
        l[i * n + i] = std::sqrt(s);
      } else {
        l[i * n + j] = s / l[j * n + j];
      }
    }
  }
  return true;
}

}  // namespace detail

SymMatrix::SymMatrix(const Matrix& a) {
  if (a.rows() != a.cols()) throw ContractViolation("SymMatrix: input is not square");
  m_ = Matrix(a.rows(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      m_(i, j) = v;
      m_(j, i) = v;
    }
}

SymMatrix SymMatrix::identity(std::size_t n) {
  SymMatrix r(n);
  for (std::size_t i = 0; i < n; ++i) r.set(i, i, 1.0);
  return r;
}

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw ContractViolation("SymMatrix add: dimension mismatch");
  SymMatrix r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j <= i; ++j) r.set(i, j, a(i, j) + b(i, j));
  return r;
}

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw ContractViolation("SymMatrix sub: dimension mismatch");
  SymMatrix r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j <= i; ++j) r.set(i, j, a(i, j) - b(i, j));
  return r;
}

SymMatrix operator*(double s, const SymMatrix& a) {
  SymMatrix r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j <= i; ++j) r.set(i, j, s * a(i, j));
  return r;
}

SpdMatrix::SpdMatrix(const SymMatrix& s) : sym_(s), chol_(s.dim(), s.dim()) {
  if (!detail::cholesky_lower(sym_.full().data(), chol_.data(), sym_.dim()))
    throw NumericalError("SpdMatrix: matrix is not positive definite (non-positive or non-finite pivot)");
}

SpdMatrix SpdMatrix::identity(std::size_t n) { return SpdMatrix(SymMatrix::identity(n)); }

Vector SpdMatrix::solve(const Vector& rhs) const {
  const std::size_t n = dim();
  if (rhs.size() != n) throw ContractViolation("SpdMatrix::solve: dimension mismatch");
  Vector w(n);
  const double* l = chol_.data();
  for (std::size_t i = 0; i < n; ++i) {
    double s = rhs[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * w[k];
    w[i] = s / l[i * n + i];
  }
  for (std::size_t ii = n; ii > 0; --ii) {
    const std::size_t i = ii - 1;
    double s = w[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l[k * n + i] * w[k];
    w[i] = s / l[i * n + i];
  }
  return w;
}

EigDecomposition sym_eig(const SymMatrix& a) {
  const std::size_t n = a.dim();
  Matrix work = a.full();
  EigDecomposition r{Vector(n), Matrix(n, n)};
  detail::jacobi_eig_inplace(work.data(), r.vectors.data(), r.values.data(), n);
  return r;
}

namespace {

// V diag(d) V^T, assembled symmetric.
SymMatrix assemble_eig(const Matrix& v, const Vector& d) {
  const std::size_t n = v.rows();
  SymMatrix r(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += v(i, k) * d[k] * v(j, k);
      r.set(i, j, s);
    }
  return r;
}

}  // namespace

SpdMatrix mat_exp(const SymMatrix& x) {
  EigDecomposition e = sym_eig(x);
  Vector d(x.dim());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = std::exp(e.values[k]);
  return SpdMatrix(assemble_eig(e.vectors, d));
}

SymMatrix mat_log(const SpdMatrix& c) {
  EigDecomposition e = sym_eig(c.sym());
  Vector d(c.dim());
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (!(e.values[k] > 0.0)) throw NumericalError("mat_log: non-positive eigenvalue");
    d[k] = std::log(e.values[k]);
  }
  return assemble_eig(e.vectors, d);
}

SpdMatrix mat_sqrt(const SpdMatrix& c) {
  EigDecomposition e = sym_eig(c.sym());
  Vector d(c.dim());
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (!(e.values[k] > 0.0)) throw NumericalError("mat_sqrt: non-positive eigenvalue");
    d[k] = std::sqrt(e.values[k]);
  }
  return SpdMatrix(assemble_eig(e.vectors, d));
}

SpdMatrix mat_inv_sqrt(const SpdMatrix& c) {
  EigDecomposition e = sym_eig(c.sym());
  Vector d(c.dim());
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (!(e.values[k] > 0.0)) throw NumericalError("mat_inv_sqrt: non-positive eigenvalue");
    d[k] = 1.0 / std::sqrt(e.values[k]);
  }
  return SpdMatrix(assemble_eig(e.vectors, d));
}

double quad_form(const SpdMatrix& c, const Vector& v) {
  const std::size_t n = c.dim();
  if (v.size() != n) throw ContractViolation("quad_form: dimension mismatch");
  const double* l = c.chol_lower().data();
  double out = 0.0;
  // w = L^{-1} v, result = ||w||^2; w[i] only depends on w[0..i-1].
  Vector w(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = v[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * w[k];
    w[i] = s / l[i * n + i];
    out += w[i] * w[i];
  }
  return out;
}

}  // namespace sgmmq
