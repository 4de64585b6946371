#pragma once

#include "sgmmq/matrix.hpp"

namespace sgmmq {

// Symmetric matrix with full dense storage. Symmetry is enforced by
// construction: entries[i][j] == entries[j][i] holds exactly, bit for bit.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim) : m_(dim, dim) {}
  // Symmetrizes as (a + a^T)/2.
  explicit SymMatrix(const Matrix& a);

  static SymMatrix identity(std::size_t n);

  std::size_t dim() const { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  // Writes both triangles.
  void set(std::size_t i, std::size_t j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }
  const Matrix& full() const { return m_; }

  bool operator==(const SymMatrix& o) const { return m_ == o.m_; }

 private:
  Matrix m_;
};

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator*(double s, const SymMatrix& a);

// Symmetric positive definite matrix. Construction validates positive
// definiteness by attempting a Cholesky factorization (tolerance zero: any
// non-positive pivot is rejected) and caches the lower factor L, C = L L^T.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(const SymMatrix& s);
  explicit SpdMatrix(const Matrix& a) : SpdMatrix(SymMatrix(a)) {}

  static SpdMatrix identity(std::size_t n);

  std::size_t dim() const { return sym_.dim(); }
  double operator()(std::size_t i, std::size_t j) const { return sym_(i, j); }
  const SymMatrix& sym() const { return sym_; }
  const Matrix& full() const { return sym_.full(); }
  const Matrix& chol_lower() const { return chol_; }

  // C^{-1} rhs via the cached factorization.
  Vector solve(const Vector& rhs) const;

  bool operator==(const SpdMatrix& o) const { return sym_ == o.sym_; }

 private:
  SymMatrix sym_;
  Matrix chol_;
};

// A = V diag(values) V^T with eigenvalues ascending and a deterministic
// sign convention on the eigenvector columns.
struct EigDecomposition {
  Vector values;
  Matrix vectors;
};

EigDecomposition sym_eig(const SymMatrix& a);

SpdMatrix mat_exp(const SymMatrix& x);
SymMatrix mat_log(const SpdMatrix& c);
SpdMatrix mat_sqrt(const SpdMatrix& c);
SpdMatrix mat_inv_sqrt(const SpdMatrix& c);

// v^T C^{-1} v, evaluated through the cached Cholesky factor.
double quad_form(const SpdMatrix& c, const Vector& v);

namespace detail {

// Cyclic Jacobi on a row-major symmetric n x n buffer. `a` is destroyed,
// `v` receives eigenvector columns, `lam` the ascending eigenvalues.
// Throws NumericalError if the sweep cap is exhausted.
void jacobi_eig_inplace(double* a, double* v, double* lam, std::size_t n);

// Lower Cholesky factor of a row-major symmetric buffer; returns false if
// the matrix is not positive definite (non-positive or non-finite pivot).
bool cholesky_lower(const double* a, double* l, std::size_t n);

}  // namespace detail

}  // namespace sgmmq
