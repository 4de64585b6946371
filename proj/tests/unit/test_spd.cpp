#include <doctest.h>

#include <cmath>

#include "sgmmq/errors.hpp"
#include "sgmmq/spd.hpp"
#include "test_helpers.hpp"

using namespace sgmmq;
using namespace sgmmq::testing;

TEST_CASE("sym_eig: diagonal matrix returns sorted eigenvalues") {
  SymMatrix a(2);
  a.set(0, 0, 3.0);
  a.set(1, 1, 2.0);
  EigDecomposition e = sym_eig(a);
  CHECK(e.values[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(e.values[1] == doctest::Approx(3.0).epsilon(1e-14));
  // Columns are signed so the dominant entry is positive.
  CHECK(e.vectors(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.vectors(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("sym_eig: exchange matrix has eigenvalues -1, 1") {
  SymMatrix a(2);
  a.set(0, 1, 1.0);
  EigDecomposition e = sym_eig(a);
  CHECK(e.values[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-14));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(std::abs(e.vectors(0, 0)) - r) < 1e-14);
  CHECK(std::abs(std::abs(e.vectors(0, 1)) - r) < 1e-14);
  // Opposite signs in the first column, matching signs in the second.
  CHECK(e.vectors(0, 0) * e.vectors(1, 0) < 0.0);
  CHECK(e.vectors(0, 1) * e.vectors(1, 1) > 0.0);
}

TEST_CASE("sym_eig: reconstruction and orthogonality on random matrices") {
  Rng rng(101);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + rng.uniform_index(8);
    SymMatrix a = random_sym(rng, n, 2.0);
    EigDecomposition e = sym_eig(a);
    for (std::size_t i = 0; i + 1 < n; ++i) CHECK(e.values[i] <= e.values[i + 1]);

    Matrix lam(n, n);
    for (std::size_t i = 0; i < n; ++i) lam(i, i) = e.values[i];
    Matrix recon = e.vectors * lam * transpose(e.vectors);
    CHECK(max_abs_diff(recon, a.full()) < 1e-12);

    Matrix vtv = transpose(e.vectors) * e.vectors;
    CHECK(max_abs_diff(vtv, Matrix::identity(n)) < 1e-12);
  }
}

TEST_CASE("sym_eig: deterministic across repeated calls") {
  Rng rng(77);
  SymMatrix a = random_sym(rng, 6, 1.5);
  EigDecomposition e1 = sym_eig(a);
  EigDecomposition e2 = sym_eig(a);
  CHECK(e1.values == e2.values);
  CHECK(e1.vectors == e2.vectors);
}

TEST_CASE("SymMatrix: construction symmetrizes and stays exactly symmetric") {
  Matrix m(2, 2);
  m(0, 1) = 1.0;
  m(1, 0) = 3.0;
  SymMatrix s(m);
  CHECK(s(0, 1) == 2.0);
  CHECK(s(0, 1) == s(1, 0));
  SymMatrix t = 0.37 * s;
  CHECK(t(0, 1) == t(1, 0));
}

TEST_CASE("SpdMatrix: rejects indefinite, singular and non-finite input") {
  Matrix bad(2, 2);
  bad(0, 0) = 1.0;
  bad(0, 1) = 2.0;
  bad(1, 0) = 2.0;
  bad(1, 1) = 1.0;  // eigenvalues -1 and 3
  CHECK_THROWS_AS(SpdMatrix{bad}, NumericalError);

  Matrix zero(3, 3);
  CHECK_THROWS_AS(SpdMatrix{zero}, NumericalError);

  Matrix nonfinite = Matrix::identity(2);
  nonfinite(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(SpdMatrix{nonfinite}, NumericalError);

  Matrix rect(2, 3);
  CHECK_THROWS_AS(SymMatrix{rect}, ContractViolation);
}

TEST_CASE("SpdMatrix: solve agrees with explicit inverse") {
  Rng rng(202);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t n = 1 + rng.uniform_index(8);
    SpdMatrix c = random_spd(rng, n);
    Vector v = random_vector(rng, n, 3.0);
    Vector got = c.solve(v);
    Vector want = mat_vec(gauss_jordan_inverse(c.full()), v);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-9);
  }
}

TEST_CASE("mat_exp: zero maps to identity, diagonal maps elementwise") {
  SymMatrix zero(3);
  CHECK(max_abs_diff(mat_exp(zero).full(), Matrix::identity(3)) < 1e-15);

  SymMatrix d(2);
  d.set(0, 0, 1.0);
  d.set(1, 1, 2.0);
  SpdMatrix e = mat_exp(d);
  CHECK(e(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
  CHECK(e(1, 1) == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
  CHECK(std::abs(e(0, 1)) < 1e-14);
}

TEST_CASE("mat_exp: exchange generator gives cosh/sinh") {
  for (double t : {0.3, 1.0}) {
    SymMatrix x(2);
    x.set(0, 1, t);
    SpdMatrix e = mat_exp(x);
    CHECK(e(0, 0) == doctest::Approx(std::cosh(t)).epsilon(1e-13));
    CHECK(e(0, 1) == doctest::Approx(std::sinh(t)).epsilon(1e-13));
    CHECK(e(1, 1) == doctest::Approx(std::cosh(t)).epsilon(1e-13));
  }
}

TEST_CASE("mat_exp: matches Taylor series oracle on random symmetric input") {
  Rng rng(303);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 1 + rng.uniform_index(6);
    SymMatrix x = random_sym(rng, n, 0.8);
    Matrix want = taylor_exp(x.full());
    CHECK(max_abs_diff(mat_exp(x).full(), want) < 1e-12);
  }
}

TEST_CASE("mat_log: inverse of mat_exp") {
  SpdMatrix i2 = SpdMatrix::identity(2);
  CHECK(max_abs_diff(mat_log(i2).full(), Matrix(2, 2)) < 1e-15);

  Rng rng(404);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 1 + rng.uniform_index(8);
    SymMatrix x = random_sym(rng, n, 1.0);
    SymMatrix back = mat_log(mat_exp(x));
    CHECK(max_abs_diff(back.full(), x.full()) < 1e-9);

    SpdMatrix c = random_spd(rng, n);
    SpdMatrix fwd = mat_exp(mat_log(c));
    CHECK(max_abs_diff(fwd.full(), c.full()) < 1e-9);
  }
}

TEST_CASE("mat_sqrt and mat_inv_sqrt") {
  SymMatrix d(2);
  d.set(0, 0, 4.0);
  d.set(1, 1, 9.0);
  SpdMatrix c(d);
  SpdMatrix r = mat_sqrt(c);
  CHECK(r(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r(1, 1) == doctest::Approx(3.0).epsilon(1e-14));

  Rng rng(505);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 1 + rng.uniform_index(8);
    SpdMatrix q = random_spd(rng, n);
    SpdMatrix s = mat_sqrt(q);
    CHECK(max_abs_diff((s.full() * s.full()), q.full()) < 1e-9);
    SpdMatrix is = mat_inv_sqrt(q);
    CHECK(max_abs_diff(is.full() * s.full(), Matrix::identity(n)) < 1e-9);
  }
}

TEST_CASE("mat_sqrt: agrees with Denman-Beavers oracle") {
  Rng rng(606);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 2 + rng.uniform_index(5);
    SpdMatrix q = random_spd(rng, n);
    Matrix want = denman_beavers_sqrt(q.full());
    CHECK(max_abs_diff(mat_sqrt(q).full(), want) < 1e-9);
  }
}

TEST_CASE("quad_form: closed forms and explicit-inverse oracle") {
  SpdMatrix i2 = SpdMatrix::identity(2);
  CHECK(quad_form(i2, {1.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-15));

  SymMatrix d(2);
  d.set(0, 0, 2.0);
  d.set(1, 1, 2.0);
  CHECK(quad_form(SpdMatrix(d), {1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-14));

  Rng rng(707);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + rng.uniform_index(8);
    SpdMatrix c = random_spd(rng, n);
    Vector v = random_vector(rng, n, 2.0);
    Matrix cinv = gauss_jordan_inverse(c.full());
    double want = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) want += v[i] * cinv(i, j) * v[j];
    CHECK(rel_err(quad_form(c, v), want) < 1e-10);
  }
}

TEST_CASE("quad_form: positive for nonzero v, zero for zero v") {
  Rng rng(808);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 1 + rng.uniform_index(6);
    SpdMatrix c = random_spd(rng, n);
    Vector v = random_vector(rng, n, 1.0);
    bool nonzero = false;
    for (double x : v) nonzero |= (x != 0.0);
    if (nonzero) CHECK(quad_form(c, v) > 0.0);
    CHECK(quad_form(c, Vector(n, 0.0)) == 0.0);
  }
  SpdMatrix c = random_spd(rng, 3);
  CHECK_THROWS_AS(quad_form(c, Vector(4, 1.0)), ContractViolation);
}
