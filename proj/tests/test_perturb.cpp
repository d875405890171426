#include <doctest.h>

#include <cmath>

#include "l0cov/perturb.hpp"
#include "test_support.hpp"

using namespace l0cov;
using namespace testsupport;

TEST_CASE("cholesky: closed-form log determinants") {
  CHECK(cholesky(Matrix::Identity(3, 3))->logdet == doctest::Approx(0.0));

  Matrix d2 = 2.0 * Matrix::Identity(2, 2);
  CHECK(cholesky(d2)->logdet == doctest::Approx(2.0 * std::log(2.0)));

  Matrix m(2, 2);
  m << 2, 1, 1, 2;  // det = 3
  CHECK(cholesky(m)->logdet == doctest::Approx(std::log(3.0)));
}

TEST_CASE("cholesky: failure and factor invariants") {
  Matrix indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  CHECK(!cholesky(indefinite).has_value());

  Matrix singular = Matrix::Ones(2, 2);
  CHECK(!cholesky(singular).has_value());

  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const int p = 2 + static_cast<int>(rng.uniform_below(10));
    const Matrix m = random_pd(rng, p);
    auto chol = cholesky(m);
    REQUIRE(chol.has_value());
    double logdet = 0.0;
    for (Index i = 0; i < p; ++i) {
      CHECK(chol->factor(i, i) > 0.0);
      logdet += std::log(chol->factor(i, i));
    }
    CHECK(chol->logdet == doctest::Approx(2.0 * logdet).epsilon(1e-12));
    CHECK((chol->factor * chol->factor.transpose() - m).norm() <=
          1e-10 * m.norm());
  }
}

TEST_CASE("det_ratio_diag: small cases against direct determinants") {
  const Matrix eye = Matrix::Identity(2, 2);
  CHECK(det_ratio_diag(eye, 0, 1.0) == doctest::Approx(2.0));
  CHECK(det_ratio_diag(eye, 0, -1.0) == doctest::Approx(0.0));

  Matrix x(2, 2);
  x << 2, 1, 1, 2;
  const Matrix y = x.inverse();
  CHECK(y(0, 0) == doctest::Approx(2.0 / 3.0));
  const double ratio = det_ratio_diag(y, 0, 1.0);
  CHECK(ratio == doctest::Approx(5.0 / 3.0));
  CHECK(ratio ==
        doctest::Approx(perturbed_diag(x, 0, 1.0).determinant() /
                        x.determinant()));
}

TEST_CASE("det_ratio_offdiag: small cases") {
  const Matrix eye = Matrix::Identity(2, 2);
  for (double d : {-0.9, -0.3, 0.4, 0.8}) {
    CHECK(det_ratio_offdiag(eye, 0, 1, d) == doctest::Approx(1.0 - d * d));
    CHECK(det_ratio_offdiag(eye, 0, 1, d) ==
          doctest::Approx(perturbed_offdiag(eye, 0, 1, d).determinant()));
  }
  Rng rng(11);
  const Matrix m = random_pd(rng, 5);
  CHECK(det_ratio_offdiag(m, 1, 3, 0.0) == 1.0);
}

TEST_CASE("det_ratio_offdiag: 4x4 example against determinant oracle") {
  Rng rng(41);
  const Matrix x = random_pd(rng, 4);
  const Matrix y = x.inverse();
  const double ratio = det_ratio_offdiag(y, 1, 3, 0.3);
  const double direct =
      perturbed_offdiag(x, 1, 3, 0.3).determinant() / x.determinant();
  CHECK(std::abs(ratio - direct) <= 1e-10 * std::abs(direct));
}

TEST_CASE("schur_delta: known values and degenerate boundary") {
  CHECK(schur_delta(Matrix::Identity(4, 4), 0, 2) == doctest::Approx(1.0));

  Matrix y(2, 2);
  y << 2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0;
  CHECK(schur_delta(y, 0, 1) == doctest::Approx(1.0 / 3.0));

  CHECK(schur_delta(Matrix::Ones(2, 2), 0, 1) == doctest::Approx(0.0));
}

TEST_CASE("smw_update_diag: examples and the singular floor") {
  const Matrix eye = Matrix::Identity(2, 2);
  Matrix expected(2, 2);
  expected << 0.5, 0, 0, 1;
  CHECK((smw_update_diag(eye, 0, 1.0) - expected).norm() == 0.0);
  CHECK((smw_update_diag(eye, 0, 0.0) - eye).norm() == 0.0);
  CHECK_THROWS_AS((void)smw_update_diag(eye, 0, -1.0), SingularUpdate);

  Rng rng(5);
  const Matrix x = random_pd(rng, 6);
  const Matrix y = x.inverse();
  const Matrix updated = smw_update_diag(y, 2, 0.5);
  const Matrix direct = perturbed_diag(x, 2, 0.5).inverse();
  CHECK((updated - direct).norm() <= 1e-10 * direct.norm());
}

TEST_CASE("smw_update_offdiag: examples") {
  const Matrix eye = Matrix::Identity(2, 2);
  Matrix expected(2, 2);
  expected << 1, -0.5, -0.5, 1;
  expected /= 0.75;
  CHECK((smw_update_offdiag(eye, 0, 1, 0.5) - expected).norm() <= 1e-15);
  CHECK((smw_update_offdiag(eye, 0, 1, 0.0) - eye).norm() == 0.0);

  Rng rng(9);
  const Matrix x = random_pd(rng, 8);
  const Matrix y = x.inverse();
  const Matrix updated = smw_update_offdiag(y, 0, 4, -0.2);
  const Matrix direct = perturbed_offdiag(x, 0, 4, -0.2).inverse();
  CHECK((updated - direct).norm() <= 1e-10 * direct.norm());
}

// Property block: identities against direct determinant/inverse oracles on
// random PD matrices with admissible perturbations.
TEST_CASE("perturbation identities: randomized oracle sweep") {
  Rng rng(12345);
  for (int rep = 0; rep < 60; ++rep) {
    const int p = 2 + static_cast<int>(rng.uniform_below(19));
    const Matrix x = rep % 3 == 0 ? random_correlated_pd(rng, p)
                                  : random_pd(rng, p, 0.3);
    auto chol = cholesky(x);
    REQUIRE(chol.has_value());
    const Matrix y = x.inverse();
    const double detx = x.determinant();

    const Index i = static_cast<Index>(rng.uniform_below(p));
    Index j = static_cast<Index>(rng.uniform_below(p));
    while (j == i) j = static_cast<Index>(rng.uniform_below(p));

    CHECK(schur_delta(y, i, j) > 0.0);

    const double dd = admissible_diag_delta(rng, y, i);
    const double ratio_d = det_ratio_diag(y, i, dd);
    const double direct_d = perturbed_diag(x, i, dd).determinant() / detx;
    CHECK(std::abs(ratio_d - direct_d) <= 1e-10 * std::abs(direct_d));

    const double od = admissible_offdiag_delta(rng, y, i, j);
    const double ratio_o = det_ratio_offdiag(y, i, j, od);
    const double direct_o =
        perturbed_offdiag(x, i, j, od).determinant() / detx;
    CHECK(std::abs(ratio_o - direct_o) <= 1e-10 * std::abs(direct_o));

    const Matrix up_d = smw_update_diag(y, i, dd);
    CHECK(bitwise_symmetric(up_d));
    CHECK((up_d * perturbed_diag(x, i, dd) - Matrix::Identity(p, p)).norm() <=
          1e-8);

    const Matrix up_o = smw_update_offdiag(y, i, j, od);
    CHECK(bitwise_symmetric(up_o));
    CHECK((up_o * perturbed_offdiag(x, i, j, od) - Matrix::Identity(p, p))
              .norm() <= 1e-8);
  }

  // crafted PD matrix where zeroing one mirrored pair breaks positive
  // definiteness: the zeroed determinant ratio must come out nonpositive
  Matrix corr(3, 3);
  corr << 1, 0.8, 0.8, 0.8, 1, 0.8, 0.8, 0.8, 1;
  REQUIRE(cholesky(corr).has_value());
  const Matrix corr_y = corr.inverse();
  CHECK(det_ratio_offdiag(corr_y, 0, 1, -corr(0, 1)) <= 0.0);
}

TEST_CASE("pd_inverse_logdet: round trip and symmetry") {
  Rng rng(3);
  const Matrix x = random_pd(rng, 12);
  auto [inv, logdet] = pd_inverse_logdet(x);
  CHECK(bitwise_symmetric(inv));
  CHECK((x * inv - Matrix::Identity(12, 12)).norm() <= 1e-10);
  CHECK(logdet == doctest::Approx(std::log(x.determinant())).epsilon(1e-10));
  CHECK_THROWS_AS(pd_inverse_logdet(Matrix::Ones(3, 3)), NotPositiveDefinite);
}

TEST_CASE("symmetrize and symmetry checks") {
  Matrix m(2, 2);
  m << 1.0, 1.0 + 5e-10, 1.0, 2.0;
  CHECK(is_symmetric(m, 1e-9));
  CHECK(!is_symmetric(m, 1e-11));
  symmetrize_average(m);
  CHECK(m(0, 1) == m(1, 0));
}
