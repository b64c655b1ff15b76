#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "scogce/linalg.hpp"

using namespace scogce;

namespace {

Eigen::MatrixXd random_matrix(int r, int c, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = dist(rng);
  return m;
}

}  // namespace

TEST_CASE("null space basis is orthonormal and annihilated") {
  const Eigen::MatrixXd m = random_matrix(2, 5, 17);
  const Eigen::MatrixXd n = null_space_basis(m);
  REQUIRE(n.rows() == 5);
  REQUIRE(n.cols() == 3);
  CHECK((m * n).norm() < 1e-10);
  CHECK((n.transpose() * n - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("full column rank matrix has empty null space") {
  const Eigen::MatrixXd m = random_matrix(5, 3, 3);
  CHECK(null_space_basis(m).cols() == 0);
}

TEST_CASE("spectral abscissa and stability") {
  Eigen::MatrixXd a(2, 2);
  a << -3.0, 10.0, 0.0, -0.5;
  CHECK(spectral_abscissa(a) == doctest::Approx(-0.5));
  CHECK(is_stable(a));
  CHECK(!is_stable(a, 0.6));
  Eigen::MatrixXd rot(2, 2);
  rot << 0.0, 1.0, -1.0, 0.0;  // eigenvalues +-i
  CHECK(spectral_abscissa(rot) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(!is_stable(rot));
}

TEST_CASE("minimum symmetric eigenvalue and definiteness") {
  Eigen::MatrixXd m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  CHECK(min_symmetric_eigenvalue(m) == doctest::Approx(1.0));
  CHECK(is_positive_definite(m));
  m(0, 0) = -3.0;
  CHECK(!is_positive_definite(m));
}

TEST_CASE("scalar Lyapunov solutions") {
  // 2 a y + w = 0.
  CHECK(solve_lyapunov(Eigen::MatrixXd::Constant(1, 1, -1.0),
                       Eigen::MatrixXd::Constant(1, 1, 1.0))(0, 0) ==
        doctest::Approx(0.5));
  CHECK(solve_lyapunov(Eigen::MatrixXd::Constant(1, 1, -2.0),
                       Eigen::MatrixXd::Constant(1, 1, 4.0))(0, 0) ==
        doctest::Approx(1.0));
}

TEST_CASE("Lyapunov solution is the observability Gramian") {
  Eigen::MatrixXd a = random_matrix(4, 4, 11);
  a -= (spectral_abscissa(a) + 1.0) * Eigen::MatrixXd::Identity(4, 4);
  const Eigen::MatrixXd c = random_matrix(2, 4, 12);
  const Eigen::MatrixXd w = c.transpose() * c;
  const Eigen::MatrixXd y = solve_lyapunov(a, w);
  CHECK((a.transpose() * y + y * a + w).norm() < 1e-9);
  CHECK(is_positive_definite(y, -1e-12));
}

TEST_CASE("scalar soft Riccati stabilizing root") {
  // 0.5 p^2 - 2 p + 1 = 0 with a = -1, g = 0.5, q = 1: roots 2 +- sqrt(2);
  // only p = 2 - sqrt(2) keeps a + g p negative.
  auto p = solve_soft_riccati(Eigen::MatrixXd::Constant(1, 1, -1.0),
                              Eigen::MatrixXd::Constant(1, 1, 0.5),
                              Eigen::MatrixXd::Constant(1, 1, 1.0));
  REQUIRE(p.has_value());
  CHECK((*p)(0, 0) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-12));
  CHECK(-1.0 + 0.5 * (*p)(0, 0) < 0.0);
}

TEST_CASE("soft Riccati refuses imaginary axis Hamiltonians") {
  CHECK(!solve_soft_riccati(Eigen::MatrixXd::Zero(1, 1),
                            Eigen::MatrixXd::Zero(1, 1),
                            Eigen::MatrixXd::Constant(1, 1, 1.0))
             .has_value());
}

TEST_CASE("soft Riccati residual vanishes on a random stable instance") {
  Eigen::MatrixXd a = random_matrix(3, 3, 21);
  a -= (spectral_abscissa(a) + 2.0) * Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd s = random_matrix(3, 2, 22);
  const Eigen::MatrixXd g = 0.1 * s * s.transpose();
  const Eigen::MatrixXd cq = random_matrix(3, 3, 23);
  const Eigen::MatrixXd q = cq.transpose() * cq;
  auto p = solve_soft_riccati(a, g, q);
  REQUIRE(p.has_value());
  CHECK((a.transpose() * *p + *p * a + *p * g * *p + q).norm() < 1e-8);
  CHECK(is_stable(a + g * *p));
}

TEST_CASE("PSD square root") {
  CHECK((sqrt_psd(Eigen::MatrixXd::Identity(3, 3)) -
         Eigen::MatrixXd::Identity(3, 3))
            .norm() < 1e-14);
  const Eigen::MatrixXd s = random_matrix(4, 4, 31);
  const Eigen::MatrixXd m = s * s.transpose();
  const Eigen::MatrixXd r = sqrt_psd(m);
  CHECK((r * r - m).norm() < 1e-10 * (1.0 + m.norm()));
  CHECK((r - r.transpose()).norm() < 1e-12);
}

TEST_CASE("cross bound holds for positive semidefinite matrices") {
  const Eigen::MatrixXd s = random_matrix(3, 3, 41);
  const Eigen::MatrixXd p = s * s.transpose();
  CHECK(cross_bound_violation(p, 1000, 7) <= 0.0);
}

TEST_CASE("cross bound fails for indefinite matrices") {
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(2, 2);
  p(1, 1) = -1.0;
  CHECK(cross_bound_violation(p, 1000, 7) > 0.0);
}

TEST_CASE("matrix exponential on known cases") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -2.0;
  const Eigen::MatrixXd ed = matrix_exp(d, 0.5);
  CHECK(ed(0, 0) == doctest::Approx(std::exp(0.5)).epsilon(1e-10));
  CHECK(ed(1, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
  CHECK(ed(0, 1) == doctest::Approx(0.0));

  Eigen::MatrixXd nil = Eigen::MatrixXd::Zero(2, 2);
  nil(0, 1) = 1.0;
  const Eigen::MatrixXd en = matrix_exp(nil, 3.0);
  CHECK(en(0, 0) == doctest::Approx(1.0));
  CHECK(en(0, 1) == doctest::Approx(3.0));

  Eigen::MatrixXd rot(2, 2);
  rot << 0.0, 1.0, -1.0, 0.0;
  const Eigen::MatrixXd er = matrix_exp(rot, 1.0);
  CHECK(er(0, 0) == doctest::Approx(std::cos(1.0)).epsilon(1e-10));
  CHECK(er(0, 1) == doctest::Approx(std::sin(1.0)).epsilon(1e-10));
}
