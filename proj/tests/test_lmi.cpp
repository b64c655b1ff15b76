#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "scogce/linalg.hpp"
#include "scogce/lmi.hpp"

using namespace scogce;

TEST_CASE("matrix expressions evaluate affinely") {
  LmiProblem lmi;
  MatExpr p = lmi.symmetric(2, "P");
  MatExpr f = lmi.rectangular(1, 2, "F");
  Eigen::MatrixXd a(2, 2);
  a << 0.0, 1.0, -2.0, -3.0;
  MatExpr expr = (a.transpose() * p).sym() + MatExpr::blocks({{p}}) -
                 2.0 * (f.transpose() * f.constant());

  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(lmi.n_vars(), 0.3, 1.7);
  // Reconstruct P and F from the packing order (symmetric upper triangle
  // first, then row-major rectangle) via evaluate on the variables alone.
  const Eigen::MatrixXd pv = p.evaluate(y);
  CHECK((pv - pv.transpose()).norm() == 0.0);
  const Eigen::MatrixXd direct =
      a.transpose() * pv + pv * a + pv -
      2.0 * (f.evaluate(y).transpose() * Eigen::MatrixXd::Zero(1, 2));
  CHECK((expr.evaluate(y) - direct).norm() < 1e-13);
}

TEST_CASE("block assembly, trace and scalar products") {
  LmiProblem lmi;
  MatExpr p = lmi.symmetric(2, "P");
  MatExpr t = lmi.scalar("t");
  MatExpr block = MatExpr::blocks(
      {{p, MatExpr::zero(2, 1)},
       {MatExpr::zero(1, 2), t}});
  CHECK(block.rows() == 3);
  CHECK(block.cols() == 3);

  Eigen::VectorXd y = Eigen::VectorXd::Zero(lmi.n_vars());
  y(0) = 2.0;  // P(0,0)
  y(lmi.n_vars() - 1) = 5.0;  // t
  const Eigen::MatrixXd bv = block.evaluate(y);
  CHECK(bv(0, 0) == 2.0);
  CHECK(bv(2, 2) == 5.0);
  CHECK(block.trace().evaluate(y)(0, 0) == doctest::Approx(7.0));

  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
  CHECK((scalar_times(t, m).evaluate(y) - 5.0 * m).norm() < 1e-14);
}

TEST_CASE("Lyapunov feasibility on a stable matrix") {
  Eigen::MatrixXd a(2, 2);
  a << -1.0, 2.0, 0.0, -3.0;
  LmiProblem lmi;
  MatExpr p = lmi.symmetric(2, "P");
  lmi.require_psd(p - MatExpr(Eigen::MatrixXd::Identity(2, 2)));
  lmi.require_nsd((a.transpose() * p).sym() +
                  MatExpr(Eigen::MatrixXd::Identity(2, 2)));
  SdpResult sol = lmi.solve_feasibility(0.0);
  REQUIRE(sol.status == SdpStatus::Feasible);
  const Eigen::MatrixXd pv = LmiProblem::value(p, sol.y);
  CHECK(is_positive_definite(pv - Eigen::MatrixXd::Identity(2, 2), -1e-9));
  CHECK(min_symmetric_eigenvalue(
            -(a.transpose() * pv + pv * a +
              Eigen::MatrixXd::Identity(2, 2))) > -1e-9);
}

TEST_CASE("Lyapunov feasibility fails for an unstable matrix") {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.0, 0.0, -1.0;
  LmiProblem lmi;
  MatExpr p = lmi.symmetric(2, "P");
  lmi.require_psd(p - MatExpr(Eigen::MatrixXd::Identity(2, 2)));
  lmi.require_nsd((a.transpose() * p).sym() +
                  MatExpr(Eigen::MatrixXd::Identity(2, 2)));
  SdpResult sol = lmi.solve_feasibility(0.0);
  CHECK(sol.status == SdpStatus::Infeasible);
}

TEST_CASE("contradictory sign constraints are infeasible") {
  LmiProblem lmi;
  MatExpr x = lmi.scalar("x");
  const MatExpr eps = MatExpr(Eigen::MatrixXd::Constant(1, 1, 1e-3));
  lmi.require_psd(x - eps);
  lmi.require_nsd(x + eps);
  CHECK(lmi.solve_feasibility(0.0).status == SdpStatus::Infeasible);
}

TEST_CASE("minimization reaches the analytic optimum") {
  // min t subject to [[t, 1], [1, t]] >= 0 has optimum t = 1.
  LmiProblem lmi;
  MatExpr t = lmi.scalar("t");
  MatExpr one = MatExpr(Eigen::MatrixXd::Ones(1, 1));
  lmi.require_psd(MatExpr::blocks({{t, one}, {one, t}}));
  SdpResult sol = lmi.minimize(t);
  REQUIRE(sol.status == SdpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("minimization recovers a Lyapunov trace bound") {
  // min tr(P) s.t. A'P + PA <= -Q, P >= 0 attains the Lyapunov solution
  // for stable A (the constraint is tight at the optimum).
  Eigen::MatrixXd a(2, 2);
  a << -1.0, 0.5, 0.0, -2.0;
  const Eigen::MatrixXd q = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd exact = solve_lyapunov(a, q);

  LmiProblem lmi;
  MatExpr p = lmi.symmetric(2, "P");
  lmi.require_psd(p);
  lmi.require_nsd((a.transpose() * p).sym() + MatExpr(q));
  SdpResult sol = lmi.minimize(p.trace());
  REQUIRE(sol.status == SdpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(exact.trace()).epsilon(1e-5));
}

TEST_CASE("reported feasible points satisfy the blocks") {
  std::mt19937 rng(5);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd a(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = dist(rng);
    a -= (spectral_abscissa(a) + 1.0) * Eigen::MatrixXd::Identity(3, 3);
    LmiProblem lmi;
    MatExpr p = lmi.symmetric(3, "P");
    lmi.require_psd(p - MatExpr(0.1 * Eigen::MatrixXd::Identity(3, 3)));
    lmi.require_nsd((a.transpose() * p).sym() +
                    MatExpr(0.1 * Eigen::MatrixXd::Identity(3, 3)));
    SdpResult sol = lmi.solve_feasibility(0.0);
    REQUIRE(sol.status == SdpStatus::Feasible);
    CHECK(sol.feasibility_margin > -1e-12);
  }
}
