#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "scogce/care.hpp"
#include "scogce/game.hpp"
#include "scogce/json_io.hpp"
#include "scogce/linalg.hpp"

using namespace scogce;

namespace {

std::string fixture(const std::string& name) {
  const char* dir = std::getenv("SCOGCE_FIXTURES");
  REQUIRE(dir != nullptr);
  return std::string(dir) + "/" + name;
}

GameDefinition symmetric_two_player() {
  GameDefinition g;
  g.n_players = 2;
  g.state_dim = 1;
  g.a = Eigen::MatrixXd::Constant(1, 1, -0.5);
  g.b = {Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1)};
  g.c = {Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1)};
  g.e = Eigen::MatrixXd::Constant(1, 1, 0.2);
  g.q_weight = {Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1)};
  g.r_weight = {Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1)};
  g.d_weight = {Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1)};
  g.x0 = Eigen::VectorXd::Ones(1);
  return g;
}

}  // namespace

TEST_CASE("coupled Riccati equilibrium on the three player state feedback game") {
  auto gf = load_game_file(fixture("example3.json"));
  ScfneResult res = solve_scfne(gf.game);
  REQUIRE(res.converged);
  REQUIRE(res.costs.size() == 3);
  CHECK(std::abs(res.costs(0) - 0.0999) < 0.005);
  CHECK(std::abs(res.costs(1) - 2.3385) < 0.005);
  CHECK(std::abs(res.costs(2) - 1.9535) < 0.005);
  CHECK(std::abs(res.costs.sum() - 4.3918) < 0.01);
  REQUIRE(res.stability_abscissas.size() == 4);
  for (double a : res.stability_abscissas) CHECK(a < 0.0);
  for (double r : res.structural_residuals) CHECK(r < 1e-8);
  CHECK(verify_care_stabilizing(gf.game, res.p));
  for (int i = 0; i < 3; ++i)
    CHECK(care_residual(gf.game, i, res.p).norm() < 1e-7);
}

TEST_CASE("single player reduction matches the scalar closed form") {
  auto gf = load_game_file(fixture("scalar.json"));
  ScfneResult res = solve_scfne(gf.game);
  REQUIRE(res.converged);
  // 0.5 p^2 + 2 p - 1 = 0, stabilizing root p = sqrt(6) - 2.
  CHECK(res.costs(0) ==
        doctest::Approx(std::sqrt(6.0) - 2.0).epsilon(1e-10));
  CHECK(res.profile.gains[0](0, 0) ==
        doctest::Approx(-(std::sqrt(6.0) - 2.0)).epsilon(1e-8));
}

TEST_CASE("symmetric players receive identical solutions") {
  GameDefinition g = symmetric_two_player();
  ScfneResult res = solve_scfne(g);
  REQUIRE(res.converged);
  CHECK((res.p[0] - res.p[1]).norm() < 1e-10);
  CHECK(res.costs(0) == doctest::Approx(res.costs(1)).epsilon(1e-10));
}

TEST_CASE("identity drift network game admits no stabilizing solution") {
  auto gf = load_game_file(fixture("example1.json"));
  ScfneResult res = solve_scfne(gf.game);
  CHECK(!res.converged);
}

TEST_CASE("verify rejects a perturbed solution") {
  auto gf = load_game_file(fixture("example3.json"));
  ScfneResult res = solve_scfne(gf.game);
  REQUIRE(res.converged);
  auto p = res.p;
  p[1] += 0.05 * Eigen::MatrixXd::Identity(3, 3);
  CHECK(!verify_care_stabilizing(gf.game, p));
}
