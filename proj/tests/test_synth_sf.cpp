#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "scogce/care.hpp"
#include "scogce/certify.hpp"
#include "scogce/game.hpp"
#include "scogce/json_io.hpp"
#include "scogce/linalg.hpp"
#include "scogce/synth_sf.hpp"

using namespace scogce;

namespace {

std::string fixture(const std::string& name) {
  const char* dir = std::getenv("SCOGCE_FIXTURES");
  REQUIRE(dir != nullptr);
  return std::string(dir) + "/" + name;
}

GameDefinition scalar_game() {
  GameDefinition g;
  g.n_players = 1;
  g.state_dim = 1;
  g.a = Eigen::MatrixXd::Constant(1, 1, 1.0);
  g.b = {Eigen::MatrixXd::Ones(1, 1)};
  g.c = {Eigen::MatrixXd::Ones(1, 1)};
  g.e = Eigen::MatrixXd::Constant(1, 1, 0.1);
  g.q_weight = {Eigen::MatrixXd::Ones(1, 1)};
  g.r_weight = {Eigen::MatrixXd::Ones(1, 1)};
  g.d_weight = {Eigen::MatrixXd::Ones(1, 1)};
  g.x0 = Eigen::VectorXd::Ones(1);
  return g;
}

}  // namespace

TEST_CASE("unstable scalar plant is stabilized with a guaranteed cost") {
  GameDefinition g = scalar_game();
  StrategyProfile prof;
  prof.gains = {Eigen::MatrixXd::Zero(1, 1)};
  SfResponse res = sf_guaranteed_cost_response(g, prof, 0, 50.0);
  REQUIRE(res.found);
  CHECK(g.a(0, 0) + g.b[0](0, 0) * res.gain(0, 0) < 0.0);
  CHECK(res.cost_bound < 50.0);
  StrategyProfile closed;
  closed.gains = {res.gain};
  auto exact = exact_worst_case_cost(g, closed, 0);
  REQUIRE(exact.has_value());
  CHECK(*exact <= res.cost_bound + 1e-9);
}

TEST_CASE("responses around the equilibrium of the three player game") {
  auto gf = load_game_file(fixture("example3.json"));
  ScfneResult scfne = solve_scfne(gf.game);
  REQUIRE(scfne.converged);

  SUBCASE("a generous budget is met") {
    SfResponse res =
        sf_guaranteed_cost_response(gf.game, scfne.profile, 1, 3.0);
    REQUIRE(res.found);
    CHECK(res.cost_bound < 3.0);
    CHECK(is_positive_definite(res.p, 0.0));
    CHECK(is_positive_definite(res.m, 0.0));
    StrategyProfile trial = scfne.profile;
    trial.gains[1] = res.gain;
    CHECK(is_stable(closed_loop_matrix(gf.game, trial)));
    auto exact = exact_worst_case_cost(gf.game, trial, 1);
    REQUIRE(exact.has_value());
    CHECK(*exact <= res.cost_bound + 1e-9);
  }

  SUBCASE("a budget below the achievable response cost fails") {
    // With the others at equilibrium, player 2's best response cannot
    // beat a tiny budget.
    SfResponse res =
        sf_guaranteed_cost_response(gf.game, scfne.profile, 1, 0.05);
    CHECK(!res.found);
  }
}

TEST_CASE("certified response bound is never below the exact best response") {
  auto gf = load_game_file(fixture("example3.json"));
  ScfneResult scfne = solve_scfne(gf.game);
  REQUIRE(scfne.converged);
  for (int i = 0; i < 3; ++i) {
    SfResponse res = sf_guaranteed_cost_response(gf.game, scfne.profile, i,
                                                 scfne.costs(i) + 0.5);
    REQUIRE(res.found);
    StrategyProfile trial = scfne.profile;
    trial.gains[i] = res.gain;
    auto exact = exact_worst_case_cost(gf.game, trial, i);
    REQUIRE(exact.has_value());
    CHECK(*exact <= res.cost_bound + 1e-9);
    CHECK(res.cost_bound < scfne.costs(i) + 0.5);
  }
}
